//! Evaluation of positional fine-grained citations in long-form answers.
//!
//! A sentence such as `Cups can be made of glass[1] or plastic[2][3].` carries
//! citation groups in the middle of the text as well as at the end. This crate
//! splits such a sentence into one atomic claim per citation group by editing
//! its dependency tree, then scores each group against the cited passages:
//!
//! * [`citext`] turns raw answers into annotated sentences (words, citation
//!   groups and the cleaned word sequence handed to a dependency parser).
//! * [`deptree`] holds dependency trees, CoNLL-U ingestion, lowest common
//!   ancestors and the maskable [`deptree::TreeView`].
//! * [`decompose`] matches groups to tree nodes and derives atomic claims.
//! * [`entail`] defines the entailment oracle: premise rendering, a fixture
//!   table, a remote HTTP judge and a persistent verdict cache.
//! * [`metrics`] computes citation recall, precision, F1 and the coefficient
//!   of variation of citation positions (CVCP).
//! * [`pipeline`] wires the pieces together for a whole response.
//! * [`sidecar`] reads and writes the parsed-JSON interchange format.

pub mod citext;
pub mod decompose;
pub mod deptree;
pub mod entail;
pub mod metrics;
pub mod pipeline;
pub mod sidecar;

pub use citext::{AnnotatedSentence, CitationGroup, CleaningConfig, Passage, Response, Unit};
pub use decompose::{decompose_sentence, AtomicClaim, DecomposeOptions};
pub use deptree::{DepNode, DepTree, TreeView};
pub use entail::{EntailmentOracle, EntailmentQuery, Verdict};
