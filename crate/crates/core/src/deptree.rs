//! Dependency trees over cleaned words.
//!
//! Nodes are addressed by their 1-based position in the cleaned word order;
//! head 0 marks the root. [`TreeView`] layers a visibility mask over a shared
//! tree so claim derivation can remove or replace subtrees without copying.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("node ids must be 1..={expected} in order, found {found} at position {position}")]
    IndexGap { position: usize, expected: usize, found: usize },
    #[error("node {node} has head {head} outside 0..={len}")]
    HeadOutOfRange { node: usize, head: usize, len: usize },
    #[error("node {0} is its own head")]
    SelfLoop(usize),
    #[error("tree has no root (no node with head 0)")]
    NoRoot,
    #[error("tree has several roots: {0:?}")]
    MultipleRoots(Vec<usize>),
    #[error("head links from node {0} form a cycle")]
    Cycle(usize),
    #[error("node index {0} is out of range")]
    InvalidIndex(usize),
    #[error("node {ancestor} does not strictly dominate node {descendant}")]
    NotDominating { ancestor: usize, descendant: usize },
    #[error("node {0} is masked")]
    Masked(usize),
    #[error("every node of the view is masked")]
    EmptyView,
}

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("sentence {sentence} (ending line {line}): {source}")]
    Structure {
        sentence: usize,
        line: usize,
        #[source]
        source: TreeError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepNode {
    pub index: usize,
    pub form: String,
    pub head: usize,
    pub deprel: String,
}

impl DepNode {
    pub fn new(index: usize, form: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        DepNode { index, form: form.into(), head, deprel: deprel.into() }
    }
}

/// An immutable, validated dependency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    nodes: Vec<DepNode>,
    root: usize,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    // Pre-order numbering: the subtree of `i` is `order[enter[i]..exit[i]]`.
    order: Vec<usize>,
    enter: Vec<usize>,
    exit: Vec<usize>,
}

impl DepTree {
    pub fn new(nodes: Vec<DepNode>) -> Result<Self, TreeError> {
        let n = nodes.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        for (pos, node) in nodes.iter().enumerate() {
            if node.index != pos + 1 {
                return Err(TreeError::IndexGap { position: pos + 1, expected: n, found: node.index });
            }
            if node.head > n {
                return Err(TreeError::HeadOutOfRange { node: node.index, head: node.head, len: n });
            }
            if node.head == node.index {
                return Err(TreeError::SelfLoop(node.index));
            }
        }
        let roots: Vec<usize> = nodes.iter().filter(|d| d.head == 0).map(|d| d.index).collect();
        let root = match roots.as_slice() {
            [] => return Err(TreeError::NoRoot),
            [r] => *r,
            _ => return Err(TreeError::MultipleRoots(roots)),
        };

        let mut children = vec![Vec::new(); n + 1];
        for node in &nodes {
            if node.head != 0 {
                children[node.head].push(node.index);
            }
        }

        let mut depth = vec![usize::MAX; n + 1];
        let mut enter = vec![0; n + 1];
        let mut exit = vec![0; n + 1];
        let mut order = Vec::with_capacity(n);
        // Iterative DFS; each child list is already ascending.
        let mut stack = vec![(root, 0usize, false)];
        while let Some((v, d, done)) = stack.pop() {
            if done {
                exit[v] = order.len();
                continue;
            }
            depth[v] = d;
            enter[v] = order.len();
            order.push(v);
            stack.push((v, d, true));
            for &c in children[v].iter().rev() {
                stack.push((c, d + 1, false));
            }
        }
        if order.len() != n {
            let stray = (1..=n).find(|&i| depth[i] == usize::MAX).unwrap();
            return Err(TreeError::Cycle(stray));
        }
        Ok(DepTree { nodes, root, children, depth, order, enter, exit })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[DepNode] {
        &self.nodes
    }

    fn check(&self, i: usize) -> Result<(), TreeError> {
        if i == 0 || i > self.nodes.len() {
            Err(TreeError::InvalidIndex(i))
        } else {
            Ok(())
        }
    }

    pub fn node(&self, i: usize) -> Result<&DepNode, TreeError> {
        self.check(i)?;
        Ok(&self.nodes[i - 1])
    }

    pub fn form(&self, i: usize) -> &str {
        &self.nodes[i - 1].form
    }

    pub fn deprel(&self, i: usize) -> &str {
        &self.nodes[i - 1].deprel
    }

    pub fn head(&self, i: usize) -> usize {
        self.nodes[i - 1].head
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.form.as_str())
    }

    /// True when `a` dominates `d`; every node dominates itself.
    pub fn dominates(&self, a: usize, d: usize) -> bool {
        self.enter[a] <= self.enter[d] && self.exit[d] <= self.exit[a]
    }

    /// Nodes of the subtree rooted at `i`, in pre-order.
    pub fn subtree(&self, i: usize) -> &[usize] {
        &self.order[self.enter[i]..self.exit[i]]
    }

    /// Lowest common ancestor, with every node counted as its own ancestor.
    pub fn lca(&self, a: usize, b: usize) -> Result<usize, TreeError> {
        self.check(a)?;
        self.check(b)?;
        let (mut a, mut b) = (a, b);
        while self.depth[a] > self.depth[b] {
            a = self.head(a);
        }
        while self.depth[b] > self.depth[a] {
            b = self.head(b);
        }
        while a != b {
            a = self.head(a);
            b = self.head(b);
        }
        Ok(a)
    }

    /// The child of `ancestor` whose subtree contains `descendant`.
    pub fn branch_toward(&self, ancestor: usize, descendant: usize) -> Result<usize, TreeError> {
        self.check(ancestor)?;
        self.check(descendant)?;
        if ancestor == descendant || !self.dominates(ancestor, descendant) {
            return Err(TreeError::NotDominating { ancestor, descendant });
        }
        let mut v = descendant;
        while self.head(v) != ancestor {
            v = self.head(v);
        }
        Ok(v)
    }

    /// Space-joined forms in index order.
    pub fn text(&self) -> String {
        self.forms().collect::<Vec<_>>().join(" ")
    }
}

/// One CoNLL-U sentence block with the metadata this crate uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluSentence {
    pub sent_id: Option<String>,
    pub text: Option<String>,
    pub tree: DepTree,
}

fn parse_token_line(line: &str, lineno: usize) -> Result<Option<DepNode>, ConlluError> {
    let malformed = |message: String| ConlluError::Malformed { line: lineno, message };
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(malformed(format!("expected 10 tab-separated columns, found {}", cols.len())));
    }
    let id = cols[0];
    // Multiword tokens (1-2) and empty nodes (1.1) do not take part in the tree.
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    let index: usize = id
        .parse()
        .map_err(|_| malformed(format!("invalid token id {id:?}")))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| malformed(format!("invalid head {:?}", cols[6])))?;
    if cols[1].is_empty() {
        return Err(malformed("empty FORM column".into()));
    }
    Ok(Some(DepNode::new(index, cols[1], head, cols[7])))
}

/// Reads every sentence block of a CoNLL-U document.
pub fn read_conllu(document: &str) -> Result<Vec<ConlluSentence>, ConlluError> {
    let mut out = Vec::new();
    let mut nodes = Vec::new();
    let mut sent_id = None;
    let mut text = None;
    let mut in_block = false;

    let mut flush = |nodes: &mut Vec<DepNode>,
                     sent_id: &mut Option<String>,
                     text: &mut Option<String>,
                     line: usize|
     -> Result<(), ConlluError> {
        let sentence = out.len() + 1;
        let tree = DepTree::new(std::mem::take(nodes))
            .map_err(|source| ConlluError::Structure { sentence, line, source })?;
        out.push(ConlluSentence { sent_id: sent_id.take(), text: text.take(), tree });
        Ok(())
    };

    let mut last_line = 0;
    for (i, raw) in document.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if in_block {
                flush(&mut nodes, &mut sent_id, &mut text, lineno)?;
                in_block = false;
            }
            continue;
        }
        in_block = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => sent_id = Some(value.trim().to_string()),
                    "text" => text = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if let Some(node) = parse_token_line(line, lineno)? {
            nodes.push(node);
        }
    }
    if in_block {
        flush(&mut nodes, &mut sent_id, &mut text, last_line)?;
    }
    Ok(out)
}

/// Reads the trees of a CoNLL-U document, discarding metadata.
pub fn from_conllu(document: &str) -> Result<Vec<DepTree>, ConlluError> {
    Ok(read_conllu(document)?.into_iter().map(|s| s.tree).collect())
}

/// Serializes sentences as CoNLL-U. Columns this crate does not model are `_`.
pub fn to_conllu(sentences: &[ConlluSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if let Some(id) = &s.sent_id {
            let _ = writeln!(out, "# sent_id = {id}");
        }
        if let Some(text) = &s.text {
            let _ = writeln!(out, "# text = {text}");
        }
        for n in s.tree.nodes() {
            let _ = writeln!(
                out,
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_",
                n.index, n.form, n.head, n.deprel
            );
        }
        out.push('\n');
    }
    out
}

/// A maskable view of a [`DepTree`].
///
/// The structure seen through a view is the tree restricted to its visible
/// nodes: the parent of a visible node is its nearest visible proper
/// ancestor. Masking always removes whole subtrees, and replacing a subtree
/// with one of its descendants' subtrees reattaches that descendant to the
/// replaced node's parent.
#[derive(Debug, Clone)]
pub struct TreeView<'t> {
    tree: &'t DepTree,
    visible: Vec<bool>,
    root_override: Option<usize>,
}

impl<'t> TreeView<'t> {
    pub fn new(tree: &'t DepTree) -> Self {
        let mut visible = vec![true; tree.len() + 1];
        visible[0] = false;
        TreeView { tree, visible, root_override: None }
    }

    pub fn tree(&self) -> &'t DepTree {
        self.tree
    }

    pub fn root_override(&self) -> Option<usize> {
        self.root_override
    }

    pub fn is_visible(&self, i: usize) -> bool {
        self.visible.get(i).copied().unwrap_or(false)
    }

    pub fn visible_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.tree.len()).filter(|&i| self.visible[i])
    }

    pub fn visible_count(&self) -> usize {
        self.visible_nodes().count()
    }

    fn check_visible(&self, i: usize) -> Result<(), TreeError> {
        self.tree.check(i)?;
        if self.visible[i] {
            Ok(())
        } else {
            Err(TreeError::Masked(i))
        }
    }

    /// Nearest visible proper ancestor.
    pub fn parent(&self, i: usize) -> Option<usize> {
        let mut v = self.tree.head(i);
        while v != 0 && !self.visible[v] {
            v = self.tree.head(v);
        }
        (v != 0).then_some(v)
    }

    /// The visible node without a visible ancestor.
    pub fn root(&self) -> Option<usize> {
        if let Some(r) = self.root_override {
            return Some(r);
        }
        self.visible_nodes().find(|&i| self.parent(i).is_none())
    }

    /// Children of `i` in the view structure, ascending.
    pub fn children(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .tree
            .subtree(i)
            .iter()
            .copied()
            .filter(|&c| c != i && self.visible[c] && self.parent(c) == Some(i))
            .collect();
        out.sort_unstable();
        out
    }

    fn view_depth(&self, i: usize) -> usize {
        let mut d = 0;
        let mut v = i;
        while let Some(p) = self.parent(v) {
            d += 1;
            v = p;
        }
        d
    }

    /// Lowest common ancestor of two visible nodes in the view structure.
    pub fn lca(&self, a: usize, b: usize) -> Result<usize, TreeError> {
        self.check_visible(a)?;
        self.check_visible(b)?;
        let (mut a, mut b) = (a, b);
        let (mut da, mut db) = (self.view_depth(a), self.view_depth(b));
        while da > db {
            a = self.parent(a).unwrap();
            da -= 1;
        }
        while db > da {
            b = self.parent(b).unwrap();
            db -= 1;
        }
        while a != b {
            a = self.parent(a).unwrap();
            b = self.parent(b).unwrap();
        }
        Ok(a)
    }

    /// The view child of `ancestor` on the path to `descendant`.
    pub fn branch_toward(&self, ancestor: usize, descendant: usize) -> Result<usize, TreeError> {
        self.check_visible(ancestor)?;
        self.check_visible(descendant)?;
        let not_dominating = TreeError::NotDominating { ancestor, descendant };
        if ancestor == descendant {
            return Err(not_dominating);
        }
        let mut v = descendant;
        loop {
            match self.parent(v) {
                Some(p) if p == ancestor => return Ok(v),
                Some(p) => v = p,
                None => return Err(not_dominating),
            }
        }
    }

    /// Masks `subroot` and all of its descendants. Returns `false` (and logs
    /// a warning) when `subroot` was already masked.
    pub fn mask_subtree(&mut self, subroot: usize) -> Result<bool, TreeError> {
        self.tree.check(subroot)?;
        if !self.visible[subroot] {
            log::warn!("mask_subtree: node {subroot} is already masked");
            return Ok(false);
        }
        for &v in self.tree.subtree(subroot) {
            self.visible[v] = false;
        }
        if self.root_override == Some(subroot) {
            self.root_override = None;
        }
        Ok(true)
    }

    /// Replaces the visible region under `region_root` with the subtree of
    /// `subroot`: nodes of `region_root`'s subtree outside `subroot`'s
    /// subtree become masked, everything else keeps its visibility.
    pub fn restrict_to_subtree(&mut self, region_root: usize, subroot: usize) -> Result<(), TreeError> {
        self.check_visible(subroot)?;
        self.tree.check(region_root)?;
        if !self.tree.dominates(region_root, subroot) {
            return Err(TreeError::NotDominating { ancestor: region_root, descendant: subroot });
        }
        let region_was_root = self.root() == Some(region_root);
        for &v in self.tree.subtree(region_root) {
            if !self.tree.dominates(subroot, v) {
                self.visible[v] = false;
            }
        }
        if region_was_root {
            self.root_override = Some(subroot);
        }
        Ok(())
    }

    /// Visible nodes as `(index, form)` in sentence order.
    pub fn words(&self) -> Vec<(usize, &'t str)> {
        let tree = self.tree;
        self.visible_nodes().map(|i| (i, tree.form(i))).collect()
    }

    pub fn to_text(&self) -> Result<String, TreeError> {
        let words = self.words();
        if words.is_empty() {
            return Err(TreeError::EmptyView);
        }
        Ok(words.into_iter().map(|(_, f)| f).collect::<Vec<_>>().join(" "))
    }
}
