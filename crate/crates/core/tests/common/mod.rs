//! Test-only oracles, independent of the library's view machinery.
#![allow(dead_code)]

use std::collections::HashSet;

use aliice::deptree::{DepNode, DepTree};
use rand::seq::SliceRandom;
use rand::Rng;

const RELS: &[&str] = &["nsubj", "dobj", "conj", "cc", "prep", "advcl", "punct", "amod", "pobj"];

/// Uniform-ish random tree: a random permutation where every node after the
/// first picks an earlier node as its head.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> DepTree {
    let mut perm: Vec<usize> = (1..=n).collect();
    perm.shuffle(rng);
    let mut heads = vec![0; n + 1];
    for k in 1..n {
        heads[perm[k]] = perm[rng.gen_range(0..k)];
    }
    let nodes = (1..=n)
        .map(|i| {
            let rel = RELS[rng.gen_range(0..RELS.len())];
            let form = if rel == "punct" { ",".to_string() } else { format!("w{i}") };
            DepNode::new(i, form, heads[i], if heads[i] == 0 { "ROOT" } else { rel })
        })
        .collect();
    DepTree::new(nodes).unwrap()
}

pub fn root_path(tree: &DepTree, mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while tree.head(v) != 0 {
        v = tree.head(v);
        path.push(v);
    }
    path
}

/// Deepest element of the intersection of both root paths.
pub fn brute_lca(tree: &DepTree, a: usize, b: usize) -> usize {
    let pa: HashSet<usize> = root_path(tree, a).into_iter().collect();
    root_path(tree, b).into_iter().find(|v| pa.contains(v)).unwrap()
}

pub fn brute_descendants(tree: &DepTree, v: usize) -> HashSet<usize> {
    (1..=tree.len()).filter(|&d| root_path(tree, d).contains(&v)).collect()
}

/// Rule-table simulation on an explicitly rewired copy of the tree:
/// removed nodes are deleted and a replacing branch is re-hung under the
/// replaced node's parent.
pub struct Sim<'a> {
    tree: &'a DepTree,
    parent: Vec<Option<usize>>,
    alive: Vec<bool>,
    root: usize,
}

impl<'a> Sim<'a> {
    pub fn new(tree: &'a DepTree) -> Self {
        let n = tree.len();
        let parent = (0..=n)
            .map(|i| if i == 0 || tree.head(i) == 0 { None } else { Some(tree.head(i)) })
            .collect();
        let mut alive = vec![true; n + 1];
        alive[0] = false;
        Sim { tree, parent, alive, root: tree.root() }
    }

    fn ancestors(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while let Some(p) = self.parent[v] {
            out.push(p);
            v = p;
        }
        out
    }

    fn lca(&self, a: usize, b: usize) -> usize {
        let pa: HashSet<usize> = self.ancestors(a).into_iter().collect();
        self.ancestors(b).into_iter().find(|v| pa.contains(v)).unwrap()
    }

    fn branch(&self, anc: usize, mut d: usize) -> usize {
        while self.parent[d] != Some(anc) {
            d = self.parent[d].unwrap();
        }
        d
    }

    fn subtree(&self, v: usize) -> Vec<usize> {
        (1..=self.tree.len())
            .filter(|&x| self.alive[x] && self.ancestors(x).contains(&v))
            .collect()
    }

    fn remove(&mut self, v: usize) {
        for x in self.subtree(v) {
            self.alive[x] = false;
        }
    }

    fn replace(&mut self, m: usize, t: usize) {
        let keep: HashSet<usize> = self.subtree(t).into_iter().collect();
        for x in self.subtree(m) {
            if !keep.contains(&x) {
                self.alive[x] = false;
            }
        }
        self.parent[t] = self.parent[m];
        if m == self.root {
            self.root = t;
        }
    }

    pub fn claim(mut self, nodes: &[usize], target: usize, strict: bool) -> String {
        let mut others: Vec<usize> = nodes.iter().copied().filter(|&j| j != target).collect();
        others.sort();
        for j in others {
            if !self.alive[j] {
                continue;
            }
            let m = self.lca(target, j);
            if m == target {
                let tj = self.branch(m, j);
                self.remove(tj);
                continue;
            }
            let ti = self.branch(m, target);
            if m == j {
                self.replace(m, ti);
                continue;
            }
            let tj = self.branch(m, j);
            let (lo, hi) = (ti.min(tj), ti.max(tj));
            let tc = (lo + 1..hi).find(|&c| {
                self.alive[c] && self.parent[c] == Some(m) && self.tree.deprel(c) == "cc"
            });
            let at_root = m == self.root;
            let prep_like = matches!(self.tree.deprel(ti), "prep" | "advcl");
            let root = self.root;
            match (tc, ti < tj) {
                (Some(tc), true) => {
                    if at_root && prep_like {
                        self.replace(root, ti);
                    } else {
                        self.remove(tj);
                        self.remove(tc);
                    }
                }
                (Some(tc), false) => {
                    if at_root && prep_like {
                        self.remove(tj);
                        self.remove(tc);
                    } else {
                        self.replace(root, ti);
                    }
                }
                (None, before) => {
                    if strict {
                        if at_root {
                            self.replace(root, ti);
                        } else {
                            self.remove(tj);
                        }
                    } else if before {
                        self.remove(tj);
                    } else {
                        self.replace(m, ti);
                    }
                }
            }
        }
        let n = self.tree.len();
        let punct = |f: &str| !f.chars().any(char::is_alphanumeric);
        let mut words: Vec<usize> = (1..=n).filter(|&i| self.alive[i]).collect();
        while let Some(&i) = words.last() {
            if i < n && i != target && punct(self.tree.form(i)) {
                words.pop();
            } else {
                break;
            }
        }
        while let Some(&i) = words.first() {
            if i > 1 && i != target && punct(self.tree.form(i)) {
                words.remove(0);
            } else {
                break;
            }
        }
        words.iter().map(|&i| self.tree.form(i)).collect::<Vec<_>>().join(" ")
    }
}
