//! Weighted root-indexed digraphs and the trees sampled from them.
//!
//! Node `0` is the root. Nodes `1..=n` are the non-root nodes. The weight
//! `w(i, j)` belongs to the edge `i -> j`, so column `j` of the weight matrix
//! holds every candidate head (parent) of node `j`. A zero weight means the
//! edge is absent.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the root node.
pub const ROOT: usize = 0;

/// Which tree set a sampler or oracle works over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKind {
    /// Any arborescence rooted at the root node.
    Spanning,
    /// Arborescences with exactly one edge leaving the root.
    Dependency,
}

impl TreeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TreeKind::Spanning => "spanning",
            TreeKind::Dependency => "dependency",
        }
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Immutable dense weight matrix over `n + 1` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    // row-major, (n + 1) x (n + 1)
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    weights: Vec<Vec<f64>>,
}

impl Graph {
    /// Builds a graph from `n + 1` rows of `n + 1` weights.
    ///
    /// Structural invariants (finite, non-negative, no edges into the root,
    /// no self-loops) are enforced here. Isolated nodes are allowed so that
    /// degenerate graphs can still be represented; [`Graph::validate`] rejects
    /// them.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "need at least 2 rows (root plus one node), got {}",
                rows.len()
            )));
        }
        let size = rows.len();
        let mut weights = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            weights.extend(row);
        }
        Self::from_flat(size - 1, weights)
    }

    /// Builds a graph from a row-major `(n + 1) x (n + 1)` buffer.
    pub fn from_flat(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ShapeMismatch("graph needs at least one non-root node".into()));
        }
        let size = n + 1;
        if weights.len() != size * size {
            return Err(Error::ShapeMismatch(format!(
                "expected {} weights for n = {n}, got {}",
                size * size,
                weights.len()
            )));
        }
        let g = Graph { n, weights };
        g.check_structure()?;
        Ok(g)
    }

    /// Builds a graph from a closure over `(i, j)` pairs with `i != j`, `j >= 1`.
    /// Edges into the root and self-loops are left at zero.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let size = n + 1;
        let mut weights = vec![0.0; size * size];
        for i in 0..size {
            for j in 1..size {
                if i != j {
                    weights[i * size + j] = f(i, j);
                }
            }
        }
        Self::from_flat(n, weights)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.weights.len() != file.n + 1 {
            return Err(Error::ShapeMismatch(format!(
                "\"n\" is {} but \"weights\" has {} rows",
                file.n,
                file.weights.len()
            )));
        }
        Self::new(file.weights)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile { n: self.n, weights: self.rows() };
        serde_json::to_string(&file).expect("graph serializes")
    }

    fn check_structure(&self) -> Result<()> {
        let size = self.n + 1;
        for i in 0..size {
            for j in 0..size {
                let w = self.weight(i, j);
                if !w.is_finite() {
                    return Err(Error::NonFinite { from: i, to: j });
                }
                if w < 0.0 {
                    return Err(Error::NegativeWeight { from: i, to: j });
                }
                if j == ROOT && w != 0.0 {
                    return Err(Error::EdgeIntoRoot(i));
                }
                if i == j && w != 0.0 {
                    return Err(Error::SelfLoop(i));
                }
            }
        }
        Ok(())
    }

    /// Full validation: structural invariants plus a positive incoming weight
    /// for every non-root node.
    pub fn validate(&self) -> Result<()> {
        self.check_structure()?;
        for j in 1..=self.n {
            if self.in_weight_sum(j) <= 0.0 {
                return Err(Error::IsolatedNode(j));
            }
        }
        Ok(())
    }

    /// Number of non-root nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from * (self.n + 1) + to]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.n + 1).map(<[f64]>::to_vec).collect()
    }

    pub fn in_weight_sum(&self, j: usize) -> f64 {
        (0..=self.n).map(|i| self.weight(i, j)).sum()
    }

    /// Multiplies every weight by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_flat(self.n, self.weights.iter().map(|w| w * c).collect())
    }

    /// Rescales each non-root column to sum to one. Tree weights change by a
    /// constant factor, so the normalized tree distribution is unchanged.
    pub fn normalize_stochastic(&self) -> Result<Self> {
        let size = self.n + 1;
        let mut weights = self.weights.clone();
        for j in 1..size {
            let total = self.in_weight_sum(j);
            if total <= 0.0 {
                return Err(Error::IsolatedNode(j));
            }
            for i in 0..size {
                weights[i * size + j] /= total;
            }
        }
        Self::from_flat(self.n, weights)
    }

    /// Product of the tree's edge weights.
    pub fn tree_weight(&self, tree: &Tree) -> Result<f64> {
        self.check_parents(tree)?;
        Ok(tree.edges().map(|(i, j)| self.weight(i, j)).product())
    }

    /// Log of [`Graph::tree_weight`], summed in log space to avoid underflow.
    pub fn tree_log_weight(&self, tree: &Tree) -> Result<f64> {
        self.check_parents(tree)?;
        Ok(tree.edges().map(|(i, j)| self.weight(i, j).ln()).sum())
    }

    fn check_parents(&self, tree: &Tree) -> Result<()> {
        if tree.n() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "tree has {} nodes, graph has {}",
                tree.n(),
                self.n
            )));
        }
        for (parent, node) in tree.edges() {
            if parent > self.n || parent == node {
                return Err(Error::ParentOutOfRange { node, parent });
            }
        }
        Ok(())
    }

    /// Whether `tree` is a positive-weight member of the tree set `kind`.
    pub fn is_tree(&self, tree: &Tree, kind: TreeKind) -> bool {
        if self.check_parents(tree).is_err() {
            return false;
        }
        if tree.edges().any(|(i, j)| self.weight(i, j) <= 0.0) {
            return false;
        }
        if kind == TreeKind::Dependency && tree.root_children().count() != 1 {
            return false;
        }
        tree.is_arborescence()
    }
}

/// Parent-array encoding of a rooted tree: `parents()[j - 1]` is the head of
/// node `j`, and `0` stands for the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree {
    parents: Vec<usize>,
}

impl Tree {
    pub fn new(parents: Vec<usize>) -> Self {
        Tree { parents }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// Head of non-root node `j` (1-based).
    pub fn parent(&self, j: usize) -> usize {
        self.parents[j - 1]
    }

    /// `(head, dependent)` pairs in dependent order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents.iter().enumerate().map(|(k, &p)| (p, k + 1))
    }

    pub fn contains_edge(&self, head: usize, dependent: usize) -> bool {
        self.parents.get(dependent.wrapping_sub(1)) == Some(&head)
    }

    pub fn root_children(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges().filter(|&(p, _)| p == ROOT).map(|(_, j)| j)
    }

    /// True iff following parents from every node reaches the root.
    /// Assumes parents are in range.
    pub fn is_arborescence(&self) -> bool {
        let n = self.n();
        // 0 = unknown, 1 = on current path, 2 = reaches root
        let mut state = vec![0u8; n + 1];
        state[ROOT] = 2;
        let mut path = Vec::with_capacity(n);
        for start in 1..=n {
            let mut u = start;
            while state[u] == 0 {
                state[u] = 1;
                path.push(u);
                let p = self.parents[u - 1];
                if p > n {
                    return false;
                }
                u = p;
            }
            if state[u] == 1 {
                return false;
            }
            for v in path.drain(..) {
                state[v] = 2;
            }
        }
        true
    }

    pub fn key(&self) -> TreeKey {
        canonical_key(self)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, p) in self.parents.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Totally ordered identity of a tree; lexicographic on the parent array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeKey(Box<[usize]>);

impl TreeKey {
    pub fn parents(&self) -> &[usize] {
        &self.0
    }

    pub fn to_tree(&self) -> Tree {
        Tree::new(self.0.to_vec())
    }
}

impl fmt::Display for TreeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_tree().fmt(f)
    }
}

pub fn canonical_key(tree: &Tree) -> TreeKey {
    TreeKey(tree.parents.clone().into_boxed_slice())
}
