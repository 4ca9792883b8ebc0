//! Brute-force ground truth for small graphs.
//!
//! Every parent vector is enumerated (restricted to positive-weight heads),
//! cyclic ones are dropped, and exact weights, partition values, marginals
//! and without-replacement conditionals are computed from the survivors.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, Tree, TreeKey, TreeKind, ROOT};
use crate::linalg::Matrix;

/// Default cap on the number of non-root nodes the oracle will enumerate.
pub const DEFAULT_ENUM_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactEntry {
    pub tree: Tree,
    pub weight: f64,
    pub probability: f64,
}

/// Exact tree distribution over a graph's support.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub kind: TreeKind,
    pub entries: BTreeMap<TreeKey, ExactEntry>,
    pub z: f64,
}

impl ExactDistribution {
    fn from_weighted(kind: TreeKind, weighted: Vec<(Tree, f64)>) -> Result<Self> {
        let z: f64 = weighted.iter().map(|(_, w)| w).sum();
        if weighted.is_empty() || z <= 0.0 {
            return Err(Error::EmptySupport);
        }
        let entries = weighted
            .into_iter()
            .map(|(tree, weight)| {
                (tree.key(), ExactEntry { tree, weight, probability: weight / z })
            })
            .collect();
        Ok(ExactDistribution { kind, entries, z })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probability(&self, tree: &Tree) -> f64 {
        self.entries.get(&tree.key()).map_or(0.0, |e| e.probability)
    }

    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        self.entries.values().map(|e| &e.tree)
    }

    /// Restricts the support to trees satisfying `keep` and renormalizes.
    pub fn filtered(&self, mut keep: impl FnMut(&Tree) -> bool) -> Result<Self> {
        let weighted = self
            .entries
            .values()
            .filter(|e| keep(&e.tree))
            .map(|e| (e.tree.clone(), e.weight))
            .collect();
        Self::from_weighted(self.kind, weighted)
    }

    /// `(n + 1) x (n + 1)` matrix of edge marginals `p(i -> j)`.
    pub fn marginals(&self) -> Matrix {
        let n = self.entries.values().next().map_or(0, |e| e.tree.n());
        let mut m = Matrix::zeros(n + 1, n + 1);
        for e in self.entries.values() {
            for (i, j) in e.tree.edges() {
                m[(i, j)] += e.probability;
            }
        }
        m
    }
}

/// All positive-weight trees of `kind`, ordered by canonical key.
pub fn enumerate_trees(g: &Graph, kind: TreeKind) -> Result<Vec<Tree>> {
    enumerate_trees_capped(g, kind, DEFAULT_ENUM_CAP)
}

pub fn enumerate_trees_capped(g: &Graph, kind: TreeKind, cap: usize) -> Result<Vec<Tree>> {
    let n = g.n();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let candidates: Vec<Vec<usize>> = (1..=n)
        .map(|j| (0..=n).filter(|&i| i != j && g.weight(i, j) > 0.0).collect())
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }
    // odometer over parent choices, node 1 most significant
    let mut digits = vec![0usize; n];
    let mut parents: Vec<usize> = candidates.iter().map(|c| c[0]).collect();
    let mut out = Vec::new();
    loop {
        let tree = Tree::new(parents.clone());
        let root_ok = kind == TreeKind::Spanning || tree.root_children().count() == 1;
        if root_ok && tree.is_arborescence() {
            out.push(tree);
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                out.sort_by_key(Tree::key);
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < candidates[pos].len() {
                parents[pos] = candidates[pos][digits[pos]];
                break;
            }
            digits[pos] = 0;
            parents[pos] = candidates[pos][0];
        }
    }
}

pub fn exact_distribution(g: &Graph, kind: TreeKind) -> Result<ExactDistribution> {
    exact_distribution_capped(g, kind, DEFAULT_ENUM_CAP)
}

pub fn exact_distribution_capped(
    g: &Graph,
    kind: TreeKind,
    cap: usize,
) -> Result<ExactDistribution> {
    let weighted = enumerate_trees_capped(g, kind, cap)?
        .into_iter()
        .map(|t| {
            let w = g.tree_weight(&t)?;
            Ok((t, w))
        })
        .collect::<Result<Vec<_>>>()?;
    ExactDistribution::from_weighted(kind, weighted)
}

/// Exact edge marginals; entry `(i, j)` is `p(i -> j)`.
pub fn exact_marginals(g: &Graph, kind: TreeKind) -> Result<Matrix> {
    Ok(exact_distribution(g, kind)?.marginals())
}

/// Exact distribution over trees not yet in `drawn`, renormalized by
/// `Z_D = Z - sum of drawn weights`.
pub fn exact_swor_conditional(
    g: &Graph,
    kind: TreeKind,
    drawn: &[Tree],
) -> Result<ExactDistribution> {
    let full = exact_distribution(g, kind)?;
    let seen: BTreeSet<TreeKey> = drawn.iter().map(Tree::key).collect();
    let z_d = full.z - seen.iter().filter_map(|k| full.entries.get(k)).map(|e| e.weight).sum::<f64>();
    if z_d <= 1e-12 * full.z {
        return Err(Error::SupportExhausted(seen.len()));
    }
    full.filtered(|t| !seen.contains(&t.key())).map_err(|_| Error::SupportExhausted(seen.len()))
}

/// Marginals restricted to trees containing `head -> dependent`.
pub fn exact_conditional_marginals(
    g: &Graph,
    kind: TreeKind,
    edges: &[(usize, usize)],
) -> Result<Matrix> {
    Ok(exact_distribution(g, kind)?
        .filtered(|t| edges.iter().all(|&(i, j)| t.contains_edge(i, j)))?
        .marginals())
}

/// The root's only child, or `None` unless exactly one edge leaves the root.
pub fn root_child(tree: &Tree) -> Option<usize> {
    let mut it = tree.edges().filter(|&(p, _)| p == ROOT).map(|(_, j)| j);
    let first = it.next()?;
    it.next().is_none().then_some(first)
}
