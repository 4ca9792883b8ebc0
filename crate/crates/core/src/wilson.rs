//! Loop-erased random-walk samplers.
//!
//! The walk from node `u` steps to a head `v` chosen with probability
//! `w(v -> u) / sum_v' w(v' -> u)`, i.e. along the stochastic normalization of
//! the graph. Walks start from every node not yet in the tree, in ascending
//! order, and stop on hitting the tree. Loops are erased by overwriting the
//! next-pointer of a revisited node, so only the last exit from each node
//! survives.
//!
//! Three variants:
//! * [`WilsonSampler::spanning`] draws spanning trees exactly.
//! * [`WilsonSampler::root_constrained`] picks the root child by raw root-edge
//!   weight and walks on the remaining graph rooted at that child. This always
//!   returns a dependency tree, but the distribution over dependency trees is
//!   biased: the root edge should be drawn by its marginal, not its weight.
//! * [`WilsonSampler::rejection`] repeats the spanning walk until the tree has
//!   a single root child, which is exact over dependency trees.

use std::collections::VecDeque;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::graph::{Graph, Tree, ROOT};
use crate::rng::RandomSource;

/// Rejections allowed before [`WilsonSampler::rejection`] gives up.
pub const DEFAULT_RETRY_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkStats {
    /// Number of random-walk steps (edge draws).
    pub steps_taken: u64,
    /// Complete trees thrown away by the rejection variant.
    pub rejections: u64,
}

/// Per-graph tables for the walk: prefix sums of every column over all heads,
/// and over non-root heads only.
#[derive(Debug, Clone)]
pub struct WilsonSampler<'g> {
    graph: &'g Graph,
    // (n + 1) entries per column, heads 0..=n
    all_heads: Vec<f64>,
    // n entries per column, heads 1..=n
    nonroot_heads: Vec<f64>,
    root_edges: Vec<f64>,
    retry_cap: usize,
    // reachability from the root, and from each node with the root removed
    from_root: Result<()>,
    from_child: Vec<OnceLock<Result<()>>>,
}

impl<'g> WilsonSampler<'g> {
    pub fn new(graph: &'g Graph) -> Result<Self> {
        graph.validate()?;
        let n = graph.n();
        let mut all_heads = Vec::with_capacity(n * (n + 1));
        let mut nonroot_heads = Vec::with_capacity(n * n);
        for u in 1..=n {
            let mut acc = 0.0;
            for v in 0..=n {
                acc += graph.weight(v, u);
                all_heads.push(acc);
            }
            let mut acc = 0.0;
            for v in 1..=n {
                acc += graph.weight(v, u);
                nonroot_heads.push(acc);
            }
        }
        let mut root_edges = Vec::with_capacity(n);
        let mut acc = 0.0;
        for j in 1..=n {
            acc += graph.weight(ROOT, j);
            root_edges.push(acc);
        }
        let mut sampler = WilsonSampler {
            graph,
            all_heads,
            nonroot_heads,
            root_edges,
            retry_cap: DEFAULT_RETRY_CAP,
            from_root: Ok(()),
            from_child: (0..n).map(|_| OnceLock::new()).collect(),
        };
        sampler.from_root = sampler.check_reachable(ROOT);
        Ok(sampler)
    }

    pub fn with_retry_cap(mut self, cap: usize) -> Self {
        self.retry_cap = cap;
        self
    }

    /// Nodes reachable from `start` along positive edges that avoid the root.
    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let n = self.graph.n();
        let mut seen = vec![false; n + 1];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for (u, s) in seen.iter_mut().enumerate().skip(1) {
                if !*s && self.graph.weight(v, u) > 0.0 {
                    *s = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Every walk must be able to reach the tree, i.e. every node must be
    /// reachable from `root` (walks run against edge direction).
    fn check_reachable(&self, root: usize) -> Result<()> {
        let seen = self.reachable_from(root);
        match (1..=self.graph.n()).find(|&u| !seen[u]) {
            Some(u) => Err(Error::Unreachable(u)),
            None => Ok(()),
        }
    }

    fn walk(
        &self,
        rng: &mut RandomSource,
        next: &mut [usize],
        in_tree: &mut [bool],
        include_root: bool,
        stats: &mut WalkStats,
    ) {
        let n = self.graph.n();
        for start in 1..=n {
            let mut u = start;
            while !in_tree[u] {
                let v = if include_root {
                    let col = &self.all_heads[(u - 1) * (n + 1)..u * (n + 1)];
                    rng.from_cumulative(col).expect("reachability checked")
                } else {
                    let col = &self.nonroot_heads[(u - 1) * n..u * n];
                    rng.from_cumulative(col).expect("reachability checked") + 1
                };
                stats.steps_taken += 1;
                next[u] = v;
                u = v;
            }
            let mut u = start;
            while !in_tree[u] {
                in_tree[u] = true;
                u = next[u];
            }
        }
    }

    /// Exact draw from the spanning-tree distribution.
    pub fn spanning(&self, rng: &mut RandomSource) -> Result<(Tree, WalkStats)> {
        self.from_root.clone()?;
        let mut stats = WalkStats::default();
        let tree = self.spanning_unchecked(rng, &mut stats);
        Ok((tree, stats))
    }

    fn spanning_unchecked(&self, rng: &mut RandomSource, stats: &mut WalkStats) -> Tree {
        let n = self.graph.n();
        let mut next = vec![ROOT; n + 1];
        let mut in_tree = vec![false; n + 1];
        in_tree[ROOT] = true;
        self.walk(rng, &mut next, &mut in_tree, true, stats);
        Tree::new(next[1..].to_vec())
    }

    /// Root child drawn by raw root-edge weight, then a walk on the graph
    /// rooted at that child with the original root removed. Always a
    /// dependency tree; not distributed proportionally to tree weight.
    pub fn root_constrained(&self, rng: &mut RandomSource) -> Result<(Tree, WalkStats)> {
        let n = self.graph.n();
        let child = rng.from_cumulative(&self.root_edges).ok_or(Error::NoRootEdge)? + 1;
        self.from_child[child - 1].get_or_init(|| self.check_reachable(child)).clone()?;
        let mut stats = WalkStats::default();
        let mut next = vec![ROOT; n + 1];
        let mut in_tree = vec![false; n + 1];
        in_tree[ROOT] = true;
        in_tree[child] = true;
        self.walk(rng, &mut next, &mut in_tree, false, &mut stats);
        next[child] = ROOT;
        Ok((Tree::new(next[1..].to_vec()), stats))
    }

    /// Spanning walks until one has exactly one root child.
    pub fn rejection(&self, rng: &mut RandomSource) -> Result<(Tree, WalkStats)> {
        self.from_root.clone()?;
        let mut stats = WalkStats::default();
        loop {
            let tree = self.spanning_unchecked(rng, &mut stats);
            if tree.root_children().count() == 1 {
                return Ok((tree, stats));
            }
            stats.rejections += 1;
            if stats.rejections as usize >= self.retry_cap {
                return Err(Error::RetryCapExceeded(self.retry_cap));
            }
        }
    }
}

/// Exact spanning-tree draw.
pub fn wilson(g: &Graph, rng: &mut RandomSource) -> Result<(Tree, WalkStats)> {
    WilsonSampler::new(g)?.spanning(rng)
}

/// Dependency-tree draw with the root child chosen by root-edge weight (biased).
pub fn wilson_rc(g: &Graph, rng: &mut RandomSource) -> Result<(Tree, WalkStats)> {
    WilsonSampler::new(g)?.root_constrained(rng)
}

/// Exact dependency-tree draw by rejecting multi-root spanning trees.
pub fn wilson_reject(g: &Graph, rng: &mut RandomSource) -> Result<(Tree, WalkStats)> {
    WilsonSampler::new(g)?.rejection(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::graph::TreeKind;
    use crate::oracle;

    #[test]
    fn forced_root_star() {
        let g = Graph::from_fn(3, |i, _| if i == ROOT { 1.0 } else { 0.0 }).unwrap();
        for seed in 0..20 {
            let (t, stats) = wilson(&g, &mut RandomSource::new(seed)).unwrap();
            assert_eq!(t.parents(), [0, 0, 0]);
            assert_eq!(stats.steps_taken, 3);
        }
    }

    #[test]
    fn unreachable_nodes_are_reported() {
        // 1 and 2 only feed each other; nothing connects them to the root
        let g = Graph::new(vec![
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(wilson(&g, &mut RandomSource::new(0)).unwrap_err(), Error::Unreachable(1));
        assert!(matches!(
            wilson_reject(&g, &mut RandomSource::new(0)),
            Err(Error::Unreachable(_))
        ));
    }

    #[test]
    fn no_root_edge() {
        let g = Graph::new(vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(wilson_rc(&g, &mut RandomSource::new(0)).unwrap_err(), Error::NoRootEdge);
    }

    #[test]
    fn forced_root_edge() {
        let g = Graph::from_fn(3, |i, j| if i == ROOT && j != 2 { 0.0 } else { 1.0 }).unwrap();
        for seed in 0..50 {
            let mut rng = RandomSource::new(seed);
            let (t, _) = wilson_rc(&g, &mut rng).unwrap();
            assert_eq!(oracle::root_child(&t), Some(2));
            let (t, stats) = wilson_reject(&g, &mut rng).unwrap();
            assert_eq!(oracle::root_child(&t), Some(2));
            assert_eq!(stats.rejections, 0);
        }
    }

    #[test]
    fn retry_cap() {
        // spanning trees exist, dependency trees do not
        let g = Graph::new(vec![
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let sampler = WilsonSampler::new(&g).unwrap().with_retry_cap(25);
        assert_eq!(
            sampler.rejection(&mut RandomSource::new(1)).unwrap_err(),
            Error::RetryCapExceeded(25)
        );
    }

    #[test]
    fn outputs_are_valid_and_deterministic() {
        let g = Graph::from_fn(6, |i, j| 0.1 + ((i * 5 + j * 3) % 7) as f64).unwrap();
        let sampler = WilsonSampler::new(&g).unwrap();
        for seed in 0..200 {
            let a = sampler.spanning(&mut RandomSource::new(seed)).unwrap();
            assert!(g.is_tree(&a.0, TreeKind::Spanning));
            assert_eq!(a, sampler.spanning(&mut RandomSource::new(seed)).unwrap());
            let b = sampler.root_constrained(&mut RandomSource::new(seed)).unwrap();
            assert!(g.is_tree(&b.0, TreeKind::Dependency));
            let c = sampler.rejection(&mut RandomSource::new(seed)).unwrap();
            assert!(g.is_tree(&c.0, TreeKind::Dependency));
        }
    }

    #[test]
    fn g3_root_child_frequencies() {
        let g = g3();
        let sampler = WilsonSampler::new(&g).unwrap();
        let mut rng = RandomSource::new(2024);
        let draws = 20_000;
        let (mut rc, mut rej) = (0, 0);
        for _ in 0..draws {
            if oracle::root_child(&sampler.root_constrained(&mut rng).unwrap().0) == Some(1) {
                rc += 1;
            }
            if oracle::root_child(&sampler.rejection(&mut rng).unwrap().0) == Some(1) {
                rej += 1;
            }
        }
        let rc = rc as f64 / draws as f64;
        let rej = rej as f64 / draws as f64;
        assert!((rc - 0.5).abs() < 0.015, "{rc}");
        assert!((rej - 2.0 / 3.0).abs() < 0.015, "{rej}");
    }
}
