//! Ancestral tree sampling from Laplacian marginals.
//!
//! The partition function is the determinant of a Laplacian built from the
//! weights. For dependency trees the first row (node 1) holds the root-edge
//! weights and the diagonal sums only non-root heads; for spanning trees the
//! diagonal sums every head, root included. Edge marginals are read off
//! `B = L^{-T}`. Sampling draws one incoming edge per node, in node order,
//! and conditions on it by replacing that node's Laplacian column, which is a
//! rank-one change: `B` follows by Sherman-Morrison and `Z` by the matrix
//! determinant lemma.
//!
//! Matrix index `k` corresponds to node `k + 1`.

use crate::error::{Error, Result};
use crate::graph::{Graph, Tree, TreeKind, ROOT};
use crate::linalg::{
    det_lemma_factor, invert_with_det, sherman_morrison_update_with, Matrix, Tolerances,
};
use crate::rng::RandomSource;

/// Marginals below this are roundoff; above it (in magnitude) a negative
/// value means `B` has drifted.
const NEGATIVE_MARGINAL_TOL: f64 = 1e-9;

/// Marginals at or below this are treated as exact zeros. Stops roundoff in
/// `B` from ever selecting an edge with no surviving trees.
pub(crate) const ZERO_MARGINAL: f64 = 1e-12;

/// Laplacian `l`, its transposed inverse `b`, and the partition value `z`,
/// all for the graph conditioned on the edges fixed so far.
#[derive(Debug, Clone)]
pub struct LaplacianState {
    kind: TreeKind,
    l: Matrix,
    b: Matrix,
    z: f64,
    updates_since_refresh: usize,
    refreshes: usize,
    fixed: Vec<Option<usize>>,
    tol: Tolerances,
}

impl LaplacianState {
    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn laplacian(&self) -> &Matrix {
        &self.l
    }

    /// `L^{-T}` of the conditioned graph.
    pub fn inverse_transpose(&self) -> &Matrix {
        &self.b
    }

    /// Partition value of the conditioned graph.
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn n(&self) -> usize {
        self.fixed.len()
    }

    pub fn updates_since_refresh(&self) -> usize {
        self.updates_since_refresh
    }

    /// How many times `b` and `z` were recomputed from scratch.
    pub fn refreshes(&self) -> usize {
        self.refreshes
    }

    /// Head that node `j` was conditioned on, if any.
    pub fn fixed_parent(&self, j: usize) -> Option<usize> {
        self.fixed[j - 1]
    }

    /// Weight of `i -> j` in the conditioned graph: once `j` is fixed, only
    /// its chosen head survives.
    #[inline]
    fn effective_weight(&self, g: &Graph, i: usize, j: usize) -> f64 {
        match self.fixed[j - 1] {
            Some(p) if p != i => 0.0,
            _ => g.weight(i, j),
        }
    }

    /// Unclamped marginals `p(i -> j)` for every head `i`; index `0` is the root.
    pub(crate) fn raw_marginals(&self, g: &Graph, j: usize, m: &mut Vec<f64>) {
        let n = self.n();
        let c = j - 1;
        let b = &self.b;
        m.clear();
        m.resize(n + 1, 0.0);
        match self.kind {
            TreeKind::Dependency => {
                m[ROOT] = self.effective_weight(g, ROOT, j) * b[(0, c)];
                let diag = if j != 1 { b[(c, c)] } else { 0.0 };
                for i in 1..=n {
                    if i == j {
                        continue;
                    }
                    let w = self.effective_weight(g, i, j);
                    if w != 0.0 {
                        let off = if i != 1 { b[(i - 1, c)] } else { 0.0 };
                        m[i] = w * (diag - off);
                    }
                }
            }
            TreeKind::Spanning => {
                let diag = b[(c, c)];
                m[ROOT] = self.effective_weight(g, ROOT, j) * diag;
                for i in 1..=n {
                    if i == j {
                        continue;
                    }
                    let w = self.effective_weight(g, i, j);
                    if w != 0.0 {
                        m[i] = w * (diag - b[(i - 1, c)]);
                    }
                }
            }
        }
    }

    /// Marginal probability of each incoming edge of `j` given everything
    /// conditioned so far. Index `0` is the root. Roundoff negatives and
    /// values below `1e-12` are set to zero.
    pub fn edge_marginals(&self, g: &Graph, j: usize) -> Result<Vec<f64>> {
        let mut m = Vec::with_capacity(self.n() + 1);
        self.edge_marginals_into(g, j, &mut m)?;
        Ok(m)
    }

    pub fn edge_marginals_into(&self, g: &Graph, j: usize, m: &mut Vec<f64>) -> Result<()> {
        self.raw_marginals(g, j, m);
        for (head, v) in m.iter_mut().enumerate() {
            if *v < -NEGATIVE_MARGINAL_TOL {
                return Err(Error::NegativeMarginal { head, node: j, value: *v });
            }
            if *v <= ZERO_MARGINAL {
                *v = 0.0;
            }
        }
        if m.iter().sum::<f64>() <= ZERO_MARGINAL {
            return Err(Error::DegenerateColumn(j));
        }
        Ok(())
    }

    /// Column `j` of the Laplacian of the graph restricted to trees that use
    /// `i -> j`.
    fn conditioned_column(&self, g: &Graph, i: usize, j: usize) -> Vec<f64> {
        let n = self.n();
        let w = g.weight(i, j);
        let mut col = vec![0.0; n];
        match (self.kind, i == ROOT) {
            (TreeKind::Dependency, true) => col[0] = w,
            (TreeKind::Dependency, false) => {
                if j != 1 {
                    col[j - 1] += w;
                }
                if i != 1 {
                    col[i - 1] -= w;
                }
            }
            (TreeKind::Spanning, true) => col[j - 1] = w,
            (TreeKind::Spanning, false) => {
                col[j - 1] = w;
                col[i - 1] = -w;
            }
        }
        col
    }

    /// Restricts the state to trees containing `i -> j`.
    ///
    /// Only column `j` of the Laplacian changes. `b` is updated in O(n^2) and
    /// `z` in O(n). After `n` incremental updates, or when the update's
    /// denominator is tiny, both are recomputed from the Laplacian instead.
    pub fn condition(&mut self, g: &Graph, i: usize, j: usize) -> Result<()> {
        if g.weight(i, j) <= 0.0 {
            return Err(Error::SingularUpdate(0.0));
        }
        let c = j - 1;
        let column = self.conditioned_column(g, i, j);
        let u: Vec<f64> = column.iter().enumerate().map(|(k, v)| v - self.l[(k, c)]).collect();
        for (k, v) in column.into_iter().enumerate() {
            self.l[(k, c)] = v;
        }
        self.fixed[c] = Some(i);

        if u.iter().all(|&x| x == 0.0) {
            return Ok(());
        }
        let factor = det_lemma_factor(&self.b, &u, c);
        if factor.abs() < self.tol.refresh_denom {
            return self.refresh();
        }
        sherman_morrison_update_with(&mut self.b, &u, c, &self.tol)?;
        self.z *= factor;
        self.updates_since_refresh += 1;
        if self.updates_since_refresh >= self.n() {
            self.refresh()?;
        }
        Ok(())
    }

    /// Recomputes `b` and `z` from the current Laplacian.
    pub fn refresh(&mut self) -> Result<()> {
        let (b, z) = invert_with_det(&self.l, &self.tol).map_err(|e| match e {
            Error::Singular => Error::SingularUpdate(0.0),
            other => other,
        })?;
        self.b = b;
        self.z = z;
        self.updates_since_refresh = 0;
        self.refreshes += 1;
        Ok(())
    }
}

/// Laplacian matrix of `g` for `kind`, without inverting it.
pub fn laplacian(g: &Graph, kind: TreeKind) -> Matrix {
    let n = g.n();
    let mut l = Matrix::zeros(n, n);
    for j in 1..=n {
        let c = j - 1;
        for i in 1..=n {
            if i != j {
                let w = g.weight(i, j);
                l[(i - 1, c)] = -w;
                l[(c, c)] += w;
            }
        }
        match kind {
            TreeKind::Dependency => l[(0, c)] = g.weight(ROOT, j),
            TreeKind::Spanning => l[(c, c)] += g.weight(ROOT, j),
        }
    }
    l
}

/// Builds the Laplacian for `kind`, inverts it, and takes its determinant.
///
/// Fails with [`Error::Singular`] when no positive-weight tree of `kind`
/// exists.
pub fn build_laplacian(g: &Graph, kind: TreeKind) -> Result<LaplacianState> {
    build_laplacian_with(g, kind, Tolerances::default())
}

pub fn build_laplacian_with(g: &Graph, kind: TreeKind, tol: Tolerances) -> Result<LaplacianState> {
    g.validate()?;
    let l = laplacian(g, kind);
    let (b, z) = invert_with_det(&l, &tol)?;
    if z <= 0.0 {
        return Err(Error::Singular);
    }
    Ok(LaplacianState {
        kind,
        l,
        b,
        z,
        updates_since_refresh: 0,
        refreshes: 0,
        fixed: vec![None; g.n()],
        tol,
    })
}

/// Partition value via the matrix-tree theorem; `0` when no tree exists.
pub fn partition(g: &Graph, kind: TreeKind) -> Result<f64> {
    match build_laplacian(g, kind) {
        Ok(state) => Ok(state.z),
        Err(Error::Singular) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// `(n + 1) x (n + 1)` marginal matrix from a fresh Laplacian.
pub fn marginals(g: &Graph, kind: TreeKind) -> Result<Matrix> {
    let state = build_laplacian(g, kind)?;
    let n = g.n();
    let mut out = Matrix::zeros(n + 1, n + 1);
    let mut m = Vec::with_capacity(n + 1);
    for j in 1..=n {
        state.edge_marginals_into(g, j, &mut m)?;
        for (i, v) in m.iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    Ok(out)
}

/// Samples exact trees of one kind from a fixed graph. The inverted
/// Laplacian is computed once and copied for every draw.
#[derive(Debug, Clone)]
pub struct ColbournSampler<'g> {
    graph: &'g Graph,
    pristine: LaplacianState,
}

impl<'g> ColbournSampler<'g> {
    pub fn new(graph: &'g Graph, kind: TreeKind) -> Result<Self> {
        Ok(ColbournSampler { graph, pristine: build_laplacian(graph, kind)? })
    }

    pub fn kind(&self) -> TreeKind {
        self.pristine.kind
    }

    pub fn z(&self) -> f64 {
        self.pristine.z
    }

    pub fn sample(&self, rng: &mut RandomSource) -> Result<Tree> {
        Ok(self.sample_traced(rng)?.0)
    }

    /// Draws a tree and also returns the conditional probability of each
    /// sampled edge; their product is the tree's probability.
    pub fn sample_traced(&self, rng: &mut RandomSource) -> Result<(Tree, Vec<f64>)> {
        let g = self.graph;
        let n = g.n();
        let mut state = self.pristine.clone();
        let mut parents = vec![ROOT; n];
        let mut probs = Vec::with_capacity(n);
        let mut m = Vec::with_capacity(n + 1);
        for j in 1..=n {
            state.edge_marginals_into(g, j, &mut m)?;
            let i = rng.categorical(&m).ok_or(Error::DegenerateColumn(j))?;
            probs.push(m[i] / m.iter().sum::<f64>());
            parents[j - 1] = i;
            // the last column's update is never read
            if j < n {
                state.condition(g, i, j)?;
            }
        }
        Ok((Tree::new(parents), probs))
    }
}

/// Draws one tree of `kind` with probability proportional to its weight.
pub fn colbourn(g: &Graph, kind: TreeKind, rng: &mut RandomSource) -> Result<Tree> {
    ColbournSampler::new(g, kind)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::linalg::{determinant, inverse_transpose};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
        Graph::from_fn(n, |_, _| rng.random_range(0.0..1.0)).unwrap()
    }

    #[test]
    fn laplacians_of_fixtures() {
        let dep = build_laplacian(&g2(), TreeKind::Dependency).unwrap();
        assert_eq!(dep.laplacian(), &Matrix::from_rows(&[vec![1.0, 1.0], vec![-1.0, 1.0]]));
        assert!((dep.z() - 2.0).abs() < 1e-15);
        let span = build_laplacian(&g2(), TreeKind::Spanning).unwrap();
        assert_eq!(span.laplacian(), &Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]));
        assert!((span.z() - 3.0).abs() < 1e-14);
        let one = build_laplacian(&g1(), TreeKind::Dependency).unwrap();
        assert_eq!(one.laplacian(), &Matrix::from_rows(&[vec![2.0]]));
        assert_eq!(one.z(), 2.0);
    }

    #[test]
    fn zero_z_is_singular() {
        let g = Graph::new(vec![
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(build_laplacian(&g, TreeKind::Dependency).unwrap_err(), Error::Singular);
        assert_eq!(partition(&g, TreeKind::Dependency).unwrap(), 0.0);
        assert!((partition(&g, TreeKind::Spanning).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fresh_marginals_on_fixtures() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        let m = build_laplacian(&g2(), TreeKind::Dependency).unwrap().edge_marginals(&g2(), 1).unwrap();
        assert!(close(m[0], 0.5) && close(m[2], 0.5));
        let m = build_laplacian(&g2(), TreeKind::Spanning).unwrap().edge_marginals(&g2(), 1).unwrap();
        assert!(close(m[0], 2.0 / 3.0) && close(m[2], 1.0 / 3.0));
        let m = build_laplacian(&g3(), TreeKind::Dependency).unwrap().edge_marginals(&g3(), 1).unwrap();
        assert!(close(m[0], 2.0 / 3.0) && close(m[3], 1.0 / 3.0) && m[2] == 0.0);
    }

    #[test]
    fn conditioning_on_fixtures() {
        let g = g2();
        let mut s = build_laplacian(&g, TreeKind::Dependency).unwrap();
        s.condition(&g, ROOT, 1).unwrap();
        assert!((s.z() - 1.0).abs() < 1e-12);
        let m = s.edge_marginals(&g, 2).unwrap();
        assert!((m[1] - 1.0).abs() < 1e-12 && m[0] == 0.0);
        let m = s.edge_marginals(&g, 1).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-12 && m[2] == 0.0);

        let g = g3();
        let mut s = build_laplacian(&g, TreeKind::Dependency).unwrap();
        s.condition(&g, ROOT, 2).unwrap();
        assert!((s.z() - 0.5).abs() < 1e-12);
        let m = s.edge_marginals(&g, 1).unwrap();
        assert!((m[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_condition_is_noop() {
        let g = g3();
        let mut s = build_laplacian(&g, TreeKind::Dependency).unwrap();
        s.condition(&g, 1, 3).unwrap();
        let (b, z) = (s.inverse_transpose().clone(), s.z());
        s.condition(&g, 1, 3).unwrap();
        assert_eq!(s.z(), z);
        assert!(s.inverse_transpose().max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn conditioning_touches_only_one_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_graph(&mut rng, 4);
        for kind in [TreeKind::Spanning, TreeKind::Dependency] {
            let mut s = build_laplacian(&g, kind).unwrap();
            let before = s.laplacian().clone();
            s.condition(&g, 2, 3).unwrap();
            for r in 0..4 {
                for c in [0, 1, 3] {
                    assert_eq!(before[(r, c)].to_bits(), s.laplacian()[(r, c)].to_bits());
                }
            }
        }
    }

    #[test]
    fn z_and_marginals_match_oracle_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=5 {
            for _ in 0..20 {
                let g = random_graph(&mut rng, n);
                for kind in [TreeKind::Spanning, TreeKind::Dependency] {
                    let exact = oracle::exact_distribution(&g, kind).unwrap();
                    let z = partition(&g, kind).unwrap();
                    assert!(((z - exact.z) / exact.z).abs() < 1e-9);
                    let diff = marginals(&g, kind).unwrap().max_abs_diff(&exact.marginals());
                    assert!(diff < 1e-9, "n={n} {kind}: {diff}");
                }
            }
        }
    }

    #[test]
    fn conditional_marginals_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 2..=4 {
            let g = random_graph(&mut rng, n);
            for kind in [TreeKind::Spanning, TreeKind::Dependency] {
                let exact = oracle::exact_distribution(&g, kind).unwrap();
                for j in 1..=n {
                    for i in (0..=n).filter(|&i| i != j) {
                        let Ok(cond) = exact.filtered(|t| t.contains_edge(i, j)) else {
                            continue;
                        };
                        let mut s = build_laplacian(&g, kind).unwrap();
                        s.condition(&g, i, j).unwrap();
                        assert!(((s.z() - cond.z) / cond.z).abs() < 1e-8);
                        let fresh = inverse_transpose(s.laplacian()).unwrap();
                        assert!(s.inverse_transpose().max_abs_diff(&fresh) < 1e-8);
                        let z_fresh = determinant(s.laplacian()).unwrap();
                        assert!(((s.z() - z_fresh) / z_fresh).abs() < 1e-8);
                        let expected = cond.marginals();
                        for jj in 1..=n {
                            let m = s.edge_marginals(&g, jj).unwrap();
                            for (ii, v) in m.iter().enumerate() {
                                assert!((v - expected[(ii, jj)]).abs() < 1e-8);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_tree_graph_always_yields_it() {
        let mut rng = RandomSource::new(0);
        for _ in 0..10 {
            assert_eq!(colbourn(&g1(), TreeKind::Dependency, &mut rng).unwrap().parents(), [0]);
        }
    }

    #[test]
    fn step_probabilities_telescope() {
        let mut grng = ChaCha8Rng::seed_from_u64(99);
        let g = random_graph(&mut grng, 5);
        let mut rng = RandomSource::new(1);
        for kind in [TreeKind::Spanning, TreeKind::Dependency] {
            let sampler = ColbournSampler::new(&g, kind).unwrap();
            for _ in 0..50 {
                let (t, probs) = sampler.sample_traced(&mut rng).unwrap();
                assert!(g.is_tree(&t, kind));
                let p: f64 = probs.iter().product();
                let expected = g.tree_weight(&t).unwrap() / sampler.z();
                assert!((p - expected).abs() < 1e-8 * expected.max(1e-3));
            }
        }
    }
}
