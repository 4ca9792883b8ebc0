//! Sampling trees without replacement.
//!
//! Each draw is an ancestral draw whose edge marginals are reweighted to
//! exclude trees already returned:
//!
//! `p(i -> j | D) = (Z * p(i -> j) - sum of w(t) over drawn t using i -> j) / Z_D`
//!
//! where `Z_D` is `Z` minus the weight of every drawn tree still consistent
//! with the edges chosen so far. Conditioning keeps `Z` current through the
//! determinant lemma and narrows the set of consistent drawn trees.

use std::collections::BTreeSet;

use crate::colbourn::{build_laplacian, LaplacianState, ZERO_MARGINAL};
use crate::error::{Error, Result};
use crate::graph::{Graph, Tree, TreeKey, TreeKind, ROOT};
use crate::linalg::determinant;
use crate::rng::RandomSource;

/// Drawn mass below this fraction of the total is treated as exhaustion.
const EXHAUSTED_REL: f64 = 1e-12;

/// One tree from [`swor`], with its probability given the trees before it.
#[derive(Debug, Clone, PartialEq)]
pub struct SworDraw {
    pub tree: Tree,
    pub weight: f64,
    pub conditional_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SworOutcome {
    pub draws: Vec<SworDraw>,
    /// Set when the support ran out before `k` trees were drawn.
    pub exhausted: bool,
}

impl SworOutcome {
    /// The draws, or [`Error::SupportExhausted`] with the number returned.
    pub fn into_result(self) -> Result<Vec<SworDraw>> {
        if self.exhausted {
            Err(Error::SupportExhausted(self.draws.len()))
        } else {
            Ok(self.draws)
        }
    }
}

/// State of a without-replacement run over one graph.
#[derive(Debug, Clone)]
pub struct SworState {
    pristine: LaplacianState,
    lap: LaplacianState,
    drawn: Vec<(Tree, f64)>,
    keys: BTreeSet<TreeKey>,
    z_total: f64,
    z_d: f64,
    // indices into `drawn` of trees consistent with the current draw's edges
    active: Vec<usize>,
}

impl SworState {
    pub fn new(g: &Graph, kind: TreeKind) -> Result<Self> {
        let pristine = build_laplacian(g, kind)?;
        let z_total = pristine.z();
        Ok(SworState {
            lap: pristine.clone(),
            pristine,
            drawn: Vec::new(),
            keys: BTreeSet::new(),
            z_total,
            z_d: z_total,
            active: Vec::new(),
        })
    }

    pub fn kind(&self) -> TreeKind {
        self.pristine.kind()
    }

    pub fn laplacian_state(&self) -> &LaplacianState {
        &self.lap
    }

    pub fn drawn(&self) -> &[(Tree, f64)] {
        &self.drawn
    }

    pub fn z_total(&self) -> f64 {
        self.z_total
    }

    /// Remaining mass under the current conditioning.
    pub fn z_d(&self) -> f64 {
        self.z_d
    }

    /// Drawn trees still consistent with the current draw.
    pub fn active(&self) -> impl Iterator<Item = &(Tree, f64)> {
        self.active.iter().map(|&k| &self.drawn[k])
    }

    /// Whether no unseen tree is left.
    pub fn is_exhausted(&self) -> bool {
        self.z_total - self.drawn_mass() <= EXHAUSTED_REL * self.z_total
    }

    fn drawn_mass(&self) -> f64 {
        self.drawn.iter().map(|(_, w)| w).sum()
    }

    /// Restores the unconditioned Laplacian and makes every drawn tree active.
    /// `z_d` is rebuilt from the cached tree weights rather than carried over.
    pub fn begin_draw(&mut self) {
        self.lap = self.pristine.clone();
        self.active = (0..self.drawn.len()).collect();
        self.z_d = self.z_total - self.drawn_mass();
    }

    /// Adds a finished tree to the drawn set.
    pub fn record(&mut self, tree: Tree, weight: f64) -> Result<()> {
        if !self.keys.insert(tree.key()) {
            return Err(Error::InvalidArgument(format!("tree {tree} was already drawn")));
        }
        self.drawn.push((tree, weight));
        Ok(())
    }

    /// Unnormalized reweighted marginals `Z p(i -> j) - sum_{D_ij} w(t)` for
    /// every head of `j`; dividing by `z_d` gives probabilities.
    fn numerators(&self, g: &Graph, j: usize, m: &mut Vec<f64>) {
        self.lap.raw_marginals(g, j, m);
        let z = self.lap.z();
        for v in m.iter_mut() {
            *v *= z;
        }
        for (tree, w) in self.active() {
            m[tree.parent(j)] -= w;
        }
        // roundoff relative to the scale of the subtraction
        let floor = ZERO_MARGINAL * z.max(self.z_total);
        for v in m.iter_mut() {
            if *v <= floor {
                *v = 0.0;
            }
        }
    }

    /// Probabilities of each incoming edge of `j` given the drawn set and the
    /// edges conditioned on in this draw.
    pub fn edge_marginals(&self, g: &Graph, j: usize) -> Result<Vec<f64>> {
        if self.z_d <= EXHAUSTED_REL * self.z_total {
            return Err(Error::SupportExhausted(self.drawn.len()));
        }
        let mut m = Vec::with_capacity(g.n() + 1);
        self.numerators(g, j, &mut m);
        if m.iter().sum::<f64>() <= EXHAUSTED_REL * self.z_total {
            return Err(Error::SupportExhausted(self.drawn.len()));
        }
        for v in m.iter_mut() {
            *v /= self.z_d;
        }
        Ok(m)
    }

    /// Conditions on `i -> j`: updates the Laplacian state, drops drawn trees
    /// that do not use the edge, and recomputes `z_d`.
    pub fn condition(&mut self, g: &Graph, i: usize, j: usize) -> Result<()> {
        self.lap.condition(g, i, j)?;
        let drawn = &self.drawn;
        self.active.retain(|&k| drawn[k].0.parent(j) == i);
        self.z_d = self.lap.z() - self.active().map(|(_, w)| w).sum::<f64>();
        Ok(())
    }

    /// `z_d` recomputed with a fresh determinant of the conditioned Laplacian.
    pub fn z_d_from_scratch(&self) -> Result<f64> {
        let z = determinant(self.lap.laplacian())?;
        Ok(z - self.active().map(|(_, w)| w).sum::<f64>())
    }

    /// Draws one unseen tree and records it.
    pub fn draw(&mut self, g: &Graph, rng: &mut RandomSource) -> Result<SworDraw> {
        self.draw_inspect(g, rng, |_| Ok(()))
    }

    /// Like [`SworState::draw`], calling `inspect` after every conditioning step.
    pub fn draw_inspect(
        &mut self,
        g: &Graph,
        rng: &mut RandomSource,
        mut inspect: impl FnMut(&SworState) -> Result<()>,
    ) -> Result<SworDraw> {
        if self.is_exhausted() {
            return Err(Error::SupportExhausted(self.drawn.len()));
        }
        self.begin_draw();
        let z_d_start = self.z_d;
        let n = g.n();
        let mut parents = vec![ROOT; n];
        let mut m = Vec::with_capacity(n + 1);
        for j in 1..=n {
            m.clear();
            m.extend(self.edge_marginals(g, j)?);
            let i = rng.categorical(&m).ok_or(Error::SupportExhausted(self.drawn.len()))?;
            parents[j - 1] = i;
            self.condition(g, i, j)?;
            inspect(self)?;
        }
        let tree = Tree::new(parents);
        let weight = g.tree_weight(&tree)?;
        self.record(tree.clone(), weight)?;
        Ok(SworDraw { tree, weight, conditional_probability: weight / z_d_start })
    }
}

/// Draws up to `k` distinct trees of `kind`, each from the weight
/// distribution restricted to trees not drawn before it.
pub fn swor(g: &Graph, kind: TreeKind, k: usize, rng: &mut RandomSource) -> Result<SworOutcome> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut state = SworState::new(g, kind)?;
    let mut draws = Vec::with_capacity(k);
    while draws.len() < k {
        if state.is_exhausted() {
            return Ok(SworOutcome { draws, exhausted: true });
        }
        draws.push(state.draw(g, rng)?);
    }
    Ok(SworOutcome { draws, exhausted: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colbourn::build_laplacian;
    use crate::fixtures::*;
    use crate::oracle;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn empty_drawn_set_matches_plain_marginals() {
        let g = g2();
        let mut s = SworState::new(&g, TreeKind::Dependency).unwrap();
        s.begin_draw();
        let m = s.edge_marginals(&g, 1).unwrap();
        let plain = build_laplacian(&g, TreeKind::Dependency).unwrap().edge_marginals(&g, 1).unwrap();
        for (a, b) in m.iter().zip(&plain) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn reweighted_marginals_on_fixtures() {
        let g = g2();
        let mut s = SworState::new(&g, TreeKind::Dependency).unwrap();
        s.record(Tree::new(vec![0, 1]), 1.0).unwrap();
        s.begin_draw();
        let m = s.edge_marginals(&g, 1).unwrap();
        assert!(close(m[0], 0.0) && close(m[2], 1.0));

        let g = g3();
        let mut s = SworState::new(&g, TreeKind::Dependency).unwrap();
        s.record(Tree::new(vec![0, 1, 1]), 0.5).unwrap();
        s.begin_draw();
        let m = s.edge_marginals(&g, 1).unwrap();
        assert!(close(m[0], 0.5) && close(m[3], 0.5), "{m:?}");
    }

    #[test]
    fn conditioning_filters_drawn_trees() {
        let g = g2();
        let mut s = SworState::new(&g, TreeKind::Dependency).unwrap();
        s.record(Tree::new(vec![0, 1]), 1.0).unwrap();
        s.begin_draw();
        s.condition(&g, 2, 1).unwrap();
        assert_eq!(s.active().count(), 0);
        assert!(close(s.laplacian_state().z(), 1.0) && close(s.z_d(), 1.0));

        s.begin_draw();
        s.condition(&g, ROOT, 1).unwrap();
        assert_eq!(s.active().count(), 1);
        assert!(close(s.laplacian_state().z(), 1.0) && close(s.z_d(), 0.0));
        assert_eq!(s.edge_marginals(&g, 2), Err(Error::SupportExhausted(1)));
    }

    #[test]
    fn exhaustive_draw_on_g2() {
        let mut rng = RandomSource::new(4);
        let out = swor(&g2(), TreeKind::Dependency, 2, &mut rng).unwrap();
        assert!(!out.exhausted);
        assert!(close(out.draws[0].conditional_probability, 0.5));
        assert!(close(out.draws[1].conditional_probability, 1.0));
        assert_ne!(out.draws[0].tree, out.draws[1].tree);

        let out = swor(&g2(), TreeKind::Dependency, 3, &mut rng).unwrap();
        assert!(out.exhausted);
        assert_eq!(out.clone().into_result(), Err(Error::SupportExhausted(2)));
        assert_eq!(out.draws.len(), 2);
    }

    #[test]
    fn zero_k_is_rejected() {
        assert!(matches!(
            swor(&g2(), TreeKind::Dependency, 0, &mut RandomSource::new(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn exhaustive_draws_cover_support() {
        let g = Graph::from_fn(3, |i, j| 0.2 + ((i * 3 + j) % 4) as f64).unwrap();
        for kind in [TreeKind::Spanning, TreeKind::Dependency] {
            let support = oracle::enumerate_trees(&g, kind).unwrap();
            for seed in 0..50 {
                let out = swor(&g, kind, support.len(), &mut RandomSource::new(seed)).unwrap();
                assert!(!out.exhausted);
                let mut got: Vec<Tree> = out.draws.into_iter().map(|d| d.tree).collect();
                got.sort();
                assert_eq!(got, support);
            }
        }
    }

    #[test]
    fn z_d_tracks_fresh_recomputation() {
        let g = Graph::from_fn(4, |i, j| 0.1 + ((i * 5 + j * 2) % 7) as f64 / 3.0).unwrap();
        let mut s = SworState::new(&g, TreeKind::Dependency).unwrap();
        let mut rng = RandomSource::new(8);
        for _ in 0..10 {
            s.draw_inspect(&g, &mut rng, |st| {
                let fresh = st.z_d_from_scratch()?;
                let tol = 1e-6 * fresh.abs().max(st.z_d().abs()) + 1e-12 * st.z_total();
                assert!((fresh - st.z_d()).abs() <= tol, "{fresh} vs {}", st.z_d());
                Ok(())
            })
            .unwrap();
        }
    }
}
