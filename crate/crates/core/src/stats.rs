//! Goodness-of-fit tools for checking samplers against exact distributions.

use std::collections::BTreeMap;

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::{Tree, TreeKey};
use crate::oracle::ExactDistribution;
use crate::rng::RandomSource;

/// Cells with a smaller expected count are pooled before the chi-square test.
pub const MIN_EXPECTED: f64 = 5.0;

/// Observed tree counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmpiricalDistribution {
    pub counts: BTreeMap<TreeKey, u64>,
    pub total: u64,
}

impl EmpiricalDistribution {
    pub fn add(&mut self, tree: &Tree) {
        *self.counts.entry(tree.key()).or_default() += 1;
        self.total += 1;
    }

    pub fn count(&self, tree: &Tree) -> u64 {
        self.counts.get(&tree.key()).copied().unwrap_or(0)
    }

    pub fn frequency(&self, tree: &Tree) -> f64 {
        self.count(tree) as f64 / self.total as f64
    }

    /// Fraction of samples satisfying `pred`.
    pub fn frequency_where(&self, mut pred: impl FnMut(&Tree) -> bool) -> f64 {
        let hits: u64 =
            self.counts.iter().filter(|(k, _)| pred(&k.to_tree())).map(|(_, c)| c).sum();
        hits as f64 / self.total as f64
    }
}

impl FromIterator<Tree> for EmpiricalDistribution {
    fn from_iter<I: IntoIterator<Item = Tree>>(iter: I) -> Self {
        let mut emp = EmpiricalDistribution::default();
        for t in iter {
            emp.add(&t);
        }
        emp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub tv_distance: f64,
    pub reject: bool,
}

impl std::fmt::Display for GofReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "chi2 = {:.3} (dof {}), p = {:.4}, tv = {:.5}, {}",
            self.statistic,
            self.dof,
            self.p_value,
            self.tv_distance,
            if self.reject { "REJECT" } else { "ok" }
        )
    }
}

/// Draws `n_samples` trees from `sampler` and tallies them.
pub fn collect<F>(mut sampler: F, n_samples: u64, rng: &mut RandomSource) -> Result<EmpiricalDistribution>
where
    F: FnMut(&mut RandomSource) -> Result<Tree>,
{
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let mut emp = EmpiricalDistribution::default();
    for _ in 0..n_samples {
        emp.add(&sampler(rng)?);
    }
    Ok(emp)
}

/// Total-variation distance between observed frequencies and `exact`.
pub fn tv_distance(emp: &EmpiricalDistribution, exact: &ExactDistribution) -> f64 {
    let total = emp.total as f64;
    let mut sum = 0.0;
    for (key, entry) in &exact.entries {
        let observed = emp.counts.get(key).copied().unwrap_or(0) as f64 / total;
        sum += (observed - entry.probability).abs();
    }
    for (key, count) in &emp.counts {
        if !exact.entries.contains_key(key) {
            sum += *count as f64 / total;
        }
    }
    0.5 * sum
}

/// Pearson chi-square test of `emp` against `exact`.
///
/// Any observed tree outside the exact support is a hard error. Cells are
/// pooled, smallest expected count first (ties by key), until every pooled
/// cell expects at least [`MIN_EXPECTED`] samples.
pub fn chi_square_gof(
    emp: &EmpiricalDistribution,
    exact: &ExactDistribution,
    alpha: f64,
) -> Result<GofReport> {
    if let Some(key) = emp.counts.keys().find(|k| !exact.entries.contains_key(k)) {
        return Err(Error::ForeignTree(key.to_string()));
    }
    if emp.total == 0 {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let total = emp.total as f64;
    let mut cells: Vec<(f64, f64, &TreeKey)> = exact
        .entries
        .iter()
        .map(|(k, e)| (e.probability * total, emp.counts.get(k).copied().unwrap_or(0) as f64, k))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.2.cmp(b.2)));

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut exp_acc, mut obs_acc) = (0.0, 0.0);
    for (expected, observed, _) in cells {
        exp_acc += expected;
        obs_acc += observed;
        if exp_acc >= MIN_EXPECTED {
            pooled.push((exp_acc, obs_acc));
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += exp_acc;
                last.1 += obs_acc;
            }
            None => pooled.push((exp_acc, obs_acc)),
        }
    }

    let statistic: f64 = pooled.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    let tv = tv_distance(emp, exact);
    if pooled.len() < 2 {
        // a single cell carries no information
        return Ok(GofReport { statistic, dof: 1, p_value: 1.0, tv_distance: tv, reject: false });
    }
    let dof = pooled.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
        .clamp(0.0, 1.0);
    Ok(GofReport { statistic, dof, p_value, tv_distance: tv, reject: p_value < alpha })
}

/// Two-sided p-value for `successes` out of `total` under rate `p0`.
///
/// Exact (summing every outcome no more likely than the observed one) up to
/// 1000 trials, normal approximation beyond.
pub fn binomial_two_sided(successes: u64, total: u64, p0: f64) -> f64 {
    assert!(successes <= total && p0 > 0.0 && p0 < 1.0);
    if total == 0 {
        return 1.0;
    }
    if total > 1000 {
        let n = total as f64;
        let sd = (n * p0 * (1.0 - p0)).sqrt();
        let z = (successes as f64 - n * p0).abs() / sd;
        return erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    }
    let dist = Binomial::new(p0, total).expect("valid binomial");
    let observed = dist.pmf(successes);
    let cutoff = observed * (1.0 + 1e-7);
    (0..=total).map(|k| dist.pmf(k)).filter(|&p| p <= cutoff).sum::<f64>().min(1.0)
}
