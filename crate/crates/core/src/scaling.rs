//! Runtime scaling experiment: mean per-sample time against graph size on
//! random complete graphs, with a log-log least-squares slope per algorithm.
//!
//! Graph generation and sampler preprocessing are excluded from the timings.
//! The first few samples at each size are discarded as warmup.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand_distr::{Distribution, Exp1, Gumbel};

use crate::error::{Error, Result};
use crate::graph::{Graph, TreeKind};
use crate::rng::RandomSource;
use crate::sampler::{Algorithm, PreparedSampler};

/// How the random complete graphs draw their edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightDistribution {
    /// i.i.d. uniform on (0, 1].
    #[default]
    Uniform,
    /// i.i.d. standard exponential.
    Exponential,
    /// Column-wise softmax of `4 * Gumbel(0, 1)` scores, mimicking the peaked
    /// incoming-edge distributions of trained scorers.
    SoftmaxGumbel,
}

const SOFTMAX_SCALE: f64 = 4.0;

impl WeightDistribution {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightDistribution::Uniform => "uniform",
            WeightDistribution::Exponential => "exponential",
            WeightDistribution::SoftmaxGumbel => "softmax-gumbel",
        }
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightDistribution::Uniform),
            "exponential" => Ok(WeightDistribution::Exponential),
            "softmax-gumbel" => Ok(WeightDistribution::SoftmaxGumbel),
            _ => Err(Error::InvalidArgument(format!("unknown weight distribution {s:?}"))),
        }
    }
}

/// Complete graph on `n` non-root nodes with random positive weights.
pub fn random_complete_graph(
    n: usize,
    dist: WeightDistribution,
    rng: &mut RandomSource,
) -> Result<Graph> {
    let g = match dist {
        WeightDistribution::Uniform => Graph::from_fn(n, |_, _| 1.0 - rng.uniform())?,
        WeightDistribution::Exponential => {
            Graph::from_fn(n, |_, _| {
                let x: f64 = Exp1.sample(rng);
                x.max(f64::MIN_POSITIVE)
            })?
        }
        WeightDistribution::SoftmaxGumbel => {
            let gumbel = Gumbel::new(0.0, 1.0).expect("valid gumbel");
            let raw = Graph::from_fn(n, |_, _| (SOFTMAX_SCALE * gumbel.sample(rng)).exp())?;
            // column max can overflow exp for large scales; normalization keeps ratios
            raw.normalize_stochastic()?
        }
    };
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub graphs_per_size: usize,
    pub samples_per_graph: usize,
    pub warmup: usize,
    pub weights: WeightDistribution,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            sizes: vec![5, 10, 15, 20, 25, 30, 35, 40],
            algorithms: vec![Algorithm::Colbourn, Algorithm::WilsonRc],
            graphs_per_size: 20,
            samples_per_graph: 20,
            warmup: 3,
            weights: WeightDistribution::Uniform,
            seed: 0,
        }
    }
}

/// Sizes `min, min + step, ...` up to and including `max`.
pub fn size_range(min: usize, max: usize, step: usize) -> Result<Vec<usize>> {
    if min < 2 {
        return Err(Error::InvalidArgument("n_min must be at least 2".into()));
    }
    if min > max {
        return Err(Error::InvalidArgument("n_min must not exceed n_max".into()));
    }
    if step == 0 {
        return Err(Error::InvalidArgument("n_step must be positive".into()));
    }
    Ok((min..=max).step_by(step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub algorithm: Algorithm,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<TimingRow>,
}

impl ScalingReport {
    pub fn rows_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &TimingRow> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }

    pub fn mean_at(&self, algorithm: Algorithm, n: usize) -> Option<f64> {
        self.rows_for(algorithm).find(|r| r.n == n).map(|r| r.mean_seconds)
    }

    /// Least-squares slope of `ln(mean time)` against `ln(n)`; `None` with
    /// fewer than two sizes.
    pub fn slope(&self, algorithm: Algorithm) -> Option<f64> {
        let points: Vec<(f64, f64)> = self
            .rows_for(algorithm)
            .map(|r| ((r.n as f64).ln(), r.mean_seconds.max(1e-12).ln()))
            .collect();
        fit_slope(&points)
    }
}

pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn kind_for(algorithm: Algorithm) -> TreeKind {
    algorithm.fixed_kind().unwrap_or(TreeKind::Dependency)
}

pub fn run_scaling(cfg: &ScalingConfig) -> Result<ScalingReport> {
    if cfg.graphs_per_size == 0 || cfg.samples_per_graph == 0 {
        return Err(Error::InvalidArgument("need at least one graph and one sample".into()));
    }
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("graph size {n} is below 2")));
    }
    let mut graph_rng = RandomSource::stream(cfg.seed, 0);
    let mut rows = Vec::new();
    for (size_index, &n) in cfg.sizes.iter().enumerate() {
        let graphs = (0..cfg.graphs_per_size)
            .map(|_| random_complete_graph(n, cfg.weights, &mut graph_rng))
            .collect::<Result<Vec<_>>>()?;
        for (alg_index, &algorithm) in cfg.algorithms.iter().enumerate() {
            let stream = 1 + (size_index * cfg.algorithms.len() + alg_index) as u64;
            let mut rng = RandomSource::stream(cfg.seed, stream);
            let kind = kind_for(algorithm);
            let mut times = Vec::with_capacity(cfg.graphs_per_size * cfg.samples_per_graph);
            for (g_index, g) in graphs.iter().enumerate() {
                let sampler = PreparedSampler::new(g, algorithm, kind)?;
                if g_index == 0 {
                    for _ in 0..cfg.warmup {
                        std::hint::black_box(sampler.draw(&mut rng)?);
                    }
                }
                for _ in 0..cfg.samples_per_graph {
                    let start = Instant::now();
                    let out = sampler.draw(&mut rng)?;
                    times.push(start.elapsed().as_secs_f64());
                    std::hint::black_box(out);
                }
            }
            let k = times.len() as f64;
            let mean = times.iter().sum::<f64>() / k;
            let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            rows.push(TimingRow {
                n,
                algorithm,
                mean_seconds: mean,
                std_seconds: var.sqrt(),
                samples: times.len(),
            });
        }
    }
    Ok(ScalingReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let points: Vec<(f64, f64)> =
            [2.0f64, 4.0, 8.0].iter().map(|&n| (n.ln(), (3.0 * n.powi(3)).ln())).collect();
        assert!((fit_slope(&points).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(fit_slope(&points[..1]), None);
    }

    #[test]
    fn sizes() {
        assert_eq!(size_range(5, 20, 5).unwrap(), [5, 10, 15, 20]);
        assert!(size_range(1, 5, 1).is_err());
        assert!(size_range(6, 5, 1).is_err());
    }

    #[test]
    fn random_graphs_are_complete_and_valid() {
        let mut rng = RandomSource::new(3);
        for dist in [
            WeightDistribution::Uniform,
            WeightDistribution::Exponential,
            WeightDistribution::SoftmaxGumbel,
        ] {
            let g = random_complete_graph(6, dist, &mut rng).unwrap();
            g.validate().unwrap();
            for i in 0..=6 {
                for j in 1..=6 {
                    assert_eq!(g.weight(i, j) > 0.0, i != j, "{dist} {i}->{j}");
                }
            }
        }
    }

    #[test]
    fn single_size_gives_one_row_per_algorithm() {
        let cfg = ScalingConfig {
            sizes: vec![4],
            graphs_per_size: 1,
            samples_per_graph: 1,
            ..ScalingConfig::default()
        };
        let report = run_scaling(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.slope(Algorithm::Colbourn), None);
    }
}
