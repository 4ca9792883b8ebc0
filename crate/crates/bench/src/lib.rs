//! Inputs shared by the criterion benchmarks.

use treesample::scaling::{random_complete_graph, WeightDistribution};
use treesample::{Graph, Matrix, RandomSource};

/// Graph sizes swept by the sampler benchmarks.
pub const SIZES: [usize; 4] = [5, 10, 20, 40];

/// A reproducible complete graph with uniform (0, 1] weights.
pub fn complete_graph(n: usize, seed: u64) -> Graph {
    random_complete_graph(n, WeightDistribution::Uniform, &mut RandomSource::new(seed))
        .expect("complete graphs are valid")
}

/// A diagonally dominant random matrix, safely invertible.
pub fn dominant_matrix(n: usize, seed: u64) -> Matrix {
    let mut rng = RandomSource::new(seed);
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for x in row.iter_mut() {
            *x = rng.uniform() - 0.5;
        }
        row[i] += n as f64;
    }
    Matrix::from_rows(&rows)
}
