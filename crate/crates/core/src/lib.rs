//! Exact and approximate samplers for directed spanning trees and single-root
//! dependency trees of weighted graphs.
//!
//! * [`wilson`]: loop-erased random walks (spanning trees, a biased
//!   root-constrained variant, and an exact rejection variant).
//! * [`colbourn`]: ancestral sampling from Laplacian marginals with rank-one
//!   conditioning, for either tree kind.
//! * [`swor`]: the ancestral sampler extended to draw distinct trees.
//! * [`oracle`]: brute-force enumeration used as ground truth.
//! * [`stats`]: goodness-of-fit checks of samplers against the oracle.

pub mod colbourn;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod scaling;
pub mod stats;
pub mod swor;
pub mod wilson;

pub use colbourn::{build_laplacian, colbourn, ColbournSampler, LaplacianState};
pub use error::{Error, Result};
pub use graph::{canonical_key, Graph, Tree, TreeKey, TreeKind, ROOT};
pub use linalg::{Matrix, Tolerances};
pub use oracle::{exact_distribution, exact_marginals, ExactDistribution};
pub use rng::RandomSource;
pub use sampler::{Algorithm, PreparedSampler};
pub use stats::{EmpiricalDistribution, GofReport};
pub use swor::{swor, SworDraw, SworOutcome, SworState};
pub use wilson::{wilson, wilson_rc, wilson_reject, WalkStats, WilsonSampler};
