use std::fmt;
use std::str::FromStr;

use crate::colbourn::ColbournSampler;
use crate::error::{Error, Result};
use crate::graph::{Graph, Tree, TreeKind};
use crate::rng::RandomSource;
use crate::wilson::{WalkStats, WilsonSampler};

/// Single-tree sampling algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Loop-erased random walk; spanning trees.
    Wilson,
    /// Random walk with the root child drawn by weight; biased dependency trees.
    WilsonRc,
    /// Random walk with rejection of multi-root trees; dependency trees.
    WilsonReject,
    /// Ancestral sampling from Laplacian marginals; either kind.
    Colbourn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Wilson, Algorithm::WilsonRc, Algorithm::WilsonReject, Algorithm::Colbourn];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Wilson => "wilson",
            Algorithm::WilsonRc => "wilson-rc",
            Algorithm::WilsonReject => "wilson-reject",
            Algorithm::Colbourn => "colbourn",
        }
    }

    /// The tree kind this algorithm produces, if it is fixed.
    pub fn fixed_kind(self) -> Option<TreeKind> {
        match self {
            Algorithm::Wilson => Some(TreeKind::Spanning),
            Algorithm::WilsonRc | Algorithm::WilsonReject => Some(TreeKind::Dependency),
            Algorithm::Colbourn => None,
        }
    }

    pub fn supports(self, kind: TreeKind) -> bool {
        self.fixed_kind().is_none_or(|k| k == kind)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm {s:?}")))
    }
}

/// A sampler with its per-graph preprocessing done.
#[derive(Debug, Clone)]
pub enum PreparedSampler<'g> {
    Walk(Algorithm, WilsonSampler<'g>),
    Colbourn(ColbournSampler<'g>),
}

impl<'g> PreparedSampler<'g> {
    pub fn new(g: &'g Graph, algorithm: Algorithm, kind: TreeKind) -> Result<Self> {
        if !algorithm.supports(kind) {
            return Err(Error::InvalidArgument(format!(
                "{algorithm} cannot sample {kind} trees"
            )));
        }
        Ok(match algorithm {
            Algorithm::Colbourn => PreparedSampler::Colbourn(ColbournSampler::new(g, kind)?),
            walk => PreparedSampler::Walk(walk, WilsonSampler::new(g)?),
        })
    }

    /// Draws one tree. Walk statistics are reported for the random-walk
    /// algorithms only.
    pub fn draw(&self, rng: &mut RandomSource) -> Result<(Tree, Option<WalkStats>)> {
        match self {
            PreparedSampler::Colbourn(s) => Ok((s.sample(rng)?, None)),
            PreparedSampler::Walk(algorithm, s) => {
                let (tree, stats) = match algorithm {
                    Algorithm::Wilson => s.spanning(rng)?,
                    Algorithm::WilsonRc => s.root_constrained(rng)?,
                    Algorithm::WilsonReject => s.rejection(rng)?,
                    Algorithm::Colbourn => unreachable!("constructed as a walk sampler"),
                };
                Ok((tree, Some(stats)))
            }
        }
    }
}
