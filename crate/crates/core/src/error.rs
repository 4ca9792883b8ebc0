use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building graphs, doing the linear
/// algebra, or sampling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("NonFinite({from},{to}): weight is not a finite number")]
    NonFinite { from: usize, to: usize },
    #[error("NegativeWeight({from},{to}): edge weights must be non-negative")]
    NegativeWeight { from: usize, to: usize },
    #[error("EdgeIntoRoot({0}): the root cannot have incoming edges")]
    EdgeIntoRoot(usize),
    #[error("SelfLoop({0}): self-loops are not allowed")]
    SelfLoop(usize),
    #[error("IsolatedNode({0}): node has no positive incoming weight")]
    IsolatedNode(usize),
    #[error("ParentOutOfRange: node {node} has parent {parent}")]
    ParentOutOfRange { node: usize, parent: usize },
    #[error("Parse: {0}")]
    Parse(String),

    #[error("NonSquare: matrix is {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("Singular: no tree of the requested kind exists (Z = 0)")]
    Singular,
    #[error("SingularUpdate: conditioned graph has no trees (denominator {0:e})")]
    SingularUpdate(f64),

    #[error("TooLarge({n}): enumeration is capped at {cap} non-root nodes")]
    TooLarge { n: usize, cap: usize },
    #[error("EmptySupport: no tree has positive weight")]
    EmptySupport,
    #[error("SupportExhausted({0}): no unseen trees remain")]
    SupportExhausted(usize),

    #[error("Unreachable({0}): node cannot be connected to the root by positive edges")]
    Unreachable(usize),
    #[error("NoRootEdge: every root edge has zero weight")]
    NoRootEdge,
    #[error("RetryCapExceeded({0}): no dependency tree found")]
    RetryCapExceeded(usize),
    #[error("DegenerateColumn({0}): incoming marginals sum to zero")]
    DegenerateColumn(usize),
    #[error("NegativeMarginal: p({head}->{node}) = {value:e}")]
    NegativeMarginal { head: usize, node: usize, value: f64 },

    #[error("ForeignTree({0}): sampled tree is outside the exact support")]
    ForeignTree(String),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Graph construction and validation failures, as opposed to failures of
    /// a sampler on an otherwise valid graph.
    pub fn is_invalid_graph(&self) -> bool {
        matches!(
            self,
            Error::ShapeMismatch(_)
                | Error::NonFinite { .. }
                | Error::NegativeWeight { .. }
                | Error::EdgeIntoRoot(_)
                | Error::SelfLoop(_)
                | Error::IsolatedNode(_)
                | Error::Parse(_)
        )
    }
}
