use thiserror::Error;

use crate::ordinal::ExtHeight;
use crate::tree::NodePath;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("CNF exponents must be strictly descending")]
    NonDescending,
    #[error("CNF coefficients must be positive")]
    ZeroCoefficient,
    #[error("coefficient overflow")]
    Overflow,
    #[error("{0} is not an ordinal")]
    NotOrdinal(ExtHeight),
    #[error("{0} is not a limit ordinal")]
    NotLimit(ExtHeight),
    #[error("fundamental sequence index must be at least 1")]
    ZeroIndex,
    #[error("left subtraction needs the subtrahend to be at most the minuend")]
    NotLeftSubtractable,

    #[error("the empty space is not allowed here")]
    EmptySpace,
    #[error("height {0} is not zero, a successor or infinity")]
    NotSuccessor(ExtHeight),
    #[error("lambda must lie strictly between 0 and 1")]
    LambdaOutOfRange,
    #[error("root height must not be -1")]
    InvalidRootHeight,
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("path {path} is not addressable: {reason}")]
    Unaddressable { path: NodePath, reason: String },
    #[error("meet is undefined for equal branches")]
    EqualBranches,
    #[error("path {0} lies outside the source subtree")]
    NotInSource(NodePath),
    #[error("source height {src} is below target height {dst}")]
    HeightPrecondition { src: ExtHeight, dst: ExtHeight },
    #[error("greedy matching below {0} found no witness within the search cap")]
    GreedyExhausted(NodePath),
    #[error("morphism does not send the central child of {0} to a central child")]
    NotCentralPreserving(NodePath),

    #[error("node {path} does not appear within {cap} levels")]
    LevelCapExceeded { path: NodePath, cap: u32 },
    #[error("set size exceeds cap {0}")]
    SizeCapExceeded(usize),
    #[error("word length {len} exceeds cap {cap}")]
    WordCapExceeded { len: usize, cap: usize },
    #[error("norm has no declared finite support")]
    UndeclaredSupport,
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("point sets belong to different systems")]
    MixedContexts,
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("map index {0} out of range")]
    NoSuchMap(usize),
    #[error("fixed point of map {0} is not eventually central")]
    InexactFixedPoint(usize),
}

impl Error {
    /// True for failures caused by one of the configurable caps.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            Error::LevelCapExceeded { .. }
                | Error::SizeCapExceeded(_)
                | Error::WordCapExceeded { .. }
                | Error::GreedyExhausted(_)
        )
    }
}
