use thiserror::Error;

use crate::symkernel::KernelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("the Wünschmann invariant vanishes identically, so `{0}` is undefined")]
    WunschmannZero(String),
    #[error("F may depend only on x, y, p, q and declared parameters; found `{0}`")]
    ForeignVariable(String),
    #[error("unknown invariant `{0}`")]
    UnknownInvariant(String),
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("transform needs the inverse map")]
    MissingInverse,
    #[error("supplied inverse fails on component {component}: {detail}")]
    InverseMismatch { component: String, detail: String },
    #[error("coordinate lists differ: {0:?} vs {1:?}")]
    CoordinateMismatch(Vec<String>, Vec<String>),
    #[error("coframe is not a pointwise basis: {0}")]
    SingularCoframe(String),
    #[error("`{0}` is not constant: {1}")]
    NotConstant(String, String),
    #[error("F is not cubic in q: F_qqqq is {0}")]
    NotCubic(String),
    #[error("the supplied family does not solve the equation: {0}")]
    NotASolution(String),
    #[error("parameter `{0}` needs a value (use --param {0}=...)")]
    MissingParameter(String),
    #[error("the section map is not an immersion: {0}")]
    DegenerateSection(String),
}

pub type Result<T> = std::result::Result<T, Error>;
