use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("generator index {index} out of range for n = {n} (expected 1..={max})", max = .n.saturating_sub(1))]
    GeneratorIndex { index: usize, n: usize },

    #[error("strand count mismatch: {left} vs {right}")]
    StrandMismatch { left: usize, right: usize },

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("cannot parse diagram {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("diagram {0} is not a permutation diagram")]
    NotPermutation(String),

    #[error("theta must be a rational strictly between 0 and 1, got {0}")]
    ThetaRange(String),

    #[error("proposal chain is not symmetric at ({row}, {col})")]
    AsymmetricProposal { row: usize, col: usize },

    #[error("target distribution has zero mass at state {0}")]
    ZeroMass(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("distribution is not a fixed point of the chain: {0}")]
    NotStationary(String),

    #[error("class is not closed under the chain: state {state} leaks to {target}")]
    NotClosed { state: String, target: String },

    #[error("invalid pairing: {0}")]
    Pairing(String),

    #[error("permutation assignment exhausted: needed {needed}, S_{n} supplies {available}")]
    AssignmentExhausted { needed: usize, available: usize, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource guard tripped: {0}")]
    ResourceLimit(String),

    #[error("sign undecided after {bits} bits of precision")]
    PrecisionExhausted { bits: u32 },

    #[error("identity check failed: {0}")]
    IdentityFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
