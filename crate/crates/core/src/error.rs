use thiserror::Error;

/// Failure modes shared by every constructor in this crate.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("truncation dimension {0} outside the supported range 2..=512")]
    BadDimension(usize),

    #[error("length {found} does not match truncation dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    /// The truncated Fock basis cannot hold the requested state.
    #[error("coherent amplitude |z|^2 = {norm_sqr:.3e} leaves truncated tail mass {tail_mass:.3e}")]
    TailTooLarge { norm_sqr: f64, tail_mass: f64 },

    #[error("analytic dual bra is undefined at gamma = 0")]
    ZeroGamma,

    #[error("factorial-scale entry ({row}, {col}) overflows")]
    Overflow { row: usize, col: usize },

    #[error("{nodes} quadrature nodes below the exactness threshold {required}")]
    InsufficientNodes { nodes: usize, required: usize },

    #[error("invalid quadrature or grid parameter `{0}`")]
    InvalidQuadrature(&'static str),

    #[error("invalid domain radius {0}")]
    InvalidRadius(f64),

    /// Disk reaches the singularity or branch point at the origin.
    #[error("domain radius {radius} must be smaller than |center| = {center_abs}")]
    DomainContainsSingularity { radius: f64, center_abs: f64 },

    #[error("series has no attached function kind, tail bound unknown")]
    UnknownTail,

    #[error("need at least {required} boundary samples, got {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("boundary samples {0} and {1} coincide")]
    DuplicateSample(usize, usize),

    #[error("normal system condition estimate {0:.3e} exceeds 1e12")]
    IllConditioned(f64),

    #[error("polynomial degree {degree} must be below truncation dimension {dim}")]
    DegreeExceedsDim { degree: usize, dim: usize },

    #[error("series center must be {expected}")]
    CenterMismatch { expected: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;
