use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectral data: {0}")]
    InvalidSpectralData(String),

    #[error("kernel argument {z} is outside the tabulated range [{lo}, {hi}]")]
    KernelRange { z: f64, lo: f64, hi: f64 },

    #[error("kernel argument {z} is not aligned with the table grid")]
    KernelAlignment { z: f64 },

    #[error("kernel entry at argument {z} is divergent; a cut is required")]
    CutRequired { z: f64 },

    #[error(
        "block Levinson recursion unstable at step {step}: pivot singular value {sigma_min:e} below {tolerance:e}"
    )]
    Instability {
        step: usize,
        sigma_min: f64,
        tolerance: f64,
    },

    #[error("signals are sampled on different grids")]
    GridMismatch,

    #[error("reference signal is identically zero")]
    ZeroReference,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("planning failed: {0}")]
    Planning(String),

    #[error("numerical instability: {0}")]
    Unstable(String),

    #[error("segment {segment} failed: {source}")]
    Segment {
        segment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("signal does not decay at the grid edges (|q| = {edge:e})")]
    NonDecaying { edge: f64 },

    #[error("eigenvalue search did not converge (last iterate {last})")]
    RootSearch { last: num_complex::Complex64 },

    #[error("eigenvalues must be distinct")]
    CoincidentEigenvalues,

    #[error("matrix is singular")]
    Singular,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Instability { .. } | Error::CutRequired { .. } | Error::Singular | Error::Unstable(_) => true,
            Error::RootSearch { .. } => true,
            Error::Segment { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
