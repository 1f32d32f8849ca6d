use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("symplectic eigenvalue pairing failed (residual {residual:.3e})")]
    PairingFailure { residual: f64 },

    #[error("singular covariance matrix (determinant {det:.3e})")]
    SingularCovariance { det: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("total mass {mass:.3e} is too close to zero")]
    ZeroMass { mass: f64 },

    #[error("field has zero L2 norm")]
    ZeroNorm,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("grid reciprocity violated: {0}")]
    Reciprocity(String),

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("density is not a probability density: mass {mass:.6e}")]
    NotNormalized { mass: f64 },

    #[error("clipped negative mass {clipped:.3e} exceeds threshold {threshold:.3e}")]
    ClippingExceeded { clipped: f64, threshold: f64 },

    #[error("boundary mass fraction {fraction:.3e} exceeds threshold {threshold:.3e}")]
    Aliasing { fraction: f64, threshold: f64 },

    #[error("scaled covariance (2/hbar)Cov is not symplectic (residual {residual:.3e})")]
    NotPureGaussian { residual: f64 },

    #[error("requested order {order} is not resolvable on this grid")]
    ResolutionExceeded { order: usize },

    #[error("grid budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("matrix is neither symplectic nor anti-symplectic")]
    NotAsp,

    #[error("RSUP routes disagree: eigenvalue margin {psd_margin:.3e}, symplectic margin {spectral_margin:.3e}")]
    RouteDisagreement { psd_margin: f64, spectral_margin: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
