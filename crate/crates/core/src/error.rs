use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: must be positive and even")]
    InvalidGrid(usize),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("spectral data is not Hermitian: imaginary residue {residue:e} exceeds tolerance")]
    NonHermitianInput { residue: f64 },

    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("value {value} is not below the supremum {supremum} of the modulus")]
    ValueExceedsSupremum { value: f64, supremum: f64 },

    #[error("smallness condition violated: 3·‖θ₀‖∞ = {three_linf} ≥ ω(∞) = {supremum}")]
    SmallnessViolated { three_linf: f64, supremum: f64 },

    #[error("operation requires a {expected} modulus")]
    KindMismatch { expected: &'static str },

    #[error("velocity field is not divergence free (relative divergence {0:e})")]
    NotDivergenceFree(f64),

    #[error("dyadic block {0} is identically zero")]
    ZeroBlock(i32),

    #[error("right-hand side of the commutator bound vanishes")]
    DegenerateRhs,

    #[error("support of the sampled function is not contained in the truncation ball")]
    SupportViolation,

    #[error("blow-up suspected at t = {t}: {reason}")]
    BlowupSuspected { t: f64, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::OutOfRange {
            name,
            value,
            expected,
        }
    }
}
