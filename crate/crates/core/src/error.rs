use thiserror::Error;

/// Everything that can go wrong inside the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("post-selected state is (nearly) orthogonal to the pre-selected state: |overlap| = {overlap:e}")]
    NearOrthogonalPostSelection { overlap: f64 },

    #[error("{what}: {detail}")]
    DomainError { what: &'static str, detail: String },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("operator is not Hermitian")]
    NonHermitianOperator,

    #[error("pointer grid [{q_min}, {q_max}] does not cover the required span [{need_min}, {need_max}]")]
    GridTooNarrow { q_min: f64, q_max: f64, need_min: f64, need_max: f64 },

    #[error("invalid pointer grid: {0}")]
    InvalidGrid(String),

    #[error("wavefunction norm {0:e} is too small to extract moments")]
    DegenerateWavefunction(f64),

    #[error("step dt = {dt} violates stability bound dt*(N*dE + H*sqrt(N)) = {measure} >= 0.1")]
    StepTooLarge { dt: f64, measure: f64 },

    #[error("norm drift {drift:e} at t = {t} exceeds tolerance {tol:e}")]
    NormDriftExceeded { t: f64, drift: f64, tol: f64 },

    #[error("fit window [{start}, {end}] lies outside trajectory or holds fewer than two samples")]
    WindowOutOfRange { start: f64, end: f64 },

    #[error("|a0| = {value:e} at t = {t} is too small to take its logarithm")]
    AmplitudeUnderflow { t: f64, value: f64 },

    #[error("fitted decay constant {0} is not positive")]
    NonDecaying(f64),

    #[error("denominator 1 - exp((-gamma + i k dE) T) vanishes: |.| = {0:e}")]
    DegenerateDenominator(f64),

    #[error("adaptive quadrature did not converge within depth {depth} on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64, depth: u32 },

    #[error("omega' = 2 omega: no dissipation, dwell time limit is T/2 = {tau_limit}")]
    DissipationlessCase { window: f64, tau_limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::DomainError { what, detail: detail.into() }
}
