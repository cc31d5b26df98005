use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hamiltonian is not quasi-convex: {0}")]
    NotQuasiConvex(String),

    #[error("hamiltonian is not coercive on its sample range: {0}")]
    NotCoercive(String),

    #[error("gradient value {p} outside sample range [{p_min}, {p_max}]")]
    OutOfRange { p: f64, p_min: f64, p_max: f64 },

    #[error("level {level} is below the minimum value {min} of the hamiltonian")]
    BelowMinimum { level: f64, min: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {x} does not coincide with a grid node (dx = {dx})")]
    OffGrid { x: f64, dx: f64 },

    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),

    #[error("time step {dt} violates CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("step [{t}, {t_end}) crosses the phase switch at {switch}")]
    PhaseBoundaryCrossed { t: f64, t_end: f64, switch: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("averaging horizon too short: {0}")]
    HorizonTooShort(String),

    #[error("truncation radius {rho} must exceed max |b| = {rho0}")]
    RhoTooSmall { rho: f64, rho0: f64 },

    #[error("flux limiter sweep did not converge: last brackets are {gap} apart (tol {tol})")]
    NotConverged { gap: f64, tol: f64 },

    #[error("corrector profile too narrow: rho * eps_min = {available} < window {window}")]
    ProfileTooNarrow { available: f64, window: f64 },

    #[error("grid under-resolves eps = {eps}: dx = {dx} > eps / {oversample}")]
    UnderResolved { eps: f64, dx: f64, oversample: f64 },

    #[error("{check}: expected {expected}, computed {computed} (tolerance {tol})")]
    ToleranceExceeded {
        check: String,
        expected: f64,
        computed: f64,
        tol: f64,
    },

    #[error("invalid {field}: {reason}")]
    InvalidScenario { field: String, reason: String },
}

impl Error {
    pub(crate) fn scenario(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidScenario {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
