use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpwError {
    #[error("loop degrees or weights do not match: {0}")]
    Incompatible(String),
    #[error("truncation overflow: discarded weighted mass {discarded:.3e} exceeds budget {budget:.3e}")]
    TruncationOverflow { discarded: f64, budget: f64 },
    #[error("singular inverse: |value| = {magnitude:.3e} at sample {index}")]
    SingularInverse { magnitude: f64, index: usize },
    #[error("evaluation at lambda = {lambda} outside the annulus 1/{rho} <= |lambda| <= {rho}")]
    OutOfAnnulus { lambda: String, rho: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("Iwasawa factorization failed: {0}")]
    NotPositiveDefinite(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("evaluation at puncture p_{index} (z = {z})")]
    AtPuncture { index: usize, z: String },
    #[error("non-invertible gauge at z = {0}")]
    NonInvertibleGauge(String),
    #[error("degenerate gauge: {0}")]
    DegenerateGauge(String),
    #[error("ODE step size underflow at s = {s:.6e} (h = {h:.3e})")]
    StepUnderflow { s: f64, h: f64 },
    #[error("ODE step budget exhausted after {0} steps")]
    TooManySteps(usize),
    #[error("Jacobian is singular: {0}")]
    JacobianSingular(String),
    #[error("continuation ceiling reached at t = {reached:.6e} (target {target:.6e})")]
    ContinuationCeiling { reached: f64, target: f64 },
    #[error("guard radius violated: {0}")]
    GuardViolation(String),
    #[error("symmetry fit residual {0:.3e} above tolerance")]
    SymmetryFit(f64),
    #[error("stitching gap {0:.3e} above tolerance")]
    StitchGap(f64),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("projection pole too close to the surface (distance {0:.3e})")]
    PoleTooClose(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, DpwError>;
