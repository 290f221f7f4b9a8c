use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge: estimate {estimate}, error {error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {at}")]
    InvalidIntegrand { at: f64 },
    #[error("tail decay exponent {exponent} is not square integrable")]
    NonIntegrableTail { exponent: f64 },
    #[error("point has a coordinate at infinity")]
    PointAtInfinity,
    #[error("point lies on the diagonal")]
    DiagonalPoint,
    #[error("point is not in the crown")]
    NotInCrown,
    #[error("point is not within tolerance of the crown boundary")]
    NotOnBoundary,
    #[error("quadric constraint drifted: |Q - 1| = {drift:e}")]
    NumericalDrift { drift: f64 },
    #[error("branch cut crossed: {0}")]
    BranchCut(String),
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("pullback left the representable range at x = {at}")]
    SampleUnderflow { at: f64 },
    #[error("finite-difference step {step:e} is dominated by cancellation")]
    StepTooSmall { step: f64 },
    #[error("derivative noise {noise:e} exceeds tolerance")]
    GridResolution { noise: f64 },
    #[error("kernel measure is not admissible for c = {c}")]
    AdmissibilityFailure { c: f64 },
    #[error("contour shift {shift} leaves the strip of half-width {strip}")]
    StripExceeded { shift: f64, strip: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
