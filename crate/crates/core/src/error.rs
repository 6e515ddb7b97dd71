use alloc::string::String;

use crate::Site;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("period {period} is smaller than 2R+1 = {}", 2 * radius + 1)]
    WindowTooSmall { period: usize, radius: usize },
    #[error("field windows or dimensions do not match")]
    WindowMismatch,
    #[error("half-space operator requires the mirror-symmetry assertion")]
    SymmetryNotAsserted,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid stencil: {0}")]
    InvalidStencil(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("decay certificate violated at offset {offset:?}: norm {norm:e} > bound {bound:e}")]
    DecayCertificateViolated { offset: Site, norm: f64, bound: f64 },
    #[error("fitted decay rate {beta} is not positive")]
    DecayTooSlow { beta: f64 },
    #[error("linear system is singular")]
    SingularSystem,
    #[error("iterative solver stalled after {iterations} iterations (relative residual {residual:e})")]
    SolverStalled { iterations: usize, residual: f64 },
    #[error("imaginary part {value:e} survived the inverse Bloch transform")]
    ImaginaryLeak { value: f64 },
    #[error("exterior spectrum floor {value} is not positive")]
    NonPositiveFloor { value: f64 },
    #[error("fiber eigenvalue {eigenvalue} lies inside the gap ({lower}, {upper})")]
    GapViolated { eigenvalue: f64, lower: f64, upper: f64 },
    #[error("projector kernel shows no decay (gamma = {gamma})")]
    NoDecay { gamma: f64 },
    #[error("lambda = {lambda} does not lie in a qualifying spectral gap")]
    NotInGap { lambda: f64 },
    #[error("no site/component gives a non-degenerate reference vector")]
    DegenerateZ0,
    #[error("period {k} too small for the linking set: |P+ S z0| = {overlap} <= 2/3")]
    PeriodTooSmall { k: usize, overlap: f64 },
    #[error("maximizer stuck on the linking boundary (boundary J = {boundary_value}, start J = {interior_value})")]
    BoundaryMaximum { boundary_value: f64, interior_value: f64 },
    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("Jacobian is singular (eigenvalue {eigenvalue:e})")]
    SingularJacobian { eigenvalue: f64 },
    #[error("period {period} gives too few annuli for a decay fit")]
    TooFewAnnuli { period: usize },
}
