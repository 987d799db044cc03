use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UdmError {
    #[error("order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("double factorial requested for even argument {0}")]
    EvenDoubleFactorial(i64),

    #[error("coefficient vector is zero")]
    ZeroVector,

    #[error("coefficient vector norm {norm} differs from 1 by more than {tolerance}")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("phase of a zero coefficient is undefined")]
    UndefinedPhase,

    #[error("imaginary residue {residue:e} exceeds {bound:e}; density matrix is not Hermitian")]
    ImaginaryResidue { residue: f64, bound: f64 },

    #[error("density matrix is not rank one")]
    NotRankOne,

    #[error("density matrix invalid: {0}")]
    InvalidDensity(String),

    #[error("grid too coarse: spacing {spacing} exceeds {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("grid too small: {len} nodes cannot hold a {needed}-point stencil")]
    GridTooSmall { len: usize, needed: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("wave function is not normalizable")]
    NotNormalizable,

    #[error("derivative order {0} must be odd")]
    EvenDerivativeOrder(usize),

    #[error("potential degree {degree} exceeds the bound {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("quadrature did not converge: change {change:e} under node doubling exceeds {tolerance:e}")]
    NonConvergence { change: f64, tolerance: f64 },

    #[error("integrand leaks at the domain boundary: |W| = {value:e}")]
    BoundaryLeak { value: f64 },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, UdmError>;
