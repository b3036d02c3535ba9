use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Map text does not follow the grammar.
    Syntax { pos: usize, msg: String },
    /// A variable `zK` refers past the input dimension.
    VariableOutOfRange { index: usize, dim: usize },
    /// Wrong number of `;`-separated components.
    ComponentCount { expected: usize, found: usize },
    /// Division by a quantity that vanishes at the evaluation or expansion point.
    DivisionByZero,
    /// Operands live over different multi-index tables.
    TableMismatch,
    /// Vector or matrix shapes disagree.
    Dimension { expected: usize, found: usize },
    /// `r_n` does not fit in `usize`.
    Overflow,
    /// The regression has rank below the number of requested columns.
    IllPosed { rank: usize, required: usize, singular_values: Vec<f64> },
    /// A matrix that must be positive definite is not.
    NotPositiveDefinite,
    /// A matrix logarithm was requested for a matrix with an eigenvalue on (-inf, 0].
    NonPositiveRealEigenvalue { re: f64, im: f64 },
    /// Quadrature did not settle below the tolerance before the node cap.
    QuadratureNotConverged { nodes: usize, change: f64 },
    /// Singular matrix in a solve.
    Singular,
    /// The ODE solution blew up or the step size underflowed.
    BlowUp { t: f64 },
    /// Inertia bisection could not certify a bracket at this precision.
    NeedsMorePrecision { bits: u32 },
    /// Points fall outside the declared support or domain.
    OutsideSupport,
    /// Invalid argument.
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { pos, msg } => write!(f, "syntax error at {pos}: {msg}"),
            Error::VariableOutOfRange { index, dim } => {
                write!(f, "variable z{index} out of range for dimension {dim}")
            }
            Error::ComponentCount { expected, found } => {
                write!(f, "expected {expected} components, found {found}")
            }
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::TableMismatch => write!(f, "jets use different multi-index tables"),
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Overflow => write!(f, "jet dimension overflows the integer range"),
            Error::IllPosed { rank, required, .. } => {
                write!(f, "estimator ill-posed: numerical rank {rank} < {required}")
            }
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::NonPositiveRealEigenvalue { re, im } => {
                write!(f, "eigenvalue {re}{im:+}i lies on the closed negative real axis")
            }
            Error::QuadratureNotConverged { nodes, change } => {
                write!(f, "quadrature not converged with {nodes} nodes (change {change:e})")
            }
            Error::Singular => write!(f, "singular matrix"),
            Error::BlowUp { t } => write!(f, "integration blew up at t = {t}"),
            Error::NeedsMorePrecision { bits } => {
                write!(f, "bisection failed at {bits} bits; retry with higher precision")
            }
            Error::OutsideSupport => write!(f, "points lie outside the declared support"),
            Error::Invalid(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
