use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by construction, evaluation, and the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    /// A point left the declared domain rectangle.
    #[error("point ({x}, {y}) outside domain [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]")]
    OutOfDomain {
        x: f64,
        y: f64,
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
    },

    /// |det g| fell below the degeneracy guard.
    #[error("metric degenerate at ({x}, {y}): |det g| = {det:e}")]
    DegenerateMetric { x: f64, y: f64, det: f64 },

    /// A constructor precondition failed at a validation sample.
    #[error("degenerate input for {what} at ({x}, {y})")]
    DegenerateConstruction { what: String, x: f64, y: f64 },

    /// A coefficient that must stay away from zero vanished.
    #[error("{what} vanishes near {at}")]
    VanishingCoefficient { what: String, at: f64 },

    /// Square-root argument went nonpositive where a positive value is required.
    #[error("radicand {which} nonpositive ({value:e})")]
    NegativeRadicand { which: &'static str, value: f64 },

    /// The complex radicand hit (a neighborhood of) zero: branch point.
    #[error("branch point: complex radicand ~ 0 at ({x}, {y})")]
    BranchPoint { x: f64, y: f64 },

    #[error("quadrature failed to converge: {detail}")]
    QuadratureNonconvergence { detail: String },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("root not bracketed on [{a}, {b}]")]
    NotBracketed { a: f64, b: f64 },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },
}

impl Error {
    /// Stable machine-readable tag for each error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Eval(_) => "eval",
            Error::OutOfDomain { .. } => "out-of-domain",
            Error::DegenerateMetric { .. } => "degenerate-metric",
            Error::DegenerateConstruction { .. } => "degenerate-construction",
            Error::VanishingCoefficient { .. } => "vanishing-coefficient",
            Error::NegativeRadicand { .. } => "negative-radicand",
            Error::BranchPoint { .. } => "branch-point",
            Error::QuadratureNonconvergence { .. } => "quadrature-nonconvergence",
            Error::StepSizeUnderflow { .. } => "step-underflow",
            Error::NotBracketed { .. } => "not-bracketed",
            Error::InvalidGrid { .. } => "invalid-grid",
            Error::InvalidInput { .. } => "invalid-input",
        }
    }
}
