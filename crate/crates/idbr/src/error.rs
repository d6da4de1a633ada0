//! Crate-wide error type.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors surfaced by scale validation, the model, and the sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    Domain {
        /// Operation that rejected the argument.
        op: &'static str,
        /// The offending value.
        value: f64,
    },
    /// A response value does not lie on the declared scale.
    OffGrid {
        /// The offending value (on whichever scale it was supplied).
        value: f64,
        /// Data row the value came from, when known (0-based).
        row: Option<usize>,
    },
    /// The scale parameters do not describe a valid equally spaced scale.
    InvalidScale(String),
    /// The model specification is inconsistent with the scale or data.
    InvalidSpec(String),
    /// A design matrix is (numerically) rank deficient.
    RankDeficient {
        /// Submodel whose design failed the check.
        submodel: &'static str,
        /// Names of the columns implicated in the collinearity.
        columns: Vec<String>,
    },
    /// Not enough draws to compute the requested summary.
    TooFewDraws { needed: usize, got: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { op, value } => {
                write!(f, "{op}: argument {value} outside domain")
            }
            Error::OffGrid { value, row: Some(row) } => {
                write!(f, "value {value} at row {row} is not on the declared scale")
            }
            Error::OffGrid { value, row: None } => {
                write!(f, "value {value} is not on the declared scale")
            }
            Error::InvalidScale(msg) => write!(f, "invalid scale: {msg}"),
            Error::InvalidSpec(msg) => write!(f, "invalid model specification: {msg}"),
            Error::RankDeficient { submodel, columns } => {
                write!(f, "{submodel} design matrix is rank deficient (columns: ")?;
                for (i, c) in columns.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            Error::TooFewDraws { needed, got } => {
                write!(f, "need at least {needed} draws, got {got}")
            }
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
