use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type; variants mirror the failure modes of the individual
/// modules so the CLI can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syllable references {what} {index}, but the group has only {max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("group specs do not match: {0}")]
    SpecMismatch(String),

    #[error("length budget exceeded: {len} > {budget} while {context}")]
    LengthBudgetExceeded {
        len: usize,
        budget: usize,
        context: String,
    },

    #[error("torus exponent mismatch: π(α) = {left} but π(β) = {right}")]
    ExponentMismatch { left: i64, right: i64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unimodular (|det| = {det}, need 1)")]
    NotUnimodular { det: String },

    #[error("invalid stratum {height}: {reason}")]
    StrataInvalid { height: usize, reason: String },

    #[error("no eventual period ≤ {bound} found for the turn recursion; the declaration is not a valid completely split map")]
    PeriodNotFound { bound: usize },

    #[error("circuit is not completely split against the declared terms (tried {attempts} images)")]
    NotCompletelySplit { attempts: usize },

    #[error("sequence too short for fitting: {len} < {min}")]
    TooShort { len: usize, min: usize },

    #[error("sequence tail mixes zero and nonzero entries; cannot fit a growth model")]
    NonPositiveTail,

    #[error("{file}:{line}:{col}: {msg}")]
    Parse {
        file: String,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("invalid declaration: {0}")]
    Invalid(String),

    #[error("internal cross-check failed: {0}")]
    CrossCheck(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(file: &str, line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.to_string(),
            line,
            col,
            msg: msg.into(),
        }
    }

    /// Exit code the CLI reports for this error (1 = validation, 2 = budget).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LengthBudgetExceeded { .. } => 2,
            _ => 1,
        }
    }
}
