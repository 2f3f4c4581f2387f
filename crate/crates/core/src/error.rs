//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by the numerical and arithmetic kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The gamma function (or a quantity built from it) was evaluated at a pole.
    #[error("pole at non-positive integer {0}")]
    Pole(f64),

    /// A series did not reach the requested tolerance within the term cap.
    #[error("{what} did not converge within {terms} terms")]
    NonConvergence {
        /// Name of the series.
        what: &'static str,
        /// Number of terms summed before giving up.
        terms: usize,
    },

    /// A discriminant that is not fundamental (or not a discriminant at all).
    #[error("{0} is not a fundamental discriminant")]
    NonFundamental(i64),

    /// An integer that is not congruent to 0 or 1 modulo 4.
    #[error("{0} is not a discriminant (must be 0 or 1 mod 4)")]
    BadDiscriminant(i64),

    /// A coprimality hypothesis was violated.
    #[error("gcd condition violated: {0}")]
    Gcd(String),

    /// Two objects built over different discriminant modules were combined.
    #[error("module mismatch: {0}")]
    ModuleMismatch(String),

    /// An exponent that is incompatible with the coset it was filed under.
    #[error("exponent {m} is not congruent to the norm of coset {coset}")]
    ExponentCongruence {
        /// Coset index.
        coset: usize,
        /// Offending exponent, printed as a fraction.
        m: String,
    },

    /// Evaluation too close to a singular set (divisor, diagonal, CM point).
    #[error("singular evaluation: {0}")]
    Singular(String),

    /// Too few Dirichlet coefficients for a reliable evaluation.
    #[error("insufficient coefficients: have {have}, need at least {need}")]
    InsufficientCoefficients {
        /// Number supplied.
        have: usize,
        /// Number required.
        need: usize,
    },

    /// Lattice-level structural failure (non-even, non-sublattice, overflow).
    #[error("lattice error: {0}")]
    Lattice(String),

    /// Indefinite enumeration requested without a bound or fundamental domain.
    #[error("indefinite enumeration requires a bound policy")]
    MissingBound,

    /// Invalid input data (malformed parameters, unsupported options).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// I/O failure while reading or writing caches and reports.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
