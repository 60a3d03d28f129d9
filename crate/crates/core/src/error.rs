use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A syntax error in a weight-function expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input where parsing stopped.
    pub offset: usize,
    /// Human readable descriptions of the tokens that would have been accepted.
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: expected ", self.offset)?;
        for (i, e) in self.expected.iter().enumerate() {
            if i > 0 {
                f.write_str(if i + 1 == self.expected.len() {
                    " or "
                } else {
                    ", "
                })?;
            }
            f.write_str(e)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// A non-finite or undefined intermediate while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot evaluate at t = {t}: {reason}")]
pub struct EvalError {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus k must be at least 1, got {0}")]
    InvalidModulus(u64),
    #[error("gcd(k, l) must be 1, but gcd({k}, {l}) = {gcd}")]
    Coprimality { k: u64, l: u64, gcd: u64 },
    #[error("bound {0} is invalid: expected a finite value >= 2")]
    InvalidBound(f64),
    #[error("bound {x} exceeds the sieve cap {cap}")]
    BoundTooLarge { x: f64, cap: u64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand is not finite at t = {t}")]
    NonFiniteIntegrand { t: f64 },
    #[error("adaptive quadrature exceeded the maximum depth on [{a}, {b}]")]
    MaxDepthExceeded { a: f64, b: f64 },
    #[error("{name} = {value} is out of range: {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("no canonical main term for kind `{0}`")]
    UnknownKind(String),
    #[error("grid must be non-empty and strictly increasing with all points >= 2")]
    InvalidGrid,
    #[error("partial sum vanishes at n = {n}")]
    ZeroDenominator { n: u64 },
}
