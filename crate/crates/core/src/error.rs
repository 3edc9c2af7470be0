use alloc::string::String;

use thiserror::Error;

/// Errors raised by the bound computations.
///
/// Every variant except [`Error::Numeric`] describes invalid input; callers
/// that need to tell the two apart can use [`Error::is_validation`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("all weights are zero; at least one must be strictly positive")]
    AllZero,

    #[error("entry {index} is {value}; weights must be finite and non-negative")]
    InvalidEntry { index: usize, value: f64 },

    #[error("distribution is empty")]
    Empty,

    #[error("probabilities sum to {sum}, expected 1 within {eps}")]
    NotNormalized { sum: f64, eps: f64 },

    #[error("probabilities are not sorted in descending order at position {index}")]
    Unsorted { index: usize },

    #[error("m = {m} is out of range; need 1 <= m <= n = {n}")]
    BadM { m: usize, n: usize },

    #[error("pi = {pi} is infeasible for n = {n}, m = {m}; need 0 <= pi <= (n-m)/n")]
    Infeasible { n: usize, m: usize, pi: f64 },

    #[error("p_hat = {p_hat} lies outside [{lo}, {hi}]")]
    BadPHat { p_hat: f64, lo: f64, hi: f64 },

    #[error("entropy {bits} bits is out of range; need 0 <= H <= log2(n) = {max}")]
    BadEntropy { bits: f64, max: f64 },

    #[error("k = {k} is out of range; need 1 <= k <= m = {m}")]
    BadK { k: usize, m: usize },

    #[error("{what} = {size} exceeds the configured cap {cap}")]
    TooLarge {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("object id {0} appears more than once")]
    DuplicateId(usize),

    #[error("object id {id} is out of range for n = {n}")]
    BadId { id: usize, n: usize },

    #[error("remaining mass {remaining} vanished at step {step} with positive mass still to draw")]
    ZeroDenominator { step: usize, remaining: f64 },

    #[error("only {support} objects carry positive mass; k = {k} distinct draws are impossible")]
    InsufficientSupport { support: usize, k: usize },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// `true` for input-validation failures, `false` for internal numeric ones.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
