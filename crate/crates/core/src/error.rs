use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is not a probability in [0, 1]")]
    InvalidProbability { what: &'static str, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    /// The keep probability of a purification round fell below the floor;
    /// the protocol cannot proceed.
    #[error("degenerate dynamics: keep probability {keep_probability:e} below {floor:e} at round {round}")]
    Degenerate {
        round: usize,
        keep_probability: f64,
        floor: f64,
    },

    #[error("no threshold in [{lo}, {hi}]: regime is {regime} at both ends")]
    NoThreshold { lo: f64, hi: f64, regime: String },

    #[error("insufficient tail for exponent fit: {0}")]
    InsufficientTail(String),

    /// Fewer than two pairs remain, so no further round can run.
    #[error("ensemble halted with {pairs} pair(s) left")]
    Halt { pairs: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { what, value })
    }
}

/// Validates a probability vector: finite, nonnegative, summing to one within `tol`.
pub(crate) fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} = {v} is negative or not finite"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}, expected 1")));
    }
    Ok(())
}
