use thiserror::Error;

/// Errors raised across the capacity-design toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Two series (or a series and an operation) disagree in length or sampling.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The inverse transform produced a non-negligible imaginary part.
    #[error("spectrum is not conjugate-symmetric (relative imaginary residue {0:.3e})")]
    Symmetry(f64),

    /// The generator total cannot be split into biomass plus gas units.
    #[error(
        "infeasible generator split: total {total_mw:.4} MW is below biomass {biomass_mw:.4} MW"
    )]
    InfeasibleSplit { total_mw: f64, biomass_mw: f64 },

    /// No design satisfies the reliability constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
