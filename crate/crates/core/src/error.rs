use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// ALM sub-step, used to report where an iteration went non-finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    J,
    Z,
    E,
    Multiplier,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::J => "J-step",
            Step::Z => "Z-step",
            Step::E => "E-step",
            Step::Multiplier => "multiplier-step",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric: ‖S − Sᵀ‖_F = {asymmetry:.3e} exceeds {allowed:.3e}")]
    Symmetry { asymmetry: f64, allowed: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("solver diverged: non-finite values after the {step} of iteration {iteration}")]
    Divergence { step: Step, iteration: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("{}", parse_message(*line, message))]
    Parse { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_message(line: Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("parse error at line {line}: {message}"),
        None => format!("parse error: {message}"),
    }
}
