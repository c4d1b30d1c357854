use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("cell index {index} out of range for a {rows}x{cols} grid")]
    IndexOutOfRange { index: usize, rows: usize, cols: usize },

    #[error("cell {0} is listed as both signal and ground")]
    OverlappingRoles(usize),

    #[error("layout cannot be solved electrically: {0}")]
    Unsolvable(&'static str),

    #[error("operation requires a square grid, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is singular in {context} (condition estimate {condition:e})")]
    Singular { context: &'static str, condition: f64 },

    #[error("non-physical parameters: {0}")]
    NonPhysical(String),

    #[error("solver produced an invalid result: {0}")]
    InvalidResult(String),

    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("passivity violated: power deficit {deficit:e} at port {port}")]
    PassivityViolation { port: usize, deficit: f64 },

    #[error("solve failed at {freq_hz:e} Hz: {cause}")]
    AtFrequency { freq_hz: f64, cause: Box<Error> },

    #[error("thermal problem is singular: {0}")]
    SingularThermal(&'static str),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { what: &'static str, iterations: usize, residual: f64 },

    #[error("electrothermal iteration diverged after {iterations} iterations (T_max trace {t_max_history:?} K)")]
    Diverged { iterations: usize, t_max_history: Vec<f64> },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn at_frequency(self, freq_hz: f64) -> Self {
        Error::AtFrequency { freq_hz, cause: Box::new(self) }
    }

    /// True for errors caused by invalid inputs as opposed to numerical
    /// failures inside a solver.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidLayout(_)
            | Error::IndexOutOfRange { .. }
            | Error::OverlappingRoles(_)
            | Error::Unsolvable(_)
            | Error::NotSquare { .. }
            | Error::InvalidParameter { .. }
            | Error::NonPhysical(_)
            | Error::Mismatch(_) => true,
            Error::AtFrequency { cause, .. } => cause.is_validation(),
            _ => false,
        }
    }
}
