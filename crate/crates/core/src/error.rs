use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every pipeline stage.
///
/// The variants map one-to-one onto the command-line exit codes, see
/// [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: bad grid, mismatched shapes, too few samples.
    InvalidInput(String),
    /// Unknown profile or inconsistent run configuration.
    Config(String),
    /// The graph is not timelike at some node (`1 − φ_t² + φ_x² ≤ floor`).
    NotTimelike { x: f64, t: f64, radicand: f64 },
    /// `|ψ|` left the overflow guard.
    BlowUp { t: f64, r: f64, psi: f64 },
    /// Picard iteration on a characteristic cell failed to settle.
    PicardDiverged { t: f64, r: f64, residual: f64, iterations: usize },
    /// Characteristic speeds outgrew the fixed time step.
    CflViolation { t: f64, speed: f64, limit: f64 },
    /// The seed frame handed to the slice integrator is not adapted.
    InvalidSeed(String),
    /// A query fell outside the sampled region.
    OutOfDomain(String),
}

impl Error {
    /// Stable process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) => 1,
            Error::NotTimelike { .. } => 2,
            Error::BlowUp { .. } | Error::PicardDiverged { .. } | Error::CflViolation { .. } => 3,
            Error::InvalidSeed(_) | Error::OutOfDomain(_) => 4,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::NotTimelike { x, t, radicand } => {
                write!(f, "surface not timelike at t = {t}, x = {x} (radicand {radicand:e})")
            }
            Error::BlowUp { t, r, psi } => {
                write!(f, "blow-up suspected at t = {t}, r = {r} (psi = {psi:e})")
            }
            Error::PicardDiverged { t, r, residual, iterations } => write!(
                f,
                "picard iteration did not converge in cell t = {t}, r = {r} \
                 after {iterations} iterations (residual {residual:e})"
            ),
            Error::CflViolation { t, speed, limit } => {
                write!(f, "characteristic speed {speed} exceeds CFL budget {limit} at t = {t}")
            }
            Error::InvalidSeed(msg) => write!(f, "invalid seed frame: {msg}"),
            Error::OutOfDomain(msg) => write!(f, "out of domain: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
