use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exceptional point: |r| = {modulus:e} at k = {k}")]
    ExceptionalPoint { k: f64, modulus: f64 },
    #[error("spectrum not real: |Delta| = {gain} >= |delta| = {delta}")]
    SpectrumNotReal { delta: f64, gain: f64 },
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("time step too large: {0}")]
    StepTooLarge(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("wavepacket tails truncated: boundary amplitude {0:e}")]
    TailsTruncated(f64),
    #[error("packet not inside the ring (prob_ring = {0})")]
    PacketNotInRing(f64),
    #[error("protocol timing invalid: {0}")]
    ProtocolTimingInvalid(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the numerics (EP, convergence, step size) rather than inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ExceptionalPoint { .. }
                | Error::SpectrumNotReal { .. }
                | Error::NonConvergence(_)
                | Error::StepTooLarge(_)
                | Error::ZeroNorm
                | Error::PacketNotInRing(_)
                | Error::TailsTruncated(_)
        )
    }
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

pub type Result<T> = std::result::Result<T, Error>;
