use std::path::PathBuf;

use crate::fixed_point::FxFormat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("fixed-point format mismatch: {left} vs {right}")]
    FormatMismatch { left: FxFormat, right: FxFormat },

    #[error("invalid fixed-point format: {total_bits} total bits, {frac_bits} fractional bits")]
    InvalidFormat { total_bits: u32, frac_bits: u32 },

    #[error("LFSR register must be nonzero")]
    ZeroLfsrState,

    #[error("no default taps for a {0}-bit LFSR")]
    UnsupportedLfsrWidth(u32),

    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("linear system is singular")]
    Singular,

    #[error("all {0} nearest-neighbour pairs are degenerate; exponent undefined")]
    DegenerateLyapunov(usize),

    #[error("signal has zero power; SNR is undefined")]
    ZeroPowerSignal,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sample rate is unknown or non-positive")]
    UnknownSampleRate,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
