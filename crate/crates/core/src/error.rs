use thiserror::Error;

use crate::latency::LutError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("choice index {0} is out of range 0..=11")]
    ChoiceIndex(usize),

    #[error("no block choice with expansion {expansion} and kernel {kernel}")]
    IllegalChoice { expansion: u32, kernel: u32 },

    #[error(transparent)]
    ParseChromosome(#[from] ParseChromosomeError),

    #[error(transparent)]
    Lut(#[from] LutError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evaluation failed for chromosome {chromosome}: {reason}")]
    Evaluation { chromosome: String, reason: String },

    #[error("architecture table: {0}")]
    ArchTable(String),

    #[error("{0}")]
    Io(String),
}

/// Failure to read a chromosome from its comma-separated text form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseChromosomeError {
    #[error("expected 14 genes, found {0}")]
    Length(usize),
    #[error("gene {position}: cannot parse {text:?} as an integer")]
    NotInteger { position: usize, text: String },
    #[error("gene {position}: choice {value} is out of range 0..=11")]
    OutOfRange { position: usize, value: i64 },
}
