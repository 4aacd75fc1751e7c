//! Crate-level error tagging each failure with the module that raised it.

use thiserror::Error;

use crate::bench::{BenchError, MaskError};
use crate::mirror::MirrorError;
use crate::model::ModelError;
use crate::sim::SimError;
use crate::source::SourceError;
use crate::verify::VerifyError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("source: {0}")]
    Source(#[from] SourceError),
    #[error("mirror: {0}")]
    Mirror(#[from] MirrorError),
    #[error("bench: {0}")]
    Bench(#[from] BenchError),
    #[error("mask: {0}")]
    Mask(#[from] MaskError),
    #[error("sim: {0}")]
    Sim(#[from] SimError),
    #[error("verify: {0}")]
    Verify(#[from] VerifyError),
}

impl Error {
    /// Name of the module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Model(_) => "model",
            Error::Source(_) => "source",
            Error::Mirror(_) => "mirror",
            Error::Bench(_) => "bench",
            Error::Mask(_) => "mask",
            Error::Sim(_) => "sim",
            Error::Verify(_) => "verify",
        }
    }
}
