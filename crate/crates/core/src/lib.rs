pub mod error;
pub mod impute;
pub mod index;
pub mod indicators;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
