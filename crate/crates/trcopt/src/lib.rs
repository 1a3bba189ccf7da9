//! File formats, data loading, and the command-line pipeline around `trcopt-core`.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod formats;
pub mod model_io;
pub mod pipeline;

pub use error::{Error, Result};
