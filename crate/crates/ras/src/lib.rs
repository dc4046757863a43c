//! Command line front end, file formats and parallel drivers for `ras-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::{Error, Result};
