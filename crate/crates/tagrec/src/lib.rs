//! File formats, configuration and the staged command-line pipeline around
//! [`tagrec_core`].
//!
//! Each stage reads and writes plain tab-separated files that carry the
//! fingerprint of the configuration and data that produced them:
//! `ingest` → `split` → `lda` → `recommend` / `eval`, plus `drift` and
//! `synth`.

pub mod algorithms;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use commands::{run, Cli};
pub use error::CliError;
