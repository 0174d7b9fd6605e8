//! Batch front end for the `afenv` library: parses system files, runs the
//! decide / telescope / diagram / envelope pipeline and renders JSON or DOT.

pub mod error;
pub mod export;
pub mod input;
pub mod run;

pub use error::CliError;
pub use run::{resolve_seed, run, Command, Format, MRange, Options, Outcome, Verb};
