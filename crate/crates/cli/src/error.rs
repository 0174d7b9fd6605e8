use afenv::bratteli::ColumnDefect;
use serde_json::{json, Value};
use thiserror::Error;

use crate::export::WitnessOut;

/// Exit status for mathematical rejections of the input.
pub const EXIT_REJECTED: i32 = 2;
/// Exit status for usage, schema and precondition failures.
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("invalid input at {pointer}: {message}")]
    Validation { pointer: String, message: String },
    #[error("{message}")]
    NotCompressionType {
        pointer: String,
        message: String,
        obstruction: Box<WitnessOut>,
    },
    #[error("system is not essentially unital: {}", .defects.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    NotEssentiallyUnital { defects: Vec<ColumnDefect> },
    #[error("{0}")]
    NonStationary(String),
    #[error("{0}")]
    NotStabilized(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Schema { .. } => "schema",
            CliError::Validation { .. } => "validation",
            CliError::NotCompressionType { .. } => "not_compression_type",
            CliError::NotEssentiallyUnital { .. } => "not_essentially_unital",
            CliError::NonStationary(_) => "non_stationary",
            CliError::NotStabilized(_) => "not_stabilized",
            CliError::Mismatch(_) => "roundtrip_mismatch",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotCompressionType { .. } | CliError::NotEssentiallyUnital { .. } => EXIT_REJECTED,
            _ => EXIT_USAGE,
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            CliError::Schema { pointer, .. } | CliError::Validation { pointer, .. } => {
                v["pointer"] = json!(pointer);
            }
            CliError::NotCompressionType {
                pointer, obstruction, ..
            } => {
                v["pointer"] = json!(pointer);
                v["obstruction"] = serde_json::to_value(obstruction).expect("serializable");
            }
            CliError::NotEssentiallyUnital { defects } => {
                v["defects"] = serde_json::to_value(defects).expect("serializable");
            }
            _ => {}
        }
        v
    }
}
