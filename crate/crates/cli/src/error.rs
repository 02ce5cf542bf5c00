use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{frame}: no BIS found")]
    NoBis { frame: String },
    #[error("schedule verification failed: distance {distance:.3e} exceeds {tolerance:.1e}")]
    Verification { distance: f64, tolerance: f64 },
    #[error(transparent)]
    Core(#[from] floquet_core::Error),
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame: Option<&'a str>,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NoBis { .. } => 2,
            CliError::Verification { .. } => 3,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
            CliError::NoBis { .. } => "no_bis_found",
            CliError::Verification { .. } => "verification_failed",
            CliError::Core(_) => "numerics",
        }
    }

    /// One-line JSON for the diagnostic stream.
    pub fn diagnostic(&self) -> String {
        let frame = match self {
            CliError::NoBis { frame } => Some(frame.as_str()),
            _ => None,
        };
        serde_json::to_string(&Diagnostic {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            frame,
        })
        .expect("diagnostic serializes")
    }
}
