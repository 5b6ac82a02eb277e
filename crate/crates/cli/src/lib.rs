//! Command-line front end for `phirg-core`.
//!
//! [`run_cli`] is the whole program minus process plumbing, so tests can
//! drive it in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use config::{parse_config, Parsed};
use error::CliError;

/// Exit status and the two output streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn error_text(e: &CliError) -> String {
    let mut s = serde_json::to_string(&e.to_json()).expect("serializable error");
    s.push('\n');
    s
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run_cli(argv: &[String]) -> Outcome {
    let cfg = match parse_config(argv) {
        Ok(Parsed::Run(b)) => *b,
        Ok(Parsed::Info(text)) => {
            return Outcome {
                code: 0,
                stdout: text,
                stderr: String::new(),
            }
        }
        Err(e) => {
            return Outcome {
                code: e.exit_code(),
                stdout: String::new(),
                stderr: error_text(&e),
            }
        }
    };
    let (report, error) = match commands::run(&cfg) {
        Ok(r) => (Some(r), None),
        Err(f) => (f.partial.map(|b| *b), Some(f.error)),
    };
    let mut stdout = report
        .map(|r| output::render(&r, cfg.format))
        .unwrap_or_default();
    let mut error = error;
    if let Some(path) = &cfg.out {
        if !stdout.is_empty() {
            if let Err(e) = std::fs::write(path, &stdout) {
                error = Some(CliError::Io {
                    message: format!("cannot write '{}': {e}", path.display()),
                    path: path.display().to_string(),
                });
            }
            stdout.clear();
        }
    }
    match error {
        None => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Some(e) => Outcome {
            code: e.exit_code(),
            stdout,
            stderr: error_text(&e),
        },
    }
}
