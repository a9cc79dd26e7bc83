use serde::Serialize;
use serde_json::Value;

/// Machine-readable result of one command. Byte-identical for identical
/// inputs unless wall time is requested.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `None` for commands without a pass/fail verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    /// Human rendering for `--format text`.
    #[serde(skip)]
    pub text: String,
}

impl Report {
    pub fn new(command: &str, result: Value, text: String) -> Report {
        Report { command: command.to_string(), space: None, seed: None, passed: None, result, wall_time_ms: None, text }
    }

    pub fn space(mut self, name: &str) -> Report {
        self.space = Some(name.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Report {
        self.seed = Some(seed);
        self
    }

    pub fn verdict(mut self, passed: bool) -> Report {
        self.passed = Some(passed);
        self
    }

    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }
}
