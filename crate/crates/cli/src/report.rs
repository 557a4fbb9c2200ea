use std::collections::BTreeMap;

use cyclovan::Error;
use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), ok, detail: None }
    }

    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub result: Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
    #[serde(skip)]
    pub summary: String,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_string(),
            params: BTreeMap::new(),
            result: Value::Null,
            checks: Vec::new(),
            error: None,
            timing_ms: None,
            summary: String::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("params serialize"));
        self
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    InvalidInput,
    Inconclusive,
    Internal,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::InvalidInput => 1,
            Outcome::Inconclusive => 2,
            Outcome::Internal => 3,
        }
    }

    pub fn of_error(err: &Error) -> Self {
        if err.is_internal() {
            Outcome::Internal
        } else if err.is_resource() {
            Outcome::Inconclusive
        } else {
            Outcome::InvalidInput
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::InvalidInput => "invalid_input",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Internal => "internal",
        }
    }
}
