//! The machine-readable run report and its two renderings.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    LowConfidence,
    Error,
}

/// One document per run. Field order is fixed; every numeric output is
/// accompanied by an entry in `budgets` (an error bound or "exact").
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub budgets: BTreeMap<String, String>,
    pub status: Status,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            budgets: BTreeMap::new(),
            status: Status::Ok,
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.into(), value.to_string());
        self
    }

    pub fn output(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.outputs.insert(key.into(), value.to_string());
        self
    }

    pub fn budget(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.budgets.insert(key.into(), value.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        let section = |name: &str, map: &BTreeMap<String, String>, out: &mut String| {
            if map.is_empty() {
                return;
            }
            out.push_str(&format!("{name}:\n"));
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, v) in map {
                out.push_str(&format!("  {k:width$}  {v}\n"));
            }
        };
        section("inputs", &self.inputs, &mut out);
        section("outputs", &self.outputs, &mut out);
        section("budgets", &self.budgets, &mut out);
        let status = match self.status {
            Status::Ok => "ok",
            Status::LowConfidence => "low_confidence",
            Status::Error => "error",
        };
        out.push_str(&format!("status: {status}\n"));
        out
    }
}

/// Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 internal
/// numeric failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
