use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

/// Output of one pipeline run. Contains nothing time- or host-dependent, so identical input
/// gives byte-identical output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub pipeline: String,
    /// SHA-256 of the model bytes followed by the canonical flag list.
    pub input_digest: String,
    pub flags: Value,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn new(pipeline: &str, model: &[u8], flags: Value, results: Value, checks: Vec<Check>) -> Self {
        let mut h = Sha256::new();
        h.update(model);
        h.update([0u8]);
        h.update(flags.to_string().as_bytes());
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            pipeline: pipeline.to_string(),
            input_digest: format!("{:x}", h.finalize()),
            flags,
            results,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// One `path = value` line per leaf, then one line per check. Leaves are printed exactly
    /// as in the JSON form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "pipeline = {}", self.pipeline).unwrap();
        writeln!(out, "schema_version = {}", self.schema_version).unwrap();
        writeln!(out, "input_digest = {}", self.input_digest).unwrap();
        flatten("flags", &self.flags, &mut out);
        flatten("results", &self.results, &mut out);
        for c in &self.checks {
            writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail).unwrap();
        }
        out
    }
}

fn flatten(path: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{path}.{k}"), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{path}[{i}]"), x, out);
            }
        }
        Value::String(s) => writeln!(out, "{path} = {s}").unwrap(),
        other => writeln!(out, "{path} = {other}").unwrap(),
    }
}
