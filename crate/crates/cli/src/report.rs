//! Report envelope and its JSON and CSV renderings.
//!
//! Field dictionary of the JSON envelope:
//!
//! - `schema_version`: bumped whenever a field changes meaning
//! - `tool`, `tool_version`: name and version of the binary
//! - `command`: the subcommand that ran
//! - `config`: every setting that affects the result, tolerances as `tol.*`
//! - `config_hash`: sha256 over `command` and `config`
//! - `seed`: the random seed, `null` for deterministic commands
//! - `result`: command-specific payload; values come with an `err` field
//!   where a quadrature error estimate exists
//! - `checks`: every internal invariant that was tested
//! - `failures`: names of the failed checks; empty iff the exit code is 0
//!
//! The CSV form is a `path,value` projection of `result` followed by one
//! `check.<name>` row per check.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
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

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub result: Value,
    pub checks: Vec<Check>,
}

pub struct Report {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub outcome: Outcome,
}

impl Report {
    pub fn failures(&self) -> Vec<String> {
        self.outcome.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "tool": "melnikov",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "result": self.outcome.result,
            "checks": self.outcome.checks,
            "failures": self.failures(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut rows = vec![
            ("schema_version".to_string(), SCHEMA_VERSION.to_string()),
            ("tool_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("command".to_string(), self.command.clone()),
            ("config_hash".to_string(), self.config_hash.clone()),
            ("seed".to_string(), self.seed.map_or(String::new(), |s| s.to_string())),
        ];
        flatten("result", &self.outcome.result, &mut rows);
        for c in &self.outcome.checks {
            rows.push((format!("check.{}", c.name), if c.pass { "pass" } else { "fail" }.into()));
        }
        let mut out = String::from("path,value\n");
        for (p, v) in rows {
            out.push_str(&field(&p));
            out.push(',');
            out.push_str(&field(&v));
            out.push('\n');
        }
        out
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, rows);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(pass: bool) -> Report {
        Report {
            command: "zeros".into(),
            config: BTreeMap::from([("case".to_string(), "r18".to_string())]),
            config_hash: "ab".into(),
            seed: Some(3),
            outcome: Outcome {
                result: json!({"roots": [-0.1, -0.05], "label": "a,b", "t_s": null}),
                checks: vec![Check::new("ok", true, ""), Check::new("bound", pass, "")],
            },
        }
    }

    #[test]
    fn failures_list_failed_checks() {
        assert!(sample(true).failures().is_empty());
        assert_eq!(sample(false).to_json()["failures"], json!(["bound"]));
    }

    #[test]
    fn csv_is_a_flat_projection() {
        let csv = sample(false).to_csv();
        assert!(csv.starts_with("path,value\n"));
        assert!(csv.contains("result.roots.1,-0.05\n"));
        assert!(csv.contains("result.label,\"a,b\"\n"));
        assert!(csv.contains("result.t_s,\n"));
        assert!(csv.contains("check.bound,fail\n"));
    }
}
