//! Settings merged from defaults, a config file and command-line flags.
//!
//! The file is flat `key = value` text. Keys before any section apply to
//! every command, keys under `[name]` only to the command `name`, and keys
//! under `[tol]` are tolerances. `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

/// Tolerances a run may override, with their defaults.
pub const TOLERANCES: [(&str, f64); 15] = [
    ("quad_rel", 1e-12),
    ("quad_abs", 1e-13),
    ("margin", 1e-6),
    ("root", 1e-12),
    ("double", 1e-9),
    ("ode_rtol", 1e-12),
    ("ode_atol", 1e-14),
    ("report", 1e-8),
    ("relation", 1e-9),
    ("derivative", 1e-8),
    ("slope", 0.05),
    ("limit", 1e-3),
    ("log_spread", 0.05),
    ("cycle_gap", 5e-3),
    ("melnikov_rel", 0.1),
];

/// Keys that only say where output goes; they do not enter the hash.
const PLUMBING: [&str; 2] = ["out", "format"];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub command: String,
    values: BTreeMap<String, String>,
}

fn parse_file(text: &str, command: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = Some(name.trim().to_string());
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        match section.as_deref() {
            None => {
                out.entry(k).or_insert(v);
            }
            Some("tol") => {
                out.insert(format!("tol.{k}"), v);
            }
            Some(s) if s == command => {
                // section keys win over the flat ones
                out.insert(k, v);
            }
            Some(_) => {}
        }
    }
    Ok(out)
}

impl Settings {
    /// `flags` are the values given on the command line, `tols` the
    /// repeated `--tol name=value` arguments.
    pub fn merge(
        command: &str,
        defaults: &[(&str, &str)],
        file: Option<&Path>,
        flags: BTreeMap<String, String>,
        tols: &[String],
    ) -> Result<Settings> {
        let mut values: BTreeMap<String, String> = defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in TOLERANCES {
            values.insert(format!("tol.{k}"), format!("{v:e}"));
        }
        if let Some(p) = file {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            values.extend(parse_file(&text, command)?);
        }
        values.extend(flags);
        for t in tols {
            let (k, v) = t.split_once('=').ok_or_else(|| anyhow!("--tol expects name=value, got '{t}'"))?;
            values.insert(format!("tol.{}", k.trim()), v.trim().to_string());
        }
        let s = Settings { command: command.to_string(), values };
        s.validate_tolerances()?;
        Ok(s)
    }

    fn validate_tolerances(&self) -> Result<()> {
        for (k, v) in self.values.range("tol.".to_string()..) {
            let Some(name) = k.strip_prefix("tol.") else { break };
            if !TOLERANCES.iter().any(|(n, _)| *n == name) {
                let known: Vec<&str> = TOLERANCES.iter().map(|(n, _)| *n).collect();
                bail!("unknown tolerance '{name}' (known: {})", known.join(", "));
            }
            let x: f64 = v.parse().map_err(|_| anyhow!("tolerance {name}: '{v}' is not a number"))?;
            if !(x > 0.0 && x.is_finite()) {
                bail!("tolerance {name} must be positive, got {v}");
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| anyhow!("missing --{key}"))
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| anyhow!("--{key}: cannot parse '{v}'")))
            .transpose()
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.parsed(key)?.ok_or_else(|| anyhow!("missing --{key}"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parsed(key)?.ok_or_else(|| anyhow!("missing --{key}"))
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.get(key), Some("true" | "1" | "yes"))
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.get(&format!("tol.{name}")).and_then(|v| v.parse().ok()).expect("tolerances are validated on merge")
    }

    /// Comma-separated reals.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| anyhow!("--{key}: '{x}' is not a number")))
                    .collect()
            })
            .transpose()
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        self.parsed("seed")
    }

    /// Everything that affects the result, in key order.
    pub fn effective(&self) -> BTreeMap<String, String> {
        self.values.iter().filter(|(k, _)| !PLUMBING.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        for (k, v) in self.effective() {
            h.update([0u8]);
            h.update(k.as_bytes());
            h.update([b'=']);
            h.update(v.as_bytes());
        }
        hex::encode(h.finalize())
    }
}
