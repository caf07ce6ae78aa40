//! Scenario reports, deterministic CSV emission and config hashing.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// One verification check inside a scenario.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
    pub runtime_s: f64,
}

impl CheckResult {
    pub fn new(
        id: &str,
        pass: bool,
        value: f64,
        threshold: f64,
        detail: impl Into<String>,
        runtime_s: f64,
    ) -> Self {
        CheckResult {
            id: id.to_string(),
            pass,
            value,
            threshold,
            detail: detail.into(),
            runtime_s,
        }
    }
}

/// Full scenario outcome with provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
    pub runtime_s: f64,
}

impl ScenarioReport {
    pub fn new(scenario: &str, config_hash: String, seed: u64, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        let runtime_s = checks.iter().map(|c| c.runtime_s).sum();
        ScenarioReport {
            scenario: scenario.to_string(),
            config_hash,
            seed,
            checks,
            pass,
            runtime_s,
        }
    }

    pub fn print_lines(&self) {
        for c in &self.checks {
            println!(
                "{} {}: value {:.6e} vs threshold {:.6e} ({}) [{:.2}s]",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.value,
                c.threshold,
                c.detail,
                c.runtime_s
            );
        }
    }
}

/// FNV-1a over the canonical config JSON; stable across runs and builds.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// One CSV row: scenario, quantity, indices, value.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub scenario: String,
    pub quantity: String,
    pub indices: String,
    pub value: f64,
}

/// Deterministic CSV bytes with the fixed header row.
pub fn csv_bytes(rows: &[CsvRow]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"scenario,quantity,indices,value\n");
    for r in rows {
        out.extend_from_slice(
            format!(
                "{},{},{},{:.17e}\n",
                r.scenario, r.quantity, r.indices, r.value
            )
            .as_bytes(),
        );
    }
    out
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
