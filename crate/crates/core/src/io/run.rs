//! Scenario execution and the on-disk artifact set.
//!
//! A run directory holds `provenance.json`, `metrics.csv`, `verdicts.jsonl`,
//! `report.json`, one `.ffd` dump per stored field and `checksums.txt` with
//! the SHA-256 of every other file. No timestamps are recorded, so identical
//! config and seed give identical bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{RunConfig, ScenarioKind};
use super::dump::{encode_dump, sha256_hex};
use crate::error::{Error, Result};
use crate::verify::{execute, ScenarioOutput, Verdict};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub program: &'static str,
    pub version: &'static str,
    pub scenario: &'static str,
    pub seed: u64,
    /// SHA-256 of the canonical TOML rendering of the resolved config.
    pub config_sha256: String,
    pub config: String,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub output: ScenarioOutput,
    /// File name to SHA-256, sorted by name.
    pub checksums: BTreeMap<String, String>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.output.all_pass()
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.output.verdicts
    }
}

/// Resolves the scenario: the subcommand wins, a conflicting config entry is an error.
pub fn resolve_scenario(cfg: &RunConfig, requested: Option<ScenarioKind>) -> Result<ScenarioKind> {
    match (requested, cfg.scenario) {
        (Some(r), Some(c)) if r != c => Err(Error::config(
            "scenario",
            format!("config names `{}` but the command is `{}`", c.name(), r.name()),
        )),
        (Some(r), _) => Ok(r),
        (None, Some(c)) => Ok(c),
        (None, None) => Err(Error::config("scenario", "no scenario given")),
    }
}

pub fn provenance(cfg: &RunConfig, kind: ScenarioKind) -> Result<Provenance> {
    let mut resolved = cfg.clone();
    resolved.scenario = Some(kind);
    let config = resolved.to_toml()?;
    Ok(Provenance {
        program: "fracflow",
        version: VERSION,
        scenario: kind.name(),
        seed: cfg.seed,
        config_sha256: sha256_hex(config.as_bytes()),
        config,
    })
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Format(e.to_string()))
}

fn json_pretty<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Format(e.to_string()))
}

/// Byte contents of every artifact of a finished scenario.
pub fn artifacts(cfg: &RunConfig, out: &ScenarioOutput) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut files = BTreeMap::new();
    files.insert("provenance.json".to_string(), json_pretty(&provenance(cfg, out.scenario)?)?.into_bytes());
    files.insert("metrics.csv".to_string(), out.table.to_csv().into_bytes());
    let mut verdicts = String::new();
    for v in &out.verdicts {
        #[derive(Serialize)]
        struct Line<'a> {
            scenario: &'static str,
            #[serde(flatten)]
            verdict: &'a Verdict,
        }
        verdicts.push_str(&json_line(&Line {
            scenario: out.scenario.name(),
            verdict: v,
        })?);
        verdicts.push('\n');
    }
    files.insert("verdicts.jsonl".to_string(), verdicts.into_bytes());
    files.insert("report.json".to_string(), json_pretty(&out.report)?.into_bytes());
    for (name, field) in &out.dumps {
        files.insert(format!("{name}.ffd"), encode_dump(field));
    }
    Ok(files)
}

/// Runs `kind` and writes its artifacts into `out_dir`, creating it if needed.
pub fn run_scenario(cfg: &RunConfig, kind: ScenarioKind, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let output = execute(kind, cfg)?;
    let files = artifacts(cfg, &output)?;
    std::fs::create_dir_all(out_dir)?;
    let mut checksums = BTreeMap::new();
    for (name, bytes) in &files {
        std::fs::write(out_dir.join(name), bytes)?;
        checksums.insert(name.clone(), sha256_hex(bytes));
    }
    let listing: String = checksums.iter().map(|(n, h)| format!("{h}  {n}\n")).collect();
    std::fs::write(out_dir.join("checksums.txt"), listing)?;
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        output,
        checksums,
    })
}
