//! Writes data files, `summary.txt` and `manifest.json` into the output
//! directory. Nothing is written anywhere else.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::experiments::{Predicate, Report, Verdict};

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Seeds {
    pub master_seed: u64,
    /// Each sample draws its amplitudes from streams keyed by
    /// `(master_seed, sample_index, site)`.
    pub sample_indices: Vec<u64>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub experiment: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub seeds: Seeds,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub verdict: &'static str,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub predicates: &'a [Predicate],
    pub files: Vec<FileEntry>,
}

/// Overall verdict and exit code: any FAIL gives 4, otherwise any
/// inconclusive predicate gives 5.
pub fn verdict(predicates: &[Predicate]) -> (&'static str, u8) {
    if predicates.iter().any(|p| p.verdict == Verdict::Fail) {
        ("FAIL", 4)
    } else if predicates.iter().any(|p| p.verdict == Verdict::Inconclusive) {
        ("INCONCLUSIVE", 5)
    } else {
        ("PASS", 0)
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<FileEntry> {
    fs::write(dir.join(name), bytes)?;
    Ok(FileEntry {
        name: name.to_string(),
        bytes: bytes.len(),
        sha256: format!("{:x}", Sha256::digest(bytes)),
    })
}

pub fn summary_text(cfg: &ExperimentConfig, report: &Report) -> String {
    let (label, _) = verdict(&report.predicates);
    let passed = report.predicates.iter().filter(|p| p.verdict == Verdict::Pass).count();
    let mut s = format!(
        "{label} {}: {passed}/{} predicates passed\n",
        cfg.experiment.name(),
        report.predicates.len()
    );
    for p in &report.predicates {
        s.push_str(&format!("{:<12} {}: {}\n", p.verdict.label(), p.name, p.detail));
    }
    s
}

pub struct RunTiming {
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

/// Writes everything for a finished run and returns its exit code.
pub fn write_run(cfg: &ExperimentConfig, report: &Report, timing: &RunTiming) -> std::io::Result<u8> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (name, table) in &report.files {
        files.push(write_file(dir, name, table.to_csv_string().as_bytes())?);
    }
    files.push(write_file(dir, "summary.txt", summary_text(cfg, report).as_bytes())?);
    let (label, code) = verdict(&report.predicates);
    let manifest = RunManifest {
        experiment: cfg.experiment.name(),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        seeds: Seeds {
            master_seed: cfg.master_seed,
            sample_indices: report.samples.clone(),
        },
        started_unix_seconds: timing.started_unix_seconds,
        wall_clock_seconds: timing.wall_clock_seconds,
        verdict: label,
        exit_code: code,
        error: None,
        predicates: &report.predicates,
        files,
    };
    write_manifest(dir, &manifest)?;
    Ok(code)
}

/// Manifest for a run that stopped with an error after validation.
pub fn write_failed_run(cfg: &ExperimentConfig, error: String, code: u8, timing: &RunTiming) -> std::io::Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    let manifest = RunManifest {
        experiment: cfg.experiment.name(),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        seeds: Seeds {
            master_seed: cfg.master_seed,
            sample_indices: Vec::new(),
        },
        started_unix_seconds: timing.started_unix_seconds,
        wall_clock_seconds: timing.wall_clock_seconds,
        verdict: "ERROR",
        exit_code: code,
        error: Some(error),
        predicates: &[],
        files: Vec::new(),
    };
    write_manifest(&cfg.output_dir, &manifest)
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    fs::write(dir.join("manifest.json"), json + "\n")
}
