use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn landscape(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landscape")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Writes `body` (without `output_dir`) as a config inside `dir`.
fn config(dir: &Path, name: &str, body: &str) -> String {
    let out = dir.join(format!("{name}-out"));
    let path = dir.join(format!("{name}.toml"));
    fs::write(&path, format!("output_dir = {:?}\n{body}\n", out.to_str().unwrap())).unwrap();
    path.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Data and summary files with their checksums, read back from disk.
fn checksums(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        if name != "manifest.json" {
            out.insert(name, format!("{:x}", Sha256::digest(fs::read(&path).unwrap())));
        }
    }
    out
}

const GREEN_DECAY: &str = r#"
experiment = "green-decay"
dim = 1
cells = 32
mesh = 20
lambda = 1.0
eta = 1e-6
p = [1.0, 2.0]
n_samples = 24
master_seed = 5
fit_window = [2.0, 10.0]
[solver]
tol = 1e-10
"#;

#[test]
fn selftest_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("st");
    let o = landscape(&["selftest", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().starts_with("PASS selftest"));
    assert_eq!(manifest(&out)["verdict"], "PASS");
}

#[test]
fn zero_samples_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "g", &GREEN_DECAY.replace("n_samples = 24", "n_samples = 0"));
    let o = landscape(&["green-decay", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_samples"));
    assert!(!dir.path().join("g-out").exists(), "validation errors write nothing");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let typo = config(dir.path(), "typo", &format!("{GREEN_DECAY}\nlamda = 2.0"));
    assert_eq!(code(&landscape(&["green-decay", "--config", &typo])), 2);
    let good = config(dir.path(), "good", GREEN_DECAY);
    assert_eq!(code(&landscape(&["covariance", "--config", &good])), 2, "experiment mismatch");
    assert_eq!(code(&landscape(&["no-such-experiment", "--config", &good])), 2);
    assert_eq!(code(&landscape(&["green-decay"])), 2, "missing config");
    let bad_law = config(dir.path(), "law", &format!("{GREEN_DECAY}\n[law]\nkind = \"bernoulli\"\nq = 1.0"));
    assert_eq!(code(&landscape(&["green-decay", "--config", &bad_law])), 2);
}

#[test]
fn results_do_not_depend_on_workers_or_reruns() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "g", GREEN_DECAY);
    let mut runs = Vec::new();
    for (workers, sub) in [("1", "a"), ("1", "b"), ("4", "c")] {
        let out = dir.path().join(sub);
        let o = landscape(&["green-decay", "--config", &cfg, "--workers", workers, "--output", out.to_str().unwrap()]);
        assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
        let m = manifest(&out);
        let listed: BTreeMap<String, String> = m["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| (f["name"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
            .collect();
        assert_eq!(listed, checksums(&out), "manifest lists every file with its checksum");
        assert_eq!(m["config"]["workers"].as_u64().unwrap(), workers.parse::<u64>().unwrap());
        runs.push(listed);
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn seed_override_changes_data() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "g", GREEN_DECAY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    landscape(&["green-decay", "--config", &cfg, "--output", a.to_str().unwrap()]);
    landscape(&["green-decay", "--config", &cfg, "--seed", "6", "--output", b.to_str().unwrap()]);
    assert_eq!(manifest(&b)["seeds"]["master_seed"], 6);
    assert_ne!(checksums(&a)["green_masses.csv"], checksums(&b)["green_masses.csv"]);
}

#[test]
fn exit_codes_for_failures() {
    let dir = TempDir::new().unwrap();
    // a starved solver skips every sample
    let starved = config(
        dir.path(),
        "starved",
        "experiment = \"solve-landscape\"\ndim = 2\ncells = 4\nn_samples = 4\nmaster_seed = 1\n[solver]\ntol = 1e-12\nmax_iter = 2\npreconditioner = \"jacobi\"",
    );
    let o = landscape(&["solve-landscape", "--config", &starved]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(manifest(&dir.path().join("starved-out"))["error"].is_string());

    // an unreachable margin turns the energy check into a statistical FAIL
    let strict = config(
        dir.path(),
        "strict",
        "experiment = \"energy-check\"\nbc = \"periodic\"\ncells = 32\neta = 1e-3\nn_samples = 10\nmaster_seed = 1\nmin_sigmas = 1e12",
    );
    assert_eq!(code(&landscape(&["energy-check", "--config", &strict])), 4);

    let few = config(dir.path(), "few", "experiment = \"anchor-1d\"\nn_samples = 10\nmaster_seed = 1");
    assert_eq!(code(&landscape(&["anchor-1d", "--config", &few])), 5);
}

#[test]
fn every_experiment_runs_on_a_small_config() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("solve-landscape", "cells = 16\nn_samples = 30\np = [1.0, 2.0]", "landscape_cells.csv"),
        ("lambda-scaling", "cells = 32\nlambda = [0.25, 1.0]\nn_samples = 10\nfit_window = [2.0, 10.0]", "lambda_rates.csv"),
        ("covariance", "cells = 32\neta = 1e-4\nseparations = [2, 8]\nn_samples = 20", "covariance.csv"),
        (
            "vertical-derivative",
            "cells = 32\noffsets = [0, 1, 2, 3, 4, 5, 6, 7, 8]\nn_samples = 8\nfit_window = [1.0, 8.0]",
            "vertical_curve.csv",
        ),
        ("eta-convergence", "cells = 16\neta = [1e-2, 1e-3, 1e-4]\nn_samples = 3", "eta_convergence.csv"),
        ("agmon-check", "dim = 2\ncells = 8\neta = 0.0\nagmon_outer = 3.0\nn_samples = 2", "agmon.csv"),
        ("rank-one-check", "cells = 12\neta = 1e-3\nn_samples = 3", "rank_one.csv"),
        ("fpp-kesten", "dim = 2\nradii = [2, 4]\nn_samples = 5\n[law]\nkind = \"bernoulli\"\nq = 0.125", "kesten_tail.csv"),
        ("cluster-tail", "dim = 2\ncoarse_side = 16\nn_samples = 3\n[law]\nkind = \"uniform01\"", "cluster_tail.csv"),
        ("anchor-1d", "n_samples = 200", "gap_moments.csv"),
    ];
    for (name, body, expected) in cases {
        let cfg = config(dir.path(), name, &format!("experiment = \"{name}\"\nmaster_seed = 3\n{body}"));
        let o = landscape(&[name, "--config", &cfg]);
        let c = code(&o);
        assert!(matches!(c, 0 | 4 | 5), "{name} exited {c}: {}", String::from_utf8_lossy(&o.stderr));
        let out = dir.path().join(format!("{name}-out"));
        assert!(out.join(expected).exists(), "{name} wrote no {expected}");
        let m = manifest(&out);
        assert_eq!(m["experiment"], name);
        assert_eq!(m["exit_code"].as_i64().unwrap(), c as i64);
        let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
        assert!(summary.lines().next().unwrap().contains(name));
    }
}
