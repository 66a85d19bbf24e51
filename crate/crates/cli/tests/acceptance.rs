//! Acceptance criteria 1 to 10, one line each. Exits nonzero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use gp_core::report::Section;
use gp_core::suite::{self, DEFAULT_TRIALS};
use gp_core::Config;
use serde_json::Value;

const SEED: u64 = 42;

type Criterion<'a> = (&'a str, Box<dyn Fn() -> Section + 'a>);

fn section_line(n: usize, title: &str, section: &Section) -> bool {
    let checks = section.checks.len();
    if section.pass {
        println!("criterion {n:>2} PASS  {title} ({checks} checks)");
    } else {
        let failed: Vec<String> =
            section.failed_checks().map(|c| format!("{}: value {:e} bound {:e}", c.name, c.value, c.bound)).collect();
        println!("criterion {n:>2} FAIL  {title}: {}", failed.join("; "));
    }
    section.pass
}

/// The report text with the wall-time line removed.
fn run_check_all(dir: &Path) -> Result<String, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_gp"))
        .args(["check-all", "--seed", "42", "--report", "report.json"])
        .current_dir(dir)
        .status()
        .map_err(|e| format!("spawn: {e}"))?;
    if !status.success() {
        return Err(format!("check-all exited with {status}"));
    }
    let text = std::fs::read_to_string(dir.join("report.json")).map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    if v.get("wall_time_seconds").is_none() {
        return Err("report has no wall_time_seconds field".into());
    }
    Ok(text.lines().filter(|l| !l.trim_start().starts_with("\"wall_time_seconds\"")).collect::<Vec<_>>().join("\n"))
}

fn determinism() -> bool {
    let result = (|| -> Result<bool, String> {
        let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
        let (ra, rb) = (run_check_all(a.path())?, run_check_all(b.path())?);
        Ok(ra == rb)
    })();
    match result {
        Ok(true) => {
            println!("criterion 10 PASS  determinism: two check-all --seed 42 reports byte-identical modulo wall time");
            true
        }
        Ok(false) => {
            println!("criterion 10 FAIL  determinism: reports differ");
            false
        }
        Err(e) => {
            println!("criterion 10 FAIL  determinism: {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let cfg = Config::default();
    let t = DEFAULT_TRIALS;
    let criteria: [Criterion; 9] = [
        ("Kato inequalities and the square identity", Box::new(|| suite::kato(SEED, &cfg, t.kato))),
        ("gradient estimate", Box::new(|| suite::gradient(SEED, &cfg, t.pairs))),
        ("Harnack inequality", Box::new(|| suite::harnack(SEED, &cfg, t.pairs))),
        ("principal eigenvalue oracle and exhaustions", Box::new(|| suite::spectral(&cfg))),
        ("Green matrix oracle", Box::new(|| suite::green_matrices(SEED, &cfg, t.green))),
        ("exhaustion and transience", Box::new(|| suite::transience(&cfg))),
        ("eigenvalue bound λ₁·A ≥ 1", Box::new(|| suite::eigen_bound(SEED, &cfg, t.eigen))),
        ("L² bound for the Poisson problem", Box::new(|| suite::poisson(SEED, &cfg, t.poisson))),
        ("solver cross-checks", Box::new(|| suite::solvers(SEED, &cfg, t.solvers))),
    ];
    let mut all = true;
    for (i, (title, run)) in criteria.iter().enumerate() {
        all &= section_line(i + 1, title, &run());
    }
    all &= determinism();
    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILED" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
