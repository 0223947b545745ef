//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always reach stdout.
//!
//! Criterion 7 has a sub-check that cannot hold (see `KNOWN_FAILING`); it is
//! reported as FAIL and does not fail the target. Any other failure does.

use std::process::ExitCode;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use svlab_cli::experiments::{self, NORMAL_DET_ORACLE};

/// Criteria whose FAIL is expected, with the row that fails.
const KNOWN_FAILING: [(u8, &str); 1] = [(7, "I_n = 1/n, eps = 0.1: tail beyond n = 30")];

/// `2 (Φ(1) - 1/2)(φ(0) - φ(1))` from an independent library.
fn normal_det() -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let p = n.cdf(1.0) - 0.5;
    let e = n.pdf(0.0) - n.pdf(1.0);
    p * e - p * (-e)
}

/// `Σ_{n>30} n^{-1/2} e^{-εn}` by brute force.
fn harmonic_tail(eps: f64) -> f64 {
    (31..200_000).rev().map(|n| (n as f64).powf(-0.5) * (-eps * n as f64).exp()).sum()
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("scratch dir");
    let mut unexpected = Vec::new();

    let oracle = normal_det();
    // statrs erf is good to a few 1e-12 here.
    let oracle_ok = (oracle - NORMAL_DET_ORACLE).abs() < 1e-10;
    println!(
        "oracle      : {} pinned normal det {NORMAL_DET_ORACLE} vs statrs {oracle}",
        if oracle_ok { "PASS" } else { "FAIL" }
    );
    if !oracle_ok {
        unexpected.push("normal det oracle".to_string());
    }

    for c in 1..=12u8 {
        let entry = experiments::lookup(&format!("criterion-{c}")).expect("every criterion is registered");
        match experiments::run(entry.id, &scratch.path().join(entry.id)) {
            Ok(table) => {
                let failing = table.failing();
                let verdict = if table.pass { "PASS" } else { "FAIL" };
                let detail = if failing.is_empty() {
                    format!("{} checks", table.rows.len())
                } else {
                    failing
                        .iter()
                        .map(|r| format!("{} = {} (want {})", r.check, r.measured, r.expected))
                        .collect::<Vec<_>>()
                        .join("; ")
                };
                println!("criterion {c:2}: {verdict}  {:<24} {:>7.2} s  {detail}", table.id, table.seconds);
                for note in &table.notes {
                    println!("              note: {note}");
                }
                for r in failing {
                    if !KNOWN_FAILING.contains(&(c, r.check.as_str())) {
                        unexpected.push(format!("criterion {c}: {}", r.check));
                    }
                }
            }
            Err(e) => {
                println!("criterion {c:2}: FAIL  {:<24} error: {e}", entry.id);
                unexpected.push(format!("criterion {c}: {e}"));
            }
        }
    }

    let tail = harmonic_tail(0.1);
    println!("oracle      : brute-force tail beyond 30 at eps = 0.1 is {tail:.6e}");
    if tail < 1e-6 {
        unexpected.push("criterion 7 tail oracle disagrees with the recorded failure".into());
    }

    if unexpected.is_empty() {
        println!("acceptance: all criteria PASS except the recorded criterion 7 sub-check");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
