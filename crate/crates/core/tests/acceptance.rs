//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fedkrum_core::changepoint::filter_extreme_values;
use fedkrum_core::harness::{self, metrics, parse_config_str, ExperimentConfig, RunRecord};
use fedkrum_core::{
    aggregate_krum, aggregate_mkrum, oracle, AggregationError, ConfigError, HarnessError, UpdateSet,
};

const SEEDS: [u64; 3] = [1, 2, 3];
const KRUM_FAMILY: [&str; 4] = ["arkrum", "mkrum", "krum", "rkrum"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// n = 25, f = 11, 40 rounds on the default two-class synthetic set.
fn scaled_config(aggregator: &str, attack: &str, alpha: f64, seed: u64) -> ExperimentConfig {
    let byzantine = if attack == "none" { 0 } else { 11 };
    parse_config_str(&format!(
        r#"
        aggregator = "{aggregator}"
        known_f = 11
        n_clients = 25
        byzantine_count = {byzantine}
        rounds = 40
        master_seed = {seed}
        record_wall_time = false
        [dataset]
        kind = "synthetic"
        classes = 2
        [attack]
        kind = "{attack}"
        [partition]
        alpha = {alpha}
        "#
    ))
    .expect("acceptance config is valid")
}

fn run(aggregator: &str, attack: &str, alpha: f64, seed: u64) -> RunRecord {
    harness::run_experiment(scaled_config(aggregator, attack, alpha, seed)).expect("run completes")
}

fn final10(record: &RunRecord) -> f64 {
    record.summary.final_mean_accuracy.expect("rounds > 0")
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn krum_oracle() -> Outcome {
    let start = Instant::now();
    let report = oracle::krum_suite(11, 200);
    let elapsed = start.elapsed();
    outcome(
        report.passed() && elapsed < Duration::from_secs(5),
        format!(
            "{} instances, {} mismatches, {:.3}s (limit 5s) {}",
            report.cases,
            report.failures,
            elapsed.as_secs_f64(),
            report.detail
        ),
    )
}

fn filter_trace() -> Outcome {
    let worked: [(&[f64], usize, usize); 3] = [
        (&[1.0, 2.0, 3.0, 4.0, 100.0], 3, 2),
        (&[5.0, 5.0, 5.0, 5.0], 4, 0),
        (&[0.01, 0.04, 2500.0, 3600.0], 2, 2),
    ];
    let mut worked_ok = 0;
    for (row, kept, removed) in worked {
        let out = filter_extreme_values(row);
        if out.kept[..] == row[..kept] && out.removed_count == removed {
            worked_ok += 1;
        }
    }
    let report = oracle::filter_suite(12, 100);
    outcome(
        worked_ok == 3 && report.passed(),
        format!(
            "worked rows {worked_ok}/3, randomized {}/{} exact {}",
            report.cases - report.failures,
            report.cases,
            report.detail
        ),
    )
}

fn sse_oracle() -> Outcome {
    let report = oracle::sse_suite(13, 500);
    outcome(
        report.passed(),
        format!(
            "{}/{} rows exact {}",
            report.cases - report.failures,
            report.cases,
            report.detail
        ),
    )
}

fn gradient_gate() -> Outcome {
    let report = oracle::gradient_suite(14, 5);
    outcome(
        report.passed(),
        format!(
            "[3,4,2] net, {} batches, {} (limit 1e-4)",
            report.cases, report.detail
        ),
    )
}

fn large_outlier() -> (Outcome, f64) {
    let start = Instant::now();
    let baseline = final10(&run("mean", "none", 10.0, SEEDS[0]));
    let attacked_mean = final10(&run("mean", "large_outlier", 10.0, SEEDS[0]));
    let mut ok = attacked_mean <= baseline - 0.20;
    let mut parts = vec![
        format!("clean mean {}", pct(baseline)),
        format!("attacked mean {}", pct(attacked_mean)),
    ];
    for agg in KRUM_FAMILY {
        let acc = final10(&run(agg, "large_outlier", 10.0, SEEDS[0]));
        ok &= (acc - baseline).abs() <= 0.05;
        parts.push(format!("{agg} {}", pct(acc)));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    parts.push(format!("{:.1}s (limit 120s)", elapsed.as_secs_f64()));
    (outcome(ok, parts.join(", ")), attacked_mean)
}

fn non_iid_stability() -> Outcome {
    let mut holds = 0;
    let mut parts = Vec::new();
    for seed in SEEDS {
        let std = |agg| {
            metrics::tail_std(&run(agg, "large_outlier", 0.5, seed).accuracies(), 20)
                .expect("rounds > 0")
        };
        let (ar, r) = (std("arkrum"), std("rkrum"));
        if ar <= r {
            holds += 1;
        }
        parts.push(format!(
            "seed {seed}: arkrum {} vs rkrum {}",
            pct(ar),
            pct(r)
        ));
    }
    outcome(
        holds * 2 > SEEDS.len(),
        format!(
            "last-20 std, holds in {holds}/{}: {}",
            SEEDS.len(),
            parts.join("; ")
        ),
    )
}

fn noise_injection(outlier_mean: f64) -> Outcome {
    let baseline = final10(&run("mean", "none", 10.0, SEEDS[0]));
    let noisy_mean = final10(&run("mean", "noise_injection", 10.0, SEEDS[0]));
    let noise_drop = baseline - noisy_mean;
    let outlier_drop = baseline - outlier_mean;
    let mut ok = noise_drop < outlier_drop;
    let mut parts = vec![format!(
        "mean drop {} under noise vs {} under outliers",
        pct(noise_drop),
        pct(outlier_drop)
    )];
    for agg in KRUM_FAMILY {
        let acc = final10(&run(agg, "noise_injection", 10.0, SEEDS[0]));
        ok &= (acc - baseline).abs() <= 0.05;
        parts.push(format!("{agg} {}", pct(acc)));
    }
    outcome(ok, parts.join(", "))
}

fn label_flipping() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut emitted = true;
    let mut flagged = Vec::new();
    for seed in SEEDS {
        let baseline = final10(&run("mean", "none", 10.0, seed));
        for agg in KRUM_FAMILY {
            let record = run(agg, "label_flipping", 10.0, seed);
            let csv = dir.path().join(format!("{agg}_{seed}.csv"));
            emitted &= metrics::write_metrics(&record, &csv).is_ok()
                && metrics::read_metrics(&csv).is_ok_and(|m| m == record.metrics && m.len() == 40);
            let acc = final10(&record);
            if acc < baseline - 0.10 {
                flagged.push(format!(
                    "{agg} seed {seed}: {} vs clean {}",
                    pct(acc),
                    pct(baseline)
                ));
            }
        }
    }
    outcome(
        emitted && !flagged.is_empty(),
        format!(
            "metrics emitted: {emitted}; below clean - 10 points: {}",
            if flagged.is_empty() {
                "none".into()
            } else {
                flagged.join("; ")
            }
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = scaled_config("arkrum", "large_outlier", 0.5, SEEDS[0]);
    let first = harness::run_experiment(cfg.clone()).expect("run completes");
    let single_thread = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(|| harness::run_experiment(cfg))
        .expect("run completes");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    metrics::write_metrics(&first, &a).expect("write");
    metrics::write_metrics(&single_thread, &b).expect("write");
    let (a, b) = (fs::read(a).expect("read"), fs::read(b).expect("read"));
    outcome(
        a == b,
        format!(
            "arkrum run repeated on 1 thread and the default pool: {} bytes, identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn constraint_enforcement() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for agg in ["krum", "mkrum"] {
        let text = format!(
            "aggregator = \"{agg}\"\nknown_f = 12\nn_clients = 25\nbyzantine_count = 11\n[dataset]\nkind = \"synthetic\""
        );
        let err = parse_config_str(&text).expect_err("12 violates 2 + 2f < 25");
        let msg = err.to_string();
        let named = matches!(
            err,
            ConfigError::KrumConstraint {
                known_f: 12,
                n_clients: 25
            }
        ) && msg.contains("12")
            && msg.contains("25");
        ok &= named;
        parts.push(format!("{agg} config: \"{msg}\""));
        let run_err = harness::run_experiment(ExperimentConfig {
            known_f: Some(12),
            ..scaled_config(agg, "none", 10.0, 1)
        });
        ok &= matches!(
            run_err,
            Err(HarnessError::Config(ConfigError::KrumConstraint { .. }))
        );
    }
    let u = UpdateSet::from_rows((0..5).map(|i| vec![i as f64])).expect("valid");
    for err in [
        aggregate_krum(&u, 2).unwrap_err(),
        aggregate_mkrum(&u, 2).unwrap_err(),
    ] {
        let msg = err.to_string();
        ok &= err == AggregationError::ConstraintViolation { f: 2, n: 5 }
            && msg.contains('2')
            && msg.contains('5');
        parts.push(format!("aggregator: \"{msg}\""));
    }
    outcome(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let (outlier, outlier_mean) = large_outlier();
    let results = [
        ("1 krum oracle equivalence", krum_oracle()),
        ("2 filter trace fidelity", filter_trace()),
        ("3 sse split oracle", sse_oracle()),
        ("4 gradient gate", gradient_gate()),
        ("5 scaled large-outlier", outlier),
        ("6 non-iid stability", non_iid_stability()),
        ("7 noise injection", noise_injection(outlier_mean)),
        ("8 label flipping", label_flipping()),
        ("9 determinism", determinism()),
        ("10 constraint enforcement", constraint_enforcement()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
