//! End-to-end runs of scenario files: exit codes, artifacts and reports.

use std::path::{Path, PathBuf};
use std::process::Command;

use vikit::runner::{run_parsed, TaskOutcome};
use vikit::{run_scenario, ExitStatus, Overrides, Scenario};
use vikit_core::Status;

fn golden(name: &str) -> PathBuf {
    vikit::golden::default_dir().join(format!("{name}.json"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.json"))
}

fn last_row(csv: &str) -> Vec<String> {
    csv.lines()
        .last()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

#[test]
fn box_diag_converges_to_corner() {
    let out = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&golden("box_diag"), out.path(), Overrides::default());
    assert_eq!(outcome.exit, ExitStatus::Success, "{:?}", outcome.message);

    let report = outcome.report.unwrap();
    let pg = report
        .tasks
        .iter()
        .find(|t| t.task.name() == "solve_pg")
        .unwrap();
    let x = &pg.solver.as_ref().unwrap().final_iterate;
    assert!((x[0] - 1.0).abs() < 1e-8 && x[1].abs() < 1e-8, "{x:?}");
    for t in &report.tasks {
        assert_eq!(t.outcome, TaskOutcome::Ok, "{}", t.task.name());
        assert!(t.reports.iter().all(|r| r.status == Status::Pass));
    }

    let csv = std::fs::read_to_string(out.path().join("box_diag.trace.csv")).unwrap();
    assert!(csv.starts_with("n,r_n,s_n,bound_n,dist_n\n"));
    let row = last_row(&csv);
    assert!(row[1].parse::<f64>().unwrap() <= 1e-8);
    for suffix in [
        "halpern.trace.csv",
        "compare.trace.csv",
        "bruteforce.csv",
        "reports.json",
    ] {
        assert!(
            out.path().join(format!("box_diag.{suffix}")).is_file(),
            "{suffix}"
        );
    }
    // No temporary files left behind.
    let names: Vec<_> = std::fs::read_dir(out.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert!(
        names
            .iter()
            .all(|n| n.to_string_lossy().starts_with("box_diag.")),
        "{names:?}"
    );
}

#[test]
fn step_beyond_twice_alpha_is_a_precondition_violation() {
    let out = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&fixture("step_too_large"), out.path(), Overrides::default());
    assert_eq!(outcome.exit, ExitStatus::PreconditionViolated);
    let json = std::fs::read_to_string(out.path().join("step_too_large.reports.json")).unwrap();
    assert!(json.contains("PreconditionViolated"));
}

#[test]
fn degenerate_lemma_constants_are_a_precondition_violation() {
    let out = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&fixture("lemma_boundary"), out.path(), Overrides::default());
    assert_eq!(outcome.exit, ExitStatus::PreconditionViolated);
    let report = outcome.report.unwrap();
    assert_eq!(
        report.tasks[0].reports[0].status,
        Status::PreconditionViolated
    );
}

#[test]
fn malformed_json_reports_position() {
    let out = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&fixture("malformed"), out.path(), Overrides::default());
    assert_eq!(outcome.exit, ExitStatus::Malformed);
    let msg = outcome.message.unwrap();
    assert!(msg.contains("line 4"), "{msg}");
    assert!(outcome.written.is_empty());
}

#[test]
fn overflow_is_divergence() {
    let out = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&fixture("diverges"), out.path(), Overrides::default());
    assert_eq!(outcome.exit, ExitStatus::Diverged);
}

#[test]
fn compare_stopping_without_reference_is_rejected() {
    let text = std::fs::read_to_string(golden("box_diag")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value.as_object_mut().unwrap().remove("x_star");
    let err = Scenario::from_json(&value.to_string()).unwrap_err();
    assert!(err.to_string().contains("x_star"), "{err}");
}

#[test]
fn mismatched_recorded_counts_fail() {
    let text = std::fs::read_to_string(golden("box_diag")).unwrap();
    let mut scenario = Scenario::from_json(&text).unwrap();
    scenario.tasks = vec![vikit::scenario::Task::CompareStopping];
    scenario
        .expected_comparison
        .as_mut()
        .unwrap()
        .natural_iteration += 1;
    let out = tempfile::tempdir().unwrap();
    let outcome = run_parsed(&scenario, out.path(), Overrides::default());
    assert_eq!(outcome.exit, ExitStatus::Failed);
}

#[test]
fn overrides_are_applied_and_echoed() {
    let out = tempfile::tempdir().unwrap();
    let overrides = Overrides {
        seed: Some(99),
        max_iters: Some(3),
    };
    let text = std::fs::read_to_string(golden("box_diag")).unwrap();
    let mut scenario = Scenario::from_json(&text).unwrap();
    scenario.tasks = vec![vikit::scenario::Task::SolvePg];
    let outcome = run_parsed(&scenario, out.path(), overrides);
    // Three iterations cannot reach 1e-8 on this instance.
    assert_eq!(outcome.exit, ExitStatus::Failed);
    let report = outcome.report.unwrap();
    assert_eq!(report.seed, 99);
    assert_eq!(report.tasks[0].solver.as_ref().unwrap().iterations, 3);
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.path().join("box_diag.reports.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["overrides"]["seed"], 99);
    assert_eq!(json["overrides"]["max_iters"], 3);
}

#[test]
fn binary_exit_codes() {
    let out = tempfile::tempdir().unwrap();
    let run = |path: PathBuf| {
        Command::new(env!("CARGO_BIN_EXE_vikit"))
            .arg("run")
            .arg(path)
            .arg("--out")
            .arg(out.path())
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(run(fixture("malformed")), Some(2));
    assert_eq!(run(fixture("step_too_large")), Some(3));
    assert_eq!(run(fixture("lemma_boundary")), Some(3));
    assert_eq!(run(fixture("diverges")), Some(4));
    assert_eq!(run(golden("box_exterior")), Some(0));
}

#[test]
fn batch_reports_most_severe_status() {
    let out = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_vikit"))
        .arg("batch")
        .arg(fixture("step_too_large"))
        .arg(fixture("diverges"))
        .arg(fixture("lemma_boundary"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
    for name in ["step_too_large", "diverges", "lemma_boundary"] {
        assert!(out.path().join(format!("{name}.reports.json")).is_file());
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let outcome = run_scenario(&golden("box_rotation"), dir.path(), Overrides::default());
        assert_eq!(outcome.exit, ExitStatus::Success);
    }
    for suffix in [
        "trace.csv",
        "halpern.trace.csv",
        "compare.trace.csv",
        "bruteforce.csv",
        "reports.json",
    ] {
        let name = format!("box_rotation.{suffix}");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}
