//! Executes a scenario's tasks and writes their artifacts.
//!
//! Output files for scenario `name`:
//!
//! * `name.trace.csv`: `solve_pg`
//! * `name.halpern.trace.csv`: `solve_halpern`
//! * `name.compare.trace.csv`: `compare_stopping`
//! * `name.bruteforce.csv`: `brute_force` grid solutions
//! * `name.reports.json`: every task summary and verification report
//!
//! Files are written to a temporary file in the output directory and then
//! renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vikit_core::report::INEQUALITY_TOL;
use vikit_core::solvers::{
    compare_stopping, solve_halpern, solve_projected_gradient, StoppingComparison, TraceStatus,
};
use vikit_core::verification::{
    brute_force_vi, check_shortcut_bound, check_singleton_vi, check_vi_optimality,
    lemma_cocoercive_expansive, lemma_ism_singleton_certified, singleton_report, BruteForceGrid,
};
use vikit_core::{
    certify_moduli, sampling, AffineOperator, ConvexSet, Error, IterationTrace, OperatorModuli,
    Status, VerificationReport,
};

use crate::scenario::{ExpectedComparison, Scenario, Task};
use crate::{trace_csv, ScenarioError};

/// Sample count for the VI optimality check on returned iterates.
pub const OPTIMALITY_SAMPLES: usize = 1_000;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ExitStatus {
    /// Every task succeeded and every report passed.
    Success = 0,
    /// A verification failed, a solver ran out of iterations, or an
    /// output could not be written.
    Failed = 1,
    /// The scenario file could not be parsed or is missing fields.
    Malformed = 2,
    /// A task's preconditions do not hold.
    PreconditionViolated = 3,
    /// A solver produced a non-finite iterate.
    Diverged = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Severity used when merging task outcomes: divergence dominates
    /// precondition failures, which dominate plain failures.
    fn severity(self) -> u8 {
        match self {
            Self::Success => 0,
            Self::Failed => 1,
            Self::PreconditionViolated => 2,
            Self::Malformed => 3,
            Self::Diverged => 4,
        }
    }

    pub fn worst(self, other: Self) -> Self {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

/// Command-line overrides of scenario config fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskOutcome {
    Ok,
    Failed,
    PreconditionViolated,
    Diverged,
}

impl TaskOutcome {
    fn exit(self) -> ExitStatus {
        match self {
            Self::Ok => ExitStatus::Success,
            Self::Failed => ExitStatus::Failed,
            Self::PreconditionViolated => ExitStatus::PreconditionViolated,
            Self::Diverged => ExitStatus::Diverged,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverSummary {
    pub status: &'static str,
    pub iterations: usize,
    pub final_iterate: Vec<f64>,
    pub final_residual: f64,
    pub gamma: Option<f64>,
}

impl SolverSummary {
    fn from_trace(trace: &IterationTrace) -> Self {
        Self {
            status: match trace.status {
                TraceStatus::Converged => "converged",
                TraceStatus::MaxIters => "max_iters",
            },
            iterations: trace.iterations,
            final_iterate: trace.final_iterate().to_vec(),
            final_residual: trace.last().natural_residual,
            gamma: trace.gamma,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonSummary {
    pub delta: f64,
    pub gamma: f64,
    pub shortcut_iteration: Option<usize>,
    pub natural_iteration: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub task: Task,
    pub outcome: TaskOutcome,
    pub error: Option<String>,
    pub output_file: Option<String>,
    pub solver: Option<SolverSummary>,
    pub comparison: Option<ComparisonSummary>,
    pub gamma: Option<f64>,
    pub reports: Vec<VerificationReport>,
}

impl TaskReport {
    fn new(task: Task) -> Self {
        Self {
            task,
            outcome: TaskOutcome::Ok,
            error: None,
            output_file: None,
            solver: None,
            comparison: None,
            gamma: None,
            reports: Vec::new(),
        }
    }

    fn from_error(task: Task, err: Error) -> Self {
        let mut t = Self::new(task);
        t.outcome = match err {
            Error::Divergence { .. } => TaskOutcome::Diverged,
            _ => TaskOutcome::PreconditionViolated,
        };
        t.reports.push(VerificationReport::precondition_violated(
            &format!("{}.preconditions", task.name()),
            err.to_string(),
        ));
        t.error = Some(err.to_string());
        t
    }

    /// Derives the outcome from the reports unless an error already set it.
    fn settle(mut self) -> Self {
        if self.outcome != TaskOutcome::Ok {
            return self;
        }
        if self
            .reports
            .iter()
            .any(|r| r.status == Status::PreconditionViolated)
        {
            self.outcome = TaskOutcome::PreconditionViolated;
        } else if self.reports.iter().any(|r| r.status == Status::Fail)
            || self
                .solver
                .as_ref()
                .is_some_and(|s| s.status != "converged")
        {
            self.outcome = TaskOutcome::Failed;
        }
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub overrides: Overrides,
    pub moduli: OperatorModuli,
    pub exit_code: i32,
    pub tasks: Vec<TaskReport>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit: ExitStatus,
    pub report: Option<RunReport>,
    pub written: Vec<PathBuf>,
    /// Diagnostic for runs that stopped before executing tasks.
    pub message: Option<String>,
}

impl RunOutcome {
    fn aborted(exit: ExitStatus, err: ScenarioError) -> Self {
        Self {
            exit,
            report: None,
            written: Vec::new(),
            message: Some(err.to_string()),
        }
    }
}

/// Writes `bytes` to `dir/file_name` via a temporary file and a rename.
pub fn write_atomic(dir: &Path, file_name: &str, bytes: &[u8]) -> Result<PathBuf, ScenarioError> {
    let target = dir.join(file_name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(ScenarioError::io(dir.display()))?;
    tmp.write_all(bytes)
        .map_err(ScenarioError::io(target.display()))?;
    tmp.persist(&target)
        .map_err(|e| ScenarioError::io(target.display())(e.error))?;
    Ok(target)
}

struct Context<'a> {
    scenario: &'a Scenario,
    op: AffineOperator,
    set: ConvexSet,
    seed: u64,
    max_iters: usize,
    overrides: Overrides,
    out_dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Context<'_> {
    fn config(&self) -> vikit_core::IterationConfig {
        let mut cfg = self.scenario.config.build();
        cfg.seed = self.seed;
        cfg.max_iters = self.max_iters;
        cfg
    }

    fn write(&mut self, suffix: &str, bytes: &[u8]) -> Result<String, ScenarioError> {
        let file_name = format!("{}.{suffix}", self.scenario.name);
        let path = write_atomic(self.out_dir, &file_name, bytes)?;
        self.written.push(path);
        Ok(file_name)
    }

    fn solver_reports(&self, trace: &IterationTrace) -> Result<Vec<VerificationReport>, Error> {
        let mut reports = Vec::new();
        if trace.converged() {
            reports.push(check_vi_optimality(
                &self.op,
                &self.set,
                trace.final_iterate(),
                OPTIMALITY_SAMPLES,
                self.seed,
            )?);
        }
        if let (Some(x_star), Some(_)) = (&self.scenario.x_star, trace.gamma) {
            reports.push(check_shortcut_bound(trace, x_star)?);
        }
        Ok(reports)
    }

    fn grid(&self) -> Result<BruteForceGrid, Error> {
        BruteForceGrid::new(
            self.set.clone(),
            self.scenario.grid.spacing,
            self.scenario.grid.vi_tolerance,
        )
    }

    fn run_task(&mut self, task: Task) -> Result<TaskReport, ScenarioError> {
        let result = match task {
            Task::SolvePg => self.solve_pg(),
            Task::SolveHalpern => self.solve_halpern(),
            Task::CompareStopping => self.compare(),
            Task::VerifyLemma22 => self.lemma22(),
            Task::VerifyLemma31 => self.lemma31(),
            Task::BruteForce => self.brute_force(),
        };
        Ok(match result? {
            Ok(report) => report.settle(),
            Err(err) => TaskReport::from_error(task, err),
        })
    }

    fn solve_pg(&mut self) -> Result<Result<TaskReport, Error>, ScenarioError> {
        let trace = match solve_projected_gradient(
            &self.op,
            &self.set,
            &self.config(),
            &self.scenario.x0,
            self.scenario.x_star.as_deref(),
        ) {
            Ok(t) => t,
            Err(e) => return Ok(Err(e)),
        };
        self.finish_solver(Task::SolvePg, "trace.csv", trace)
    }

    fn solve_halpern(&mut self) -> Result<Result<TaskReport, Error>, ScenarioError> {
        let map = self
            .scenario
            .map_s
            .clone()
            .unwrap_or(crate::scenario::MapSpec::Identity)
            .build()?;
        let mut cfg = self.config();
        let overrides = &self.scenario.halpern;
        if let Some(tol) = overrides.tol {
            cfg.residual_tol = tol;
        }
        if let (Some(max), None) = (overrides.max_iters, self.overrides.max_iters) {
            cfg.max_iters = max;
        }
        if let Some(stride) = overrides.trace_stride {
            cfg.trace_stride = stride;
        }
        let anchor = self.scenario.anchor.as_deref().unwrap_or(&self.scenario.x0);
        let trace = match solve_halpern(
            &self.op,
            &self.set,
            &map,
            &cfg,
            &self.scenario.x0,
            anchor,
            self.scenario.x_star.as_deref(),
        ) {
            Ok(t) => t,
            Err(e) => return Ok(Err(e)),
        };
        self.finish_solver(Task::SolveHalpern, "halpern.trace.csv", trace)
    }

    fn finish_solver(
        &mut self,
        task: Task,
        suffix: &str,
        trace: IterationTrace,
    ) -> Result<Result<TaskReport, Error>, ScenarioError> {
        let file = self.write(
            suffix,
            &trace_csv::write_trace(&trace, self.scenario.x_star.is_some()),
        )?;
        let reports = match self.solver_reports(&trace) {
            Ok(r) => r,
            Err(e) => return Ok(Err(e)),
        };
        let mut t = TaskReport::new(task);
        t.output_file = Some(file);
        t.gamma = trace.gamma;
        t.solver = Some(SolverSummary::from_trace(&trace));
        t.reports = reports;
        Ok(Ok(t))
    }

    fn compare(&mut self) -> Result<Result<TaskReport, Error>, ScenarioError> {
        let x_star = self
            .scenario
            .x_star
            .clone()
            .expect("validated: compare_stopping requires x_star");
        let cmp = match compare_stopping(
            &self.op,
            &self.set,
            &self.config(),
            &self.scenario.x0,
            &x_star,
            self.scenario.delta,
        ) {
            Ok(c) => c,
            Err(e) => return Ok(Err(e)),
        };
        let file = self.write(
            "compare.trace.csv",
            &trace_csv::write_trace(&cmp.trace, true),
        )?;
        let mut t = TaskReport::new(Task::CompareStopping);
        t.output_file = Some(file);
        t.gamma = Some(cmp.gamma);
        t.comparison = Some(ComparisonSummary {
            delta: cmp.delta,
            gamma: cmp.gamma,
            shortcut_iteration: cmp.shortcut_iteration,
            natural_iteration: cmp.natural_iteration,
        });
        match check_shortcut_bound(&cmp.trace, &x_star) {
            Ok(r) => t.reports.push(r),
            Err(e) => return Ok(Err(e)),
        }
        if let Some(expected) = self.scenario.expected_comparison {
            t.reports.push(expected_comparison_report(expected, &cmp));
        }
        Ok(Ok(t))
    }

    fn lemma22(&mut self) -> Result<Result<TaskReport, Error>, ScenarioError> {
        Ok(self.lemma22_inner())
    }

    fn lemma22_inner(&self) -> Result<TaskReport, Error> {
        let (m, v, epsilon) = match self.scenario.lemma22 {
            Some(c) => (c.m, c.v, c.epsilon),
            None => {
                let moduli = certify_moduli(&self.op);
                (moduli.cocoercive.m, moduli.cocoercive.v, moduli.lipschitz)
            }
        };
        let pairs = sampling::sample_pairs(self.op.dim(), self.scenario.samples, self.seed);
        let lemma = lemma_cocoercive_expansive(&self.op, m, v, epsilon, &pairs)?;
        let mut t = TaskReport::new(Task::VerifyLemma22);
        t.gamma = Some(lemma.gamma);
        let passed = lemma.report.passed();
        t.reports.push(lemma.report.with_seed(self.seed));
        // Second conclusion: uniqueness, where the set can be gridded.
        if passed {
            if let Ok(grid) = self.grid() {
                if self.op.dim() <= vikit_core::verification::GRID_MAX_DIM {
                    t.reports.push(check_singleton_vi(&self.op, &grid)?);
                }
            }
        }
        Ok(t)
    }

    fn lemma31(&mut self) -> Result<Result<TaskReport, Error>, ScenarioError> {
        let run = || -> Result<TaskReport, Error> {
            let grid = self.grid()?;
            let lemma =
                lemma_ism_singleton_certified(&self.op, &grid, self.scenario.samples, self.seed)?;
            let mut t = TaskReport::new(Task::VerifyLemma31);
            t.gamma = Some(certify_moduli(&self.op).expansiveness);
            t.reports.extend(lemma.hypotheses);
            t.reports.push(lemma.singleton);
            Ok(t)
        };
        Ok(run())
    }

    fn brute_force(&mut self) -> Result<Result<TaskReport, Error>, ScenarioError> {
        let solutions = match self.grid().and_then(|g| brute_force_vi(&self.op, &g)) {
            Ok(s) => s,
            Err(e) => return Ok(Err(e)),
        };
        let file = self.write(
            "bruteforce.csv",
            &trace_csv::write_points(&solutions, self.op.dim()),
        )?;
        let mut t = TaskReport::new(Task::BruteForce);
        t.output_file = Some(file);
        t.reports.push(singleton_report(
            &solutions,
            self.scenario.grid.spacing,
            self.op.dim(),
        ));
        Ok(Ok(t))
    }
}

/// Compares the observed stopping iterations with the recorded ones. The
/// witness on failure is `(expected, observed)` as `[shortcut, natural]`.
fn expected_comparison_report(
    expected: ExpectedComparison,
    cmp: &StoppingComparison,
) -> VerificationReport {
    const PROPERTY: &str = "compare_stopping.expected";
    let observed = (cmp.shortcut_iteration, cmp.natural_iteration);
    if observed
        == (
            Some(expected.shortcut_iteration),
            Some(expected.natural_iteration),
        )
    {
        return VerificationReport::pass(PROPERTY, 1, -INEQUALITY_TOL);
    }
    let as_f64 = |n: Option<usize>| n.map_or(f64::NAN, |n| n as f64);
    let deficit =
        |e: usize, o: Option<usize>| o.map_or(f64::INFINITY, |o| (o as f64 - e as f64).abs());
    VerificationReport::fail(
        PROPERTY,
        (
            vec![
                expected.shortcut_iteration as f64,
                expected.natural_iteration as f64,
            ],
            vec![as_f64(observed.0), as_f64(observed.1)],
        ),
        1,
        deficit(expected.shortcut_iteration, observed.0)
            .max(deficit(expected.natural_iteration, observed.1)),
    )
}

/// Loads, runs and records one scenario file.
pub fn run_scenario(path: &Path, out_dir: &Path, overrides: Overrides) -> RunOutcome {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return RunOutcome::aborted(ExitStatus::Failed, ScenarioError::io(path.display())(e))
        }
    };
    let scenario = match Scenario::from_json(&text) {
        Ok(s) => s,
        Err(e) => return RunOutcome::aborted(ExitStatus::Malformed, e),
    };
    run_parsed(&scenario, out_dir, overrides)
}

/// Runs an already parsed scenario.
pub fn run_parsed(scenario: &Scenario, out_dir: &Path, overrides: Overrides) -> RunOutcome {
    let built = scenario
        .operator
        .build()
        .and_then(|op| scenario.set.build().map(|set| (op, set)));
    let (op, set) = match built {
        Ok(v) => v,
        Err(e) => return RunOutcome::aborted(ExitStatus::Malformed, e),
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return RunOutcome::aborted(ExitStatus::Failed, ScenarioError::io(out_dir.display())(e));
    }
    let moduli = certify_moduli(&op);
    let mut ctx = Context {
        scenario,
        op,
        set,
        seed: overrides.seed.unwrap_or(scenario.config.seed),
        max_iters: overrides.max_iters.unwrap_or(scenario.config.max_iters),
        overrides,
        out_dir,
        written: Vec::new(),
    };

    let mut tasks = Vec::new();
    let mut exit = ExitStatus::Success;
    for &task in &scenario.tasks {
        match ctx.run_task(task) {
            Ok(t) => {
                exit = exit.worst(t.outcome.exit());
                tasks.push(t);
            }
            Err(e) => {
                return RunOutcome {
                    exit: ExitStatus::Failed,
                    report: None,
                    written: ctx.written,
                    message: Some(e.to_string()),
                }
            }
        }
    }

    let report = RunReport {
        scenario: scenario.name.clone(),
        seed: ctx.seed,
        overrides,
        moduli,
        exit_code: exit.code(),
        tasks,
    };
    let json = serde_json::to_vec_pretty(&report).expect("report is plain data");
    match ctx.write("reports.json", &json) {
        Ok(_) => RunOutcome {
            exit,
            report: Some(report),
            written: ctx.written,
            message: None,
        },
        Err(e) => RunOutcome {
            exit: ExitStatus::Failed,
            report: Some(report),
            written: ctx.written,
            message: Some(e.to_string()),
        },
    }
}
