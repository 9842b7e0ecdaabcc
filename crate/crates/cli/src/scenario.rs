//! JSON scenario schema and its conversion into core types.

use serde::{Deserialize, Serialize};
use vikit_core::solvers::{
    AnchorSchedule, DEFAULT_COMPARISON_DELTA, DEFAULT_MAX_ITERS, DEFAULT_RESIDUAL_TOL,
};
use vikit_core::{AffineOperator, ConvexSet, IterationConfig, Matrix, NonexpansiveMap};

use crate::ScenarioError;

pub const DEFAULT_GRID_SPACING: f64 = 1e-2;
pub const DEFAULT_VI_TOLERANCE: f64 = 1e-9;

/// `{ "matrix": [[...]], "offset": [...] }`
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl OperatorSpec {
    pub fn build(&self) -> Result<AffineOperator, ScenarioError> {
        let matrix = Matrix::from_rows(&self.matrix).map_err(ScenarioError::invalid("operator"))?;
        AffineOperator::new(matrix, self.offset.clone()).map_err(ScenarioError::invalid("operator"))
    }
}

/// `{ "type": "box" | "ball" | "halfspace" | "simplex" | "affine", ... }`
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Simplex {
        dim: usize,
    },
    Affine {
        basepoint: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
}

impl SetSpec {
    pub fn build(&self) -> Result<ConvexSet, ScenarioError> {
        let set = match self.clone() {
            Self::Box { lower, upper } => ConvexSet::new_box(lower, upper),
            Self::Ball { center, radius } => ConvexSet::new_ball(center, radius),
            Self::Halfspace { normal, offset } => ConvexSet::new_halfspace(normal, offset),
            Self::Simplex { dim } => ConvexSet::simplex(dim),
            Self::Affine { basepoint, basis } => ConvexSet::new_affine(basepoint, basis),
        };
        set.map_err(ScenarioError::invalid("set"))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    Projection {
        set: SetSpec,
    },
    AffineAverage {
        coefficient: f64,
        fixed_point: Vec<f64>,
    },
}

impl MapSpec {
    pub fn build(&self) -> Result<NonexpansiveMap, ScenarioError> {
        Ok(match self {
            Self::Identity => NonexpansiveMap::Identity,
            Self::Projection { set } => NonexpansiveMap::ProjectionOnto(set.build()?),
            Self::AffineAverage {
                coefficient,
                fixed_point,
            } => NonexpansiveMap::AffineAverage {
                coefficient: *coefficient,
                fixed_point: fixed_point.clone(),
            },
        })
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnchorSpec {
    #[default]
    Harmonic,
    Power {
        exponent: f64,
    },
}

impl From<AnchorSpec> for AnchorSchedule {
    fn from(spec: AnchorSpec) -> Self {
        match spec {
            AnchorSpec::Harmonic => AnchorSchedule::Harmonic,
            AnchorSpec::Power { exponent } => AnchorSchedule::Power { exponent },
        }
    }
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

fn default_tol() -> f64 {
    DEFAULT_RESIDUAL_TOL
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub lambda: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub anchor_schedule: AnchorSpec,
    #[serde(default = "default_stride")]
    pub trace_stride: usize,
}

impl ConfigSpec {
    pub fn build(&self) -> IterationConfig {
        IterationConfig {
            step: self.lambda,
            anchor_schedule: self.anchor_schedule.into(),
            max_iters: self.max_iters,
            residual_tol: self.tol,
            seed: self.seed,
            trace_stride: self.trace_stride,
        }
    }
}

/// Overrides applied to the Halpern run only. Halpern residuals decay like
/// `1/n`, so it usually needs a looser tolerance and a bigger budget than
/// plain projected gradient.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HalpernSpec {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub trace_stride: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Lemma22Spec {
    pub m: f64,
    pub v: f64,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub spacing: f64,
    #[serde(default = "default_vi_tolerance")]
    pub vi_tolerance: f64,
}

fn default_vi_tolerance() -> f64 {
    DEFAULT_VI_TOLERANCE
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            spacing: DEFAULT_GRID_SPACING,
            vi_tolerance: DEFAULT_VI_TOLERANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Projected gradient `x ← P_C(x − λAx)`.
    SolvePg,
    /// Halpern-anchored projected gradient with the map `map_s`.
    SolveHalpern,
    /// Relaxed `(m, v)`-cocoercive and `ε`-Lipschitz implies
    /// `(v − mε²)`-expansive, plus uniqueness of the VI solution on the grid.
    VerifyLemma22,
    /// ISM and expansive implies the VI solution set is a singleton.
    VerifyLemma31,
    /// Exhaustive grid search for VI solutions.
    BruteForce,
    /// Iterations needed by the distance bound vs the natural residual.
    CompareStopping,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Self::SolvePg => "solve_pg",
            Self::SolveHalpern => "solve_halpern",
            Self::VerifyLemma22 => "verify_lemma22",
            Self::VerifyLemma31 => "verify_lemma31",
            Self::BruteForce => "brute_force",
            Self::CompareStopping => "compare_stopping",
        }
    }
}

/// Recorded iteration counts for `compare_stopping`; a mismatch fails the run.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ExpectedComparison {
    pub shortcut_iteration: usize,
    pub natural_iteration: usize,
}

fn default_samples() -> usize {
    vikit_core::sampling::DEFAULT_PAIR_COUNT
}

fn default_delta() -> f64 {
    DEFAULT_COMPARISON_DELTA
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub operator: OperatorSpec,
    pub set: SetSpec,
    #[serde(default)]
    pub map_s: Option<MapSpec>,
    pub config: ConfigSpec,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub x_star: Option<Vec<f64>>,
    /// Halpern anchor; defaults to `x0`.
    #[serde(default)]
    pub anchor: Option<Vec<f64>>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub halpern: HalpernSpec,
    #[serde(default)]
    pub lemma22: Option<Lemma22Spec>,
    #[serde(default)]
    pub grid: GridSpec,
    /// Pair count for sampled checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Target accuracy for `compare_stopping`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub expected_comparison: Option<ExpectedComparison>,
}

impl Scenario {
    /// Parses a scenario; syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Self = serde_json::from_str(text).map_err(|e| ScenarioError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Schema-level invariants: every task has its required fields.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(ScenarioError::Schema(format!(
                "scenario name {:?} must be nonempty and contain no path separators",
                self.name
            )));
        }
        if self.tasks.is_empty() {
            return Err(ScenarioError::Schema("scenario lists no tasks".into()));
        }
        if self.tasks.contains(&Task::CompareStopping) && self.x_star.is_none() {
            return Err(ScenarioError::Schema(
                "compare_stopping requires x_star".into(),
            ));
        }
        if self.samples == 0 {
            return Err(ScenarioError::Schema("samples must be at least 1".into()));
        }
        Ok(())
    }
}
