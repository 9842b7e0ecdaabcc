//! Projection-type iterations for `VI(C, A)` and `F(S) ∩ VI(C, A)`.
//!
//! Both solvers are built on the forward-backward map
//! `T(x) = P_C(x − λAx)`, whose fixed points are exactly the VI
//! solutions. Every iteration records the natural residual `‖x − Tx‖`
//! and, when the caller supplies a reference solution `x*`, the operator
//! residual `‖Ax − Ax*‖` together with the distance bound it implies for
//! a `γ`-expansive operator:
//!
//! ```text
//! ‖x − x*‖ ≤ ‖Ax − Ax*‖ / γ
//! ```
//!
//! so driving the operator residual to zero is already enough to conclude
//! strong convergence of the iterates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::geometry::ConvexSet;
use crate::linalg::{all_finite, check_len, distance};
use crate::operators::{certify_moduli, AffineOperator, OperatorModuli};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Membership slack for returned iterates.
pub const MEMBERSHIP_TOL: f64 = 1e-6;
/// Default target accuracy for [`compare_stopping`].
pub const DEFAULT_COMPARISON_DELTA: f64 = 1e-6;

/// Anchor weights `α_n` of the Halpern scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnchorSchedule {
    /// `α_n = 1/(n + 1)`.
    Harmonic,
    /// `α_n = 1/(n + 1)^p` with `p ∈ (0, 1]`, so that `α_n → 0` and
    /// `Σ α_n = ∞`.
    Power { exponent: f64 },
}

impl AnchorSchedule {
    pub fn weight(&self, n: usize) -> f64 {
        let base = (n + 1) as f64;
        match self {
            Self::Harmonic => 1.0 / base,
            Self::Power { exponent } => libm::pow(base, -exponent),
        }
    }

    fn validate(&self) -> Result<(), Error> {
        match self {
            Self::Harmonic => Ok(()),
            Self::Power { exponent } if *exponent > 0.0 && *exponent <= 1.0 => Ok(()),
            Self::Power { exponent } => Err(Error::InvalidParameter {
                name: "anchor exponent",
                value: *exponent,
                reason: "must lie in (0, 1]",
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationConfig {
    /// Step size `λ`.
    pub step: f64,
    pub anchor_schedule: AnchorSchedule,
    /// Maximum number of updates; the trace holds at most `max_iters + 1`
    /// iterates.
    pub max_iters: usize,
    pub residual_tol: f64,
    pub seed: u64,
    /// Record every `trace_stride`-th iterate. The first and last iterates
    /// are always recorded.
    pub trace_stride: usize,
}

impl IterationConfig {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            anchor_schedule: AnchorSchedule::Harmonic,
            max_iters: DEFAULT_MAX_ITERS,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            seed: 0,
            trace_stride: 1,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.trace_stride = stride;
        self
    }

    /// Checks the config against the operator's certified moduli.
    ///
    /// The step must lie in `(0, 2α)` for the certified inverse strong
    /// monotonicity constant `α`; this is what makes `I − λA` (and hence
    /// the forward-backward map) nonexpansive.
    pub fn validate(&self, moduli: &OperatorModuli) -> Result<(), Error> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::Config(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.trace_stride == 0 {
            return Err(Error::Config("trace_stride must be at least 1".into()));
        }
        self.anchor_schedule.validate()?;
        let alpha = moduli.ism_alpha.ok_or_else(|| {
            Error::Config(format!(
                "operator has no certified inverse-strong-monotonicity modulus (v = {})",
                moduli.strong_monotonicity
            ))
        })?;
        if !(self.step > 0.0 && self.step < 2.0 * alpha) {
            return Err(Error::Config(format!(
                "step {} outside (0, 2α) = (0, {})",
                self.step,
                2.0 * alpha
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub n: usize,
    pub x: Vec<f64>,
    /// `‖x_n − P_C(x_n − λAx_n)‖`.
    pub natural_residual: f64,
    /// `‖Ax_n − Ax*‖`, when a reference is supplied.
    pub operator_residual: Option<f64>,
    /// `operator_residual / γ`, when additionally `γ > 0`.
    pub shortcut_bound: Option<f64>,
    /// `‖x_n − x*‖`, when a reference is supplied.
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
    pub status: TraceStatus,
    /// Number of updates performed.
    pub iterations: usize,
    /// Expansiveness modulus used for the shortcut bounds.
    pub gamma: Option<f64>,
}

impl IterationTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("trace always holds the initial iterate")
    }

    pub fn final_iterate(&self) -> &[f64] {
        &self.last().x
    }

    pub fn converged(&self) -> bool {
        self.status == TraceStatus::Converged
    }
}

/// The nonexpansive map `S` whose fixed points the Halpern scheme also
/// targets.
#[derive(Clone, Debug, PartialEq)]
pub enum NonexpansiveMap {
    Identity,
    ProjectionOnto(ConvexSet),
    /// `x ↦ (1 − t)x + t·c`, with `F(S) = {c}` for `t > 0`.
    AffineAverage {
        coefficient: f64,
        fixed_point: Vec<f64>,
    },
}

impl NonexpansiveMap {
    pub fn validate(&self, dim: usize) -> Result<(), Error> {
        match self {
            Self::Identity => Ok(()),
            Self::ProjectionOnto(set) => {
                set.validate()?;
                if set.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: set.dim(),
                    });
                }
                Ok(())
            }
            Self::AffineAverage {
                coefficient,
                fixed_point,
            } => {
                check_len(dim, fixed_point)?;
                if !all_finite(fixed_point) {
                    return Err(Error::NonFinite("affine average fixed point"));
                }
                if !(0.0..=1.0).contains(coefficient) {
                    return Err(Error::InvalidParameter {
                        name: "coefficient",
                        value: *coefficient,
                        reason: "must lie in [0, 1]",
                    });
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.validate(x.len())?;
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Identity => out.copy_from_slice(x),
            Self::ProjectionOnto(set) => set.project_into(x, out),
            Self::AffineAverage {
                coefficient,
                fixed_point,
            } => {
                for ((o, xi), c) in out.iter_mut().zip(x).zip(fixed_point) {
                    *o = (1.0 - coefficient) * xi + coefficient * c;
                }
            }
        }
    }
}

/// `operator_residual / γ`: an upper bound on `‖x − x*‖` for a
/// `γ`-expansive operator.
pub fn shortcut_distance_bound(gamma: f64, operator_residual: f64) -> Result<f64, Error> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Config(format!(
            "shortcut bound needs a positive expansiveness modulus, got {gamma}"
        )));
    }
    if !(operator_residual >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "operator_residual",
            value: operator_residual,
            reason: "must be nonnegative",
        });
    }
    Ok(operator_residual / gamma)
}

/// Shared state of one solver run: problem data plus scratch buffers.
struct Workspace<'a> {
    op: &'a AffineOperator,
    set: &'a ConvexSet,
    step: f64,
    gamma: Option<f64>,
    reference: Option<(&'a [f64], Vec<f64>)>,
    ax: Vec<f64>,
    forward: Vec<f64>,
}

struct Probe {
    natural_residual: f64,
    operator_residual: Option<f64>,
    shortcut_bound: Option<f64>,
    distance: Option<f64>,
}

impl<'a> Workspace<'a> {
    fn new(
        op: &'a AffineOperator,
        set: &'a ConvexSet,
        cfg: &IterationConfig,
        x0: &[f64],
        reference: Option<&'a [f64]>,
    ) -> Result<(Self, OperatorModuli), Error> {
        let dim = op.dim();
        set.validate()?;
        if set.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: set.dim(),
            });
        }
        check_len(dim, x0)?;
        if !all_finite(x0) {
            return Err(Error::NonFinite("initial point"));
        }
        let moduli = certify_moduli(op);
        cfg.validate(&moduli)?;
        let reference = match reference {
            Some(r) => {
                check_len(dim, r)?;
                if !all_finite(r) {
                    return Err(Error::NonFinite("reference point"));
                }
                let mut ar = vec![0.0; dim];
                op.evaluate_into(r, &mut ar);
                Some((r, ar))
            }
            None => None,
        };
        let gamma = moduli.is_expansive().then_some(moduli.expansiveness);
        Ok((
            Self {
                op,
                set,
                step: cfg.step,
                gamma,
                reference,
                ax: vec![0.0; dim],
                forward: vec![0.0; dim],
            },
            moduli,
        ))
    }

    /// Evaluates `T(x)` into `out` and the residual columns at `x`.
    fn probe(&mut self, x: &[f64], out: &mut [f64]) -> Probe {
        self.op.evaluate_into(x, &mut self.ax);
        for ((f, xi), ai) in self.forward.iter_mut().zip(x).zip(&self.ax) {
            *f = xi - self.step * ai;
        }
        self.set.project_into(&self.forward, out);
        let natural_residual = distance(x, out);
        let (operator_residual, shortcut_bound, dist) = match &self.reference {
            Some((r, ar)) => {
                let s = distance(&self.ax, ar);
                (Some(s), self.gamma.map(|g| s / g), Some(distance(x, r)))
            }
            None => (None, None, None),
        };
        Probe {
            natural_residual,
            operator_residual,
            shortcut_bound,
            distance: dist,
        }
    }
}

fn record(n: usize, x: &[f64], probe: &Probe) -> TraceRecord {
    TraceRecord {
        n,
        x: x.to_vec(),
        natural_residual: probe.natural_residual,
        operator_residual: probe.operator_residual,
        shortcut_bound: probe.shortcut_bound,
        distance: probe.distance,
    }
}

/// Runs `x_{n+1} = T(x_n)` until `stop` accepts a probe or the budget is
/// spent.
fn projected_gradient_loop(
    op: &AffineOperator,
    set: &ConvexSet,
    cfg: &IterationConfig,
    x0: &[f64],
    reference: Option<&[f64]>,
    mut stop: impl FnMut(usize, &Probe) -> bool,
) -> Result<IterationTrace, Error> {
    let (mut ws, _) = Workspace::new(op, set, cfg, x0, reference)?;
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut records = Vec::new();
    let mut n = 0;
    loop {
        let probe = ws.probe(&x, &mut next);
        let done = stop(n, &probe);
        let status = if done && probe.natural_residual <= cfg.residual_tol {
            Some(TraceStatus::Converged)
        } else if n == cfg.max_iters {
            Some(TraceStatus::MaxIters)
        } else {
            None
        };
        if n % cfg.trace_stride == 0 || status.is_some() {
            records.push(record(n, &x, &probe));
        }
        if let Some(status) = status {
            return Ok(IterationTrace {
                records,
                status,
                iterations: n,
                gamma: ws.gamma,
            });
        }
        if !all_finite(&next) {
            return Err(Error::Divergence { iteration: n + 1 });
        }
        core::mem::swap(&mut x, &mut next);
        n += 1;
    }
}

/// Projected gradient `x_{n+1} = P_C(x_n − λAx_n)`.
///
/// Requires a certified inverse strong monotonicity constant `α` and
/// `λ ∈ (0, 2α)`. Stops once the natural residual drops to
/// `cfg.residual_tol`. Supplying `reference` fills the operator-residual,
/// shortcut-bound and distance columns of the trace.
pub fn solve_projected_gradient(
    op: &AffineOperator,
    set: &ConvexSet,
    cfg: &IterationConfig,
    x0: &[f64],
    reference: Option<&[f64]>,
) -> Result<IterationTrace, Error> {
    let tol = cfg.residual_tol;
    projected_gradient_loop(op, set, cfg, x0, reference, |_, p| {
        p.natural_residual <= tol
    })
}

/// Halpern-anchored projected gradient:
///
/// ```text
/// x_{n+1} = α_n·anchor + (1 − α_n)·S(P_C(x_n − λAx_n))
/// ```
///
/// Converged means both the natural residual and the fixed-point residual
/// `‖x_n − S(P_C(x_n − λAx_n))‖` are within `cfg.residual_tol`. The
/// anchor term decays like `α_n`, so tight tolerances need budgets of
/// order `1/tol` iterations.
pub fn solve_halpern(
    op: &AffineOperator,
    set: &ConvexSet,
    map: &NonexpansiveMap,
    cfg: &IterationConfig,
    x0: &[f64],
    anchor: &[f64],
    reference: Option<&[f64]>,
) -> Result<IterationTrace, Error> {
    let (mut ws, _) = Workspace::new(op, set, cfg, x0, reference)?;
    let dim = op.dim();
    map.validate(dim)?;
    check_len(dim, anchor)?;
    if !all_finite(anchor) {
        return Err(Error::NonFinite("anchor"));
    }
    let mut x = x0.to_vec();
    let mut projected = vec![0.0; dim];
    let mut mapped = vec![0.0; dim];
    let mut records = Vec::new();
    let mut n = 0;
    loop {
        let probe = ws.probe(&x, &mut projected);
        map.apply_into(&projected, &mut mapped);
        let fixed_residual = distance(&x, &mapped);
        let status =
            if probe.natural_residual <= cfg.residual_tol && fixed_residual <= cfg.residual_tol {
                Some(TraceStatus::Converged)
            } else if n == cfg.max_iters {
                Some(TraceStatus::MaxIters)
            } else {
                None
            };
        if n % cfg.trace_stride == 0 || status.is_some() {
            records.push(record(n, &x, &probe));
        }
        if let Some(status) = status {
            return Ok(IterationTrace {
                records,
                status,
                iterations: n,
                gamma: ws.gamma,
            });
        }
        let a = cfg.anchor_schedule.weight(n);
        for ((xi, u), t) in x.iter_mut().zip(anchor).zip(&mapped) {
            *xi = a * u + (1.0 - a) * t;
        }
        if !all_finite(&x) {
            return Err(Error::Divergence { iteration: n + 1 });
        }
        n += 1;
    }
}

/// Iteration counts at which two stopping rules first certify accuracy
/// `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct StoppingComparison {
    pub delta: f64,
    pub gamma: f64,
    /// First `n` with `‖Ax_n − Ax*‖/γ ≤ δ`.
    pub shortcut_iteration: Option<usize>,
    /// First `n` with `‖x_n − P_C(x_n − λAx_n)‖ ≤ δ`.
    pub natural_iteration: Option<usize>,
    pub trace: IterationTrace,
}

/// Runs projected gradient against a known solution `x_star` and reports
/// when each stopping rule fires.
///
/// The run continues until both rules have fired and the natural residual
/// has also reached `cfg.residual_tol`, or the budget is spent.
pub fn compare_stopping(
    op: &AffineOperator,
    set: &ConvexSet,
    cfg: &IterationConfig,
    x0: &[f64],
    x_star: &[f64],
    delta: f64,
) -> Result<StoppingComparison, Error> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    let moduli = certify_moduli(op);
    if !moduli.is_expansive() {
        return Err(Error::NotExpansive {
            gamma: moduli.expansiveness,
        });
    }
    let mut shortcut = None;
    let mut natural = None;
    let tol = cfg.residual_tol;
    let trace = projected_gradient_loop(op, set, cfg, x0, Some(x_star), |n, p| {
        if shortcut.is_none() && p.shortcut_bound.is_some_and(|b| b <= delta) {
            shortcut = Some(n);
        }
        if natural.is_none() && p.natural_residual <= delta {
            natural = Some(n);
        }
        shortcut.is_some() && natural.is_some() && p.natural_residual <= tol
    })?;
    Ok(StoppingComparison {
        delta,
        gamma: moduli.expansiveness,
        shortcut_iteration: shortcut,
        natural_iteration: natural,
        trace,
    })
}
