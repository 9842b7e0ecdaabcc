//! Executable forms of the uniqueness results for cocoercive and
//! inverse-strongly-monotone operators.
//!
//! Two results are checked here:
//!
//! * A relaxed `(m, v)`-cocoercive, `ε`-Lipschitz operator with
//!   `v − mε² > 0` is `(v − mε²)`-expansive, and its VI has at most one
//!   solution.
//! * An `α`-inverse-strongly-monotone operator that is also `γ`-expansive
//!   has at most one VI solution.
//!
//! The sampled checks test the inequalities pairwise. Uniqueness is
//! checked against [`brute_force_vi`], a grid oracle that evaluates the
//! VI condition `⟨Ax, y − x⟩ ≥ 0` for every grid point `x` against every
//! grid point `y`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::geometry::ConvexSet;
use crate::linalg::{self, check_len, distance, dot};
use crate::operators::{certify_moduli, check_expansive, check_ism, AffineOperator};
use crate::report::{DeficitTracker, VerificationReport};
use crate::sampling::{self, Pair};
use crate::solvers::IterationTrace;

/// Upper bound on grid points enumerated by the oracle.
pub const GRID_POINT_LIMIT: u128 = 10_000_000;
/// The oracle is `O(N²)` in the point count; keep it to small dimensions.
pub const GRID_MAX_DIM: usize = 3;
/// Slack for sampled VI optimality `⟨Ax, y − x⟩ ≥ −tol`.
pub const VI_OPTIMALITY_TOL: f64 = 1e-6;

fn validate_lemma_constants(m: f64, v: f64, epsilon: f64) -> Result<(), Error> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            reason: "must be finite and nonnegative",
        });
    }
    for (name, value) in [("v", v), ("epsilon", epsilon)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "must be finite and positive",
            });
        }
    }
    Ok(())
}

fn validate_pairs(op: &AffineOperator, pairs: &[Pair]) -> Result<(), Error> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    for (x, y) in pairs {
        check_len(op.dim(), x)?;
        check_len(op.dim(), y)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocoerciveLemma {
    /// `v − mε²`; the expansiveness modulus when positive.
    pub gamma: f64,
    pub report: VerificationReport,
}

/// Checks the cocoercive-to-expansive lemma for the constants `(m, v, ε)`.
///
/// With `γ = v − mε² ≤ 0` the lemma does not apply and the report is
/// `PreconditionViolated`. The same status is used when the sampled pairs
/// show `op` is not relaxed `(m, v)`-cocoercive or not `ε`-Lipschitz.
/// Otherwise every pair is checked for
///
/// ```text
/// ⟨Ax − Ay, x − y⟩ ≥ γ‖x − y‖²   and   ‖Ax − Ay‖ ≥ γ‖x − y‖.
/// ```
pub fn lemma_cocoercive_expansive(
    op: &AffineOperator,
    m: f64,
    v: f64,
    epsilon: f64,
    pairs: &[Pair],
) -> Result<CocoerciveLemma, Error> {
    const PROPERTY: &str = "lemma_cocoercive_expansive";
    validate_lemma_constants(m, v, epsilon)?;
    validate_pairs(op, pairs)?;
    let gamma = v - m * epsilon * epsilon;
    if !(gamma > 0.0) {
        let report = VerificationReport::precondition_violated(
            PROPERTY,
            format!("v - m*eps^2 = {gamma} is not positive"),
        );
        let report = VerificationReport {
            max_violation: -gamma,
            ..report
        };
        return Ok(CocoerciveLemma { gamma, report });
    }

    let mut hypotheses = DeficitTracker::new();
    let mut conclusion = DeficitTracker::new();
    for (x, y) in pairs {
        let (az, z) = op.difference(x, y);
        let inner = dot(&az, &z);
        let az2 = dot(&az, &az);
        let z2 = dot(&z, &z);
        hypotheses.next_sample();
        hypotheses.observe(inner, -m * az2 + v * z2, x, y);
        hypotheses.observe(epsilon * libm::sqrt(z2), libm::sqrt(az2), x, y);
        conclusion.next_sample();
        conclusion.observe(inner, gamma * z2, x, y);
        conclusion.observe(libm::sqrt(az2), gamma * libm::sqrt(z2), x, y);
    }
    let hyp = hypotheses.finish("hypotheses");
    let report = if hyp.passed() {
        conclusion.finish(PROPERTY)
    } else {
        let (x, y) = hyp.witness.unwrap_or_default();
        VerificationReport {
            samples_used: hyp.samples_used,
            max_violation: hyp.max_violation,
            ..VerificationReport::precondition_violated(
                PROPERTY,
                format!(
                    "operator is not relaxed ({m}, {v})-cocoercive and {epsilon}-Lipschitz on pair x={x:?}, y={y:?}"
                ),
            )
        }
    };
    Ok(CocoerciveLemma { gamma, report })
}

/// Checks the chain
///
/// ```text
/// ⟨Ax − Ay, x − y⟩ ≥ −m‖Ax − Ay‖² + v‖x − y‖² ≥ (v − mε²)‖x − y‖²
/// ```
///
/// together with plain monotonicity `⟨Ax − Ay, x − y⟩ ≥ 0` on every pair.
/// The middle link only depends on `ε` when `m > 0`.
pub fn check_monotone_chain(
    op: &AffineOperator,
    m: f64,
    v: f64,
    epsilon: f64,
    pairs: &[Pair],
) -> Result<VerificationReport, Error> {
    validate_lemma_constants(m, v, epsilon)?;
    validate_pairs(op, pairs)?;
    let mut tracker = DeficitTracker::new();
    for (x, y) in pairs {
        let (az, z) = op.difference(x, y);
        let inner = dot(&az, &z);
        let az2 = dot(&az, &az);
        let z2 = dot(&z, &z);
        let relaxed = -m * az2 + v * z2;
        tracker.next_sample();
        tracker.observe(inner, relaxed, x, y);
        if m > 0.0 {
            tracker.observe(relaxed, (v - m * epsilon * epsilon) * z2, x, y);
        }
        tracker.observe(inner, 0.0, x, y);
    }
    Ok(tracker.finish("monotone_chain"))
}

/// A pair along the minimal right singular vector of `M`: the direction in
/// which `‖Ax − Ay‖ / ‖x − y‖` attains `σ_min`.
pub fn minimal_gain_pair(op: &AffineOperator) -> Pair {
    let sv = linalg::singular_values(op.matrix());
    (sv.min_vector().to_vec(), vec![0.0; op.dim()])
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsmLemma {
    /// Sampled checks of the hypotheses: inverse strong monotonicity and
    /// expansiveness.
    pub hypotheses: Vec<VerificationReport>,
    /// Grid check of uniqueness; `PreconditionViolated` when a hypothesis
    /// failed.
    pub singleton: VerificationReport,
}

/// Checks the ISM-plus-expansive uniqueness lemma with constants `alpha`
/// and `gamma` on `pairs`, then the singleton conclusion on `grid`.
pub fn lemma_ism_singleton(
    op: &AffineOperator,
    alpha: f64,
    gamma: f64,
    pairs: &[Pair],
    grid: &BruteForceGrid,
) -> Result<IsmLemma, Error> {
    let hypotheses = vec![
        check_ism(op, alpha, pairs)?,
        check_expansive(op, gamma, pairs)?,
    ];
    let singleton = if hypotheses.iter().all(VerificationReport::passed) {
        check_singleton_vi(op, grid)?
    } else {
        VerificationReport::precondition_violated(
            "singleton_vi",
            format!("operator is not {alpha}-inverse-strongly-monotone and {gamma}-expansive on the sampled pairs"),
        )
    };
    Ok(IsmLemma {
        hypotheses,
        singleton,
    })
}

/// Certified-constant variant of [`lemma_ism_singleton`]: `α` and `γ`
/// come from [`certify_moduli`], pairs from `seed`.
pub fn lemma_ism_singleton_certified(
    op: &AffineOperator,
    grid: &BruteForceGrid,
    pair_count: usize,
    seed: u64,
) -> Result<IsmLemma, Error> {
    let moduli = certify_moduli(op);
    let Some(alpha) = moduli.ism_alpha else {
        let note = format!(
            "no certified inverse-strong-monotonicity modulus (v = {})",
            moduli.strong_monotonicity
        );
        return Ok(IsmLemma {
            hypotheses: vec![VerificationReport::precondition_violated(
                "inverse_strongly_monotone",
                note.clone(),
            )],
            singleton: VerificationReport::precondition_violated("singleton_vi", note),
        });
    };
    if !moduli.is_expansive() {
        let note = format!(
            "expansiveness modulus {:e} is not positive",
            moduli.expansiveness
        );
        return Ok(IsmLemma {
            hypotheses: vec![VerificationReport::precondition_violated(
                "expansive",
                note.clone(),
            )],
            singleton: VerificationReport::precondition_violated("singleton_vi", note),
        });
    }
    let pairs = sampling::sample_pairs(op.dim(), pair_count, seed);
    let mut lemma = lemma_ism_singleton(op, alpha, moduli.expansiveness, &pairs, grid)?;
    for r in &mut lemma.hypotheses {
        r.seed = Some(seed);
    }
    Ok(lemma)
}

/// Grid over a box or simplex used by the brute-force VI oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceGrid {
    set: ConvexSet,
    spacing: f64,
    vi_tolerance: f64,
}

impl BruteForceGrid {
    pub fn new(set: ConvexSet, spacing: f64, vi_tolerance: f64) -> Result<Self, Error> {
        set.validate()?;
        if !matches!(set, ConvexSet::Box { .. } | ConvexSet::Simplex { .. }) {
            return Err(Error::GridUnsupported(
                "only box and simplex sets can be gridded",
            ));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter {
                name: "spacing",
                value: spacing,
                reason: "must be finite and positive",
            });
        }
        if !(vi_tolerance >= 0.0) || !vi_tolerance.is_finite() {
            return Err(Error::InvalidParameter {
                name: "vi_tolerance",
                value: vi_tolerance,
                reason: "must be finite and nonnegative",
            });
        }
        let grid = Self {
            set,
            spacing,
            vi_tolerance,
        };
        let points = grid.point_count();
        if points > GRID_POINT_LIMIT {
            return Err(Error::GridOverflow {
                points,
                limit: GRID_POINT_LIMIT,
            });
        }
        Ok(grid)
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn vi_tolerance(&self) -> f64 {
        self.vi_tolerance
    }

    /// Number of subdivisions of an interval of the given width. Widths
    /// within rounding of a multiple of the spacing hit the endpoint.
    fn cells(&self, width: f64) -> u64 {
        let ratio = width / self.spacing;
        let rounded = libm::round(ratio);
        if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded as u64
        } else {
            libm::floor(ratio) as u64
        }
    }

    pub fn point_count(&self) -> u128 {
        match &self.set {
            ConvexSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| self.cells(u - l) as u128 + 1)
                .fold(1u128, |acc, c| acc.saturating_mul(c)),
            ConvexSet::Simplex { dim } => {
                // Compositions of k into `dim` nonnegative parts: C(k + d − 1, d − 1).
                let k = self.cells(1.0) as u128;
                let d = *dim as u128;
                let mut count: u128 = 1;
                for i in 1..d {
                    count = count.saturating_mul(k + i) / i;
                }
                count
            }
            _ => 0,
        }
    }

    /// Enumerates the grid points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match &self.set {
            ConvexSet::Box { lower, upper } => {
                let axes: Vec<Vec<f64>> = lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| {
                        let cells = self.cells(u - l);
                        (0..=cells)
                            .map(|i| {
                                if i == cells
                                    && (u - l) - cells as f64 * self.spacing <= 1e-9 * self.spacing
                                {
                                    *u
                                } else {
                                    l + i as f64 * self.spacing
                                }
                            })
                            .collect()
                    })
                    .collect();
                cartesian(&axes)
            }
            ConvexSet::Simplex { dim } => {
                let k = self.cells(1.0) as usize;
                let mut out = Vec::new();
                let mut parts = vec![0usize; *dim];
                compositions(k, 0, &mut parts, &mut out);
                // Coordinates are multiples of 1/k so the points sum to one.
                let scale = 1.0 / k.max(1) as f64;
                let mut pts: Vec<Vec<f64>> = out
                    .into_iter()
                    .map(|p| p.into_iter().map(|c| c as f64 * scale).collect())
                    .collect();
                if k == 0 {
                    pts.clear();
                }
                pts.sort_by(|a, b| lex_cmp(a, b));
                pts
            }
            _ => Vec::new(),
        }
    }
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

fn compositions(remaining: usize, idx: usize, parts: &mut [usize], out: &mut Vec<Vec<usize>>) {
    if idx + 1 == parts.len() {
        parts[idx] = remaining;
        out.push(parts.to_vec());
        return;
    }
    for c in 0..=remaining {
        parts[idx] = c;
        compositions(remaining - c, idx + 1, parts, out);
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(core::cmp::Ordering::Equal)
}

/// All grid points `x` with `min_y ⟨Ax, y − x⟩ ≥ −vi_tolerance`, the
/// minimum taken over every grid point `y`. Sorted lexicographically.
pub fn brute_force_vi(op: &AffineOperator, grid: &BruteForceGrid) -> Result<Vec<Vec<f64>>, Error> {
    let dim = op.dim();
    if grid.set.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: grid.set.dim(),
        });
    }
    if dim > GRID_MAX_DIM {
        return Err(Error::GridUnsupported(
            "brute-force oracle is limited to dimension 3",
        ));
    }
    let points = grid.points();
    let mut ax = vec![0.0; dim];
    let mut solutions = Vec::new();
    for x in &points {
        op.evaluate_into(x, &mut ax);
        let base = dot(&ax, x);
        let worst = points
            .iter()
            .map(|y| dot(&ax, y) - base)
            .fold(f64::INFINITY, f64::min);
        if worst >= -grid.vi_tolerance {
            solutions.push(x.clone());
        }
    }
    solutions.sort_by(|a, b| lex_cmp(a, b));
    Ok(solutions)
}

/// Largest pairwise distance and the pair attaining it (first in
/// lexicographic order).
pub fn diameter(points: &[Vec<f64>]) -> Option<(f64, usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..points.len() {
        for j in i..points.len() {
            let d = distance(&points[i], &points[j]);
            if best.is_none_or(|(b, _, _)| d > b) {
                best = Some((d, i, j));
            }
        }
    }
    best
}

/// Uniqueness at grid resolution: passes when the oracle's solution set is
/// nonempty with diameter at most `2h√n`.
///
/// An empty solution set means the lemma's nonemptiness hypothesis fails
/// at this resolution; that is reported as `PreconditionViolated`.
pub fn check_singleton_vi(
    op: &AffineOperator,
    grid: &BruteForceGrid,
) -> Result<VerificationReport, Error> {
    let solutions = brute_force_vi(op, grid)?;
    Ok(singleton_report(&solutions, grid.spacing, op.dim()))
}

/// [`check_singleton_vi`] for an already computed oracle output.
pub fn singleton_report(solutions: &[Vec<f64>], spacing: f64, dim: usize) -> VerificationReport {
    const PROPERTY: &str = "singleton_vi";
    let Some((diam, i, j)) = diameter(solutions) else {
        return VerificationReport::precondition_violated(
            PROPERTY,
            "VI(C,A) empty at this resolution",
        );
    };
    let limit = 2.0 * spacing * libm::sqrt(dim as f64);
    let excess = diam - limit;
    let note = format!(
        "{} grid solutions, diameter {diam}, limit {limit}",
        solutions.len()
    );
    let report = if excess <= 0.0 {
        VerificationReport::pass(PROPERTY, solutions.len(), excess)
    } else {
        VerificationReport::fail(
            PROPERTY,
            (solutions[i].clone(), solutions[j].clone()),
            solutions.len(),
            excess,
        )
    };
    report.with_note(note)
}

/// Checks `‖x_n − x*‖ ≤ ‖Ax_n − Ax*‖/γ + 1e−9` on every recorded iterate of
/// a trace run with reference `x_star`.
pub fn check_shortcut_bound(
    trace: &IterationTrace,
    x_star: &[f64],
) -> Result<VerificationReport, Error> {
    let mut tracker = DeficitTracker::new();
    for r in &trace.records {
        let (Some(dist), Some(bound)) = (r.distance, r.shortcut_bound) else {
            return Err(Error::Config(format!(
                "trace record {} lacks a distance or shortcut bound; run with a reference and γ > 0",
                r.n
            )));
        };
        check_len(x_star.len(), &r.x)?;
        tracker.next_sample();
        tracker.observe(bound, dist, &r.x, x_star);
    }
    if trace.records.is_empty() {
        return Err(Error::EmptyPairs);
    }
    Ok(tracker.finish("shortcut_bound"))
}

/// Samples `⟨Ax, y − x⟩ ≥ −1e−6` for `samples` points `y` of `set`.
pub fn check_vi_optimality(
    op: &AffineOperator,
    set: &ConvexSet,
    x: &[f64],
    samples: usize,
    seed: u64,
) -> Result<VerificationReport, Error> {
    const PROPERTY: &str = "vi_optimality";
    set.validate()?;
    check_len(op.dim(), x)?;
    if set.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            actual: set.dim(),
        });
    }
    if samples == 0 {
        return Err(Error::EmptyPairs);
    }
    let ax = op.evaluate(x)?;
    let mut rng = sampling::rng(seed);
    let mut max_violation = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..samples {
        let y = sampling::sample_in_set(&mut rng, set);
        let value = dot(&ax, &y) - dot(&ax, x);
        let deficit = -value - VI_OPTIMALITY_TOL;
        max_violation = max_violation.max(deficit);
        if deficit > 0.0 && witness.is_none() {
            witness = Some((x.to_vec(), y));
        }
    }
    let report = match witness {
        Some(w) => VerificationReport::fail(PROPERTY, w, samples, max_violation),
        None => VerificationReport::pass(PROPERTY, samples, max_violation),
    };
    Ok(report.with_seed(seed))
}
