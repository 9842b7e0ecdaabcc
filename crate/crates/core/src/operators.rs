//! Affine operators `A(x) = Mx + q` and their monotonicity moduli.
//!
//! For an affine map every constant in the monotone-operator hierarchy is
//! a spectral quantity of `M`, so the moduli below are computed exactly
//! (up to rounding) instead of estimated from samples:
//!
//! | modulus                 | value                              |
//! |-------------------------|------------------------------------|
//! | Lipschitz `ε`           | `σ_max(M)`                         |
//! | expansiveness `γ`       | `σ_min(M)`                         |
//! | strong monotonicity `v` | `λ_min((M + Mᵀ)/2)`                |
//! | inverse strong mon. `α` | `v / ε²` when `v > 0`              |
//!
//! The sampled checkers test the defining inequalities directly on pairs
//! of points and are independent of the spectral route.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{self, all_finite, check_len, dot, Matrix};
use crate::report::{DeficitTracker, VerificationReport};
use crate::sampling::Pair;

#[derive(Clone, Debug, PartialEq)]
pub struct AffineOperator {
    matrix: Matrix,
    offset: Vec<f64>,
}

impl AffineOperator {
    pub fn new(matrix: Matrix, offset: Vec<f64>) -> Result<Self, Error> {
        let n = matrix.dim();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        check_len(n, &offset)?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite("operator matrix"));
        }
        if !all_finite(&offset) {
            return Err(Error::NonFinite("operator offset"));
        }
        Ok(Self { matrix, offset })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], offset: Vec<f64>) -> Result<Self, Error> {
        Self::new(Matrix::from_rows(rows)?, offset)
    }

    /// `A(x) = Mx − Mc`, whose unconstrained zero is `c`.
    pub fn centered_at(matrix: Matrix, center: &[f64]) -> Result<Self, Error> {
        check_len(matrix.dim(), center)?;
        let offset = matrix.mul_vec(center).into_iter().map(|v| -v).collect();
        Self::new(matrix, offset)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        check_len(self.dim(), x)?;
        if !all_finite(x) {
            return Err(Error::NonFinite("operator argument"));
        }
        let mut out = vec![0.0; self.dim()];
        self.evaluate_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.mul_vec_into(x, out);
        for (o, q) in out.iter_mut().zip(&self.offset) {
            *o += q;
        }
    }

    /// `A(x) − A(y) = M(x − y)`, evaluated without the offset so that
    /// differences stay exact for large `q`.
    pub(crate) fn difference(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let z = linalg::sub(x, y);
        let mz = self.matrix.mul_vec(&z);
        (mz, z)
    }

    fn check_pairs(&self, pairs: &[Pair]) -> Result<(), Error> {
        if pairs.is_empty() {
            return Err(Error::EmptyPairs);
        }
        for (x, y) in pairs {
            check_len(self.dim(), x)?;
            check_len(self.dim(), y)?;
        }
        Ok(())
    }
}

/// `(m, v)` such that `⟨Ax − Ay, x − y⟩ ≥ −m‖Ax − Ay‖² + v‖x − y‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CocoercivePair {
    pub m: f64,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatorModuli {
    pub lipschitz: f64,
    pub strong_monotonicity: f64,
    pub ism_alpha: Option<f64>,
    pub expansiveness: f64,
    pub cocoercive: CocoercivePair,
}

impl OperatorModuli {
    /// True when `γ` is distinguishable from zero at the scale of `ε`.
    pub fn is_expansive(&self) -> bool {
        self.expansiveness > EXPANSIVE_FLOOR * self.lipschitz.max(1.0)
    }
}

/// Relative threshold below which a computed `σ_min` is treated as zero.
pub const EXPANSIVE_FLOOR: f64 = 1e-12;

pub fn certify_moduli(op: &AffineOperator) -> OperatorModuli {
    let sv = linalg::singular_values(op.matrix());
    let lipschitz = sv.max();
    let expansiveness = sv.min().min(lipschitz);
    let strong_monotonicity = linalg::symmetric_eigenvalues(op.matrix())[0];
    // ⟨Mz, z⟩ ≥ v‖z‖² ≥ (v/ε²)‖Mz‖², so v/ε² is a valid ISM constant.
    let ism_alpha =
        (strong_monotonicity > 0.0).then(|| strong_monotonicity / (lipschitz * lipschitz));
    OperatorModuli {
        lipschitz,
        strong_monotonicity,
        ism_alpha,
        expansiveness,
        cocoercive: CocoercivePair {
            m: 0.0,
            v: strong_monotonicity,
        },
    }
}

/// Largest `v` for which `op` is relaxed `(m, v)`-cocoercive.
///
/// `⟨Mz, z⟩ + m‖Mz‖² = zᵀ(sym(M) + m·MᵀM)z`, so the best constant is the
/// smallest eigenvalue of that symmetric matrix.
pub fn certify_cocoercive(op: &AffineOperator, m: f64) -> Result<CocoercivePair, Error> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            reason: "must be finite and nonnegative",
        });
    }
    let shifted = op
        .matrix()
        .symmetric_part()
        .add_scaled(m, &op.matrix().gram());
    let v = linalg::symmetric_eigenvalues(&shifted)[0];
    Ok(CocoercivePair { m, v })
}

fn require_positive(name: &'static str, value: f64) -> Result<(), Error> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        });
    }
    Ok(())
}

/// Samples `⟨Ax − Ay, x − y⟩ ≥ α‖Ax − Ay‖²`.
pub fn check_ism(
    op: &AffineOperator,
    alpha: f64,
    pairs: &[Pair],
) -> Result<VerificationReport, Error> {
    require_positive("alpha", alpha)?;
    op.check_pairs(pairs)?;
    let mut tracker = DeficitTracker::new();
    for (x, y) in pairs {
        let (az, z) = op.difference(x, y);
        tracker.next_sample();
        tracker.observe(dot(&az, &z), alpha * dot(&az, &az), x, y);
    }
    Ok(tracker.finish("inverse_strongly_monotone"))
}

/// Samples `⟨Ax − Ay, x − y⟩ ≥ −u‖Ax − Ay‖² + v‖x − y‖²`.
pub fn check_relaxed_cocoercive(
    op: &AffineOperator,
    u: f64,
    v: f64,
    pairs: &[Pair],
) -> Result<VerificationReport, Error> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::InvalidParameter {
            name: "u",
            value: u,
            reason: "must be finite and nonnegative",
        });
    }
    require_positive("v", v)?;
    op.check_pairs(pairs)?;
    let mut tracker = DeficitTracker::new();
    for (x, y) in pairs {
        let (az, z) = op.difference(x, y);
        tracker.next_sample();
        tracker.observe(dot(&az, &z), -u * dot(&az, &az) + v * dot(&z, &z), x, y);
    }
    Ok(tracker.finish("relaxed_cocoercive"))
}

/// Samples `‖Ax − Ay‖ ≥ γ‖x − y‖`.
pub fn check_expansive(
    op: &AffineOperator,
    gamma: f64,
    pairs: &[Pair],
) -> Result<VerificationReport, Error> {
    require_positive("gamma", gamma)?;
    op.check_pairs(pairs)?;
    let mut tracker = DeficitTracker::new();
    for (x, y) in pairs {
        let (az, z) = op.difference(x, y);
        tracker.next_sample();
        tracker.observe(linalg::norm(&az), gamma * linalg::norm(&z), x, y);
    }
    Ok(tracker.finish("expansive"))
}
