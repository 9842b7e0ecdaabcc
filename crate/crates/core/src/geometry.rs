//! Closed convex sets with closed-form metric projections.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{all_finite, check_len, distance, dot};

/// Pairwise orthonormality tolerance for affine-subspace bases.
pub const BASIS_ORTHONORMAL_TOL: f64 = 1e-12;

/// A nonempty closed convex subset of `Rⁿ`.
///
/// The variants are public so sets can be matched on, but they should be
/// built through the `new_*` constructors; [`ConvexSet::project`] and
/// [`ConvexSet::contains`] re-validate in any case.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    /// `{x : lower ≤ x ≤ upper}` componentwise.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{x : ‖x − center‖ ≤ radius}`.
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x : ⟨normal, x⟩ ≤ offset}`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// The probability simplex `{x ≥ 0 : Σx = 1}`.
    Simplex { dim: usize },
    /// `basepoint + span(basis)`, basis orthonormal. An empty basis is the
    /// single point `{basepoint}`.
    AffineSubspace {
        basepoint: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
}

impl ConvexSet {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, Error> {
        let set = Self::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    /// The box `[lo, hi]ⁿ`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, Error> {
        Self::new_box(vec![lo; dim], vec![hi; dim])
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self, Error> {
        let set = Self::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    pub fn new_halfspace(normal: Vec<f64>, offset: f64) -> Result<Self, Error> {
        let set = Self::Halfspace { normal, offset };
        set.validate()?;
        Ok(set)
    }

    pub fn simplex(dim: usize) -> Result<Self, Error> {
        let set = Self::Simplex { dim };
        set.validate()?;
        Ok(set)
    }

    pub fn new_affine(basepoint: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self, Error> {
        let set = Self::AffineSubspace { basepoint, basis };
        set.validate()?;
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Ball { center, .. } => center.len(),
            Self::Halfspace { normal, .. } => normal.len(),
            Self::Simplex { dim } => *dim,
            Self::AffineSubspace { basepoint, .. } => basepoint.len(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        match self {
            Self::Box { lower, upper } => {
                check_len(dim, upper)?;
                if !all_finite(lower) || !all_finite(upper) {
                    return Err(Error::NonFinite("box bounds"));
                }
                if let Some(i) = lower.iter().zip(upper).position(|(l, u)| l > u) {
                    return Err(Error::InvalidSet(format!(
                        "box lower bound exceeds upper bound at coordinate {i}"
                    )));
                }
            }
            Self::Ball { center, radius } => {
                if !all_finite(center) || !radius.is_finite() {
                    return Err(Error::NonFinite("ball"));
                }
                if *radius <= 0.0 {
                    return Err(Error::InvalidSet(format!(
                        "ball radius {radius} is not positive"
                    )));
                }
            }
            Self::Halfspace { normal, offset } => {
                if !all_finite(normal) || !offset.is_finite() {
                    return Err(Error::NonFinite("halfspace"));
                }
                if dot(normal, normal) == 0.0 {
                    return Err(Error::InvalidSet("halfspace normal is zero".into()));
                }
            }
            Self::Simplex { .. } => {}
            Self::AffineSubspace { basepoint, basis } => {
                if !all_finite(basepoint) {
                    return Err(Error::NonFinite("affine basepoint"));
                }
                for (i, u) in basis.iter().enumerate() {
                    check_len(dim, u)?;
                    if !all_finite(u) {
                        return Err(Error::NonFinite("affine basis"));
                    }
                    for (j, w) in basis.iter().enumerate().skip(i) {
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (dot(u, w) - target).abs() > BASIS_ORTHONORMAL_TOL {
                            return Err(Error::InvalidSet(format!(
                                "affine basis vectors {i} and {j} are not orthonormal"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.validate()?;
        check_len(self.dim(), x)?;
        Ok(self.project_unchecked(x))
    }

    /// True iff `x` lies within distance `tol` of the set.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, Error> {
        let p = self.project(x)?;
        Ok(distance(x, &p) <= tol)
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.project_into(x, &mut out);
        out
    }

    /// Projection for a validated set and a dimension-checked `x`.
    pub(crate) fn project_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Box { lower, upper } => {
                for (((o, xi), l), u) in out.iter_mut().zip(x).zip(lower).zip(upper) {
                    *o = xi.clamp(*l, *u);
                }
            }
            Self::Ball { center, radius } => {
                let d = distance(x, center);
                if d <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let scale = radius / d;
                    for ((o, xi), c) in out.iter_mut().zip(x).zip(center) {
                        *o = c + scale * (xi - c);
                    }
                }
            }
            Self::Halfspace { normal, offset } => {
                let excess = dot(normal, x) - offset;
                out.copy_from_slice(x);
                if excess > 0.0 {
                    let step = excess / dot(normal, normal);
                    for (o, a) in out.iter_mut().zip(normal) {
                        *o -= step * a;
                    }
                }
            }
            Self::Simplex { .. } => project_simplex_into(x, out),
            Self::AffineSubspace { basepoint, basis } => {
                out.copy_from_slice(basepoint);
                for u in basis {
                    let coeff: f64 = u
                        .iter()
                        .zip(x.iter().zip(basepoint))
                        .map(|(ui, (xi, bi))| ui * (xi - bi))
                        .sum();
                    for (o, ui) in out.iter_mut().zip(u) {
                        *o += coeff * ui;
                    }
                }
            }
        }
    }
}

/// Sort-and-threshold projection onto `{x ≥ 0 : Σx = 1}`.
///
/// The support size is the largest `k` with `u_k − (Σ_{i≤k} u_i − 1)/k > 0`
/// over the descending sort `u`, which makes the threshold unique even
/// when several entries tie.
fn project_simplex_into(x: &[f64], out: &mut [f64]) {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }
    for (o, xi) in out.iter_mut().zip(x) {
        *o = (xi - threshold).max(0.0);
    }
}
