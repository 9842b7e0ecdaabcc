//! Outcome record shared by every sampled inequality check.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Additive slack allowed on every sampled inequality.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Pass,
    Fail,
    PreconditionViolated,
}

/// Result of checking one property.
///
/// `max_violation` is the largest slack deficit seen, measured beyond the
/// allowed tolerance, so it is `≤ 0` exactly when every sample passed.
/// A witness is attached if and only if the status is [`Status::Fail`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub property: String,
    pub status: Status,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub samples_used: usize,
    pub max_violation: f64,
    pub seed: Option<u64>,
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn pass(property: &str, samples_used: usize, max_violation: f64) -> Self {
        Self {
            property: property.to_string(),
            status: Status::Pass,
            witness: None,
            samples_used,
            max_violation,
            seed: None,
            note: None,
        }
    }

    pub fn fail(
        property: &str,
        witness: (Vec<f64>, Vec<f64>),
        samples_used: usize,
        max_violation: f64,
    ) -> Self {
        Self {
            property: property.to_string(),
            status: Status::Fail,
            witness: Some(witness),
            samples_used,
            max_violation,
            seed: None,
            note: None,
        }
    }

    pub fn precondition_violated(property: &str, note: impl Into<String>) -> Self {
        Self {
            property: property.to_string(),
            status: Status::PreconditionViolated,
            witness: None,
            samples_used: 0,
            max_violation: 0.0,
            seed: None,
            note: Some(note.into()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Accumulates pairwise slack deficits and turns them into a report.
pub(crate) struct DeficitTracker {
    max_violation: f64,
    witness: Option<(Vec<f64>, Vec<f64>)>,
    samples: usize,
}

impl DeficitTracker {
    pub(crate) fn new() -> Self {
        Self {
            max_violation: f64::NEG_INFINITY,
            witness: None,
            samples: 0,
        }
    }

    /// Records the deficit `rhs − lhs − tol` of an inequality `lhs ≥ rhs`.
    pub(crate) fn observe(&mut self, lhs: f64, rhs: f64, x: &[f64], y: &[f64]) {
        let deficit = rhs - lhs - INEQUALITY_TOL;
        // NaN deficits count as violations.
        if !(deficit <= self.max_violation) {
            self.max_violation = if deficit.is_nan() {
                f64::INFINITY
            } else {
                deficit
            };
        }
        if !(deficit <= 0.0) && self.witness.is_none() {
            self.witness = Some((x.to_vec(), y.to_vec()));
        }
    }

    pub(crate) fn next_sample(&mut self) {
        self.samples += 1;
    }

    pub(crate) fn finish(self, property: &str) -> VerificationReport {
        match self.witness {
            Some(w) => VerificationReport::fail(property, w, self.samples, self.max_violation),
            None => VerificationReport::pass(property, self.samples, self.max_violation),
        }
    }
}
