//! Certified moduli against independent spectral oracles: nalgebra's dense
//! SVD / symmetric eigendecomposition, and plain power iteration.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vikit_core::{certify_moduli, AffineOperator, Matrix};

fn random_rows(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

fn to_nalgebra(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// `σ_max` by power iteration on `MᵀM`, started from a fixed dense vector.
fn power_iteration_sigma_max(rows: &[Vec<f64>]) -> f64 {
    let m = to_nalgebra(rows);
    let gram = m.transpose() * &m;
    let n = rows.len();
    let mut v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..200_000 {
        let w = &gram * &v;
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        let converged = (next - lambda).abs() <= 1e-15 * next;
        lambda = next;
        v = w / next;
        if converged {
            break;
        }
    }
    // Rayleigh quotient of the converged vector.
    (v.dot(&(&gram * &v))).sqrt()
}

#[test]
fn moduli_match_dense_oracle_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let n = 1 + case % 10;
        let rows = random_rows(&mut rng, n);
        let op = AffineOperator::from_rows(&rows, vec![0.0; n]).unwrap();
        let moduli = certify_moduli(&op);

        let m = to_nalgebra(&rows);
        let sv = m.clone().singular_values();
        let sigma_max = sv.max();
        let sigma_min = sv.min();
        let sym = (&m + m.transpose()) * 0.5;
        let v = sym.symmetric_eigenvalues().min();

        assert!(
            (moduli.lipschitz - sigma_max).abs() <= 1e-8,
            "case {case}: ε"
        );
        assert!(
            (moduli.expansiveness - sigma_min).abs() <= 1e-8,
            "case {case}: γ"
        );
        assert!(
            (moduli.strong_monotonicity - v).abs() <= 1e-8,
            "case {case}: v"
        );
        assert!(moduli.expansiveness <= moduli.lipschitz);
        match moduli.ism_alpha {
            Some(alpha) => {
                assert!(v > 0.0);
                assert!((alpha - v / (sigma_max * sigma_max)).abs() <= 1e-8);
            }
            None => assert!(v <= 1e-12, "case {case}: missing α with v = {v}"),
        }
    }
}

#[test]
fn lipschitz_matches_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..30 {
        let n = 1 + case % 8;
        // Scale one row so the top singular value is well separated and
        // power iteration converges to full precision.
        let mut rows = random_rows(&mut rng, n);
        rows[0].iter_mut().for_each(|v| *v *= 4.0);
        let op = AffineOperator::from_rows(&rows, vec![0.0; n]).unwrap();
        let eps = certify_moduli(&op).lipschitz;
        let oracle = power_iteration_sigma_max(&rows);
        assert!(
            (eps - oracle).abs() <= 1e-10,
            "case {case}: {eps} vs {oracle}"
        );
    }
}

#[test]
fn hand_computed_examples() {
    let m =
        certify_moduli(&AffineOperator::new(Matrix::diagonal(&[2.0, 1.0]), vec![0.0; 2]).unwrap());
    assert!((m.lipschitz - 2.0).abs() <= 1e-12);
    assert!((m.expansiveness - 1.0).abs() <= 1e-12);
    assert!((m.ism_alpha.unwrap() - 0.25).abs() <= 1e-12);

    // MᵀM = 2I, sym(M) = I.
    let m = certify_moduli(
        &AffineOperator::from_rows(&[[1.0, -1.0], [1.0, 1.0]], vec![0.0; 2]).unwrap(),
    );
    assert!((m.lipschitz - 2f64.sqrt()).abs() <= 1e-12);
    assert!((m.expansiveness - 2f64.sqrt()).abs() <= 1e-12);
    assert!((m.strong_monotonicity - 1.0).abs() <= 1e-12);
    assert!((m.ism_alpha.unwrap() - 0.5).abs() <= 1e-12);
}
