//! Dense vector helpers and small-matrix spectral routines.
//!
//! Everything here works on `&[f64]` slices and a row-major square
//! [`Matrix`]. The spectral routines are cyclic Jacobi methods, which are
//! slow for large `n` but accurate to a few ulps for the desk-scale
//! operators this crate certifies.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

const JACOBI_MAX_SWEEPS: usize = 100;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Euclidean distance `‖a − b‖` without allocating.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub(crate) fn check_len(expected: usize, v: &[f64]) -> Result<(), Error> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Square real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Builds a matrix from rows; every row must have as many entries as
    /// there are rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, Error> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            check_len(n, row)?;
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1))
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        let n = self.n;
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                s.data[i * n + j] = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
            }
        }
        s
    }

    /// `MᵀM`.
    pub fn gram(&self) -> Self {
        let n = self.n;
        let mut g = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.data[k * n + i] * self.data[k * n + j];
                }
                g.data[i * n + j] = acc;
            }
        }
        g
    }

    /// `self + scale · other`.
    pub fn add_scaled(&self, scale: f64, other: &Matrix) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    /// Writes `Mx` into `out`. Lengths are the caller's responsibility.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.n.max(1))) {
            *o = dot(row, x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(x, &mut out);
        out
    }

    fn off_diagonal_norm(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += self.data[i * n + j] * self.data[i * n + j];
                }
            }
        }
        libm::sqrt(acc)
    }

    fn frobenius(&self) -> f64 {
        norm(&self.data)
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
///
/// Only the symmetric part of `m` is used, so callers may pass any square
/// matrix whose symmetric part they want the spectrum of.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.n;
    let mut a = m.symmetric_part();
    let scale = a.frobenius();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() <= f64::EPSILON * 1e-2 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.data[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a.data[p * n + p];
                let aqq = a.data[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // A ← JᵀAJ with J the (p, q) rotation.
                for k in 0..n {
                    let akp = a.data[k * n + p];
                    let akq = a.data[k * n + q];
                    a.data[k * n + p] = c * akp - s * akq;
                    a.data[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.data[p * n + k];
                    let aqk = a.data[q * n + k];
                    a.data[p * n + k] = c * apk - s * aqk;
                    a.data[q * n + k] = s * apk + c * aqk;
                }
                a.data[p * n + q] = 0.0;
                a.data[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.data[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Singular values and right singular vectors of a square matrix.
#[derive(Clone, Debug)]
pub struct SingularValues {
    /// Descending.
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit right singular vector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

impl SingularValues {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_vector(&self) -> &[f64] {
        self.vectors.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalizes the columns of `M` by plane rotations accumulated in
/// `V`; on exit the column norms of `MV` are the singular values. The
/// method keeps high relative accuracy for the small singular values,
/// which is what the expansiveness certificate depends on.
pub fn singular_values(m: &Matrix) -> SingularValues {
    let n = m.n;
    // Column-major working copy: cols[j] is column j of M.
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| m.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || libm::fabs(gamma) <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    SingularValues {
        values: order.iter().map(|(s, _)| *s).collect(),
        vectors: order.iter().map(|(_, j)| v[*j].clone()).collect(),
    }
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}
