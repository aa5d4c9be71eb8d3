//! Dense complex linear algebra shared by the solvers.
//!
//! Vectorization is column stacking throughout: `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`,
//! which coincides with nalgebra's column-major storage.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Condition estimate above which an eigenbasis is not trusted for propagation.
pub const EIGENBASIS_CONDITION_LIMIT: f64 = 1e8;

const SCHUR_MAX_ITER: usize = 10_000;

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Position of the element `(row, col)` of a `dim × dim` matrix in its vectorization.
#[inline]
pub fn vec_index(row: usize, col: usize, dim: usize) -> usize {
    col * dim + row
}

/// `|j⟩⟨k|` scaled by `value` in a `dim`-dimensional space.
pub fn outer_unit(dim: usize, j: usize, k: usize, value: C64) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(j, k)] = value;
    m
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition `A = V diag(values) V⁻¹` of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: CVector,
    /// Unit-norm right eigenvectors stored as columns.
    pub vectors: CMatrix,
}

impl Eigen {
    /// Frobenius condition estimate `‖V‖·‖V⁻¹‖` of the eigenbasis.
    pub fn condition(&self) -> f64 {
        match self.vectors.clone().try_inverse() {
            Some(inv) => self.vectors.norm() * inv.norm(),
            None => f64::INFINITY,
        }
    }
}

/// Eigenvalues and right eigenvectors via the complex Schur form.
///
/// Eigenvectors of the triangular factor are obtained by back substitution;
/// near-equal diagonal entries are separated by a floor of `ε‖T‖` so that
/// degenerate but diagonalizable spectra still yield independent vectors.
pub fn eig(m: &CMatrix) -> Result<Eigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    if n == 0 {
        return Ok(Eigen { values: CVector::zeros(0), vectors: CMatrix::zeros(0, 0) });
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::EigenSolverFailed)?;
    let (q, t) = schur.unpack();
    let values = t.diagonal();
    let small = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);

    let mut tri_vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        tri_vectors[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in (i + 1)..=k {
                s += t[(i, j)] * tri_vectors[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            tri_vectors[(i, k)] = -s / denom;
        }
    }
    let mut vectors = q * tri_vectors;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    Ok(Eigen { values, vectors })
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| se.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Neumaier-compensated sum; the result does not depend on accumulation noise.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        // xorshift; only needs to be irregular
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn vec_identity_holds() {
        let a = random_matrix(3, 1);
        let b = random_matrix(3, 2);
        let rho = random_matrix(3, 3);
        let lhs = vectorize(&(&a * &rho * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&rho);
        assert!((lhs - rhs).norm() < 1e-13);
        assert_eq!(unvectorize(&vectorize(&rho), 3), rho);
    }

    #[test]
    fn eig_reconstructs_general_matrix() {
        for seed in 0..5 {
            let m = random_matrix(7, seed + 11);
            let e = eig(&m).unwrap();
            for k in 0..7 {
                let v = e.vectors.column(k);
                let r = &m * v - v * e.values[k];
                assert!(r.norm() < 1e-11, "residual {}", r.norm());
            }
            assert!(e.condition() < 1e4);
        }
    }

    #[test]
    fn eig_handles_degenerate_diagonalizable_matrix() {
        // diag(1, 1, 2) in a rotated basis
        let s = random_matrix(3, 5) + CMatrix::identity(3, 3) * C64::new(2.0, 0.0);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, C64::new(2.0, 0.0)]));
        let m = &s * d * s.clone().try_inverse().unwrap();
        let e = eig(&m).unwrap();
        assert!(e.condition() < 1e6);
        for k in 0..3 {
            let v = e.vectors.column(k);
            assert!((&m * v - v * e.values[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn compensated_sum_is_exact_on_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
