//! Lindblad superoperator, non-equilibrium steady state and sink current.

use nalgebra::FullPivLU;

use crate::chain::JumpOperator;
use crate::error::{Error, Result};
use crate::linalg::{eigh, hermiticity_defect, kron, trace, unvectorize, vec_index, vectorize, CMatrix, CVector, I, ZERO};

/// Tolerance for the Hermiticity, trace and positivity checks on density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-10;

/// Dense generator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: CMatrix,
    dim: usize,
}

impl Superoperator {
    pub fn from_matrix(matrix: CMatrix, dim: usize) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { matrix, dim })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Dimension `d` of the underlying Hilbert space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    /// Largest deviation of `vec(1)ᴴ L` from zero, relative to `‖L‖`.
    pub fn trace_defect(&self) -> f64 {
        let norm = self.matrix.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for col in 0..d * d {
            let s: crate::linalg::C64 = (0..d).map(|k| self.matrix[(vec_index(k, k, d), col)]).sum();
            worst = worst.max(s.norm());
        }
        worst / norm
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let herm = hermiticity_defect(&matrix);
        if herm > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > DENSITY_TOLERANCE || tr.im.abs() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        let (vals, _) = eigh(&matrix);
        if let Some(&min) = vals.first() {
            if min < -DENSITY_TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self { matrix })
    }

    /// Pure state `|k⟩⟨k|` in a `dim`-dimensional space.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = crate::linalg::ONE;
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.matrix[(k, k)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.matrix).0.first().copied().unwrap_or(0.0)
    }
}

/// Thresholds for the stationary solve, relative to the Frobenius norm of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateTolerances {
    pub rank_threshold: f64,
    pub residual_bound: f64,
}

impl Default for SteadyStateTolerances {
    fn default() -> Self {
        Self { rank_threshold: 1e-8, residual_bound: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖ / ‖L‖` of the returned state.
    pub residual: f64,
}

/// `L = −i(1⊗H − Hᵀ⊗1) + Σ_α [ L̄_α⊗L_α − ½(1⊗L_α†L_α + (L_α†L_α)ᵀ⊗1) ]`.
pub fn build_liouvillian(h: &CMatrix, jumps: &[JumpOperator]) -> Result<Superoperator> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: h.ncols() });
    }
    for j in jumps {
        if j.matrix.nrows() != d || j.matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: j.matrix.nrows() });
        }
    }
    let matrix = lindblad_generator(h, jumps.iter().map(|j| &j.matrix));
    Ok(Superoperator { matrix, dim: d })
}

pub(crate) fn lindblad_generator<'a>(h: &CMatrix, ops: impl Iterator<Item = &'a CMatrix>) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
    for a in ops {
        let ada = a.adjoint() * a;
        l += kron(&a.conjugate(), a);
        l -= (kron(&id, &ada) + kron(&ada.transpose(), &id)).scale(0.5);
    }
    l
}

/// Stationary state with default tolerances.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    steady_state_with(l, SteadyStateTolerances::default())
}

pub fn steady_state_with(l: &Superoperator, tol: SteadyStateTolerances) -> Result<SteadyState> {
    let d = l.dim;
    let trace_positions: Vec<usize> = (0..d).map(|k| vec_index(k, k, d)).collect();
    let (x, residual) = stationary_vector(&l.matrix, &trace_positions, tol)?;
    let rho = DensityMatrix::new(unvectorize(&x, d))?;
    Ok(SteadyState { rho, residual })
}

/// Trace-normalized null vector of a generator block.
///
/// A fully pivoted LU factorization both counts the numerically vanishing
/// pivots (the null-space dimension) and yields the null vector by back
/// substitution through the upper factor.
pub(crate) fn stationary_vector(
    m: &CMatrix,
    trace_positions: &[usize],
    tol: SteadyStateTolerances,
) -> Result<(CVector, f64)> {
    let n = m.nrows();
    let norm = m.norm();
    if norm == 0.0 {
        return Err(Error::NonUniqueSteadyState { nullity: n });
    }
    let lu = FullPivLU::new(m.clone());
    let u = lu.u();
    let threshold = tol.rank_threshold * norm;
    let nullity = (0..n).filter(|&k| u[(k, k)].norm() <= threshold).count();
    if nullity > 1 {
        return Err(Error::NonUniqueSteadyState { nullity });
    }

    let mut y = CVector::zeros(n);
    y[n - 1] = crate::linalg::ONE;
    for i in (0..n - 1).rev() {
        let mut s = ZERO;
        for j in (i + 1)..n {
            s += u[(i, j)] * y[j];
        }
        y[i] = -s / u[(i, i)];
    }
    lu.q().inv_permute_rows(&mut y);

    let tr: crate::linalg::C64 = trace_positions.iter().map(|&k| y[k]).sum();
    let bound = tol.residual_bound;
    if !(tr.norm() > 0.0) || !tr.norm().is_finite() {
        return Err(Error::SingularSystem { residual: f64::INFINITY, bound });
    }
    let x = y / tr;
    let residual = (m * &x).norm() / norm;
    if !(residual <= bound) {
        return Err(Error::SingularSystem { residual, bound });
    }
    Ok((x, residual))
}

/// Sink current `γ_out ⟨N|ρ|N⟩`, with `N` the last basis index.
pub fn ness_current(rho: &DensityMatrix, gamma_out: f64) -> f64 {
    let n = rho.dim() - 1;
    gamma_out * rho.population(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hamiltonian, build_jump_operators, ChainParams};
    use crate::linalg::C64;

    fn liouvillian(p: &ChainParams) -> Superoperator {
        build_liouvillian(&build_hamiltonian(p).unwrap(), &build_jump_operators(p).unwrap()).unwrap()
    }

    #[test]
    fn closed_zero_hamiltonian_gives_zero_generator() {
        let l = build_liouvillian(&CMatrix::zeros(3, 3), &[]).unwrap();
        assert_eq!(l.matrix(), &CMatrix::zeros(9, 9));
        assert!(matches!(steady_state(&l), Err(Error::NonUniqueSteadyState { nullity: 9 })));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = ChainParams::uniform(2).with_gamma_out(1.0);
        let jumps = build_jump_operators(&p).unwrap();
        let err = build_liouvillian(&CMatrix::zeros(4, 4), &jumps).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn two_state_rate_equation_is_embedded() {
        let l = liouvillian(&ChainParams::uniform(1).with_gamma_in(1.0).with_gamma_out(2.0));
        for (p0, p1) in [(1.0, 0.0), (0.0, 1.0), (0.3, 0.7)] {
            let mut rho = CMatrix::zeros(2, 2);
            rho[(0, 0)] = C64::new(p0, 0.0);
            rho[(1, 1)] = C64::new(p1, 0.0);
            let dr = l.apply(&rho);
            assert!((dr[(0, 0)].re - (-p0 + 2.0 * p1)).abs() < 1e-15);
            assert!((dr[(1, 1)].re - (p0 - 2.0 * p1)).abs() < 1e-15);
            assert!(dr[(0, 1)].norm() < 1e-15);
        }
    }

    #[test]
    fn symmetric_two_state_steady_state() {
        let ss = steady_state(&liouvillian(&ChainParams::uniform(1).with_gamma_in(1.0).with_gamma_out(1.0))).unwrap();
        assert!((ss.rho.population(0) - 0.5).abs() < 1e-14);
        assert!((ss.rho.population(1) - 0.5).abs() < 1e-14);
        assert!((ness_current(&ss.rho, 1.0) - 0.5).abs() < 1e-14);
        assert!(ss.residual <= 1e-10);
    }

    #[test]
    fn without_pump_everything_decays_to_vacuum() {
        let p = ChainParams::uniform(4).with_gamma_out(1.5).with_gamma_phi(0.2);
        let ss = steady_state(&liouvillian(&p)).unwrap();
        assert!((ss.rho.population(0) - 1.0).abs() < 1e-12);
        assert!(ness_current(&ss.rho, p.gamma_out).abs() < 1e-12);
    }

    #[test]
    fn closed_coherent_chain_has_no_unique_steady_state() {
        let p = ChainParams::uniform(3).with_gamma_in(1.0);
        let err = steady_state(&liouvillian(&p)).unwrap_err();
        assert!(matches!(err, Error::NonUniqueSteadyState { nullity } if nullity > 1), "{err:?}");
    }

    #[test]
    fn current_is_vacuum_free_for_vacuum_state() {
        let rho = DensityMatrix::basis_state(5, 0);
        assert_eq!(ness_current(&rho, 3.0), 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 0)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn trace_is_preserved() {
        let p = ChainParams::uniform(5)
            .with_gamma_in(0.4)
            .with_gamma_out(2.0)
            .with_gamma_phi(0.3)
            .with_gamma_loss(0.1)
            .with_onsite(vec![0.1, -0.2, 0.0, 0.3, 0.05]);
        assert!(liouvillian(&p).trace_defect() < 1e-12);
    }
}
