//! Transient dynamics, average transfer time and efficiency.
//!
//! With the pump switched off the excitation can only leave the chain, so the
//! evolution restricted to the site block (vacuum removed) is generated by
//!
//! ```text
//! L_red ρ = −i(H_NH ρ − ρ H_NH†) + γ_φ Σ_j (P_j ρ P_j − ½{P_j, ρ}),
//! H_NH   = H − (i γ_out / 2)|N⟩⟨N| − (i γ_loss / 2) 1,
//! ```
//!
//! whose spectrum lies strictly in the left half plane when `γ_out > 0`.
//! Time integrals of the sink current then reduce to resolvent solves:
//! `∫ e^{Lt} dt = −L⁻¹` and `∫ t e^{Lt} dt = L⁻²`.

use nalgebra::LU;

use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::linalg::{eig, kron, outer_unit, unvectorize, vec_index, vectorize, CMatrix, CVector, Eigen, C64, EIGENBASIS_CONDITION_LIMIT, I};
use crate::liouvillian::{DensityMatrix, Superoperator};

/// Liouvillian on the `N × N` site block with the pump removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLiouvillian {
    matrix: CMatrix,
    n_sites: usize,
    gamma_out: f64,
}

impl ReducedLiouvillian {
    pub fn new(params: &ChainParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_sites;
        let h_nh = non_hermitian_block(params);
        let id = CMatrix::identity(n, n);
        let mut matrix = (kron(&id, &h_nh) - kron(&h_nh.conjugate(), &id)) * (-I);
        if params.gamma_phi > 0.0 {
            let g = params.gamma_phi;
            for j in 0..n {
                matrix[(vec_index(j, j, n), vec_index(j, j, n))] += C64::new(g, 0.0);
            }
            // −½{P_j, ρ} summed over j removes γ_φ from every element, and the
            // diagonal gains it back through P_j ρ P_j.
            for k in 0..n * n {
                matrix[(k, k)] -= C64::new(g, 0.0);
            }
        }
        Ok(Self { matrix, n_sites: n, gamma_out: params.gamma_out })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn exit_channel(&self) -> ExitChannel {
        ExitChannel { index: self.n_sites - 1, rate: self.gamma_out }
    }
}

/// `H − (iγ_out/2)|N⟩⟨N| − (iγ_loss/2)·1` on the site block.
pub(crate) fn non_hermitian_block(params: &ChainParams) -> CMatrix {
    let n = params.n_sites;
    let mut h = CMatrix::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = C64::new(params.onsite[j], -0.5 * params.gamma_loss);
    }
    for j in 0..n.saturating_sub(1) {
        h[(j, j + 1)] = C64::new(params.hopping, 0.0);
        h[(j + 1, j)] = C64::new(params.hopping, 0.0);
    }
    h[(n - 1, n - 1)] -= C64::new(0.0, 0.5 * params.gamma_out);
    h
}

/// A generator of linear dynamics on vectorized `dim × dim` matrices.
pub trait Generator {
    fn generator(&self) -> &CMatrix;
    fn dim(&self) -> usize;
}

impl Generator for Superoperator {
    fn generator(&self) -> &CMatrix {
        self.matrix()
    }
    fn dim(&self) -> usize {
        Superoperator::dim(self)
    }
}

impl Generator for ReducedLiouvillian {
    fn generator(&self) -> &CMatrix {
        &self.matrix
    }
    fn dim(&self) -> usize {
        self.n_sites
    }
}

/// Basis index of the site attached to the sink and the sink rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitChannel {
    pub index: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    /// Spectral decomposition when the eigenbasis is well conditioned,
    /// matrix exponential otherwise.
    Auto,
    Spectral,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationUsed {
    Spectral,
    Exponential,
    /// Spectral route rejected; the condition estimate is recorded.
    ExponentialFallback { condition: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    /// `γ_out ρ_NN(t)`.
    pub exit_current: Vec<f64>,
    pub method: PropagationUsed,
}

impl Trajectory {
    pub fn traces(&self) -> Vec<f64> {
        self.states.iter().map(|s| crate::linalg::trace(s).re).collect()
    }

    /// Trapezoidal `∫ I(t) dt` over the sampled window.
    pub fn integrated_exit(&self) -> f64 {
        trapezoid(&self.times, &self.exit_current)
    }

    /// Trapezoidal `∫ t I(t) dt / ∫ I(t) dt` over the sampled window.
    pub fn mean_exit_time(&self) -> f64 {
        let weighted: Vec<f64> = self.times.iter().zip(&self.exit_current).map(|(t, i)| t * i).collect();
        trapezoid(&self.times, &weighted) / self.integrated_exit()
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

enum Propagator {
    Spectral { eigen: Eigen, coeffs: CVector },
    Exponential,
}

fn spectral_propagator(gen: &CMatrix, v0: &CVector) -> Result<(Eigen, CVector)> {
    let eigen = eig(gen)?;
    let condition = eigen.condition();
    if !(condition <= EIGENBASIS_CONDITION_LIMIT) {
        return Err(Error::IllConditionedEigenbasis { condition });
    }
    let coeffs = LU::new(eigen.vectors.clone())
        .solve(v0)
        .ok_or(Error::IllConditionedEigenbasis { condition: f64::INFINITY })?;
    Ok((eigen, coeffs))
}

pub fn evolve<G: Generator>(gen: &G, rho0: &DensityMatrix, times: &[f64], exit: ExitChannel) -> Result<Trajectory> {
    evolve_with(gen, rho0, times, exit, Propagation::Auto)
}

/// `ρ(t) = unvec(exp(L t) vec(ρ0))` at each requested time.
pub fn evolve_with<G: Generator>(
    gen: &G,
    rho0: &DensityMatrix,
    times: &[f64],
    exit: ExitChannel,
    method: Propagation,
) -> Result<Trajectory> {
    let d = gen.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
    }
    if exit.index >= d {
        return Err(Error::InvalidParameters(format!("exit index {} outside a {d}-dimensional block", exit.index)));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidParameters(format!("times must be finite and non-negative, got {t}")));
    }
    let l = gen.generator();
    let v0 = vectorize(rho0.matrix());

    let (propagator, used) = match method {
        Propagation::Exponential => (Propagator::Exponential, PropagationUsed::Exponential),
        Propagation::Spectral => {
            let (eigen, coeffs) = spectral_propagator(l, &v0)?;
            (Propagator::Spectral { eigen, coeffs }, PropagationUsed::Spectral)
        }
        Propagation::Auto => match spectral_propagator(l, &v0) {
            Ok((eigen, coeffs)) => (Propagator::Spectral { eigen, coeffs }, PropagationUsed::Spectral),
            Err(Error::IllConditionedEigenbasis { condition }) => {
                log::debug!("eigenbasis condition {condition:e}; using the matrix exponential");
                (Propagator::Exponential, PropagationUsed::ExponentialFallback { condition })
            }
            Err(Error::EigenSolverFailed) => {
                (Propagator::Exponential, PropagationUsed::ExponentialFallback { condition: f64::INFINITY })
            }
            Err(e) => return Err(e),
        },
    };

    let mut states = Vec::with_capacity(times.len());
    let mut exit_current = Vec::with_capacity(times.len());
    for &t in times {
        let v = match &propagator {
            Propagator::Spectral { eigen, coeffs } => {
                let weighted = CVector::from_fn(coeffs.len(), |k, _| coeffs[k] * (eigen.values[k] * t).exp());
                &eigen.vectors * weighted
            }
            Propagator::Exponential => (l * C64::new(t, 0.0)).exp() * &v0,
        };
        let rho = unvectorize(&v, d);
        exit_current.push(exit.rate * rho[(exit.index, exit.index)].re);
        states.push(rho);
    }
    Ok(Trajectory { times: times.to_vec(), states, exit_current, method: used })
}

/// Average transfer time `τ` and efficiency `η = ∫ I dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferTime {
    pub tau: f64,
    pub efficiency: f64,
}

/// Initial state with the excitation on site `site` (1-based) of the site block.
pub fn site_excitation(n_sites: usize, site: usize) -> DensityMatrix {
    DensityMatrix::basis_state(n_sites, site - 1)
}

fn check_transient(params: &ChainParams, rho0: &DensityMatrix) -> Result<()> {
    params.validate()?;
    if params.gamma_out == 0.0 {
        return Err(Error::SingularReducedLiouvillian);
    }
    if rho0.dim() != params.n_sites {
        return Err(Error::DimensionMismatch { expected: params.n_sites, found: rho0.dim() });
    }
    Ok(())
}

/// Transfer time and efficiency from two resolvent solves on the reduced block.
/// The pump rate in `params` is ignored.
pub fn transfer_time(params: &ChainParams, rho0: &DensityMatrix) -> Result<TransferTime> {
    check_transient(params, rho0)?;
    let red = ReducedLiouvillian::new(params)?;
    let n = params.n_sites;
    let sink = vec_index(n - 1, n - 1, n);
    let lu = LU::new(red.matrix.clone());
    let x1 = lu.solve(&vectorize(rho0.matrix())).ok_or(Error::SingularReducedLiouvillian)?;
    let x2 = lu.solve(&x1).ok_or(Error::SingularReducedLiouvillian)?;
    finish(params.gamma_out, -x1[sink].re, x2[sink].re)
}

/// Same contract as [`transfer_time`], evaluated through the eigen-decomposition
/// `L = V diag(E) V⁻¹`: `∫ e^{Lt} = V diag(−1/E) V⁻¹`, `∫ t e^{Lt} = V diag(1/E²) V⁻¹`.
pub fn transfer_time_spectral(params: &ChainParams, rho0: &DensityMatrix) -> Result<TransferTime> {
    check_transient(params, rho0)?;
    let red = ReducedLiouvillian::new(params)?;
    let n = params.n_sites;
    let sink = vec_index(n - 1, n - 1, n);
    let (eigen, coeffs) = spectral_propagator(&red.matrix, &vectorize(rho0.matrix()))?;
    if eigen.values.iter().any(|e| e.norm() == 0.0) {
        return Err(Error::SingularReducedLiouvillian);
    }
    let row = eigen.vectors.row(sink);
    let mut first = C64::new(0.0, 0.0);
    let mut second = C64::new(0.0, 0.0);
    for k in 0..coeffs.len() {
        let e = eigen.values[k];
        first += row[k] * coeffs[k] / e;
        second += row[k] * coeffs[k] / (e * e);
    }
    finish(params.gamma_out, -first.re, second.re)
}

fn finish(gamma_out: f64, occupation_integral: f64, weighted_integral: f64) -> Result<TransferTime> {
    let efficiency = gamma_out * occupation_integral;
    if !(efficiency > 0.0) || !efficiency.is_finite() {
        return Err(Error::SingularReducedLiouvillian);
    }
    let tau = gamma_out * weighted_integral / efficiency;
    Ok(TransferTime { tau, efficiency })
}

/// `|j⟩⟨j|` on the site block, for callers building custom initial states.
pub fn site_projector(n_sites: usize, site: usize) -> CMatrix {
    outer_unit(n_sites, site - 1, site - 1, C64::new(1.0, 0.0))
}
