//! Decay widths of the effective non-Hermitian Hamiltonian and the
//! superradiant transition.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::grid::{interior_maximum, GridMaximum};
use crate::linalg::{compensated_sum, eig, CMatrix, C64};

/// Sink-coupled chain Hamiltonian `H − (iγ_out/2)|N⟩⟨N|` on the site block.
#[derive(Debug, Clone, PartialEq)]
pub struct NonHermitianHamiltonian {
    matrix: CMatrix,
    gamma_out: f64,
}

impl NonHermitianHamiltonian {
    /// Uses the on-site energies and hopping of `params`; loss, pump and
    /// dephasing are ignored and `gamma_out` overrides the sink rate.
    pub fn new(params: &ChainParams, gamma_out: f64) -> Result<Self> {
        params.validate()?;
        if !(gamma_out >= 0.0) || !gamma_out.is_finite() {
            return Err(Error::InvalidParameters(format!("gamma_out must be finite and non-negative, got {gamma_out}")));
        }
        let n = params.n_sites;
        let mut matrix = CMatrix::zeros(n, n);
        for j in 0..n {
            matrix[(j, j)] = C64::new(params.onsite[j], 0.0);
        }
        for j in 0..n - 1 {
            matrix[(j, j + 1)] = C64::new(params.hopping, 0.0);
            matrix[(j + 1, j)] = C64::new(params.hopping, 0.0);
        }
        matrix[(n - 1, n - 1)] -= C64::new(0.0, 0.5 * gamma_out);
        Ok(Self { matrix, gamma_out })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn gamma_out(&self) -> f64 {
        self.gamma_out
    }

    /// Anti-Hermitian part `(H − H†)/2i`.
    pub fn anti_hermitian_part(&self) -> CMatrix {
        (&self.matrix - self.matrix.adjoint()) * C64::new(0.0, -0.5)
    }

    pub fn spectrum(&self) -> Result<WidthSpectrum> {
        let decomposition = eig(&self.matrix)?;
        let n = self.matrix.nrows();
        let quantum = 1e-10 * self.gamma_out.max(1.0);
        let mut order: Vec<usize> = (0..n).collect();
        let key = |k: usize| {
            let e = decomposition.values[k];
            ((-2.0 * e.im / quantum).round() as i64, e.re)
        };
        order.sort_by(|&a, &b| {
            let (wa, ra) = key(a);
            let (wb, rb) = key(b);
            wb.cmp(&wa).then(ra.partial_cmp(&rb).unwrap_or(Ordering::Equal))
        });
        let energies = order.iter().map(|&k| decomposition.values[k].re).collect();
        // Widths are non-negative; round-off can leave tiny negative values.
        let widths = order.iter().map(|&k| (-2.0 * decomposition.values[k].im).max(0.0)).collect();
        let eigenvalues = order.iter().map(|&k| decomposition.values[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| decomposition.vectors[(i, order[j])]);
        Ok(WidthSpectrum { gamma_out: self.gamma_out, energies, widths, eigenvalues, vectors })
    }
}

/// Complex energies split into real parts and widths `Γ = −2 Im E`, ordered by
/// descending width and then ascending real part.
#[derive(Debug, Clone)]
pub struct WidthSpectrum {
    pub gamma_out: f64,
    pub energies: Vec<f64>,
    pub widths: Vec<f64>,
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors, columns in the same order as `widths`.
    pub vectors: CMatrix,
}

impl WidthSpectrum {
    pub fn largest_width(&self) -> f64 {
        self.widths[0]
    }

    /// Mean width with the largest one excluded. `None` for a single site.
    pub fn subradiant_mean(&self) -> Option<f64> {
        let rest = &self.widths[1..];
        if rest.is_empty() {
            return None;
        }
        Some(compensated_sum(rest.iter().copied()) / rest.len() as f64)
    }

    pub fn width_sum(&self) -> f64 {
        compensated_sum(self.widths.iter().copied())
    }

    /// `|⟨N|ψ⟩|²` for the widest state.
    pub fn edge_weight_of_widest(&self) -> f64 {
        let n = self.vectors.nrows();
        self.vectors[(n - 1, 0)].norm_sqr()
    }
}

pub fn width_spectrum(params: &ChainParams, gamma_out: f64) -> Result<WidthSpectrum> {
    NonHermitianHamiltonian::new(params, gamma_out)?.spectrum()
}

/// Width spectra over a grid of sink rates, evaluated in parallel.
pub fn width_scan(params: &ChainParams, gamma_grid: &[f64]) -> Result<Vec<WidthSpectrum>> {
    gamma_grid.par_iter().map(|&g| width_spectrum(params, g)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperradiantTransition {
    pub gamma_st: f64,
    pub index: usize,
    /// Subradiant mean width at `gamma_st`.
    pub mean_width: f64,
    /// Grid spacing around `gamma_st`.
    pub resolution: f64,
}

impl From<GridMaximum> for SuperradiantTransition {
    fn from(m: GridMaximum) -> Self {
        Self { gamma_st: m.position, index: m.index, mean_width: m.value, resolution: m.resolution }
    }
}

pub const MIN_DETECTION_POINTS: usize = 50;

/// Sink rate at which the mean width of all but the widest state peaks.
///
/// The grid must be sorted, cover `[0.5 t, 8 t]` and contain at least
/// [`MIN_DETECTION_POINTS`] points.
pub fn detect_superradiant_transition(params: &ChainParams, gamma_grid: &[f64]) -> Result<SuperradiantTransition> {
    params.validate()?;
    if params.n_sites < 2 {
        return Err(Error::InvalidParameters("the transition needs at least two sites".into()));
    }
    if gamma_grid.len() < MIN_DETECTION_POINTS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_DETECTION_POINTS} points, got {}",
            gamma_grid.len()
        )));
    }
    if gamma_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    let t = params.hopping;
    if gamma_grid[0] > 0.5 * t || gamma_grid[gamma_grid.len() - 1] < 8.0 * t {
        return Err(Error::InvalidGrid("grid must cover [0.5 t, 8 t]".into()));
    }
    let means: Vec<f64> = width_scan(params, gamma_grid)?
        .iter()
        .map(|s| s.subradiant_mean().unwrap_or(0.0))
        .collect();
    interior_maximum(gamma_grid, &means).map(Into::into)
}

/// Closed chain energies `2t cos(πq/(N+1))` and eigenvectors
/// `√(2/(N+1)) sin(jqπ/(N+1))`, `q = 1..N` as columns.
pub fn closed_chain_spectrum(n_sites: usize, hopping: f64) -> (Vec<f64>, CMatrix) {
    let m = (n_sites + 1) as f64;
    let energies = (1..=n_sites).map(|q| 2.0 * hopping * (PI * q as f64 / m).cos()).collect();
    let norm = (2.0 / m).sqrt();
    let vectors = CMatrix::from_fn(n_sites, n_sites, |j, q| {
        C64::new(norm * (((j + 1) * (q + 1)) as f64 * PI / m).sin(), 0.0)
    });
    (energies, vectors)
}

/// First-order widths `(2γ_out/(N+1)) sin²(Nqπ/(N+1))`, in the order `q = 1..N`.
pub fn perturbative_widths(n_sites: usize, hopping: f64, gamma_out: f64) -> Vec<f64> {
    let _ = hopping;
    let m = (n_sites + 1) as f64;
    (1..=n_sites)
        .map(|q| 2.0 * gamma_out / m * ((n_sites * q) as f64 * PI / m).sin().powi(2))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeEstimate {
    /// Sink rate where the average width `γ_out/N` meets the level spacing.
    pub gamma_st: f64,
    /// Average level spacing `4t/N`.
    pub level_spacing: f64,
}

pub fn gamma_st_perturbative_estimate(n_sites: usize, hopping: f64) -> PerturbativeEstimate {
    PerturbativeEstimate { gamma_st: 4.0 * hopping, level_spacing: 4.0 * hopping / n_sites as f64 }
}
