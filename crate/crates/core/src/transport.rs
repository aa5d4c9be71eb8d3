//! Linear-response transmission through the chain coupled to two wide-band
//! leads at its ends.
//!
//! Lead self-energies are `−iγ/2` on sites 1 and `N`, so the level width is
//! `Γ = i(Σ^r − Σ^a) = γ` and `T = Γ_L Γ_R |G^r_{1N}|² = γ² |G^r_{1N}|²`.

use std::fmt;
use std::sync::Arc;

use nalgebra::FullPivLU;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{interior_maximum, GridMaximum, GridSpec};
use crate::linalg::{CMatrix, C64};

/// Site-diagonal retarded self-energy `Σ_j(ω)` added to the chain.
///
/// Implementations are evaluated concurrently from scan workers.
pub trait LocalSelfEnergy: Send + Sync {
    fn evaluate(&self, site: usize, omega: f64) -> C64;
}

/// `Σ ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSelfEnergy;

impl LocalSelfEnergy for ZeroSelfEnergy {
    fn evaluate(&self, _site: usize, _omega: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
}

/// Constant `−iΓ_c/2` on every site.
#[derive(Debug, Clone, Copy)]
pub struct StaticBroadening {
    pub width: f64,
}

impl LocalSelfEnergy for StaticBroadening {
    fn evaluate(&self, _site: usize, _omega: f64) -> C64 {
        C64::new(0.0, -0.5 * self.width)
    }
}

#[derive(Clone)]
pub struct TransmissionModel {
    pub n_sites: usize,
    pub hopping: f64,
    pub lead_coupling: f64,
    /// Retarded shift `ω → ω + iη`.
    pub broadening: f64,
    self_energy: Arc<dyn LocalSelfEnergy>,
}

impl fmt::Debug for TransmissionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransmissionModel")
            .field("n_sites", &self.n_sites)
            .field("hopping", &self.hopping)
            .field("lead_coupling", &self.lead_coupling)
            .field("broadening", &self.broadening)
            .finish_non_exhaustive()
    }
}

impl TransmissionModel {
    pub fn new(n_sites: usize, hopping: f64, lead_coupling: f64, broadening: f64) -> Result<Self> {
        let model = Self { n_sites, hopping, lead_coupling, broadening, self_energy: Arc::new(ZeroSelfEnergy) };
        model.validate()?;
        Ok(model)
    }

    pub fn with_self_energy(mut self, self_energy: Arc<dyn LocalSelfEnergy>) -> Self {
        self.self_energy = self_energy;
        self
    }

    pub fn with_lead_coupling(&self, lead_coupling: f64) -> Self {
        Self { lead_coupling, ..self.clone() }
    }

    pub fn with_broadening(&self, broadening: f64) -> Self {
        Self { broadening, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidParameters("n_sites must be at least 1".into()));
        }
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return Err(Error::InvalidParameters(format!("hopping must be positive, got {}", self.hopping)));
        }
        for (name, v) in [("lead_coupling", self.lead_coupling), ("broadening", self.broadening)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameters(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// `(ω + iη) − H₀ − Σ_L − Σ_R − Σ(ω)`.
    fn inverse_greens_function(&self, omega: f64) -> Result<CMatrix> {
        let n = self.n_sites;
        let z = C64::new(omega, self.broadening);
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            let sigma = self.self_energy.evaluate(j + 1, omega);
            if sigma.im > 0.0 {
                return Err(Error::NonCausalSelfEnergy { site: j + 1, omega, imag: sigma.im });
            }
            m[(j, j)] = z - sigma;
        }
        for j in 0..n - 1 {
            m[(j, j + 1)] = C64::new(-self.hopping, 0.0);
            m[(j + 1, j)] = C64::new(-self.hopping, 0.0);
        }
        let lead = C64::new(0.0, 0.5 * self.lead_coupling);
        m[(0, 0)] += lead;
        m[(n - 1, n - 1)] += lead;
        Ok(m)
    }
}

/// Retarded Green's function `G^r(ω)`.
pub fn greens_function(model: &TransmissionModel, omega: f64) -> Result<CMatrix> {
    model.validate()?;
    let m = model.inverse_greens_function(omega)?;
    let scale = m.norm().max(1.0);
    let lu = FullPivLU::new(m);
    let u = lu.u();
    let smallest = u.diagonal().iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
    if smallest <= 1e-14 * scale {
        return Err(Error::SingularMatrix { omega });
    }
    lu.try_inverse().ok_or(Error::SingularMatrix { omega })
}

/// `T(ω) = γ² |G^r_{1N}(ω)|²`.
pub fn transmission(model: &TransmissionModel, omega: f64) -> Result<f64> {
    let g = greens_function(model, omega)?;
    Ok(model.lead_coupling.powi(2) * g[(0, model.n_sites - 1)].norm_sqr())
}

/// Linear-response conductance `T(0)` in units of `e²/h`.
pub fn conductance(model: &TransmissionModel) -> Result<f64> {
    transmission(model, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceScan {
    pub lead_coupling: Vec<f64>,
    pub conductance: Vec<f64>,
}

impl ConductanceScan {
    pub fn maximum(&self) -> Result<GridMaximum> {
        interior_maximum(&self.lead_coupling, &self.conductance)
    }
}

/// Conductance over a grid of lead couplings, evaluated in parallel.
pub fn conductance_scan(model: &TransmissionModel, gamma_grid: &[f64]) -> Result<ConductanceScan> {
    let conductance = gamma_grid
        .par_iter()
        .map(|&g| conductance(&model.with_lead_coupling(g)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConductanceScan { lead_coupling: gamma_grid.to_vec(), conductance })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    pub site: usize,
    pub omega: f64,
    /// `−Im G^r_jj(ω)/π`.
    pub value: f64,
}

/// Local spectral function of `site` (1-based) on `omega_grid`.
pub fn spectral_function(model: &TransmissionModel, site: usize, omega_grid: &[f64]) -> Result<Vec<SpectralSample>> {
    if site == 0 || site > model.n_sites {
        return Err(Error::InvalidParameters(format!("site {site} outside 1..={}", model.n_sites)));
    }
    omega_grid
        .par_iter()
        .map(|&omega| {
            let g = greens_function(model, omega)?;
            Ok(SpectralSample { site, omega, value: -g[(site - 1, site - 1)].im / std::f64::consts::PI })
        })
        .collect()
}

/// `[−3t, 3t]` with 1201 points.
pub fn default_omega_grid(hopping: f64) -> GridSpec {
    GridSpec::linear(-3.0 * hopping, 3.0 * hopping, 1201)
}

/// Operating point used to relate conductance to a Lindblad current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeConditions {
    pub lead_coupling: f64,
    pub broadening: f64,
    pub gamma_in: f64,
    pub gamma_loss: f64,
    pub gamma_phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeValidity {
    /// `γ_loss = 2η` within 1%.
    pub loss_matches_broadening: bool,
    pub no_dephasing: bool,
    /// `η ≤ γ/10`.
    pub broadening_small: bool,
    /// `γ_in ≥ 10 γ_loss`.
    pub pump_dominates_loss: bool,
}

impl BridgeValidity {
    pub fn all(&self) -> bool {
        self.loss_matches_broadening && self.no_dephasing && self.broadening_small && self.pump_dominates_loss
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeEstimate {
    pub current: f64,
    pub validity: BridgeValidity,
}

/// Order-of-magnitude current `(t/N) √g` implied by a conductance `g`.
pub fn current_from_conductance(g: f64, n_sites: usize, hopping: f64, at: &BridgeConditions) -> BridgeEstimate {
    let validity = BridgeValidity {
        loss_matches_broadening: (at.gamma_loss - 2.0 * at.broadening).abs() <= 0.01 * (2.0 * at.broadening).max(f64::MIN_POSITIVE),
        no_dephasing: at.gamma_phi == 0.0,
        broadening_small: at.broadening <= 0.1 * at.lead_coupling,
        pump_dominates_loss: at.gamma_in >= 10.0 * at.gamma_loss,
    };
    BridgeEstimate { current: hopping / n_sites as f64 * g.max(0.0).sqrt(), validity }
}
