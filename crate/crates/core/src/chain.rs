//! Open tight-binding chain: parameters, basis, Hamiltonian and jump operators.
//!
//! The basis has dimension `N + 1`: index 0 is the vacuum (no excitation in
//! the chain) and indices `1..=N` are the site states. Units are natural
//! (ħ = 1); rates and energies are in units of the hopping scale.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{outer_unit, CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub hopping: f64,
    /// On-site energies `ε_1..ε_N`.
    pub onsite: Vec<f64>,
    pub gamma_in: f64,
    pub gamma_out: f64,
    pub gamma_phi: f64,
    pub gamma_loss: f64,
    /// Disorder strength `W`; on-site shifts are drawn from `[-W/2, W/2]`.
    pub disorder_width: f64,
}

impl ChainParams {
    /// Clean, closed chain with unit hopping and zero on-site energies.
    pub fn uniform(n_sites: usize) -> Self {
        Self {
            n_sites,
            hopping: 1.0,
            onsite: vec![0.0; n_sites],
            gamma_in: 0.0,
            gamma_out: 0.0,
            gamma_phi: 0.0,
            gamma_loss: 0.0,
            disorder_width: 0.0,
        }
    }

    pub fn with_hopping(mut self, hopping: f64) -> Self {
        self.hopping = hopping;
        self
    }

    pub fn with_onsite(mut self, onsite: Vec<f64>) -> Self {
        self.onsite = onsite;
        self
    }

    pub fn with_gamma_in(mut self, rate: f64) -> Self {
        self.gamma_in = rate;
        self
    }

    pub fn with_gamma_out(mut self, rate: f64) -> Self {
        self.gamma_out = rate;
        self
    }

    pub fn with_gamma_phi(mut self, rate: f64) -> Self {
        self.gamma_phi = rate;
        self
    }

    pub fn with_gamma_loss(mut self, rate: f64) -> Self {
        self.gamma_loss = rate;
        self
    }

    pub fn with_disorder(mut self, width: f64) -> Self {
        self.disorder_width = width;
        self
    }

    /// Dimension of the vacuum-plus-sites basis.
    pub fn dim(&self) -> usize {
        self.n_sites + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidParameters("n_sites must be at least 1".into()));
        }
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return Err(Error::InvalidParameters(format!("hopping must be positive, got {}", self.hopping)));
        }
        if self.onsite.len() != self.n_sites {
            return Err(Error::InvalidParameters(format!(
                "expected {} on-site energies, got {}",
                self.n_sites,
                self.onsite.len()
            )));
        }
        if let Some(e) = self.onsite.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidParameters(format!("non-finite on-site energy {e}")));
        }
        for (name, rate) in [
            ("gamma_in", self.gamma_in),
            ("gamma_out", self.gamma_out),
            ("gamma_phi", self.gamma_phi),
            ("gamma_loss", self.gamma_loss),
            ("disorder_width", self.disorder_width),
        ] {
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::InvalidParameters(format!("{name} must be finite and non-negative, got {rate}")));
            }
        }
        Ok(())
    }
}

/// Index bookkeeping for the vacuum-plus-sites basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub n_sites: usize,
}

impl Basis {
    pub const VACUUM: usize = 0;

    pub fn new(n_sites: usize) -> Self {
        Self { n_sites }
    }

    pub fn dim(&self) -> usize {
        self.n_sites + 1
    }

    /// Basis index of site `j` (1-based).
    pub fn site(&self, j: usize) -> usize {
        debug_assert!((1..=self.n_sites).contains(&j));
        j
    }

    pub fn last_site(&self) -> usize {
        self.n_sites
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpLabel {
    In,
    Out,
    Dephase(usize),
    Loss(usize),
}

/// Lindblad operator with its rate already absorbed into the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub matrix: CMatrix,
    pub label: JumpLabel,
    pub rate: f64,
}

impl JumpOperator {
    fn single(dim: usize, row: usize, col: usize, rate: f64, label: JumpLabel) -> Self {
        Self { matrix: outer_unit(dim, row, col, C64::new(rate.sqrt(), 0.0)), label, rate }
    }
}

/// Tight-binding Hamiltonian on the vacuum-plus-sites basis. The vacuum row
/// and column are zero.
pub fn build_hamiltonian(params: &ChainParams) -> Result<CMatrix> {
    params.validate()?;
    let n = params.n_sites;
    let mut h = CMatrix::zeros(n + 1, n + 1);
    for j in 1..=n {
        h[(j, j)] = C64::new(params.onsite[j - 1], 0.0);
    }
    for j in 1..n {
        h[(j, j + 1)] = C64::new(params.hopping, 0.0);
        h[(j + 1, j)] = C64::new(params.hopping, 0.0);
    }
    Ok(h)
}

/// Pump, sink, dephasing and loss channels. Channels with zero rate are omitted.
pub fn build_jump_operators(params: &ChainParams) -> Result<Vec<JumpOperator>> {
    params.validate()?;
    let basis = Basis::new(params.n_sites);
    let d = basis.dim();
    let mut ops = Vec::new();
    if params.gamma_in > 0.0 {
        ops.push(JumpOperator::single(d, basis.site(1), Basis::VACUUM, params.gamma_in, JumpLabel::In));
    }
    if params.gamma_out > 0.0 {
        ops.push(JumpOperator::single(d, Basis::VACUUM, basis.last_site(), params.gamma_out, JumpLabel::Out));
    }
    if params.gamma_phi > 0.0 {
        for j in 1..=params.n_sites {
            ops.push(JumpOperator::single(d, j, j, params.gamma_phi, JumpLabel::Dephase(j)));
        }
    }
    if params.gamma_loss > 0.0 {
        for j in 1..=params.n_sites {
            ops.push(JumpOperator::single(d, Basis::VACUUM, j, params.gamma_loss, JumpLabel::Loss(j)));
        }
    }
    Ok(ops)
}

/// Uniform variate on `[0, 1)` from the top 53 bits of a 64-bit draw.
#[inline]
pub fn unit_interval(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Adds i.i.d. shifts `W·(u − ½)` to the on-site energies, with `u` drawn in
/// site order from xoshiro256++ seeded through SplitMix64 (`seed_from_u64`).
pub fn sample_onsite_disorder(params: &ChainParams, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let w = params.disorder_width;
    if w == 0.0 {
        return Ok(params.onsite.clone());
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    Ok(params
        .onsite
        .iter()
        .map(|e0| e0 + w * (unit_interval(rng.next_u64()) - 0.5))
        .collect())
}
