//! Qubit-chain model with the full excitation manifold.
//!
//! Bit `j` of a basis index is the occupation of site `j + 1`. Every jump
//! operator and the Hamiltonian map a basis state to at most one basis state,
//! and none of them mixes excitation numbers between ket and bra. The
//! stationary state therefore lives in the span of `|a⟩⟨b|` with
//! `popcount(a) = popcount(b)`, a block of dimension `C(2N, N)` that is solved
//! instead of the full `4^N` space.

use rayon::prelude::*;

use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, I};
use crate::liouvillian::{steady_state, stationary_vector, SteadyStateTolerances, Superoperator};

pub const DEFAULT_SITE_CAP: usize = 7;
pub const MAX_SITE_CAP: usize = 8;

/// A jump that flips or tests one qubit: `amplitude · op_bit`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum QubitJump {
    /// `σ⁺_j`.
    Raise { bit: usize, amplitude: f64 },
    /// `σ⁻_j`.
    Lower { bit: usize, amplitude: f64 },
    /// `σ⁻_j σ⁺_j`, the projector onto an empty qubit.
    Empty { bit: usize, amplitude: f64 },
}

impl QubitJump {
    fn act(&self, state: usize) -> Option<(usize, f64)> {
        match *self {
            QubitJump::Raise { bit, amplitude } => (state >> bit & 1 == 0).then(|| (state | 1 << bit, amplitude)),
            QubitJump::Lower { bit, amplitude } => (state >> bit & 1 == 1).then(|| (state & !(1 << bit), amplitude)),
            QubitJump::Empty { bit, amplitude } => (state >> bit & 1 == 0).then_some((state, amplitude)),
        }
    }

    fn dense(&self, n_sites: usize) -> CMatrix {
        let dim = 1 << n_sites;
        let mut m = CMatrix::zeros(dim, dim);
        for s in 0..dim {
            if let Some((target, amp)) = self.act(s) {
                m[(target, s)] = C64::new(amp, 0.0);
            }
        }
        m
    }
}

/// Chain of `N` qubits with pump on site 1, sink on site `N`, dephasing and loss.
#[derive(Debug, Clone)]
pub struct QubitChainModel {
    params: ChainParams,
    jumps: Vec<QubitJump>,
}

impl QubitChainModel {
    pub fn new(params: &ChainParams) -> Result<Self> {
        Self::with_cap(params, DEFAULT_SITE_CAP)
    }

    /// Caps above [`DEFAULT_SITE_CAP`] are allowed up to [`MAX_SITE_CAP`].
    pub fn with_cap(params: &ChainParams, cap: usize) -> Result<Self> {
        params.validate()?;
        let cap = cap.min(MAX_SITE_CAP);
        if params.n_sites > cap {
            return Err(Error::DimensionCapExceeded { n_sites: params.n_sites, cap });
        }
        if params.n_sites > DEFAULT_SITE_CAP {
            log::warn!(
                "qubit chain with {} sites: the generator block has dimension {}",
                params.n_sites,
                block_dimension(params.n_sites)
            );
        }
        let n = params.n_sites;
        let mut jumps = Vec::new();
        if params.gamma_in > 0.0 {
            jumps.push(QubitJump::Raise { bit: 0, amplitude: params.gamma_in.sqrt() });
        }
        if params.gamma_out > 0.0 {
            jumps.push(QubitJump::Lower { bit: n - 1, amplitude: params.gamma_out.sqrt() });
        }
        if params.gamma_phi > 0.0 {
            jumps.extend((0..n).map(|bit| QubitJump::Empty { bit, amplitude: params.gamma_phi.sqrt() }));
        }
        if params.gamma_loss > 0.0 {
            jumps.extend((0..n).map(|bit| QubitJump::Lower { bit, amplitude: params.gamma_loss.sqrt() }));
        }
        Ok(Self { params: params.clone(), jumps })
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    pub fn hilbert_dim(&self) -> usize {
        1 << self.params.n_sites
    }

    fn diagonal_energy(&self, state: usize) -> f64 {
        (0..self.n_sites()).filter(|b| state >> b & 1 == 1).map(|b| self.params.onsite[b]).sum()
    }

    /// States reached from `state` by one hop, each with amplitude `t`.
    fn hops(&self, state: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_sites().saturating_sub(1))
            .filter(move |b| (state >> b & 1) != (state >> (b + 1) & 1))
            .map(move |b| state ^ (0b11 << b))
    }

    /// `t Σ (σ⁺_j σ⁻_{j+1} + h.c.) + Σ ε_j n_j` on the `2^N` space.
    pub fn hamiltonian(&self) -> CMatrix {
        let dim = self.hilbert_dim();
        let mut h = CMatrix::zeros(dim, dim);
        for s in 0..dim {
            h[(s, s)] = C64::new(self.diagonal_energy(s), 0.0);
            for target in self.hops(s) {
                h[(target, s)] = C64::new(self.params.hopping, 0.0);
            }
        }
        h
    }

    pub fn number_operator(&self) -> CMatrix {
        let dim = self.hilbert_dim();
        CMatrix::from_diagonal(&CVector::from_fn(dim, |s, _| C64::new(s.count_ones() as f64, 0.0)))
    }

    /// Jump operators as dense `2^N × 2^N` matrices.
    pub fn jump_matrices(&self) -> Vec<CMatrix> {
        self.jumps.iter().map(|j| j.dense(self.n_sites())).collect()
    }

    /// Generator on the full `4^N` space. Only sensible for small `N`.
    pub fn full_liouvillian(&self) -> Superoperator {
        let h = self.hamiltonian();
        let ops = self.jump_matrices();
        let m = crate::liouvillian::lindblad_generator(&h, ops.iter());
        Superoperator::from_matrix(m, h.nrows()).expect("generator of a square Hamiltonian")
    }

    pub fn block(&self) -> ExcitationBlock {
        let n = self.n_sites();
        let sectors: Vec<Vec<usize>> = (0..=n)
            .map(|k| (0..self.hilbert_dim()).filter(|s| s.count_ones() as usize == k).collect())
            .collect();
        let mut position = vec![0usize; self.hilbert_dim()];
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0;
        for states in &sectors {
            for (p, &s) in states.iter().enumerate() {
                position[s] = p;
            }
            offsets.push(total);
            total += states.len() * states.len();
        }
        let layout = BlockLayout { sectors, position, offsets, dim: total };

        let mut m = CMatrix::zeros(total, total);
        let t = self.params.hopping;
        for (k, states) in layout.sectors.iter().enumerate() {
            for &a in states {
                for &b in states {
                    let col = layout.index(k, a, b);
                    // −i(Hρ − ρH) for ρ = |a⟩⟨b|
                    let diag = self.diagonal_energy(a) - self.diagonal_energy(b);
                    m[(col, col)] += -I * diag;
                    for c in self.hops(a) {
                        m[(layout.index(k, c, b), col)] += -I * t;
                    }
                    for d in self.hops(b) {
                        m[(layout.index(k, a, d), col)] += I * t;
                    }
                    for jump in &self.jumps {
                        let ja = jump.act(a);
                        let jb = jump.act(b);
                        let decay = ja.map_or(0.0, |(_, x)| x * x) + jb.map_or(0.0, |(_, x)| x * x);
                        m[(col, col)] -= C64::new(0.5 * decay, 0.0);
                        if let (Some((c, x)), Some((d, y))) = (ja, jb) {
                            let kc = c.count_ones() as usize;
                            m[(layout.index(kc, c, d), col)] += C64::new(x * y, 0.0);
                        }
                    }
                }
            }
        }
        ExcitationBlock { matrix: m, layout }
    }

    pub fn steady_state(&self) -> Result<BlockSteadyState> {
        let block = self.block();
        let trace_positions: Vec<usize> = block
            .layout
            .sectors
            .iter()
            .enumerate()
            .flat_map(|(k, states)| states.iter().map(move |&a| (k, a)))
            .map(|(k, a)| block.layout.index(k, a, a))
            .collect();
        let (x, residual) = stationary_vector(&block.matrix, &trace_positions, SteadyStateTolerances::default())?;
        Ok(BlockSteadyState { vector: x, layout: block.layout, residual })
    }
}

/// Number of `(a, b)` pairs with equal excitation number, `C(2N, N)`.
pub fn block_dimension(n_sites: usize) -> usize {
    (0..=n_sites).map(|k| binomial(n_sites, k).pow(2)).sum()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone)]
struct BlockLayout {
    sectors: Vec<Vec<usize>>,
    position: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

impl BlockLayout {
    fn index(&self, sector: usize, ket: usize, bra: usize) -> usize {
        let size = self.sectors[sector].len();
        self.offsets[sector] + self.position[bra] * size + self.position[ket]
    }
}

/// Generator restricted to the equal-excitation block. Within each sector the
/// pairs are column-stacked.
#[derive(Debug, Clone)]
pub struct ExcitationBlock {
    matrix: CMatrix,
    layout: BlockLayout,
}

impl ExcitationBlock {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    /// Block entries embedded into a full `2^N × 2^N` density matrix.
    fn embed(&self, x: &CVector, hilbert_dim: usize) -> CMatrix {
        embed(&self.layout, x, hilbert_dim)
    }

    /// Inverse of `embed`: keeps only the entries inside the block.
    pub fn restrict(&self, rho: &CMatrix) -> CVector {
        let mut x = CVector::zeros(self.layout.dim);
        for (k, states) in self.layout.sectors.iter().enumerate() {
            for &a in states {
                for &b in states {
                    x[self.layout.index(k, a, b)] = rho[(a, b)];
                }
            }
        }
        x
    }

    pub fn apply_embedded(&self, rho: &CMatrix) -> CMatrix {
        let y = &self.matrix * self.restrict(rho);
        self.embed(&y, rho.nrows())
    }
}

fn embed(layout: &BlockLayout, x: &CVector, hilbert_dim: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(hilbert_dim, hilbert_dim);
    for (k, states) in layout.sectors.iter().enumerate() {
        for &a in states {
            for &b in states {
                rho[(a, b)] = x[layout.index(k, a, b)];
            }
        }
    }
    rho
}

#[derive(Debug, Clone)]
pub struct BlockSteadyState {
    vector: CVector,
    layout: BlockLayout,
    pub residual: f64,
}

impl BlockSteadyState {
    pub fn density_matrix(&self) -> CMatrix {
        let n = self.layout.sectors.len() - 1;
        embed(&self.layout, &self.vector, 1 << n)
    }

    /// `⟨σ⁺_j σ⁻_j⟩` for site `j` (1-based).
    pub fn occupation(&self, site: usize) -> f64 {
        let bit = site - 1;
        self.diagonal().filter(|(s, _)| s >> bit & 1 == 1).map(|(_, p)| p).sum()
    }

    /// Population of each excitation-number sector, index = number of excitations.
    pub fn sector_populations(&self) -> Vec<f64> {
        self.layout
            .sectors
            .iter()
            .enumerate()
            .map(|(k, states)| states.iter().map(|&a| self.vector[self.layout.index(k, a, a)].re).sum())
            .collect()
    }

    fn diagonal(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.layout
            .sectors
            .iter()
            .enumerate()
            .flat_map(move |(k, states)| states.iter().map(move |&a| (a, self.vector[self.layout.index(k, a, a)].re)))
    }
}

/// `γ_out ⟨σ⁺_N σ⁻_N⟩` in the stationary state of the qubit chain.
pub fn ness_current_me(params: &ChainParams) -> Result<f64> {
    ness_current_me_with_cap(params, DEFAULT_SITE_CAP)
}

pub fn ness_current_me_with_cap(params: &ChainParams, cap: usize) -> Result<f64> {
    let model = QubitChainModel::with_cap(params, cap)?;
    let ss = model.steady_state()?;
    Ok((params.gamma_out * ss.occupation(params.n_sites)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeMeRow {
    pub gamma_in: f64,
    pub i_se: f64,
    pub i_me: f64,
    /// `|I_me − I_se| / I_se`, zero when both currents vanish.
    pub relative_gap: f64,
}

/// Single-excitation current from the vacuum-plus-sites Lindblad model.
pub fn ness_current_se(params: &ChainParams) -> Result<f64> {
    let h = crate::chain::build_hamiltonian(params)?;
    let ops = crate::chain::build_jump_operators(params)?;
    let l = crate::liouvillian::build_liouvillian(&h, &ops)?;
    let ss = steady_state(&l)?;
    Ok(crate::liouvillian::ness_current(&ss.rho, params.gamma_out))
}

pub fn compare_se_me(params: &ChainParams, gamma_in_grid: &[f64]) -> Result<Vec<SeMeRow>> {
    compare_se_me_with_cap(params, gamma_in_grid, DEFAULT_SITE_CAP)
}

pub fn compare_se_me_with_cap(params: &ChainParams, gamma_in_grid: &[f64], cap: usize) -> Result<Vec<SeMeRow>> {
    if params.n_sites > cap.min(MAX_SITE_CAP) {
        return Err(Error::DimensionCapExceeded { n_sites: params.n_sites, cap: cap.min(MAX_SITE_CAP) });
    }
    gamma_in_grid
        .par_iter()
        .map(|&g| {
            let p = params.clone().with_gamma_in(g);
            let i_se = ness_current_se(&p)?;
            let i_me = ness_current_me_with_cap(&p, cap)?;
            let relative_gap = if i_se == 0.0 && i_me == 0.0 { 0.0 } else { (i_me - i_se).abs() / i_se };
            Ok(SeMeRow { gamma_in: g, i_se, i_me, relative_gap })
        })
        .collect()
}
