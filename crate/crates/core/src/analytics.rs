//! Closed-form transport estimates for the clean, lossless chain.
//!
//! All functions work in natural units (ħ = 1). They are exact statements
//! about the formulas; whether a formula describes a given chain is recorded
//! by [`AnalyticRegime::applicability`].

use crate::error::{Error, Result};

/// Chain parameters entering the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRegime {
    pub n_sites: usize,
    pub hopping: f64,
    pub gamma_out: f64,
    pub gamma_phi: f64,
}

/// Validity flags of the closed forms for a concrete operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Applicability {
    /// `γ_in ≤ 1/τ`.
    pub single_excitation: bool,
    /// `W` below a tenth of the hopping.
    pub low_disorder: bool,
    /// `γ_loss < 1/τ`.
    pub low_loss: bool,
}

impl AnalyticRegime {
    pub fn new(n_sites: usize, hopping: f64, gamma_out: f64, gamma_phi: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParameters("n_sites must be at least 1".into()));
        }
        if !(hopping > 0.0) {
            return Err(Error::InvalidParameters("hopping must be positive".into()));
        }
        Ok(Self { n_sites, hopping, gamma_out, gamma_phi })
    }

    pub fn transfer_time(&self) -> Result<f64> {
        transfer_time_closed(self.n_sites, self.hopping, self.gamma_out, self.gamma_phi)
    }

    pub fn applicability(&self, gamma_in: f64, disorder_width: f64, gamma_loss: f64) -> Result<Applicability> {
        let tau = self.transfer_time()?;
        Ok(Applicability {
            single_excitation: gamma_in * tau <= 1.0,
            low_disorder: disorder_width <= 0.1 * self.hopping,
            low_loss: gamma_loss * tau < 1.0,
        })
    }
}

/// Incoherent hopping rate `2t²/γ_φ`.
pub fn foerster_rate(hopping: f64, gamma_phi: f64) -> Result<f64> {
    if gamma_phi == 0.0 {
        return Err(Error::Divergent { quantity: "Foerster rate" });
    }
    Ok(2.0 * hopping * hopping / gamma_phi)
}

/// Sink-corrected hopping rate `2t²/(γ_φ + γ_out/2)`.
pub fn leegwater_rate(hopping: f64, gamma_phi: f64, gamma_out: f64) -> Result<f64> {
    let denom = gamma_phi + 0.5 * gamma_out;
    if !(denom > 0.0) {
        return Err(Error::Divergent { quantity: "Leegwater rate" });
    }
    Ok(2.0 * hopping * hopping / denom)
}

/// Average transfer time from site 1: `N/γ_out + (N−1)(Nγ_φ + γ_out)/(4t²)`.
pub fn transfer_time_closed(n_sites: usize, hopping: f64, gamma_out: f64, gamma_phi: f64) -> Result<f64> {
    if !(gamma_out > 0.0) {
        return Err(Error::Divergent { quantity: "transfer time" });
    }
    let n = n_sites as f64;
    Ok(n / gamma_out + (n - 1.0) * (n * gamma_phi + gamma_out) / (4.0 * hopping * hopping))
}

/// Steady-state current `γ_in/(1 + γ_in τ)`.
pub fn ness_current_closed(gamma_in: f64, tau: f64) -> f64 {
    if gamma_in.is_infinite() {
        return 1.0 / tau;
    }
    gamma_in / (1.0 + gamma_in * tau)
}

/// Largest single-excitation current, `1/(2τ)`.
pub fn i_se(tau: f64) -> f64 {
    0.5 / tau
}

/// Sink rate minimizing the transfer time: `2t √(N/(N−1))`.
pub fn gamma_out_opt(n_sites: usize, hopping: f64) -> Result<f64> {
    if n_sites < 2 {
        return Err(Error::InvalidParameters("optimal sink rate needs at least two sites".into()));
    }
    let n = n_sites as f64;
    Ok(2.0 * hopping * (n / (n - 1.0)).sqrt())
}

/// Dephasing above which the sink optimum loses its coherent advantage:
/// `(γ_out² + 4t²)/(N γ_out)`.
pub fn gamma_phi_crit(gamma_out: f64, n_sites: usize, hopping: f64) -> Result<f64> {
    if gamma_out == 0.0 {
        return Err(Error::Divergent { quantity: "critical dephasing" });
    }
    Ok((gamma_out * gamma_out + 4.0 * hopping * hopping) / (n_sites as f64 * gamma_out))
}

/// Critical dephasing at the optimal sink rate: `2t (2N−1)/(N √(N(N−1)))`.
pub fn gamma_phi_crit_at_opt(n_sites: usize, hopping: f64) -> Result<f64> {
    if n_sites < 2 {
        return Err(Error::InvalidParameters("critical dephasing needs at least two sites".into()));
    }
    let n = n_sites as f64;
    Ok(2.0 * hopping * (2.0 * n - 1.0) / (n * (n * (n - 1.0)).sqrt()))
}

/// Maximal single-excitation current at the optimal sink rate:
/// `[√(N(N−1))/t + N(N−1)γ_φ/(4t²)]⁻¹`, which is `1/τ` there.
pub fn i_se_max(n_sites: usize, hopping: f64, gamma_phi: f64) -> Result<f64> {
    if n_sites < 2 {
        return Err(Error::InvalidParameters("maximal current needs at least two sites".into()));
    }
    let n = n_sites as f64;
    let m = n * (n - 1.0);
    Ok(1.0 / (m.sqrt() / hopping + m * gamma_phi / (4.0 * hopping * hopping)))
}

/// Design bounds for a chain of `N` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOne {
    pub n_sites: usize,
    pub hopping: f64,
    /// Upper bound on the pump rate, `1/τ` at the optimal sink rate without dephasing.
    pub gamma_in_max: f64,
    pub gamma_out_opt: f64,
    /// Critical dephasing at the optimal sink rate.
    pub gamma_phi_max: f64,
    /// Large-N form `4t/N` of the critical dephasing.
    pub gamma_phi_max_asymptotic: f64,
    /// Disorder bound, of the order of the hopping.
    pub disorder_max: f64,
    /// Loss bound, `1/τ`.
    pub gamma_loss_max: f64,
    /// Optimal current at the critical dephasing.
    pub i_se_at_max_dephasing: f64,
    /// Lower bound `t/√(N(N−1))` on that current.
    pub i_se_lower_bound: f64,
}

pub fn table1_summary(n_sites: usize, hopping: f64) -> Result<TableOne> {
    let gamma_out = gamma_out_opt(n_sites, hopping)?;
    let tau = transfer_time_closed(n_sites, hopping, gamma_out, 0.0)?;
    let gamma_phi_max = gamma_phi_crit_at_opt(n_sites, hopping)?;
    let n = n_sites as f64;
    Ok(TableOne {
        n_sites,
        hopping,
        gamma_in_max: 1.0 / tau,
        gamma_out_opt: gamma_out,
        gamma_phi_max,
        gamma_phi_max_asymptotic: 4.0 * hopping / n,
        disorder_max: hopping,
        gamma_loss_max: 1.0 / tau,
        i_se_at_max_dephasing: i_se_max(n_sites, hopping, gamma_phi_max)?,
        i_se_lower_bound: hopping / (n * (n - 1.0)).sqrt(),
    })
}
