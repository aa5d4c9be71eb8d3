//! One runner per subcommand. Each returns a table in grid order plus a summary.

use rayon::prelude::*;

use opentransport::analytics::{
    gamma_out_opt, gamma_phi_crit, ness_current_closed, table1_summary, transfer_time_closed,
};
use opentransport::disorder::{averaged_max_current, loss_scan, regime_classify, RegimeThresholds};
use opentransport::dynamics::{site_excitation, transfer_time};
use opentransport::grid::{interior_maximum, GridMaximum, GridSpec};
use opentransport::many_body::compare_se_me_with_cap;
use opentransport::superradiance::{
    detect_superradiant_transition, gamma_st_perturbative_estimate, width_scan, SuperradiantTransition,
};
use opentransport::transport::{conductance_scan, spectral_function, TransmissionModel};
use opentransport::{
    build_hamiltonian, build_jump_operators, build_liouvillian, ness_current, sample_onsite_disorder, steady_state,
    ChainParams, Error,
};

use crate::config::{Experiment, ExperimentConfig, Rate};
use crate::output::{Column, Table};

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Solver { error: Error, at: String },
}

impl RunError {
    fn solver(error: Error, at: impl Into<String>) -> Self {
        match error {
            Error::InvalidParameters(_) | Error::InvalidGrid(_) | Error::DimensionCapExceeded { .. } => {
                RunError::Config(format!("{}: {error}", at.into()))
            }
            error => RunError::Solver { error, at: at.into() },
        }
    }
}

trait At<T> {
    fn at(self, at: impl FnOnce() -> String) -> Result<T, RunError>;
}

impl<T> At<T> for Result<T, Error> {
    fn at(self, at: impl FnOnce() -> String) -> Result<T, RunError> {
        self.map_err(|e| RunError::solver(e, at()))
    }
}

pub struct Report {
    pub table: Table,
    pub summary: String,
    /// Set when an extremum sits on the grid boundary.
    pub boundary: Option<String>,
    /// Extra lines printed to standard output.
    pub record: Vec<String>,
}

impl Report {
    fn new(table: Table, summary: String) -> Self {
        Self { table, summary, boundary: None, record: Vec::new() }
    }
}

/// Widths grid used to locate the superradiant transition for `gamma_out = "auto"`.
fn transition_grid() -> GridSpec {
    GridSpec::log(0.2, 20.0, 100)
}

fn clean_chain(cfg: &ExperimentConfig) -> ChainParams {
    ChainParams::uniform(cfg.sites)
        .with_gamma_phi(cfg.gamma_phi)
        .with_gamma_loss(cfg.gamma_loss)
        .with_disorder(cfg.disorder)
}

/// Chain with one disorder realization drawn from `cfg.seed` when `disorder > 0`.
fn chain(cfg: &ExperimentConfig) -> Result<ChainParams, RunError> {
    let p = clean_chain(cfg);
    let onsite = sample_onsite_disorder(&p, cfg.seed).at(|| "disorder sampling".into())?;
    Ok(p.with_onsite(onsite).with_disorder(0.0))
}

fn superradiant_gamma(sites: usize) -> Result<SuperradiantTransition, RunError> {
    let grid = transition_grid().points().expect("static grid");
    detect_superradiant_transition(&ChainParams::uniform(sites), &grid)
        .at(|| format!("gamma_out=auto (superradiant transition of the clean {sites}-site chain)"))
}

fn gamma_out(cfg: &ExperimentConfig) -> Result<f64, RunError> {
    match cfg.gamma_out {
        Rate::Value(v) => Ok(v),
        Rate::Auto(_) => Ok(superradiant_gamma(cfg.sites)?.gamma_st),
    }
}

fn tau_of(p: &ChainParams) -> Result<opentransport::dynamics::TransferTime, Error> {
    transfer_time(p, &site_excitation(p.n_sites, 1))
}

fn ness(p: &ChainParams) -> Result<f64, Error> {
    let l = build_liouvillian(&build_hamiltonian(p)?, &build_jump_operators(p)?)?;
    Ok(ness_current(&steady_state(&l)?.rho, p.gamma_out))
}

fn points(grid: &GridSpec) -> Result<Vec<f64>, RunError> {
    grid.points().map_err(|e| RunError::Config(format!("grid: {e}")))
}

fn note_boundary(report: &mut Report, what: &str, result: &Result<GridMaximum, Error>) {
    if let Err(Error::GridTooCoarse { value, .. }) = result {
        report.boundary = Some(format!("{what} lies on the grid boundary at {value}"));
    }
}

fn argmax(values: &[f64]) -> usize {
    (0..values.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    match cfg.experiment {
        Experiment::NessScan => ness_scan(cfg),
        Experiment::WidthsScan => widths_scan(cfg),
        Experiment::TransferTime => transfer_time_scan(cfg),
        Experiment::CurrentVsPump => current_vs_pump(cfg),
        Experiment::MaxCurrentVsDephasing => max_current_vs_dephasing(cfg),
        Experiment::ConductanceScan => conductance(cfg),
        Experiment::SpectralScan => spectral(cfg),
        Experiment::SeMeCompare => se_me(cfg),
        Experiment::DisorderScan => disorder(cfg),
        Experiment::LossScan => losses(cfg),
        Experiment::Table1 => table1(cfg),
        Experiment::SuperradiantGamma => superradiant(cfg),
    }
}

fn ness_scan(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let outs = points(&cfg.grid)?;
    let phis = points(cfg.grid2.as_ref().unwrap_or(&cfg.grid))?;
    let base = chain(cfg)?;
    let pairs: Vec<(f64, f64)> = outs.iter().flat_map(|&g| phis.iter().map(move |&p| (g, p))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(g, phi)| {
            let tau = tau_of(&base.clone().with_gamma_out(g).with_gamma_phi(phi))
                .at(|| format!("gamma_out={g}, gamma_phi={phi}"))?
                .tau;
            let closed = transfer_time_closed(cfg.sites, 1.0, g, phi).at(|| format!("gamma_out={g}"))?;
            Ok(vec![g, phi, 0.5 / tau, 0.5 / closed])
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let best = &rows[argmax(&rows.iter().map(|r| r[2]).collect::<Vec<_>>())];
    let summary = format!("max i_se={:.6} at gamma_out={:.4}, gamma_phi={:.4}", best[2], best[0], best[1]);
    let table = Table::new(
        vec![Column::rate("gamma_out"), Column::rate("gamma_phi"), Column::rate("i_se"), Column::rate("i_se_closed")],
        rows,
    );
    Ok(Report::new(table, summary))
}

fn widths_scan(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let base = chain(cfg)?;
    let spectra = width_scan(&base, &grid).at(|| "width spectra".into())?;
    let rows: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| vec![s.gamma_out, s.largest_width(), s.subradiant_mean().unwrap_or(f64::NAN)])
        .collect();
    let table = Table::new(
        vec![Column::rate("gamma_out"), Column::rate("width_max"), Column::rate("width_subradiant_mean")],
        rows,
    );
    let detected = detect_superradiant_transition(&base, &grid);
    let summary = match &detected {
        Ok(st) => format!("gamma_st={:.6} (grid resolution {:.4})", st.gamma_st, st.resolution),
        Err(e) => format!("gamma_st not determined: {e}"),
    };
    let mut report = Report::new(table, summary);
    if let Err(Error::GridTooCoarse { value, .. }) = detected {
        report.boundary = Some(format!("subradiant width maximum lies on the grid boundary at {value}"));
    }
    Ok(report)
}

fn transfer_time_scan(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let base = chain(cfg)?;
    let rows = grid
        .par_iter()
        .map(|&g| {
            let tt = tau_of(&base.clone().with_gamma_out(g)).at(|| format!("gamma_out={g}"))?;
            let closed = transfer_time_closed(cfg.sites, 1.0, g, cfg.gamma_phi).at(|| format!("gamma_out={g}"))?;
            Ok(vec![g, tt.tau, closed, tt.efficiency])
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let neg_tau: Vec<f64> = rows.iter().map(|r| -r[1]).collect();
    let min = interior_maximum(&grid, &neg_tau);
    let mut summary = match &min {
        Ok(m) => format!("min tau={:.6} at gamma_out={:.4}", -m.value, m.position),
        Err(_) => "tau minimum not inside the grid".to_string(),
    };
    if let Ok(opt) = gamma_out_opt(cfg.sites, 1.0) {
        summary.push_str(&format!("; closed-form optimum gamma_out={opt:.4}"));
    }
    let table = Table::new(
        vec![Column::rate("gamma_out"), Column::time("tau"), Column::time("tau_closed"), Column::plain("efficiency")],
        rows,
    );
    let mut report = Report::new(table, summary);
    note_boundary(&mut report, "transfer-time minimum", &min);
    Ok(report)
}

fn current_vs_pump(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let gout = gamma_out(cfg)?;
    let base = chain(cfg)?.with_gamma_out(gout);
    let tau = tau_of(&base).at(|| format!("gamma_out={gout}"))?.tau;
    let closed_tau = transfer_time_closed(cfg.sites, 1.0, gout, cfg.gamma_phi).at(|| "closed form".into())?;
    let rows = grid
        .par_iter()
        .map(|&g| {
            let i = ness(&base.clone().with_gamma_in(g)).at(|| format!("gamma_in={g}"))?;
            Ok(vec![g, i, ness_current_closed(g, closed_tau)])
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let summary = format!("gamma_out={gout:.4}, tau={tau:.6}, saturation 1/tau={:.6}", 1.0 / tau);
    let table = Table::new(vec![Column::rate("gamma_in"), Column::rate("current"), Column::rate("current_closed")], rows);
    Ok(Report::new(table, summary))
}

fn max_current_vs_dephasing(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let gout = gamma_out(cfg)?;
    let base = chain(cfg)?.with_gamma_out(gout);
    let rows = grid
        .par_iter()
        .map(|&phi| {
            let tau = tau_of(&base.clone().with_gamma_phi(phi)).at(|| format!("gamma_phi={phi}"))?.tau;
            let closed = transfer_time_closed(cfg.sites, 1.0, gout, phi).at(|| format!("gamma_phi={phi}"))?;
            Ok(vec![phi, 0.5 / tau, 0.5 / closed])
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let crit = gamma_phi_crit(gout, cfg.sites, 1.0).at(|| "critical dephasing".into())?;
    let summary = format!("gamma_out={gout:.4}, critical dephasing {crit:.6}");
    let table = Table::new(vec![Column::rate("gamma_phi"), Column::rate("i_se"), Column::rate("i_se_closed")], rows);
    Ok(Report::new(table, summary))
}

fn transmission_model(cfg: &ExperimentConfig, lead: f64) -> Result<TransmissionModel, RunError> {
    TransmissionModel::new(cfg.sites, 1.0, lead, cfg.broadening).at(|| "transmission model".into())
}

fn conductance(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let scan = conductance_scan(&transmission_model(cfg, 1.0)?, &grid).at(|| "conductance scan".into())?;
    let peak = scan.maximum();
    let summary = match &peak {
        Ok(m) => format!("max g={:.6} at gamma={:.4} (grid resolution {:.4})", m.value, m.position, m.resolution),
        Err(e) => format!("conductance peak not determined: {e}"),
    };
    let rows = grid.iter().zip(&scan.conductance).map(|(g, t)| vec![*g, *t]).collect();
    let mut report = Report::new(Table::new(vec![Column::rate("gamma"), Column::plain("g")], rows), summary);
    note_boundary(&mut report, "conductance peak", &peak);
    Ok(report)
}

fn spectral(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let omegas = points(&cfg.grid)?;
    let lead = gamma_out(cfg)?;
    let model = transmission_model(cfg, lead)?;
    let per_site = (1..=cfg.sites)
        .map(|site| spectral_function(&model, site, &omegas).at(|| format!("site {site}")))
        .collect::<Result<Vec<_>, RunError>>()?;
    let rows = (0..omegas.len())
        .map(|k| std::iter::once(omegas[k]).chain(per_site.iter().map(|s| s[k].value)).collect())
        .collect();
    let mut columns = vec![Column::rate("omega")];
    columns.extend((1..=cfg.sites).map(|j| Column::inverse_energy(format!("a_{j}"))));
    let summary = format!("lead coupling {lead:.4}, broadening {}", cfg.broadening);
    Ok(Report::new(Table::new(columns, rows), summary))
}

fn se_me(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let gout = gamma_out(cfg)?;
    let base = chain(cfg)?.with_gamma_out(gout);
    let tau = tau_of(&base).at(|| format!("gamma_out={gout}"))?.tau;
    let rows = compare_se_me_with_cap(&base, &grid, cfg.max_qubits).at(|| "single/many-excitation comparison".into())?;
    let worst = rows.iter().filter(|r| r.gamma_in * tau <= 1.0).map(|r| r.relative_gap).fold(0.0, f64::max);
    let summary = format!("tau={tau:.6}; max relative gap for gamma_in <= 1/tau: {worst:.4}");
    let rows = rows.iter().map(|r| vec![r.gamma_in, r.i_se, r.i_me, r.relative_gap]).collect();
    let table = Table::new(
        vec![Column::rate("gamma_in"), Column::rate("i_se"), Column::rate("i_me"), Column::plain("relative_gap")],
        rows,
    );
    Ok(Report::new(table, summary))
}

fn disorder(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let gout = gamma_out(cfg)?;
    let base = ChainParams::uniform(cfg.sites).with_gamma_out(gout).with_gamma_loss(cfg.gamma_loss);
    let mut rows = Vec::with_capacity(grid.len());
    let mut failed = 0;
    for &phi in &grid {
        let r = averaged_max_current(&base, cfg.disorder, phi, cfg.realizations, cfg.seed)
            .at(|| format!("gamma_phi={phi}, disorder={}", cfg.disorder))?;
        failed += r.failures.len();
        rows.push(vec![phi, r.mean, r.stderr, r.n_success() as f64, r.failures.len() as f64]);
    }
    let means: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let best = interior_maximum(&grid, &means);
    let regime = regime_classify(cfg.disorder, 1.0, RegimeThresholds::default());
    let mut summary = format!("gamma_out={gout:.4}, regime {regime:?}");
    match &best {
        Ok(m) => summary.push_str(&format!("; optimal gamma_phi={:.4} (mean i_se {:.6})", m.position, m.value)),
        Err(_) => summary.push_str(&format!("; largest mean i_se at gamma_phi={:.4}", grid[argmax(&means)])),
    }
    if failed > 0 {
        summary.push_str(&format!("; {failed} failed realizations"));
    }
    let table = Table::new(
        vec![
            Column::rate("gamma_phi"),
            Column::rate("mean_i_se"),
            Column::rate("stderr"),
            Column::count("n_success"),
            Column::count("n_failed"),
        ],
        rows,
    );
    let mut report = Report::new(table, summary);
    if cfg.disorder > 0.0 {
        note_boundary(&mut report, "dephasing optimum", &best);
    }
    Ok(report)
}

fn losses(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let gout = gamma_out(cfg)?;
    let base = chain(cfg)?.with_gamma_out(gout).with_gamma_loss(0.0);
    let tau = tau_of(&base).at(|| format!("gamma_out={gout}"))?.tau;
    let gin = cfg.gamma_in.value().unwrap_or(1.0 / tau);
    let pts = loss_scan(&base.with_gamma_in(gin), &grid).at(|| "loss scan".into())?;
    let summary = format!("gamma_out={gout:.4}, gamma_in={gin:.6}, knee estimate 1/tau={:.6}", 1.0 / tau);
    let rows = pts.iter().map(|p| vec![p.gamma_loss, p.current, p.efficiency]).collect();
    let table = Table::new(vec![Column::rate("gamma_loss"), Column::rate("current"), Column::plain("efficiency")], rows);
    Ok(Report::new(table, summary))
}

fn table1(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let t = table1_summary(cfg.sites, 1.0).at(|| "table".into())?;
    let fields: [(&str, f64, Column); 9] = [
        ("n_sites", t.n_sites as f64, Column::count("n_sites")),
        ("gamma_in_max", t.gamma_in_max, Column::rate("gamma_in_max")),
        ("gamma_out_opt", t.gamma_out_opt, Column::rate("gamma_out_opt")),
        ("gamma_phi_max", t.gamma_phi_max, Column::rate("gamma_phi_max")),
        ("gamma_phi_max_asymptotic", t.gamma_phi_max_asymptotic, Column::rate("gamma_phi_max_asymptotic")),
        ("disorder_max", t.disorder_max, Column::rate("disorder_max")),
        ("gamma_loss_max", t.gamma_loss_max, Column::rate("gamma_loss_max")),
        ("i_se_at_max_dephasing", t.i_se_at_max_dephasing, Column::rate("i_se_at_max_dephasing")),
        ("i_se_lower_bound", t.i_se_lower_bound, Column::rate("i_se_lower_bound")),
    ];
    let columns: Vec<Column> = fields.iter().map(|f| f.2.clone()).collect();
    let row: Vec<f64> = fields.iter().map(|f| f.1).collect();
    let table = Table::new(columns, vec![row]);
    let record = (0..fields.len()).map(|k| format!("{} = {}", fields[k].0, table.formatted(0, k, cfg.hopping))).collect();
    let mut report = Report::new(table, format!("design bounds for {} sites", cfg.sites));
    report.record = record;
    Ok(report)
}

fn superradiant(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = points(&cfg.grid)?;
    let base = chain(cfg)?;
    let st = detect_superradiant_transition(&base, &grid);
    let est = gamma_st_perturbative_estimate(cfg.sites, 1.0);
    let opt = gamma_out_opt(cfg.sites, 1.0).unwrap_or(f64::NAN);
    let (gamma_st, resolution, mean) = match &st {
        Ok(s) => (s.gamma_st, s.resolution, s.mean_width),
        Err(Error::GridTooCoarse { value, .. }) => (*value, f64::NAN, f64::NAN),
        Err(e) => return Err(RunError::solver(e.clone(), "superradiant transition")),
    };
    let table = Table::new(
        vec![
            Column::rate("gamma_st"),
            Column::rate("resolution"),
            Column::rate("subradiant_mean_width"),
            Column::rate("gamma_st_perturbative"),
            Column::rate("level_spacing"),
            Column::rate("gamma_out_opt"),
        ],
        vec![vec![gamma_st, resolution, mean, est.gamma_st, est.level_spacing, opt]],
    );
    let summary = format!(
        "gamma_st={gamma_st:.6}, perturbative estimate {:.4}, closed-form optimum {opt:.4}",
        est.gamma_st
    );
    let mut report = Report::new(table, summary);
    if let Err(Error::GridTooCoarse { value, .. }) = st {
        report.boundary = Some(format!("subradiant width maximum lies on the grid boundary at {value}"));
    }
    Ok(report)
}
