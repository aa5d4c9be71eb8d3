//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use opentransport::analytics::{gamma_out_opt, gamma_phi_crit_at_opt, ness_current_closed, transfer_time_closed};
use opentransport::disorder::{averaged_max_current, dephasing_scan, loss_scan};
use opentransport::dynamics::{site_excitation, transfer_time};
use opentransport::grid::{nearest_index, GridSpec};
use opentransport::linalg::eigh;
use opentransport::many_body::compare_se_me;
use opentransport::superradiance::{closed_chain_spectrum, detect_superradiant_transition, width_spectrum, NonHermitianHamiltonian};
use opentransport::transport::{conductance, conductance_scan, TransmissionModel};
use opentransport::{build_hamiltonian, build_jump_operators, build_liouvillian, ness_current, steady_state, ChainParams};

type Outcome = Result<(bool, String), opentransport::Error>;

fn transition_grid() -> Vec<f64> {
    GridSpec::log(0.2, 20.0, 100).points().unwrap()
}

fn tau(p: &ChainParams) -> Result<f64, opentransport::Error> {
    Ok(transfer_time(p, &site_excitation(p.n_sites, 1))?.tau)
}

fn ness(p: &ChainParams) -> Result<f64, opentransport::Error> {
    let l = build_liouvillian(&build_hamiltonian(p)?, &build_jump_operators(p)?)?;
    Ok(ness_current(&steady_state(&l)?.rho, p.gamma_out))
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn step_at(grid: &[f64], i: usize) -> f64 {
    let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
    let right = if i + 1 < grid.len() { grid[i + 1] - grid[i] } else { 0.0 };
    left.max(right)
}

fn superradiant_gamma() -> Result<(f64, usize), opentransport::Error> {
    let st = detect_superradiant_transition(&ChainParams::uniform(10), &transition_grid())?;
    Ok((st.gamma_st, st.index))
}

fn criterion_1() -> Outcome {
    let grid = transition_grid();
    let (g, i) = superradiant_gamma()?;
    let target = nearest_index(&grid, 2.0);
    let within_step = i.abs_diff(target) <= 1;
    let vs_opt = (g - gamma_out_opt(10, 1.0)?).abs() / gamma_out_opt(10, 1.0)?;
    Ok((
        within_step && vs_opt <= 0.06,
        format!("gamma_st={g:.4} (index {i}, 2.0 at index {target}, step {:.4}); vs 2.108: {:.1}%", step_at(&grid, i), 100.0 * vs_opt),
    ))
}

fn criterion_2() -> Outcome {
    let mut worst = (0.0f64, String::new());
    for n in [2, 4, 6, 8, 10] {
        for gout in [0.5, 1.0, 2.0, 4.0, 8.0] {
            for gphi in [0.0, 0.1, 1.0, 10.0] {
                let p = ChainParams::uniform(n).with_gamma_out(gout).with_gamma_phi(gphi);
                let err = (tau(&p)? - transfer_time_closed(n, 1.0, gout, gphi)?).abs() / transfer_time_closed(n, 1.0, gout, gphi)?;
                if err > worst.0 {
                    worst = (err, format!("N={n} gout={gout} gphi={gphi}"));
                }
            }
        }
    }
    let mut n1 = 0.0f64;
    for gout in [0.1, 1.0, 3.0, 50.0] {
        let t = tau(&ChainParams::uniform(1).with_gamma_out(gout).with_gamma_phi(0.7))?;
        n1 = n1.max((t - 1.0 / gout).abs() * gout);
    }
    Ok((worst.0 <= 0.10 && n1 <= 1e-10, format!("max rel err {:.2}% at {}; N=1 rel err {n1:.1e}", 100.0 * worst.0, worst.1)))
}

fn criterion_3() -> Outcome {
    let base = ChainParams::uniform(10).with_gamma_out(2.0).with_gamma_phi(0.1);
    let t = transfer_time_closed(10, 1.0, 2.0, 0.1)?;
    let mut linear = 0.0f64;
    for f in [0.001, 0.01, 0.1] {
        let g = f / t;
        let i = ness(&base.clone().with_gamma_in(g))?;
        linear = linear.max((i - ness_current_closed(g, t)).abs() / ness_current_closed(g, t));
    }
    let mut sat = 0.0f64;
    for f in [100.0, 1000.0] {
        let i = ness(&base.clone().with_gamma_in(f / t))?;
        sat = sat.max((i - 1.0 / t).abs() * t);
    }
    Ok((linear <= 0.05 && sat <= 0.05, format!("linear regime max err {:.2}%, saturation err {:.2}%", 100.0 * linear, 100.0 * sat)))
}

fn criterion_4() -> Outcome {
    let (gst, _) = superradiant_gamma()?;
    let base = ChainParams::uniform(10).with_gamma_out(gst);
    let i_se = |gphi: f64| -> Result<f64, opentransport::Error> { Ok(0.5 / tau(&base.clone().with_gamma_phi(gphi))?) };
    let crit = gamma_phi_crit_at_opt(10, 1.0)?;
    let flat: Vec<f64> = GridSpec::linear(0.0, crit, 9).points()?.into_iter().map(i_se).collect::<Result<_, _>>()?;
    let hi = flat.iter().cloned().fold(f64::MIN, f64::max);
    let lo = flat.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (hi - lo) / hi;
    let gx = GridSpec::log(4.0, 100.0, 12).points()?;
    let gy: Vec<f64> = gx.iter().map(|&g| i_se(g)).collect::<Result<_, _>>()?;
    let slope = loglog_slope(&gx, &gy);
    Ok((
        spread <= 0.15 && (slope + 1.0).abs() <= 0.15,
        format!("gamma_out={gst:.4}: variation over [0, {crit:.4}] {:.1}%, slope on [4,100] {slope:.3}", 100.0 * spread),
    ))
}

fn conductance_peak() -> Result<(f64, usize), opentransport::Error> {
    let model = TransmissionModel::new(10, 1.0, 1.0, 0.03)?;
    let scan = conductance_scan(&model, &transition_grid())?;
    let m = scan.maximum()?;
    Ok((m.position, m.index))
}

fn criterion_5() -> Outcome {
    let grid = transition_grid();
    let (g, i) = conductance_peak()?;
    let target = nearest_index(&grid, 2.0);
    let t2 = conductance(&TransmissionModel::new(2, 1.0, 2.0, 0.0)?)?;
    Ok((
        i.abs_diff(target) <= 1 && (t2 - 1.0).abs() <= 1e-12,
        format!("peak at gamma={g:.4} (index {i}, 2.0 at index {target}); N=2 T(0)-1 = {:.1e}", t2 - 1.0),
    ))
}

fn criterion_6() -> Outcome {
    let (gc, ic) = conductance_peak()?;
    let (gs, is) = superradiant_gamma()?;
    Ok((ic.abs_diff(is) <= 1, format!("conductance peak {gc:.4} (index {ic}) vs gamma_st {gs:.4} (index {is})")))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    let mut saturates = true;
    for gphi in [0.0, 10.0] {
        let base = ChainParams::uniform(4).with_gamma_out(2.0).with_gamma_phi(gphi);
        let t = tau(&base)?;
        let grid: Vec<f64> = [0.01, 0.03, 0.1, 0.3, 1.0].iter().map(|f| f / t).collect();
        let rows = compare_se_me(&base, &grid)?;
        let w = rows.iter().map(|r| r.relative_gap).fold(0.0, f64::max);
        worst = worst.max(w);
        let high = compare_se_me(&base, &[20.0 / t])?[0];
        saturates &= high.i_me > high.i_se;
        detail.push(format!(
            "gphi={gphi}: max gap {:.1}% (at 1/tau {:.1}%), 20/tau I_me={:.4} I_se={:.4}",
            100.0 * w,
            100.0 * rows.last().unwrap().relative_gap,
            high.i_me,
            high.i_se
        ));
    }
    Ok((worst <= 0.05 && saturates, detail.join("; ")))
}

fn criterion_8() -> Outcome {
    let (gst, _) = superradiant_gamma()?;
    let base = ChainParams::uniform(10).with_gamma_out(gst);
    let clean = averaged_max_current(&base, 0.0, 0.01, 1, 0)?.mean;
    let weak = averaged_max_current(&base, 0.5, 0.01, 100, 2024)?;
    let z = (weak.mean - clean).abs() / weak.stderr;
    let grid = GridSpec::log(0.05, 20.0, 25).points()?;
    let strong = dephasing_scan(&base, 4.0, &grid, 100, 2024)?;
    let means: Vec<f64> = strong.iter().map(|r| r.mean).collect();
    let k = means.iter().enumerate().fold(0, |b, (i, v)| if *v > means[b] { i } else { b });
    let target = 4.0 / 6f64.sqrt();
    let ratio = grid[k] / target;
    Ok((
        z <= 2.0 && (0.5..=2.0).contains(&ratio),
        format!(
            "W=0.5: mean {:.5} vs clean {clean:.5} ({z:.1} stderr); W=4 optimum gamma_phi={:.3} ({ratio:.2}x of {target:.3})",
            weak.mean, grid[k]
        ),
    ))
}

fn criterion_9() -> Outcome {
    let (gst, _) = superradiant_gamma()?;
    let clean = ChainParams::uniform(10).with_gamma_out(gst);
    let t = tau(&clean)?;
    let pts = loss_scan(&clean.with_gamma_in(1.0 / t), &[0.0, 0.01 / t, 10.0 / t])?;
    let (base, low, high) = (pts[0].current, pts[1].current, pts[2].current);
    let low_err = (low - base).abs() / base;
    Ok((
        low_err <= 0.05 && high < 0.5 * base,
        format!("baseline {base:.5}; 0.01/tau change {:.2}%; 10/tau ratio {:.3}", 100.0 * low_err, high / base),
    ))
}

fn criterion_10() -> Outcome {
    let mut worst = [0.0f64; 6];
    for n in [2, 5, 10] {
        for g in [0.0, 0.5, 2.0, 9.0] {
            let s = width_spectrum(&ChainParams::uniform(n), g)?;
            worst[0] = worst[0].max((s.width_sum() - g).abs() / g.max(1.0));
        }
        let (exact, _) = closed_chain_spectrum(n, 1.0);
        let (num, _) = eigh(NonHermitianHamiltonian::new(&ChainParams::uniform(n), 0.0)?.matrix());
        let mut exact = exact;
        exact.sort_by(f64::total_cmp);
        worst[1] = worst[1].max(exact.iter().zip(&num).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let cases = [
        ChainParams::uniform(4).with_gamma_in(0.3).with_gamma_out(2.0).with_gamma_phi(0.5).with_gamma_loss(0.05),
        ChainParams::uniform(6).with_gamma_in(1.0).with_gamma_out(1.0).with_onsite(vec![0.3, -0.2, 0.1, 0.0, 0.5, -0.4]),
        ChainParams::uniform(10).with_gamma_in(0.05).with_gamma_out(2.0).with_gamma_phi(0.1),
    ];
    for p in &cases {
        let l = build_liouvillian(&build_hamiltonian(p)?, &build_jump_operators(p)?)?;
        worst[2] = worst[2].max(l.trace_defect());
        let ss = steady_state(&l)?;
        let rho = ss.rho.matrix();
        worst[4] = worst[4].max((rho.adjoint() - rho).norm()).max((-ss.rho.min_eigenvalue()).max(0.0));
        let shift = 0.7;
        let shifted = p.clone().with_onsite(p.onsite.iter().map(|e| e + shift).collect());
        worst[5] = worst[5].max((ness(&shifted)? - ness(p)?).abs());
    }
    for (n, gout, gphi) in [(2, 1.0, 0.0), (6, 2.0, 0.3), (10, 0.5, 5.0)] {
        let p = ChainParams::uniform(n).with_gamma_out(gout).with_gamma_phi(gphi);
        worst[3] = worst[3].max((transfer_time(&p, &site_excitation(n, 1))?.efficiency - 1.0).abs());
    }
    let ok = worst.iter().all(|w| *w <= 1e-10);
    Ok((
        ok,
        format!(
            "sum rule {:.1e}, closed spectrum {:.1e}, trace {:.1e}, efficiency {:.1e}, hermiticity/positivity {:.1e}, shift {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    ))
}

fn criterion_11() -> Outcome {
    let ns: Vec<usize> = (4..=10).collect();
    let mut currents = Vec::new();
    for &n in &ns {
        let p = ChainParams::uniform(n).with_gamma_out(gamma_out_opt(n, 1.0)?).with_gamma_phi(gamma_phi_crit_at_opt(n, 1.0)?);
        currents.push(0.5 / tau(&p)?);
    }
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&x, &currents);
    Ok((slope > -1.3 && slope < -0.8, format!("exponent {slope:.3}")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("superradiant transition location", criterion_1),
        ("transfer-time oracle", criterion_2),
        ("steady-state current oracle", criterion_3),
        ("critical dephasing", criterion_4),
        ("conductance peak", criterion_5),
        ("cross-model coincidence", criterion_6),
        ("many-excitation validation", criterion_7),
        ("disorder robustness", criterion_8),
        ("loss threshold", criterion_9),
        ("exact identities", criterion_10),
        ("scaling law", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] {:>2} {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
