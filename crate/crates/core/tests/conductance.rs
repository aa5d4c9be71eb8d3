use std::sync::Arc;

use opentransport::grid::GridSpec;
use opentransport::linalg::compensated_sum;
use opentransport::superradiance::closed_chain_spectrum;
use opentransport::transport::{
    conductance, conductance_scan, greens_function, spectral_function, transmission, StaticBroadening, TransmissionModel,
};
use opentransport::{build_hamiltonian, build_jump_operators, build_liouvillian, ness_current, steady_state, ChainParams, Error};

#[test]
fn reciprocity() {
    for n in [2, 5, 10] {
        let m = TransmissionModel::new(n, 1.0, 1.7, 0.02).unwrap();
        for omega in [-2.5, -0.3, 0.0, 1.1] {
            let g = greens_function(&m, omega).unwrap();
            let t1n = 1.7f64.powi(2) * g[(0, n - 1)].norm_sqr();
            let tn1 = 1.7f64.powi(2) * g[(n - 1, 0)].norm_sqr();
            assert!((t1n - tn1).abs() < 1e-12);
        }
    }
}

#[test]
fn transmission_never_exceeds_one_without_broadening() {
    let omegas = GridSpec::linear(-3.0, 3.0, 301).points().unwrap();
    for n in [1, 2, 3, 7, 10] {
        for gamma in [0.05, 0.5, 2.0, 5.0, 30.0] {
            let m = TransmissionModel::new(n, 1.0, gamma, 0.0).unwrap();
            for &w in &omegas {
                let t = transmission(&m, w).unwrap();
                assert!((-1e-15..=1.0 + 1e-12).contains(&t), "N={n} gamma={gamma} w={w} T={t}");
            }
        }
    }
}

#[test]
fn broadening_suppresses_conductance() {
    for gamma in [0.5, 2.0, 8.0] {
        let mut last = f64::INFINITY;
        for eta in [0.0, 0.01, 0.03, 0.1, 0.3] {
            let g = conductance(&TransmissionModel::new(10, 1.0, gamma, eta).unwrap()).unwrap();
            assert!(g < last);
            last = g;
        }
    }
}

fn spectral_weight(model: &TransmissionModel, site: usize, omegas: &[f64]) -> f64 {
    let samples = spectral_function(model, site, omegas).unwrap();
    assert!(samples.iter().all(|s| s.value >= 0.0));
    let dw = omegas[1] - omegas[0];
    let last = samples.len() - 1;
    dw * compensated_sum(samples.iter().map(|s| s.value)) - 0.5 * dw * (samples[0].value + samples[last].value)
}

#[test]
fn spectral_sum_rule_and_positivity() {
    let band = GridSpec::linear(-3.0, 3.0, 1201).points().unwrap();
    for gamma in [0.0, 0.1] {
        let model = TransmissionModel::new(10, 1.0, gamma, 0.03).unwrap();
        for site in 1..=10 {
            let total = spectral_weight(&model, site, &band);
            assert!((total - 1.0).abs() < 0.02, "gamma {gamma} site {site}: {total}");
        }
    }
    // lead-broadened edge sites need a wider window
    let wide = GridSpec::linear(-200.0, 200.0, 80001).points().unwrap();
    let model = TransmissionModel::new(10, 1.0, 2.0, 0.03).unwrap();
    for site in [1, 5, 10] {
        let total = spectral_weight(&model, site, &wide);
        assert!((total - 1.0).abs() < 0.02, "site {site}: {total}");
    }
}

#[test]
fn isolated_chain_spectrum_peaks_at_eigenvalues() {
    let model = TransmissionModel::new(6, 1.0, 0.0, 0.03).unwrap();
    let (energies, _) = closed_chain_spectrum(6, 1.0);
    let omegas = GridSpec::linear(-3.0, 3.0, 6001).points().unwrap();
    let a: Vec<f64> = spectral_function(&model, 1, &omegas).unwrap().iter().map(|s| s.value).collect();
    let peaks: Vec<f64> = (1..a.len() - 1).filter(|&i| a[i] > a[i - 1] && a[i] > a[i + 1]).map(|i| omegas[i]).collect();
    assert_eq!(peaks.len(), 6);
    for e in energies {
        assert!(peaks.iter().any(|p| (p - e).abs() < 2e-3));
    }
}

#[test]
fn strong_coupling_flattens_edge_and_sharpens_bulk() {
    let omegas = GridSpec::linear(-3.0, 3.0, 1201).points().unwrap();
    let peak = |m: &TransmissionModel, site| {
        spectral_function(m, site, &omegas).unwrap().iter().map(|s| s.value).fold(0.0, f64::max)
    };
    let weak = TransmissionModel::new(10, 1.0, 1.0, 0.03).unwrap();
    let strong = TransmissionModel::new(10, 1.0, 50.0, 0.03).unwrap();
    assert!(peak(&strong, 1) < 0.2 * peak(&weak, 1));
    assert!(peak(&strong, 5) > peak(&weak, 5));
}

#[test]
fn conductance_vanishes_at_both_coupling_extremes() {
    let small = conductance(&TransmissionModel::new(10, 1.0, 1e-4, 0.0).unwrap()).unwrap();
    let large = conductance(&TransmissionModel::new(10, 1.0, 1e4, 0.0).unwrap()).unwrap();
    assert!(small < 1e-6 && large < 1e-6);
}

#[test]
fn two_site_scan_matches_closed_form() {
    let grid = GridSpec::linear(0.1, 6.0, 60).points().unwrap();
    let scan = conductance_scan(&TransmissionModel::new(2, 1.0, 1.0, 0.0).unwrap(), &grid).unwrap();
    for (g, t) in grid.iter().zip(&scan.conductance) {
        assert!((t - g * g / (g * g / 4.0 + 1.0).powi(2)).abs() < 1e-13);
    }
    let m = scan.maximum().unwrap();
    assert!((m.position - 2.0).abs() <= m.resolution);
}

#[test]
fn coarse_scan_reports_boundary() {
    let grid = GridSpec::linear(0.1, 1.0, 10).points().unwrap();
    let scan = conductance_scan(&TransmissionModel::new(10, 1.0, 1.0, 0.03).unwrap(), &grid).unwrap();
    assert!(matches!(scan.maximum(), Err(Error::GridTooCoarse { .. })));
}

#[test]
fn plugin_self_energy_reduces_transmission() {
    let base = TransmissionModel::new(4, 1.0, 2.0, 0.0).unwrap();
    let damped = base.clone().with_self_energy(Arc::new(StaticBroadening { width: 0.2 }));
    assert!(conductance(&damped).unwrap() < conductance(&base).unwrap());
}

#[test]
fn lindblad_current_peaks_with_conductance() {
    let grid = GridSpec::log(0.2, 20.0, 100).points().unwrap();
    let scan = conductance_scan(&TransmissionModel::new(10, 1.0, 1.0, 0.03).unwrap(), &grid).unwrap();
    let currents: Vec<f64> = grid
        .iter()
        .map(|&g| {
            let p = ChainParams::uniform(10).with_gamma_out(g).with_gamma_in(1.0).with_gamma_loss(0.06);
            let l = build_liouvillian(&build_hamiltonian(&p).unwrap(), &build_jump_operators(&p).unwrap()).unwrap();
            ness_current(&steady_state(&l).unwrap().rho, g)
        })
        .collect();
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    assert!(argmax(&scan.conductance).abs_diff(argmax(&currents)) <= 1);
}
