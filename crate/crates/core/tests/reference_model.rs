use cavity_ladder::oracle::{build_liouvillian, compare, steady_state_full};
use cavity_ladder::{
    absorption, correlation_time_domain, fwhm, BlochForm, FockTruncation, FrequencyGrid, OracleOptions, ProbeConfig,
    SpectrumModel, SystemParams,
};

fn reference() -> SystemParams<f64> {
    SystemParams::reference()
}

fn quick() -> OracleOptions<f64> {
    OracleOptions {
        verify_convergence: false,
        ..Default::default()
    }
}

#[test]
fn truncation_half_again_barely_moves_populations() {
    for n in [0.5, 1.0, 2.0] {
        let p = reference().with_n_th(n);
        let t = FockTruncation::for_thermal(n);
        let a = steady_state_full(&p, &t, &quick()).unwrap().atom_populations();
        let bigger = FockTruncation::new(t.n_max + t.n_max / 2).unwrap();
        let b = steady_state_full(&p, &bigger, &quick()).unwrap().atom_populations();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-4, "N = {n}");
        }
    }
}

#[test]
fn agreement_improves_as_coupling_weakens() {
    let grid = FrequencyGrid::new(-20.0, 20.0, 801).unwrap();
    let probe = ProbeConfig::probe_01();
    let t = FockTruncation::for_thermal(1.0);
    let mut last = f64::INFINITY;
    for g in [10.0, 5.0, 3.0] {
        let p = reference().with_g(g).with_form(BlochForm::MasterEquation);
        let scaled = FrequencyGrid::new(grid.omega_min * g * g / 100.0, grid.omega_max * g * g / 100.0, 801).unwrap();
        let c = compare(&p, &probe, &scaled, &t, &quick()).unwrap();
        assert!(c.fwhm_deviation < last, "g = {g}: {} !< {last}", c.fwhm_deviation);
        assert!(c.population_deviation < 1e-10);
        last = c.fwhm_deviation;
    }
}

#[test]
fn full_state_quality_at_reference_points() {
    for n in [0.01, 0.1, 1.0, 2.0] {
        let p = reference().with_n_th(n);
        let s = steady_state_full(&p, &FockTruncation::for_thermal(n), &quick()).unwrap();
        assert!(s.hermiticity_residual() <= 1e-10);
        assert!((s.trace() - 1.0).abs() <= 1e-10);
        assert!(s.is_positive_semidefinite(1e-8));
        assert!(s.atom_state().rho20.norm() <= 1e-3);
    }
}

#[test]
fn liouvillian_trace_functional_vanishes() {
    let p = reference().with_delta(10.0).with_big_delta(2.0).with_n_th(2.0);
    let l = build_liouvillian(&p, &FockTruncation::new(15).unwrap(), &quick()).unwrap();
    assert!(l.trace_left_residual() <= 1e-10);
}

#[test]
fn time_domain_quadrature_matches_resolvent_off_resonance() {
    let p = reference().with_delta(50.0).with_big_delta(1.0);
    let probe = ProbeConfig::probe_01();
    let slowest = cavity_ladder::eigen_linewidths(&p)[0].fwhm / 2.0;
    let series = correlation_time_domain(&p, &probe, 20.0 / slowest, 200_000).unwrap();
    let m = SpectrumModel::new(&p, &probe).unwrap();
    for w in [-3.0, -1.0, 0.0, 0.7, 2.0] {
        let exact = m.absorption(w).unwrap();
        let est = series.fourier(w).value;
        assert!(((est - exact) / exact).abs() < 1e-6, "omega = {w}");
    }
}

#[test]
fn reduced_fwhm_grid_independent() {
    let probe = ProbeConfig::probe_01();
    let coarse = absorption(&reference(), &probe, &FrequencyGrid::new(-20.0, 20.0, 201).unwrap()).unwrap();
    let fine = absorption(&reference(), &probe, &FrequencyGrid::new(-20.0, 20.0, 4001).unwrap()).unwrap();
    assert!((fwhm(&coarse).unwrap() - fwhm(&fine).unwrap()).abs() < 1e-9);
}
