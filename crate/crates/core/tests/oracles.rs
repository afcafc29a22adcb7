//! Monte Carlo and ODE oracles against the closed-form defect fraction.

use hedose_core::model::defect_fraction;
use hedose_core::oracle::{integrate_rk4_adaptive, irradiate, simulate_ensemble, EnsembleConfig, LatticeFilm, LatticeSpec};
use hedose_core::{Fluence, ModelParams};

fn binomial_pmf(n: usize, q: f64) -> Vec<f64> {
    let mut c = 1.0;
    (0..=n)
        .map(|k| {
            let p = c * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
            c = c * (n - k) as f64 / (k + 1) as f64;
            p
        })
        .collect()
}

/// One column, integer depth, empty start: after `n` ions each element is
/// occupied independently with probability `1 - (1 - eta)^n`, so the count
/// is binomial.
#[test]
fn single_column_occupancy_is_binomial() {
    let spec = LatticeSpec { nx: 1, ny: 1, depth: 4.0, eta: 0.2, initial_fraction: 0.0 };
    let films = 20_000;
    let ions = 3;
    let mut counts = [0usize; 5];
    for seed in 0..films {
        let mut film = LatticeFilm::new(spec, seed).unwrap();
        film.fire(ions);
        counts[film.occupied_count()] += 1;
    }
    let q = 1.0 - 0.8f64.powi(ions as i32);
    let expected = binomial_pmf(4, q);
    let chi2: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| {
            let e = e * films as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 4 degrees of freedom; the 0.999 quantile is 18.47.
    assert!(chi2 < 18.47, "chi2 = {chi2}, counts = {counts:?}");
}

#[test]
fn trajectory_is_monotone_and_reproducible() {
    let spec = LatticeSpec { nx: 16, ny: 16, depth: 3.5, eta: 0.3, initial_fraction: 0.2 };
    let run = || {
        let mut film = LatticeFilm::new(spec, 99).unwrap();
        irradiate(&mut film, &[100, 100, 400, 1000])
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.windows(2).all(|w| w[1].occupied_fraction >= w[0].occupied_fraction));
    assert_eq!(a.last().unwrap().ions, 1600);
}

#[test]
fn ensemble_matches_closed_form_for_several_geometries() {
    let p = ModelParams::published();
    for (nx, depth, eta) in [(64, 8.0, 0.1), (48, 5.5, 0.3), (32, 1.0, 0.05)] {
        let cfg = EnsembleConfig {
            lattice: LatticeSpec { nx, ny: nx, depth, eta, initial_fraction: p.nd0_vd },
            eta_vd23: p.eta_vd23,
            fluence_grid: vec![0.0, 25.0, 100.0, 300.0, 700.0],
            replicas: 24,
            base_seed: 5,
        };
        for pt in simulate_ensemble(&cfg).unwrap() {
            let closed = defect_fraction(Fluence::new(pt.realized_fluence_per_nm2).unwrap(), &p);
            assert!((pt.closed_form - closed).abs() < 1e-15);
            assert!(
                (pt.mean - closed).abs() <= 4.0 * pt.stderr.max(1e-12),
                "nx={nx} depth={depth} F={}: {} vs {closed} ± {}",
                pt.fluence_per_nm2,
                pt.mean,
                pt.stderr
            );
        }
    }
}

#[test]
fn ensemble_does_not_depend_on_thread_count() {
    let cfg = EnsembleConfig {
        lattice: LatticeSpec { nx: 32, ny: 32, depth: 6.0, eta: 0.15, initial_fraction: 0.5 },
        eta_vd23: 4.7e-3,
        fluence_grid: vec![0.0, 100.0, 500.0],
        replicas: 8,
        base_seed: 1,
    };
    let on = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| simulate_ensemble(&cfg).unwrap())
    };
    assert_eq!(on(1), on(4));
}

#[test]
fn adaptive_rk4_solves_exponential_decay() {
    let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
    let y = integrate_rk4_adaptive(|_, y| -0.7 * y, 0.0, 2.0, &grid, 1e-12).unwrap();
    for (x, v) in grid.iter().zip(y) {
        assert!((v - 2.0 * (-0.7 * x).exp()).abs() < 1e-10);
    }
}
