mod common;

use common::*;
use erhoq::dmqmc::{init_population, run, DmqmcOptions, DmqmcParams};
use erhoq::estimator::{bootstrap, EvolutionJob, TimeGrid};
use erhoq::oracle::{dense_hamiltonian, single_spin, DenseOperator};
use erhoq::spin::{Lattice, SpinBasisState};

/// Mean of the stochastic step is `ρ - ½Δβ(Hρ + ρH)` applied to the mean of
/// the uniform initial diagonal, iterated literally.
fn euler_mean(h: &DenseOperator, n_initial: f64, delta_beta: f64, steps: usize) -> DenseOperator {
    let dim = h.nrows();
    let mut rho = DenseOperator::identity(dim, dim) * num_complex::Complex64::from(n_initial / dim as f64);
    let half = num_complex::Complex64::from(0.5 * delta_beta);
    for _ in 0..steps {
        rho = &rho - (h * &rho + &rho * h) * half;
    }
    rho
}

#[test]
fn seed_average_follows_the_euler_map() {
    let lat = Lattice::periodic_chain(2).unwrap();
    let h0 = params(1.0, 1.0, 0.0);
    let n_initial = 1000;
    let seeds = 1000;
    let pops: Vec<_> =
        (0..seeds).map(|s| run(&thermal_params(n_initial, s), &h0, &lat, &DmqmcOptions::default()).unwrap()).collect();
    let expected = euler_mean(&dense_hamiltonian(&h0, &lat).unwrap(), n_initial as f64, 0.04, 25);
    // Unnormalized weights are unbiased for the Euler mean.
    for r in 0..4u32 {
        for c in 0..4u32 {
            let (row, col) = (SpinBasisState::new(r, 2).unwrap(), SpinBasisState::new(c, 2).unwrap());
            let xs: Vec<f64> = pops.iter().map(|p| p.weight(row, col) as f64).collect();
            let (m, se) = mean_and_se(&xs);
            let e = expected[(r as usize, c as usize)].re;
            assert!((m - e).abs() < 3.5 * se, "({r},{c}): {m} vs {e} (se {se})");
        }
    }
}

#[test]
fn mean_weights_are_symmetric() {
    let lat = Lattice::periodic_chain(3).unwrap();
    let h0 = params(1.0, 1.0, 0.5);
    let pops: Vec<_> =
        (0..400).map(|s| run(&thermal_params(300, s), &h0, &lat, &DmqmcOptions::default()).unwrap()).collect();
    let mut worst = 0.0f64;
    for r in 0..8u32 {
        for c in (r + 1)..8 {
            let (a, b) = (SpinBasisState::new(r, 3).unwrap(), SpinBasisState::new(c, 3).unwrap());
            let d: Vec<f64> = pops.iter().map(|p| (p.weight(a, b) - p.weight(b, a)) as f64).collect();
            let (m, se) = mean_and_se(&d);
            if se > 0.0 {
                worst = worst.max(m.abs() / se);
            }
        }
    }
    assert!(worst < 4.0, "{worst}");
}

#[test]
fn initial_placement_is_uniform() {
    let up = SpinBasisState::new(0, 1).unwrap();
    let down = SpinBasisState::new(1, 1).unwrap();
    let counts: Vec<f64> = (0..500)
        .map(|seed| {
            let pop = init_population(&DmqmcParams { beta: 1.0, delta_beta: 0.04, n_initial: 1000, seed }, 1).unwrap();
            assert_eq!(pop.weight(up, up) + pop.weight(down, down), 1000);
            pop.weight(up, up) as f64
        })
        .collect();
    let (m, se) = mean_and_se(&counts);
    assert!((m - 500.0).abs() < 3.0 * se, "{m} +- {se}");
    // Binomial(1000, ½) spread.
    let sd = se * (counts.len() as f64).sqrt();
    assert!((sd / 250f64.sqrt() - 1.0).abs() < 0.1, "{sd}");
}

#[test]
fn single_spin_thermal_magnetization() {
    let (lat, schedule) = spin_quench();
    let target = single_spin::thermal_mx(&schedule.initial, 1.0);
    assert!((target - 0.6282).abs() < 5e-5);
    let (mut values, mut var) = (Vec::new(), 0.0);
    for seed in 0..100 {
        let pop = run(&thermal_params(1000, seed), &schedule.initial, &lat, &DmqmcOptions::default()).unwrap();
        let job = EvolutionJob::new(pop, schedule.clone(), TimeGrid::origin(), 0.2).unwrap();
        let p = bootstrap(&job, 200, seed).unwrap().points[0];
        values.push(p.value);
        var += p.stat_err.powi(2);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let err = var.sqrt() / values.len() as f64;
    assert!((mean - target).abs() < 3.0 * err, "{mean} vs {target} (error {err})");
}
