#![allow(dead_code)]

use erhoq::dmqmc::{DmqmcParams, PsipPopulation};
use erhoq::oracle::{dense_hamiltonian, thermal_state};
use erhoq::spin::{HamiltonianParams, Lattice, Schedule, SpinBasisState};

pub fn params(j: f64, x: f64, z: f64) -> HamiltonianParams {
    HamiltonianParams::new(j, x, z).unwrap()
}

/// Five-site chain, `J_z = 1`, `μ_z = 0`, `μ_x` flipped from 1 to -1.
pub fn chain_quench() -> (Lattice, Schedule) {
    (
        Lattice::periodic_chain(5).unwrap(),
        Schedule::quench(params(1.0, 1.0, 0.0), params(1.0, -1.0, 0.0)),
    )
}

/// One spin, `μ_z = 1`, `μ_x` flipped from 1 to -1.
pub fn spin_quench() -> (Lattice, Schedule) {
    (
        Lattice::periodic_chain(1).unwrap(),
        Schedule::quench(params(0.0, 1.0, 1.0), params(0.0, -1.0, 1.0)),
    )
}

pub fn thermal_params(n_initial: u64, seed: u64) -> DmqmcParams {
    DmqmcParams { beta: 1.0, delta_beta: 0.04, n_initial, seed }
}

/// `exp(-βH₀)` as integer weights, scaled so the largest entry is `scale`.
pub fn exact_population(h0: &HamiltonianParams, lat: &Lattice, beta: f64, scale: f64) -> PsipPopulation {
    let rho = thermal_state(&dense_hamiltonian(h0, lat).unwrap(), beta);
    let max = rho.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let n = lat.n();
    let mut w = Vec::new();
    for r in 0..rho.nrows() {
        for c in 0..rho.ncols() {
            let v = (rho[(r, c)].re / max * scale).round() as i64;
            if v != 0 {
                let row = SpinBasisState::new(r as u32, n).unwrap();
                let col = SpinBasisState::new(c as u32, n).unwrap();
                w.push((row, col, v));
            }
        }
    }
    PsipPopulation::from_weights(n, beta, 0, scale as u64, w).unwrap()
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn report(name: &str, pass: bool, detail: &str) {
    println!("{name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}
