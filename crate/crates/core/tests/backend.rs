mod common;

use common::*;
use erhoq::backend::{execute, measure, trotter_circuit, ExecutionMode, NoiseModel, StateVector};
use erhoq::oracle::{dense_hamiltonian, propagator, transverse_magnetization, trotterized_operator, DenseOperator};
use erhoq::spin::{Lattice, Schedule};
use num_complex::Complex64;

fn circuit_unitary(c: &erhoq::backend::Circuit) -> DenseOperator {
    let n = c.n();
    let dim = 1 << n;
    let mut u = DenseOperator::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(n, col);
        s.apply_circuit(c);
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    u
}

fn op_norm(m: &DenseOperator) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

#[test]
fn trotter_circuit_is_first_order_in_dt() {
    let lat = Lattice::periodic_chain(2).unwrap();
    let h1 = params(1.0, -1.0, 0.0);
    let exact = propagator(&dense_hamiltonian(&h1, &lat).unwrap(), 0.5);
    let dev = |dt: f64| {
        let u = circuit_unitary(&trotter_circuit(&h1, &lat, 0.5, dt).unwrap());
        // Global phases of the gate set differ from exp(-iHt); fix it on one entry.
        let k = (0..4).max_by(|&a, &b| exact[(a, 0)].norm().total_cmp(&exact[(b, 0)].norm())).unwrap();
        let phase = exact[(k, 0)] / u[(k, 0)];
        let phase = phase / phase.norm();
        op_norm(&(u * phase - &exact))
    };
    let (coarse, fine) = (dev(0.1), dev(0.05));
    assert!(coarse < 0.2, "{coarse}");
    assert!((1.6..2.4).contains(&(coarse / fine)), "{coarse} / {fine}");
}

#[test]
fn circuit_unitary_equals_dense_product_formula() {
    for (n, p) in [(1, params(0.0, 0.7, -1.2)), (2, params(1.0, -1.0, 0.0)), (4, params(-0.4, 0.9, 0.3))] {
        let lat = Lattice::periodic_chain(n).unwrap();
        let u = circuit_unitary(&trotter_circuit(&p, &lat, 0.6, 0.2).unwrap());
        let dense = trotterized_operator(&Schedule::quench(p, p), &lat, 0.6, 0.2).unwrap();
        // Same up to a global phase.
        let phase = (dense.adjoint() * &u).trace() / Complex64::from((1 << n) as f64);
        assert!((phase.norm() - 1.0).abs() < 1e-12, "N={n}: {phase}");
        let diff = (u - dense * phase).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "N={n}: {diff}");
    }
}

#[test]
fn exact_mode_matches_dense_expectation() {
    let lat = Lattice::periodic_chain(3).unwrap();
    let p = params(0.8, -1.1, 0.4);
    let mx = transverse_magnetization(3).unwrap();
    let schedule = Schedule::quench(p, p);
    for b in 0..8u32 {
        let c = trotter_circuit(&p, &lat, 1.0, 0.1).unwrap();
        let mut prep = erhoq::backend::Circuit::new(3).unwrap();
        for i in 0..3 {
            if (b >> i) & 1 == 1 {
                prep.push(erhoq::backend::Gate::X(i)).unwrap();
            }
        }
        prep.append(&c).unwrap();
        let got = execute(&prep, &NoiseModel::noiseless(), ExecutionMode::Exact).unwrap().estimate;
        let u = trotterized_operator(&schedule, &lat, 1.0, 0.1).unwrap();
        let o = u.adjoint() * &mx * u;
        assert!((got - o[(b as usize, b as usize)].re).abs() < 1e-10);
    }
}

#[test]
fn readout_factor_matches_many_shots() {
    // |+> has m_x = 1; readout flips scale it by 1 - 2p.
    let mut s = StateVector::zero(1);
    s.apply(&erhoq::backend::Gate::H(0));
    let noise = NoiseModel::readout(0.1);
    let exact = measure(&s, &noise, ExecutionMode::Exact).estimate;
    assert!((exact - 0.8).abs() < 1e-12);
    let shots = measure(&s, &noise, ExecutionMode::Shots { shots: 1_000_000, seed: 9 }).estimate;
    let sigma = (1.0 - 0.8f64.powi(2)).sqrt() / 1000.0;
    assert!((shots - 0.8).abs() < 4.0 * sigma, "{shots}");
}
