use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::circuit::{Circuit, Gate};
use crate::parallel::Execution;

/// Amplitude slices smaller than this are always updated serially.
#[cfg(feature = "parallel")]
const PARALLEL_MIN_DIM: usize = 1 << 14;

/// Dense `2^n` amplitudes; index bit `i` is qubit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
    execution: Execution,
}

impl StateVector {
    /// `|0…0>`.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps, execution: Execution::Serial }
    }

    pub fn basis(n: usize, bits: usize) -> Self {
        let mut s = Self::zero(n);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[bits] = Complex64::new(1.0, 0.0);
        s
    }

    /// Enables amplitude-parallel gate application on large registers.
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    #[cfg(feature = "parallel")]
    fn parallel(&self) -> bool {
        self.execution == Execution::Parallel && self.amps.len() >= PARALLEL_MIN_DIM
    }

    /// Applies `[[m00, m01], [m10, m11]]` to qubit `q`.
    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1usize << q;
        let kernel = |block: &mut [Complex64]| {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        };
        #[cfg(feature = "parallel")]
        if self.parallel() {
            use rayon::prelude::*;
            self.amps.par_chunks_mut(2 * stride).for_each(kernel);
            return;
        }
        self.amps.chunks_mut(2 * stride).for_each(kernel);
    }

    /// Multiplies amplitude `i` by `phase(i)`.
    fn apply_diagonal(&mut self, phase: impl Fn(usize) -> Complex64 + Sync + Send) {
        #[cfg(feature = "parallel")]
        if self.parallel() {
            use rayon::prelude::*;
            self.amps
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, a)| *a *= phase(i));
            return;
        }
        self.amps.iter_mut().enumerate().for_each(|(i, a)| *a *= phase(i));
    }

    pub fn apply(&mut self, gate: &Gate) {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match *gate {
            Gate::X(q) => self.apply_1q(q, [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]),
            Gate::H(q) => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                self.apply_1q(q, [[h, h], [h, -h]])
            }
            Gate::Z(q) => self.apply_diagonal(|i| c(if (i >> q) & 1 == 0 { 1.0 } else { -1.0 }, 0.0)),
            Gate::Rx(theta, q) => {
                let (s, co) = (theta / 2.0).sin_cos();
                self.apply_1q(q, [[c(co, 0.), c(0., -s)], [c(0., -s), c(co, 0.)]])
            }
            Gate::Rz(theta, q) => {
                let minus = Complex64::from_polar(1.0, -theta / 2.0);
                let plus = minus.conj();
                self.apply_diagonal(|i| if (i >> q) & 1 == 0 { minus } else { plus })
            }
            Gate::Zz(theta, p, q) => {
                let same = Complex64::from_polar(1.0, -theta / 2.0);
                let diff = same.conj();
                self.apply_diagonal(|i| if ((i >> p) ^ (i >> q)) & 1 == 0 { same } else { diff })
            }
            Gate::Cnot { control, target } => {
                let (cm, tm) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
            }
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) {
        debug_assert_eq!(circuit.n(), self.n);
        for g in circuit.gates() {
            self.apply(g);
        }
    }

    /// `<X_i>` for every qubit, read out after rotating each qubit to the X
    /// basis: `p_i(0) - p_i(1)` of the rotated state.
    pub fn x_expectations(&self) -> Vec<f64> {
        let mut rotated = self.clone();
        for q in 0..self.n {
            rotated.apply(&Gate::H(q));
        }
        let mut out = vec![0.0; self.n];
        for (i, a) in rotated.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                *o += if (i >> q) & 1 == 0 { p } else { -p };
            }
        }
        out
    }

    /// Samples `shots` X-basis bitstrings, flipping each bit with probability
    /// `flip`; returns how many shots had `k` ones, for `k = 0..=n`.
    pub fn sample_x_basis<R: Rng>(&self, shots: u64, flip: f64, rng: &mut R) -> Vec<u64> {
        let mut rotated = self.clone();
        for q in 0..self.n {
            rotated.apply(&Gate::H(q));
        }
        let mut cumulative = Vec::with_capacity(rotated.amps.len());
        let mut acc = 0.0;
        for a in &rotated.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let mut counts = vec![0u64; self.n + 1];
        for _ in 0..shots {
            let u = rng.random::<f64>() * acc;
            let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            let mut ones = 0;
            for q in 0..self.n {
                let bit = (idx >> q) & 1 == 1;
                if bit != (flip > 0.0 && rng.random::<f64>() < flip) {
                    ones += 1;
                }
            }
            counts[ones] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    type M = Vec<Vec<Complex64>>;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Matrix of `gate` on `n` qubits, built column by column from basis states.
    fn gate_matrix(gate: Gate, n: usize) -> M {
        let dim = 1 << n;
        let mut m = vec![vec![c(0., 0.); dim]; dim];
        for col in 0..dim {
            let mut s = StateVector::basis(n, col);
            s.apply(&gate);
            for (row, a) in s.amps.iter().enumerate() {
                m[row][col] = *a;
            }
        }
        m
    }

    fn assert_matrix(actual: M, expected: M) {
        for (ra, re) in actual.iter().zip(&expected) {
            for (a, e) in ra.iter().zip(re) {
                assert_abs_diff_eq!(a.re, e.re, epsilon = 1e-12);
                assert_abs_diff_eq!(a.im, e.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fixed_gates_match_textbook() {
        let r = FRAC_1_SQRT_2;
        assert_matrix(gate_matrix(Gate::X(0), 1), vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
        assert_matrix(gate_matrix(Gate::H(0), 1), vec![vec![c(r, 0.), c(r, 0.)], vec![c(r, 0.), c(-r, 0.)]]);
        assert_matrix(gate_matrix(Gate::Z(0), 1), vec![vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]]);
        // Control qubit 0: |01> (index 1) ↔ |11> (index 3).
        let o = c(1., 0.);
        let z = c(0., 0.);
        assert_matrix(
            gate_matrix(Gate::Cnot { control: 0, target: 1 }, 2),
            vec![vec![o, z, z, z], vec![z, z, z, o], vec![z, z, o, z], vec![z, o, z, z]],
        );
    }

    #[test]
    fn rotations_match_textbook() {
        for theta in [0.0, PI / 2.0, PI] {
            let (s, co) = (theta / 2.0).sin_cos();
            assert_matrix(
                gate_matrix(Gate::Rx(theta, 0), 1),
                vec![vec![c(co, 0.), c(0., -s)], vec![c(0., -s), c(co, 0.)]],
            );
            assert_matrix(
                gate_matrix(Gate::Rz(theta, 0), 1),
                vec![vec![c(co, -s), c(0., 0.)], vec![c(0., 0.), c(co, s)]],
            );
            let (e_m, e_p, z) = (c(co, -s), c(co, s), c(0., 0.));
            assert_matrix(
                gate_matrix(Gate::Zz(theta, 0, 1), 2),
                vec![
                    vec![e_m, z, z, z],
                    vec![z, e_p, z, z],
                    vec![z, z, e_p, z],
                    vec![z, z, z, e_m],
                ],
            );
        }
    }

    #[test]
    fn zz_equals_cnot_rz_cnot() {
        for theta in [0.3, -1.1, PI] {
            let direct = gate_matrix(Gate::Zz(theta, 0, 2), 3);
            let dim = 8;
            let mut composed = vec![vec![c(0., 0.); dim]; dim];
            for col in 0..dim {
                let mut s = StateVector::basis(3, col);
                s.apply(&Gate::Cnot { control: 0, target: 2 });
                s.apply(&Gate::Rz(theta, 2));
                s.apply(&Gate::Cnot { control: 0, target: 2 });
                for (row, a) in s.amps.iter().enumerate() {
                    composed[row][col] = *a;
                }
            }
            assert_matrix(direct, composed);
        }
    }

    #[test]
    fn gate_on_higher_qubit_of_register() {
        // X on qubit 1 of 3 maps |000> to index 2.
        let mut s = StateVector::zero(3);
        s.apply(&Gate::X(1));
        assert_abs_diff_eq!(s.amps[2].re, 1.0);
    }

    #[test]
    fn x_expectation_of_plus_state() {
        let mut s = StateVector::zero(2);
        s.apply(&Gate::H(1));
        let mx = s.x_expectations();
        assert_abs_diff_eq!(mx[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mx[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parallel_application_matches_serial() {
        let n = 15;
        let gates = [
            Gate::H(0),
            Gate::H(14),
            Gate::Rx(0.7, 3),
            Gate::Zz(0.4, 2, 9),
            Gate::Rz(1.3, 14),
            Gate::Cnot { control: 0, target: 7 },
            Gate::Rx(-0.2, 14),
        ];
        let mut a = StateVector::zero(n);
        let mut b = StateVector::zero(n).with_execution(Execution::Parallel);
        for g in &gates {
            a.apply(g);
            b.apply(g);
        }
        for (x, y) in a.amps.iter().zip(&b.amps) {
            assert!((x - y).norm() <= 1e-12);
        }
    }
}
