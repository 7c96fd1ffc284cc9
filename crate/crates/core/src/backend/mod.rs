//! Simulated gate-based backend.
//!
//! Each program prepares a pure state, Trotter-evolves it under `H₁` and
//! measures the transverse magnetization `m_x = (1/N) Σ σx_i` by rotating
//! every qubit into the X basis.
//!
//! Trotter steps act on kets as `exp(-iH_x Δt) exp(-iH_z Δt)`, i.e. the
//! diagonal layer first:
//!
//! | term            | gate per step          |
//! |-----------------|------------------------|
//! | `-μ_z σz_i`     | `RZ(-2 μ_z Δt)` on i   |
//! | `-J_z σz_i σz_j`| `ZZ(-2 J_z Δt)` on i,j |
//! | `-μ_x σx_i`     | `RX(-2 μ_x Δt)` on i   |
//!
//! Terms with a zero coefficient emit no gates.

mod circuit;
mod statevector;

pub use circuit::{Circuit, Gate};
pub use statevector::StateVector;

use thiserror::Error;

use crate::rng::substream;
use crate::spin::{trotter_split, HamiltonianParams, Lattice, Schedule, SpinBasisState};

/// Relative tolerance for `t / Δt` being a whole number of steps.
pub const STEP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("branch {branch:?} does not fit the pair {a} / {b}")]
    BranchMismatch { branch: Branch, a: SpinBasisState, b: SpinBasisState },
    #[error("time {t} is not a whole number of Trotter steps of {dt}")]
    NonDivisibleTime { t: f64, dt: f64 },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    SiteMismatch { expected: usize, found: usize },
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
}

/// Which pure state a program prepares for the pair `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// `|a>`, requires `a == b`.
    Diagonal,
    /// `(|a> + |b>)/√2`.
    U,
    /// `(|a> - |b>)/√2`.
    V,
}

/// Systematic angle error `ε(θ) = offset + slope·θ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngleBias {
    pub offset: f64,
    pub slope: f64,
}

impl AngleBias {
    pub fn is_zero(&self) -> bool {
        self.offset == 0.0 && self.slope == 0.0
    }

    pub fn apply(&self, theta: f64) -> f64 {
        theta + self.offset + self.slope * theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    /// Symmetric probability of reading the opposite bit.
    pub readout_flip: f64,
    /// Added to every RX, RZ and ZZ angle.
    pub angle_bias: AngleBias,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn readout(p: f64) -> Self {
        Self { readout_flip: p, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(0.0..0.5).contains(&self.readout_flip) {
            return Err(BackendError::InvalidNoise(format!(
                "readout flip probability {} outside [0, 0.5)",
                self.readout_flip
            )));
        }
        if !(self.angle_bias.offset.is_finite() && self.angle_bias.slope.is_finite()) {
            return Err(BackendError::InvalidNoise("non-finite angle bias".into()));
        }
        Ok(())
    }

    /// The circuit the hardware actually runs.
    pub fn biased(&self, c: &Circuit) -> Circuit {
        if self.angle_bias.is_zero() {
            return c.clone();
        }
        let mut out = Circuit::new(c.n()).expect("same qubit count");
        for g in c.gates() {
            out.push(g.map_angle(|a| self.angle_bias.apply(a)))
                .expect("biased angles stay finite");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    /// Expectation value straight from the final statevector.
    Exact,
    /// Sample mean over `shots` readouts.
    Shots { shots: u64, seed: u64 },
}

impl ExecutionMode {
    pub fn validate(&self) -> Result<(), BackendError> {
        match self {
            ExecutionMode::Shots { shots: 0, .. } => {
                Err(BackendError::InvalidNoise("shot count must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Shot outcomes binned by the number of ones read out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotHistogram {
    pub counts: Vec<u64>,
}

impl ShotHistogram {
    pub fn n(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `m_x` of a shot with `ones` ones.
    pub fn value_of(&self, ones: usize) -> f64 {
        let n = self.n() as f64;
        (n - 2.0 * ones as f64) / n
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * self.value_of(k))
            .sum();
        total / self.shots() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub estimate: f64,
    /// Present in shot mode.
    pub histogram: Option<ShotHistogram>,
}

/// Circuit preparing the `branch` state of `(a, b)` from `|0…0>`.
///
/// X on the bits `a` and `b` share, H on their lowest differing bit (then Z
/// for the `v` branch), CNOTs from that bit onto every other differing bit,
/// and a final X on the differing bits set in `a`. The `|a>` component always
/// carries the `+` sign.
pub fn prepare_pure_state(
    a: SpinBasisState,
    b: SpinBasisState,
    branch: Branch,
) -> Result<Circuit, BackendError> {
    if a.n() != b.n() {
        return Err(BackendError::SiteMismatch { expected: a.n(), found: b.n() });
    }
    let n = a.n();
    let mut c = Circuit::new(n)?;
    let set = |bits: u32| (0..n).filter(move |&i| (bits >> i) & 1 == 1);
    let diff = a.bits() ^ b.bits();
    match (branch, diff) {
        (Branch::Diagonal, 0) => {
            for i in set(a.bits()) {
                c.push(Gate::X(i))?;
            }
        }
        (Branch::U | Branch::V, d) if d != 0 => {
            for i in set(a.bits() & b.bits()) {
                c.push(Gate::X(i))?;
            }
            let lead = d.trailing_zeros() as usize;
            c.push(Gate::H(lead))?;
            if branch == Branch::V {
                c.push(Gate::Z(lead))?;
            }
            for i in set(d).filter(|&i| i != lead) {
                c.push(Gate::Cnot { control: lead, target: i })?;
            }
            for i in set(a.bits() & d) {
                c.push(Gate::X(i))?;
            }
        }
        _ => return Err(BackendError::BranchMismatch { branch, a, b }),
    }
    Ok(c)
}

fn whole_steps(t: f64, dt: f64) -> Result<u64, BackendError> {
    if !(dt > 0.0) || !(t >= 0.0) || !t.is_finite() {
        return Err(BackendError::NonDivisibleTime { t, dt });
    }
    let steps = t / dt;
    if (steps - steps.round()).abs() > STEP_TOLERANCE * steps.round().max(1.0) {
        return Err(BackendError::NonDivisibleTime { t, dt });
    }
    Ok(steps.round() as u64)
}

fn push_trotter_steps(
    c: &mut Circuit,
    p: &HamiltonianParams,
    lat: &Lattice,
    steps: u64,
    dt: f64,
) -> Result<(), BackendError> {
    let split = trotter_split(p);
    for _ in 0..steps {
        if split.z.mu_z != 0.0 {
            for i in 0..lat.n() {
                c.push(Gate::Rz(-2.0 * split.z.mu_z * dt, i))?;
            }
        }
        if split.z.j_z != 0.0 {
            for &(i, j) in lat.bonds() {
                c.push(Gate::Zz(-2.0 * split.z.j_z * dt, i, j))?;
            }
        }
        if !split.x.is_zero() {
            for i in 0..lat.n() {
                c.push(Gate::Rx(-2.0 * split.x.mu_x * dt, i))?;
            }
        }
    }
    Ok(())
}

/// `(exp(-iH_x Δt) exp(-iH_z Δt))^(t/Δt)` for a constant Hamiltonian.
pub fn trotter_circuit(
    p: &HamiltonianParams,
    lat: &Lattice,
    t: f64,
    dt: f64,
) -> Result<Circuit, BackendError> {
    let steps = whole_steps(t, dt)?;
    let mut c = Circuit::new(lat.n())?;
    push_trotter_steps(&mut c, p, lat, steps, dt)?;
    Ok(c)
}

/// Trotterized evolution from `t_start` to `t_end` under the evolution
/// segments of `schedule`; every segment piece must be a whole number of steps.
pub fn trotter_circuit_between(
    schedule: &Schedule,
    lat: &Lattice,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<Circuit, BackendError> {
    let mut c = Circuit::new(lat.n())?;
    let segs = schedule.segments();
    for (i, &(start, p)) in segs.iter().enumerate() {
        let end = segs.get(i + 1).map_or(f64::INFINITY, |s| s.0);
        let (lo, hi) = (start.max(t_start), end.min(t_end));
        if hi > lo {
            let steps = whole_steps(hi - lo, dt)?;
            push_trotter_steps(&mut c, &p, lat, steps, dt)?;
        }
    }
    whole_steps(t_end - t_start, dt)?;
    Ok(c)
}

/// Measures `m_x` on `state` as the backend would after running a program.
pub fn measure(state: &StateVector, noise: &NoiseModel, mode: ExecutionMode) -> Measurement {
    match mode {
        ExecutionMode::Exact => {
            let xs = state.x_expectations();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            Measurement {
                estimate: mean * (1.0 - 2.0 * noise.readout_flip),
                histogram: None,
            }
        }
        ExecutionMode::Shots { shots, seed } => {
            let mut rng = substream(seed, &[0x5407]);
            let hist = ShotHistogram {
                counts: state.sample_x_basis(shots, noise.readout_flip, &mut rng),
            };
            Measurement { estimate: hist.mean(), histogram: Some(hist) }
        }
    }
}

/// Runs `circuit` from `|0…0>` with `noise` applied and measures `m_x`.
pub fn execute(
    circuit: &Circuit,
    noise: &NoiseModel,
    mode: ExecutionMode,
) -> Result<Measurement, BackendError> {
    noise.validate()?;
    mode.validate()?;
    let mut state = StateVector::zero(circuit.n());
    state.apply_circuit(&noise.biased(circuit));
    Ok(measure(&state, noise, mode))
}
