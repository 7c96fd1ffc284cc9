//! Dense brute-force reference.
//!
//! Operators are `2^N × 2^N` complex matrices built from Kronecker products of
//! Pauli matrices, with basis index bit `i` for site `i`. Every matrix function
//! goes through a Hermitian eigendecomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::backend::STEP_TOLERANCE;
use crate::spin::{trotter_split, HamiltonianParams, Lattice, Schedule, TrotterSplit};

pub type DenseOperator = DMatrix<Complex64>;

/// Largest chain the dense oracle accepts.
pub const MAX_DENSE_SITES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dense oracle is limited to N <= {MAX_DENSE_SITES}, got N = {0}")]
    DimensionTooLarge(usize),
    #[error("time {t} is not a whole number of Trotter steps of {dt}")]
    NonDivisibleTime { t: f64, dt: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli_x() -> DenseOperator {
    DMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(1.), c(0.)])
}

fn pauli_z() -> DenseOperator {
    DMatrix::from_row_slice(2, 2, &[c(1.), c(0.), c(0.), c(-1.)])
}

fn check_dim(n: usize) -> Result<(), OracleError> {
    if n > MAX_DENSE_SITES {
        Err(OracleError::DimensionTooLarge(n))
    } else {
        Ok(())
    }
}

/// `⊗` over sites with `ops[site]` on the listed sites and identity elsewhere.
/// Site 0 is the least significant tensor factor.
fn site_product(n: usize, ops: &[(usize, &DenseOperator)]) -> DenseOperator {
    let id = DMatrix::identity(2, 2);
    let mut out = DMatrix::from_element(1, 1, c(1.0));
    for site in (0..n).rev() {
        let factor = ops.iter().find(|(s, _)| *s == site).map_or(&id, |(_, o)| *o);
        out = out.kronecker(factor);
    }
    out
}

fn transverse_part(mu_x: f64, n: usize) -> DenseOperator {
    let x = pauli_x();
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    if mu_x != 0.0 {
        for i in 0..n {
            h -= site_product(n, &[(i, &x)]) * c(mu_x);
        }
    }
    h
}

fn diagonal_part(j_z: f64, mu_z: f64, lat: &Lattice) -> DenseOperator {
    let z = pauli_z();
    let n = lat.n();
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for &(i, j) in lat.bonds() {
        h -= site_product(n, &[(i, &z), (j, &z)]) * c(j_z);
    }
    for i in 0..n {
        h -= site_product(n, &[(i, &z)]) * c(mu_z);
    }
    h
}

pub fn dense_hamiltonian(p: &HamiltonianParams, lat: &Lattice) -> Result<DenseOperator, OracleError> {
    check_dim(lat.n())?;
    Ok(transverse_part(p.mu_x, lat.n()) + diagonal_part(p.j_z, p.mu_z, lat))
}

/// Dense `(H_x, H_z)`.
pub fn dense_split(split: &TrotterSplit, lat: &Lattice) -> Result<(DenseOperator, DenseOperator), OracleError> {
    check_dim(lat.n())?;
    Ok((
        transverse_part(split.x.mu_x, lat.n()),
        diagonal_part(split.z.j_z, split.z.mu_z, lat),
    ))
}

/// `m_x = (1/N) Σ σx_i`.
pub fn transverse_magnetization(n: usize) -> Result<DenseOperator, OracleError> {
    check_dim(n)?;
    Ok(transverse_part(-1.0 / n as f64, n))
}

pub fn is_hermitian(m: &DenseOperator, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// `V f(Λ) V†` for Hermitian `h = V Λ V†`.
pub fn hermitian_function(h: &DenseOperator, f: impl Fn(f64) -> Complex64) -> DenseOperator {
    let eig = h.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let fj = f(lambda);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
    }
    scaled * eig.eigenvectors.adjoint()
}

pub fn eigenvalues(h: &DenseOperator) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `exp(-βH₀)`.
pub fn thermal_state(h0: &DenseOperator, beta: f64) -> DenseOperator {
    hermitian_function(h0, |l| c((-beta * l).exp()))
}

/// `exp(-iHt)`.
pub fn propagator(h: &DenseOperator, t: f64) -> DenseOperator {
    hermitian_function(h, |l| Complex64::from_polar(1.0, -l * t))
}

/// Exact `U(t)` for the evolution segments of `schedule`.
pub fn evolution_operator(schedule: &Schedule, lat: &Lattice, t: f64) -> Result<DenseOperator, OracleError> {
    check_dim(lat.n())?;
    let mut u = DMatrix::identity(1 << lat.n(), 1 << lat.n());
    for (dur, p) in schedule.pieces(t) {
        u = propagator(&dense_hamiltonian(&p, lat)?, dur) * u;
    }
    Ok(u)
}

fn whole_steps(t: f64, dt: f64) -> Result<u64, OracleError> {
    let steps = t / dt;
    if !(dt > 0.0) || !(t >= 0.0) || (steps - steps.round()).abs() > STEP_TOLERANCE * steps.round().max(1.0) {
        return Err(OracleError::NonDivisibleTime { t, dt });
    }
    Ok(steps.round() as u64)
}

/// Dense product formula `(exp(-iH_x Δt) exp(-iH_z Δt))^(t/Δt)` per segment.
pub fn trotterized_operator(
    schedule: &Schedule,
    lat: &Lattice,
    t: f64,
    dt: f64,
) -> Result<DenseOperator, OracleError> {
    check_dim(lat.n())?;
    whole_steps(t, dt)?;
    let mut u = DMatrix::identity(1 << lat.n(), 1 << lat.n());
    for (dur, p) in schedule.pieces(t) {
        let steps = whole_steps(dur, dt)?;
        let (hx, hz) = dense_split(&trotter_split(&p), lat)?;
        let step = propagator(&hx, dt) * propagator(&hz, dt);
        for _ in 0..steps {
            u = &step * u;
        }
    }
    Ok(u)
}

/// `Tr(O U ρ U†) / Tr ρ`.
pub fn evolved_expectation(
    obs: &DenseOperator,
    u: &DenseOperator,
    rho: &DenseOperator,
) -> Result<f64, OracleError> {
    if obs.nrows() != rho.nrows() || u.nrows() != rho.nrows() {
        return Err(OracleError::DimensionMismatch(obs.nrows(), rho.nrows()));
    }
    let evolved = u * rho * u.adjoint();
    Ok((obs * evolved).trace().re / rho.trace().re)
}

pub fn exact_observable(
    schedule: &Schedule,
    lat: &Lattice,
    rho: &DenseOperator,
    obs: &DenseOperator,
    t: f64,
) -> Result<f64, OracleError> {
    evolved_expectation(obs, &evolution_operator(schedule, lat, t)?, rho)
}

pub fn trotterized_observable(
    schedule: &Schedule,
    lat: &Lattice,
    rho: &DenseOperator,
    obs: &DenseOperator,
    t: f64,
    dt: f64,
) -> Result<f64, OracleError> {
    evolved_expectation(obs, &trotterized_operator(schedule, lat, t, dt)?, rho)
}

/// How the reference evolves the thermal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// Exact exponentials.
    Exact,
    /// Product formula at the given Trotter step.
    Trotterized(f64),
}

/// `<m_x(t)>` of `exp(-βH₀)` at every time in `times`.
pub fn mx_series(
    schedule: &Schedule,
    lat: &Lattice,
    beta: f64,
    times: &[f64],
    reference: Reference,
) -> Result<Vec<f64>, OracleError> {
    let h0 = dense_hamiltonian(&schedule.initial, lat)?;
    let rho = thermal_state(&h0, beta);
    let mx = transverse_magnetization(lat.n())?;
    times
        .iter()
        .map(|&t| match reference {
            Reference::Exact => exact_observable(schedule, lat, &rho, &mx, t),
            Reference::Trotterized(dt) => trotterized_observable(schedule, lat, &rho, &mx, t, dt),
        })
        .collect()
}

/// Closed-form single-spin results for `H = -μ_x σx - μ_z σz`.
pub mod single_spin {
    use crate::spin::HamiltonianParams;

    /// Thermal Bloch vector `tanh(βω) (μ_x, 0, μ_z) / ω`.
    pub fn thermal_bloch(p: &HamiltonianParams, beta: f64) -> [f64; 3] {
        let w = p.mu_x.hypot(p.mu_z);
        if w == 0.0 {
            return [0.0; 3];
        }
        let s = (beta * w).tanh() / w;
        [s * p.mu_x, 0.0, s * p.mu_z]
    }

    /// `<σx>` of the thermal state: `(μ_x/ω) tanh(βω)`.
    pub fn thermal_mx(p: &HamiltonianParams, beta: f64) -> f64 {
        thermal_bloch(p, beta)[0]
    }

    /// Heisenberg-picture precession under `H = -B·σ`:
    /// `dr/dt = -2 B × r`, a rotation by `-2|B|t` about `B`.
    pub fn precess(r: [f64; 3], p: &HamiltonianParams, t: f64) -> [f64; 3] {
        let b = [p.mu_x, 0.0, p.mu_z];
        let w = p.mu_x.hypot(p.mu_z);
        if w == 0.0 {
            return r;
        }
        let k = [b[0] / w, b[1] / w, b[2] / w];
        let angle = -2.0 * w * t;
        let (s, co) = angle.sin_cos();
        let dot = k[0] * r[0] + k[1] * r[1] + k[2] * r[2];
        let cross = [
            k[1] * r[2] - k[2] * r[1],
            k[2] * r[0] - k[0] * r[2],
            k[0] * r[1] - k[1] * r[0],
        ];
        std::array::from_fn(|i| r[i] * co + cross[i] * s + k[i] * dot * (1.0 - co))
    }

    /// `<σx(t)>` after a quench from `h0` at inverse temperature `beta` to `h1`.
    /// The exchange coupling plays no role for one spin.
    pub fn quench_mx(h0: &HamiltonianParams, h1: &HamiltonianParams, beta: f64, t: f64) -> f64 {
        precess(thermal_bloch(h0, beta), h1, t)[0]
    }
}
