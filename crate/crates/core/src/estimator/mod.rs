//! Time-dependent `<m_x(t)>` from a psip population.
//!
//! With the hermitized population `½(ρ̃ + ρ̃†)`, a diagonal site `(a, a)`
//! contributes `<a|O(t)|a>` and an off-diagonal site `(b, a)` contributes
//! `½(<û|O(t)|û> - <v̂|O(t)|v̂>)` with `û, v̂ = (|a> ± |b>)/√2`, each weighted
//! by the site's net weight and divided by the trace of `ρ̃`:
//!
//! ```text
//! <O(t)> ≈ [Σ_diag w <a|O(t)|a> + Σ_offdiag w ½(<û|O(t)|û> - <v̂|O(t)|v̂>)] / Σ_diag w
//! ```
//!
//! Every occupied site is evaluated once per branch and time; the same
//! population serves every time on the grid.

mod bootstrap;
mod series;

pub use bootstrap::{bootstrap_errors, BootstrapErrors};
pub use series::{CsvError, ObservableSeries, SeriesPoint, CSV_HEADER};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::{
    self, execute, measure, prepare_pure_state, trotter_circuit_between, BackendError, Branch,
    ExecutionMode, Measurement, NoiseModel, StateVector,
};
use crate::dmqmc::{DmqmcError, PsipPopulation};
use crate::parallel::{self, Execution};
use crate::rng::stream_key;
use crate::spin::{HamiltonianParams, Lattice, Schedule, SpinBasisState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Population(#[from] DmqmcError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("value at t = 0 is zero; cannot rescale")]
    DivisionByZeroAtT0,
    #[error("invalid evolution job: {0}")]
    InvalidJob(String),
}

/// `t_k = k · spacing` for `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub spacing: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Grid from `0` to `t_max`; `t_max` must be a whole number of spacings.
    pub fn up_to(t_max: f64, spacing: f64) -> Result<Self, EstimatorError> {
        if !(spacing > 0.0) || !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(EstimatorError::InvalidJob(format!(
                "time grid needs t_max >= 0 and spacing > 0 (got {t_max}, {spacing})"
            )));
        }
        let k = t_max / spacing;
        if (k - k.round()).abs() > backend::STEP_TOLERANCE * k.round().max(1.0) {
            return Err(EstimatorError::InvalidJob(format!(
                "t_max {t_max} is not a whole number of grid spacings {spacing}"
            )));
        }
        Ok(Self { spacing, steps: k.round() as usize })
    }

    /// Only `t = 0`.
    pub fn origin() -> Self {
        Self { spacing: 1.0, steps: 0 }
    }

    /// Snapped to 12 decimals so `0.1 · 3` reads as `0.3`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| (k as f64 * self.spacing * 1e12).round() / 1e12).collect()
    }
}

/// How many backend programs stand behind one occupied site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    /// One set of programs per site, weighted by its net weight.
    #[default]
    PerSite,
    /// One set of programs per psip. In shot mode the `|w|` programs of a site
    /// pool their shots; in exact mode this equals `PerSite`.
    PerPsip,
}

#[derive(Debug, Clone)]
pub struct EvolutionJob {
    pub population: PsipPopulation,
    pub schedule: Schedule,
    pub lattice: Lattice,
    pub grid: TimeGrid,
    pub trotter_dt: f64,
    pub noise: NoiseModel,
    pub mode: ExecutionMode,
    pub granularity: Granularity,
    pub execution: Execution,
}

impl EvolutionJob {
    pub fn new(
        population: PsipPopulation,
        schedule: Schedule,
        grid: TimeGrid,
        trotter_dt: f64,
    ) -> Result<Self, EstimatorError> {
        let lattice = Lattice::periodic_chain(population.n())
            .map_err(|e| EstimatorError::InvalidJob(e.to_string()))?;
        Ok(Self {
            population,
            schedule,
            lattice,
            grid,
            trotter_dt,
            noise: NoiseModel::noiseless(),
            mode: ExecutionMode::Exact,
            granularity: Granularity::PerSite,
            execution: Execution::default(),
        })
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_mode(mut self, mode: ExecutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        self.granularity = granularity;
        self
    }

    /// Same job evolved under `H'₁ = -μ_z Σ σz_i` instead.
    pub fn calibration(&self, mu_z: f64) -> Self {
        let diag = HamiltonianParams { j_z: 0.0, mu_x: 0.0, mu_z };
        Self {
            schedule: Schedule::quench(self.schedule.initial, diag),
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<(), EstimatorError> {
        self.noise.validate()?;
        self.mode.validate()?;
        if self.lattice.n() != self.population.n() {
            return Err(EstimatorError::InvalidJob("lattice and population sizes differ".into()));
        }
        // Each grid interval must be a whole number of Trotter steps.
        trotter_circuit_between(&self.schedule, &self.lattice, 0.0, self.grid.spacing, self.trotter_dt)?;
        for &(start, _) in self.schedule.segments() {
            let k = start / self.trotter_dt;
            if (k - k.round()).abs() > backend::STEP_TOLERANCE * k.round().max(1.0) {
                return Err(BackendError::NonDivisibleTime { t: start, dt: self.trotter_dt }.into());
            }
        }
        Ok(())
    }

    fn shot_mode_for(&self, weight: i64, row: SpinBasisState, col: SpinBasisState, branch: Branch, k: usize) -> ExecutionMode {
        match self.mode {
            ExecutionMode::Exact => ExecutionMode::Exact,
            ExecutionMode::Shots { shots, seed } => {
                let shots = match self.granularity {
                    Granularity::PerSite => shots,
                    Granularity::PerPsip => shots * weight.unsigned_abs(),
                };
                let seed = stream_key(seed, &[row.bits() as u64, col.bits() as u64, branch as u64, k as u64]);
                ExecutionMode::Shots { shots, seed }
            }
        }
    }

    /// Provenance lines for the results file.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let digest = Sha256::digest(self.population.to_file_string().as_bytes());
        let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        let mut m = vec![
            ("population_sha256".to_string(), hash),
            ("N".to_string(), self.population.n().to_string()),
            ("beta".to_string(), self.population.beta().to_string()),
            ("dmqmc_seed".to_string(), self.population.seed().to_string()),
            ("n_initial".to_string(), self.population.n_initial().to_string()),
            ("psips".to_string(), self.population.total_psips().to_string()),
            ("sites".to_string(), self.population.len().to_string()),
            (
                "trace".to_string(),
                self.population.trace_estimate().map_or("0".to_string(), |t| t.to_string()),
            ),
            ("trotter_dt".to_string(), self.trotter_dt.to_string()),
            ("noise_readout".to_string(), self.noise.readout_flip.to_string()),
            ("noise_angle_bias".to_string(), self.noise.angle_bias.offset.to_string()),
            ("noise_angle_bias_slope".to_string(), self.noise.angle_bias.slope.to_string()),
        ];
        match self.mode {
            ExecutionMode::Exact => m.push(("mode".into(), "exact".into())),
            ExecutionMode::Shots { shots, seed } => {
                m.push(("mode".into(), "shots".into()));
                m.push(("shots".into(), shots.to_string()));
                m.push(("shot_seed".into(), seed.to_string()));
            }
        }
        m
    }
}

/// Backend results for one occupied site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteEvaluation {
    pub row: SpinBasisState,
    pub col: SpinBasisState,
    pub weight: i64,
    /// `<a|O(t_k)|a>` or `½(<û|O|û> - <v̂|O|v̂>)` at each grid time.
    pub contributions: Vec<f64>,
    /// Raw measurements per branch (`[Diagonal]` or `[U, V]`), per grid time.
    pub measurements: Vec<Vec<Measurement>>,
}

impl SiteEvaluation {
    pub fn is_diagonal(&self) -> bool {
        self.row == self.col
    }
}

/// Every site evaluated on the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub times: Vec<f64>,
    pub trace: f64,
    pub sites: Vec<SiteEvaluation>,
    pub metadata: Vec<(String, String)>,
}

fn branches(row: SpinBasisState, col: SpinBasisState) -> &'static [Branch] {
    if row == col {
        &[Branch::Diagonal]
    } else {
        &[Branch::U, Branch::V]
    }
}

fn combine(values: &[f64]) -> f64 {
    match values {
        [d] => *d,
        [u, v] => 0.5 * (u - v),
        _ => unreachable!("one or two branches"),
    }
}

/// Prepares once per branch and advances the state interval by interval.
fn evaluate_site(job: &EvolutionJob, row: SpinBasisState, col: SpinBasisState, weight: i64) -> Result<SiteEvaluation, EstimatorError> {
    let times = job.grid.times();
    let mut measurements = Vec::new();
    for &branch in branches(row, col) {
        // |û> = (|a> ± |b>)/√2 with a the column and b the row state.
        let prep = prepare_pure_state(col, row, branch)?;
        let mut state = StateVector::zero(job.lattice.n());
        state.apply_circuit(&job.noise.biased(&prep));
        let mut per_t = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            if k > 0 {
                let step = trotter_circuit_between(&job.schedule, &job.lattice, times[k - 1], t, job.trotter_dt)?;
                state.apply_circuit(&job.noise.biased(&step));
            }
            per_t.push(measure(&state, &job.noise, job.shot_mode_for(weight, row, col, branch, k)));
        }
        measurements.push(per_t);
    }
    let contributions = (0..times.len())
        .map(|k| combine(&measurements.iter().map(|m| m[k].estimate).collect::<Vec<_>>()))
        .collect();
    Ok(SiteEvaluation { row, col, weight, contributions, measurements })
}

/// Runs every backend program the job needs.
pub fn evaluate(job: &EvolutionJob) -> Result<Evaluation, EstimatorError> {
    job.validate()?;
    let trace = job.population.trace_estimate()?;
    let sites: Vec<_> = job.population.weights().collect();
    let sites = parallel::map(job.execution, &sites, |&(row, col, w)| evaluate_site(job, row, col, w))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Evaluation {
        times: job.grid.times(),
        trace,
        sites,
        metadata: job.metadata(),
    })
}

impl Evaluation {
    /// Weighted estimate at every grid time.
    pub fn estimates(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|k| {
                self.sites
                    .iter()
                    .map(|s| s.weight as f64 * s.contributions[k])
                    .sum::<f64>()
                    / self.trace
            })
            .collect()
    }

    /// Point estimates with zero errors.
    pub fn series(&self) -> ObservableSeries {
        let points = self
            .times
            .iter()
            .zip(self.estimates())
            .map(|(&t, value)| SeriesPoint { t, value, stat_err: 0.0, sys_err: 0.0 })
            .collect();
        ObservableSeries { points, metadata: self.metadata.clone() }
    }

    /// Point estimates with bootstrap standard errors.
    pub fn bootstrap_series(&self, n_resamples: usize, seed: u64, execution: Execution) -> Result<ObservableSeries, EstimatorError> {
        let errs = bootstrap_errors(self, n_resamples, seed, execution)?;
        let mut s = self.series();
        for (p, e) in s.points.iter_mut().zip(errs.combined()) {
            p.stat_err = e;
        }
        s.push_meta("bootstrap_resamples", n_resamples);
        s.push_meta("bootstrap_seed", seed);
        Ok(s)
    }
}

/// `<m_x(t)>` at a single time, each program built and run from scratch.
pub fn psip_expectation(job: &EvolutionJob, t: f64) -> Result<f64, EstimatorError> {
    job.validate()?;
    let trace = job.population.trace_estimate()?;
    let evolve = trotter_circuit_between(&job.schedule, &job.lattice, 0.0, t, job.trotter_dt)?;
    let mut total = 0.0;
    for (row, col, w) in job.population.weights() {
        let mut values = Vec::new();
        for &branch in branches(row, col) {
            let mut c = prepare_pure_state(col, row, branch)?;
            c.append(&evolve)?;
            let mode = job.shot_mode_for(w, row, col, branch, usize::MAX);
            values.push(execute(&c, &job.noise, mode)?.estimate);
        }
        total += w as f64 * combine(&values);
    }
    Ok(total / trace)
}

/// Point estimates on the whole grid from one fixed population.
pub fn expectation_series(job: &EvolutionJob) -> Result<ObservableSeries, EstimatorError> {
    Ok(evaluate(job)?.series())
}

/// Point estimates with bootstrap errors.
pub fn bootstrap(job: &EvolutionJob, n_resamples: usize, seed: u64) -> Result<ObservableSeries, EstimatorError> {
    evaluate(job)?.bootstrap_series(n_resamples, seed, job.execution)
}

/// Divides values and errors by the `t = 0` value. Statistical errors follow
/// the ratio rule `σ_k' = sqrt(σ_k² + r_k² σ_0²) / |v_0|`.
pub fn rescale_by_t0(series: &ObservableSeries) -> Result<ObservableSeries, EstimatorError> {
    let first = series.points.first().ok_or(EstimatorError::DivisionByZeroAtT0)?;
    if first.t != 0.0 || first.value == 0.0 {
        return Err(EstimatorError::DivisionByZeroAtT0);
    }
    let (v0, s0) = (first.value, first.stat_err);
    let mut out = series.clone();
    for p in &mut out.points {
        let r = p.value / v0;
        p.stat_err = (p.stat_err.powi(2) + (r * s0).powi(2)).sqrt() / v0.abs();
        p.sys_err /= v0.abs();
        p.value = r;
    }
    out.points[0].value = 1.0;
    out.push_meta("rescaled_by", v0);
    Ok(out)
}

/// `sqrt(mean(d²))`.
pub fn quadrature_average(differences: &[f64]) -> f64 {
    if differences.is_empty() {
        return 0.0;
    }
    (differences.iter().map(|d| d * d).sum::<f64>() / differences.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Simulated minus reference at each grid time.
    pub differences: Vec<f64>,
    /// Quadrature average of `differences`.
    pub systematic: f64,
    pub series: ObservableSeries,
}

/// Runs `job` (which should evolve under a computational-basis-diagonal
/// Hamiltonian) and compares it with `reference` point by point. With
/// `rescale`, the simulated series is rescaled by its `t = 0` value first,
/// as the physics run is.
pub fn calibrate(job: &EvolutionJob, reference: &[f64], rescale: bool) -> Result<Calibration, EstimatorError> {
    if job.schedule.segments().iter().any(|(_, p)| p.mu_x != 0.0) {
        return Err(EstimatorError::InvalidJob(
            "calibration Hamiltonian must be diagonal in the computational basis".into(),
        ));
    }
    let mut series = expectation_series(job)?;
    let mut reference = reference.to_vec();
    if rescale {
        series = rescale_by_t0(&series)?;
        let r0 = reference.first().copied().unwrap_or(0.0);
        if r0 == 0.0 {
            return Err(EstimatorError::DivisionByZeroAtT0);
        }
        reference.iter_mut().for_each(|r| *r /= r0);
    }
    if reference.len() != series.points.len() {
        return Err(EstimatorError::InvalidJob(format!(
            "reference has {} points, series {}",
            reference.len(),
            series.points.len()
        )));
    }
    let differences: Vec<f64> = series.values().iter().zip(&reference).map(|(s, r)| s - r).collect();
    let systematic = quadrature_average(&differences);
    Ok(Calibration { differences, systematic, series })
}
