//! Density matrix quantum Monte Carlo.
//!
//! Psips start uniformly on the diagonal (`ρ(0) = 1`) and each step applies
//! one stochastic Euler step of `dρ/dβ = -½(Hρ + ρH)`:
//!
//! * column spawn `|b><a| → |c><a|` with probability `½|<c|H|b>|Δβ`
//! * row spawn `|b><a| → |b><c|` with probability `½|<a|H|c>|Δβ`
//! * death (if `<a|H|a> + <b|H|b> > 0`) or clone (if `< 0`) with probability
//!   `½|<a|H|a> + <b|H|b>|Δβ`
//!
//! A spawned child carries `parent sign × -sign(element)`. Probabilities above
//! one produce `floor(p)` events plus one more with probability `p - floor(p)`.
//! All events are drawn from the start-of-step population; children act from
//! the next step on. Opposite-sign psips sharing a site annihilate at the end
//! of the step unless annihilation is switched off.

mod population;

pub use population::{Key, PopulationFileError, Psip, PsipPopulation};

use population::Occupancy;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::parallel::{self, Execution};
use crate::rng::substream;
use crate::spin::{column_connections, diagonal_element, HamiltonianParams, Lattice, SpinBasisState};

/// Default ceiling on the total number of psips.
pub const DEFAULT_EXPLOSION_CEILING: u64 = 10_000_000;

const INIT_TAG: u64 = 0x1a17;
const STEP_TAG: u64 = 0x57e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmqmcError {
    #[error("population exploded to {weight} psips at step {step} (ceiling {ceiling}); reduce delta_beta or beta, or raise the ceiling")]
    PopulationExplosion { step: u64, weight: u64, ceiling: u64 },
    #[error("trace of the psip population is zero; expectation values are undefined")]
    ZeroTrace,
    #[error("invalid DMQMC parameters: {0}")]
    InvalidParams(String),
    #[error("site count mismatch: expected {expected}, found {found}")]
    SiteMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmqmcParams {
    pub beta: f64,
    pub delta_beta: f64,
    pub n_initial: u64,
    pub seed: u64,
}

impl DmqmcParams {
    pub fn validate(&self) -> Result<(), DmqmcError> {
        let bad = |m: String| Err(DmqmcError::InvalidParams(m));
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("beta {} must be finite and >= 0", self.beta));
        }
        if !(self.delta_beta.is_finite() && self.delta_beta > 0.0) {
            return bad(format!("delta_beta {} must be > 0", self.delta_beta));
        }
        let steps = self.beta / self.delta_beta;
        if (steps - steps.round()).abs() > 1e-9 {
            return bad(format!(
                "beta {} is not a whole number of delta_beta {} steps",
                self.beta, self.delta_beta
            ));
        }
        if self.n_initial == 0 {
            return bad("n_initial must be >= 1".to_string());
        }
        Ok(())
    }

    pub fn n_steps(&self) -> u64 {
        (self.beta / self.delta_beta).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmqmcOptions {
    pub annihilation: bool,
    pub explosion_ceiling: u64,
    pub execution: Execution,
}

impl Default for DmqmcOptions {
    fn default() -> Self {
        Self {
            annihilation: true,
            explosion_ceiling: DEFAULT_EXPLOSION_CEILING,
            execution: Execution::default(),
        }
    }
}

/// Event counts of one step, in psips.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub column_spawns: u64,
    pub row_spawns: u64,
    pub deaths: u64,
    pub clones: u64,
    pub annihilated: u64,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.column_spawns += o.column_spawns;
        self.row_spawns += o.row_spawns;
        self.deaths += o.deaths;
        self.clones += o.clones;
        self.annihilated += o.annihilated;
    }
}

/// `n_initial` psips of sign `+1`, each on a uniformly random diagonal site.
pub fn init_population(params: &DmqmcParams, n: usize) -> Result<PsipPopulation, DmqmcError> {
    params.validate()?;
    let lat_dim = SpinBasisState::dimension(n);
    let mut rng = substream(params.seed, &[INIT_TAG, n as u64]);
    let mut counts = vec![0i64; lat_dim];
    for _ in 0..params.n_initial {
        counts[rng.random_range(0..lat_dim)] += 1;
    }
    let weights = counts.into_iter().enumerate().map(|(bits, w)| {
        let s = SpinBasisState::new(bits as u32, n).expect("index below 2^n");
        (s, s, w)
    });
    PsipPopulation::from_weights(n, 0.0, params.seed, params.n_initial, weights)
}

/// Number of events for `n` independent trials with rate `p` (may exceed 1).
fn sample_events<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    let whole = p.floor();
    let frac = p - whole;
    let base = n * whole as u64;
    if frac == 0.0 {
        return base;
    }
    base + Binomial::new(n, frac).expect("probability in [0, 1)").sample(rng)
}

/// Net change to one site produced by a step.
#[derive(Debug, Clone, Copy, Default)]
struct Change {
    key: Key,
    add_pos: u64,
    add_neg: u64,
    kill_pos: u64,
    kill_neg: u64,
}

impl Change {
    fn add(key: Key, sign: i8, count: u64) -> Self {
        if sign > 0 {
            Self { key, add_pos: count, ..Default::default() }
        } else {
            Self { key, add_neg: count, ..Default::default() }
        }
    }
}

fn group_events(
    key: Key,
    sign: i8,
    count: u64,
    rng: &mut impl Rng,
    ctx: &StepContext<'_>,
    changes: &mut Vec<Change>,
    stats: &mut StepStats,
) {
    let (row_bits, col_bits) = key;
    let row = SpinBasisState::new(row_bits, ctx.lat.n()).expect("valid row");
    let col = SpinBasisState::new(col_bits, ctx.lat.n()).expect("valid col");
    let half_db = 0.5 * ctx.delta_beta;

    for (c, h) in column_connections(row, ctx.h, ctx.lat) {
        let k = sample_events(rng, count, half_db * h.abs());
        if k > 0 {
            let child = if h > 0.0 { -sign } else { sign };
            changes.push(Change::add((c.bits(), col_bits), child, k));
            stats.column_spawns += k;
        }
    }
    for (c, h) in column_connections(col, ctx.h, ctx.lat) {
        let k = sample_events(rng, count, half_db * h.abs());
        if k > 0 {
            let child = if h > 0.0 { -sign } else { sign };
            changes.push(Change::add((row_bits, c.bits()), child, k));
            stats.row_spawns += k;
        }
    }

    let d = diagonal_element(row, ctx.h, ctx.lat) + diagonal_element(col, ctx.h, ctx.lat);
    let k = sample_events(rng, count, half_db * d.abs());
    if k == 0 {
        return;
    }
    if d > 0.0 {
        // More deaths than psips (p > 1) overshoot into the opposite sign.
        let killed = k.min(count);
        let mut ch = Change::add(key, -sign, k - killed);
        if sign > 0 {
            ch.kill_pos = killed;
        } else {
            ch.kill_neg = killed;
        }
        changes.push(ch);
        stats.deaths += k;
    } else {
        changes.push(Change::add(key, sign, k));
        stats.clones += k;
    }
}

struct StepContext<'a> {
    h: &'a HamiltonianParams,
    lat: &'a Lattice,
    delta_beta: f64,
    seed: u64,
    step: u64,
}

/// Advances `pop` by one step of `Δβ`.
pub fn step(
    pop: &mut PsipPopulation,
    params: &DmqmcParams,
    h0: &HamiltonianParams,
    lat: &Lattice,
    opts: &DmqmcOptions,
) -> Result<StepStats, DmqmcError> {
    if lat.n() != pop.n {
        return Err(DmqmcError::SiteMismatch { expected: pop.n, found: lat.n() });
    }
    let ctx = StepContext {
        h: h0,
        lat,
        delta_beta: params.delta_beta,
        seed: params.seed,
        step: pop.steps,
    };
    let sites: Vec<(Key, Occupancy)> = pop.entries.iter().map(|(&k, &o)| (k, o)).collect();

    let per_site = parallel::map(opts.execution, &sites, |&(key, occ)| {
        let mut changes = Vec::new();
        let mut stats = StepStats::default();
        for (sign, count) in [(1i8, occ.pos), (-1i8, occ.neg)] {
            if count == 0 {
                continue;
            }
            let mut rng = substream(
                ctx.seed,
                &[STEP_TAG, ctx.step, key.0 as u64, key.1 as u64, (sign > 0) as u64],
            );
            group_events(key, sign, count, &mut rng, &ctx, &mut changes, &mut stats);
        }
        (changes, stats)
    });

    let mut stats = StepStats::default();
    for (changes, s) in per_site {
        stats += s;
        for ch in changes {
            let e = pop.entries.entry(ch.key).or_default();
            e.pos = e.pos + ch.add_pos - ch.kill_pos;
            e.neg = e.neg + ch.add_neg - ch.kill_neg;
        }
    }
    if opts.annihilation {
        for o in pop.entries.values_mut() {
            let m = o.pos.min(o.neg);
            o.pos -= m;
            o.neg -= m;
            stats.annihilated += 2 * m;
        }
    }
    pop.entries.retain(|_, o| !o.is_empty());
    pop.steps += 1;
    pop.beta = pop.steps as f64 * params.delta_beta;

    let weight = pop.total_psips();
    if weight > opts.explosion_ceiling {
        return Err(DmqmcError::PopulationExplosion {
            step: pop.steps,
            weight,
            ceiling: opts.explosion_ceiling,
        });
    }
    Ok(stats)
}

/// Initializes and takes `round(β/Δβ)` steps.
pub fn run(
    params: &DmqmcParams,
    h0: &HamiltonianParams,
    lat: &Lattice,
    opts: &DmqmcOptions,
) -> Result<PsipPopulation, DmqmcError> {
    let mut pop = init_population(params, lat.n())?;
    for _ in 0..params.n_steps() {
        step(&mut pop, params, h0, lat, opts)?;
    }
    // Exact target value, free of accumulated rounding.
    pop.beta = params.beta;
    Ok(pop)
}
