//! Bootstrap errors.
//!
//! Psips are resampled with replacement (a site of net weight `w` is `|w|`
//! psips of sign `sign(w)`), and in shot mode the shots of every program are
//! resampled separately. The two spreads are combined in quadrature. One set
//! of psip resamples serves every grid time, so the errors keep the
//! correlation between times that comes from sharing one population.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{EstimatorError, Evaluation};
use crate::parallel::{self, Execution};
use crate::rng::substream;

const PSIP_TAG: u64 = 0xb0075;
const SHOT_TAG: u64 = 0x5407b;

/// Smallest accepted number of resamples.
pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapErrors {
    /// Spread from resampling psips, per grid time.
    pub psip: Vec<f64>,
    /// Spread from resampling shots, per grid time; zero in exact mode.
    pub shot: Vec<f64>,
}

impl BootstrapErrors {
    pub fn combined(&self) -> Vec<f64> {
        self.psip.iter().zip(&self.shot).map(|(a, b)| a.hypot(*b)).collect()
    }
}

/// Draws `n` items over categories with the given nonnegative weights.
pub(crate) fn multinomial<R: Rng>(rng: &mut R, n: u64, weights: &[f64]) -> Vec<u64> {
    let mut mass: f64 = weights.iter().sum();
    let mut left = n;
    let mut out = vec![0; weights.len()];
    for (i, &w) in weights.iter().enumerate() {
        if left == 0 || mass <= 0.0 {
            break;
        }
        if i + 1 == weights.len() {
            out[i] = left;
            break;
        }
        let p = (w / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, p).expect("p in [0, 1]").sample(rng);
        out[i] = k;
        left -= k;
        mass -= w;
    }
    out
}

fn sample_sd(samples: &[Vec<f64>], k: usize) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    // Shifted by the first sample so identical samples give exactly zero.
    let shift = samples[0][k];
    let mean = samples.iter().map(|s| s[k] - shift).sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|s| (s[k] - shift - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

fn psip_resamples(eval: &Evaluation, n_resamples: usize, seed: u64, exec: Execution) -> Vec<Vec<f64>> {
    let weights: Vec<f64> = eval.sites.iter().map(|s| s.weight.unsigned_abs() as f64).collect();
    let total: u64 = eval.sites.iter().map(|s| s.weight.unsigned_abs()).sum();
    let n_t = eval.times.len();
    let idx: Vec<usize> = (0..n_resamples).collect();
    parallel::map(exec, &idx, |&r| {
        let mut rng = substream(seed, &[PSIP_TAG, r as u64]);
        let counts = multinomial(&mut rng, total, &weights);
        let mut num = vec![0.0; n_t];
        let mut trace = 0i64;
        for (site, &c) in eval.sites.iter().zip(&counts) {
            let signed = c as i64 * site.weight.signum();
            if site.is_diagonal() {
                trace += signed;
            }
            for (acc, v) in num.iter_mut().zip(&site.contributions) {
                *acc += signed as f64 * v;
            }
        }
        // A resample with zero trace has no estimate.
        (trace != 0).then(|| num.into_iter().map(|x| x / trace as f64).collect())
    })
    .into_iter()
    .flatten()
    .collect()
}

fn shot_resamples(eval: &Evaluation, n_resamples: usize, seed: u64, exec: Execution) -> Vec<Vec<f64>> {
    let n_t = eval.times.len();
    let idx: Vec<usize> = (0..n_resamples).collect();
    parallel::map(exec, &idx, |&r| {
        let mut rng = substream(seed, &[SHOT_TAG, r as u64]);
        let mut num = vec![0.0; n_t];
        for site in &eval.sites {
            for (k, acc) in num.iter_mut().enumerate() {
                let branch_means: Vec<f64> = site
                    .measurements
                    .iter()
                    .map(|per_t| {
                        let hist = per_t[k].histogram.as_ref().expect("shot mode");
                        let probs: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
                        let redrawn = multinomial(&mut rng, hist.shots(), &probs);
                        let sum: f64 = redrawn
                            .iter()
                            .enumerate()
                            .map(|(ones, &c)| c as f64 * hist.value_of(ones))
                            .sum();
                        sum / hist.shots() as f64
                    })
                    .collect();
                *acc += site.weight as f64 * super::combine(&branch_means);
            }
        }
        num.into_iter().map(|x| x / eval.trace).collect()
    })
}

/// Standard deviations over `n_resamples` bootstrap resamples.
pub fn bootstrap_errors(
    eval: &Evaluation,
    n_resamples: usize,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapErrors, EstimatorError> {
    if n_resamples < MIN_RESAMPLES {
        return Err(EstimatorError::InvalidJob(format!(
            "bootstrap needs at least {MIN_RESAMPLES} resamples, got {n_resamples}"
        )));
    }
    let n_t = eval.times.len();
    let psip = psip_resamples(eval, n_resamples, seed, exec);
    let psip_sd = (0..n_t).map(|k| sample_sd(&psip, k)).collect();

    let has_shots = eval
        .sites
        .iter()
        .any(|s| s.measurements.iter().any(|m| m.iter().any(|x| x.histogram.is_some())));
    let shot_sd = if has_shots {
        let shots = shot_resamples(eval, n_resamples, seed, exec);
        (0..n_t).map(|k| sample_sd(&shots, k)).collect()
    } else {
        vec![0.0; n_t]
    };
    Ok(BootstrapErrors { psip: psip_sd, shot: shot_sd })
}
