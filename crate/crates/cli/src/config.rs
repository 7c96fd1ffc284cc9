//! Run configuration: a flat TOML table of `key = value` pairs.
//!
//! | key | type | default |
//! |---|---|---|
//! | `n` | integer, sites | required |
//! | `h0_j_z`, `h0_mu_x`, `h0_mu_z` | float | required |
//! | `h1_j_z`, `h1_mu_x`, `h1_mu_z` | float | required |
//! | `beta`, `delta_beta` | float | required |
//! | `n_initial`, `seed` | integer | required |
//! | `trotter_dt` | float | required |
//! | `t_max` | float | 3.0 |
//! | `grid_spacing` | float | `trotter_dt` |
//! | `mode` | `"exact"` or `"shots"` | `"exact"` |
//! | `shots` | integer | 1000 |
//! | `shot_seed`, `bootstrap_seed` | integer | `seed` |
//! | `resamples` | integer | 1000 |
//! | `noise_readout`, `noise_angle_bias`, `noise_angle_slope` | float | 0 |
//! | `population`, `results`, `reference` | path | `population.txt`, `results.csv`, `reference.csv` |
//! | `svg` | path | none |

use std::path::PathBuf;

use erhoq::backend::{AngleBias, ExecutionMode, NoiseModel};
use erhoq::dmqmc::DmqmcParams;
use erhoq::spin::{HamiltonianParams, Lattice, Schedule};
use toml::{Table, Value};

#[derive(Debug)]
pub enum ConfigError {
    Missing(&'static str),
    Invalid { key: String, message: String },
    Read(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Missing(k) => write!(f, "config is missing required key `{k}`"),
            Self::Invalid { key, message } => write!(f, "config key `{key}`: {message}"),
            Self::Read(m) => write!(f, "{m}"),
        }
    }
}

const KEYS: &[&str] = &[
    "n", "h0_j_z", "h0_mu_x", "h0_mu_z", "h1_j_z", "h1_mu_x", "h1_mu_z", "beta", "delta_beta", "n_initial", "seed",
    "trotter_dt", "t_max", "grid_spacing", "mode", "shots", "shot_seed", "bootstrap_seed", "resamples",
    "noise_readout", "noise_angle_bias", "noise_angle_slope", "population", "results", "reference", "svg",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lattice: Lattice,
    pub schedule: Schedule,
    pub dmqmc: DmqmcParams,
    pub trotter_dt: f64,
    pub t_max: f64,
    pub grid_spacing: f64,
    pub shots: Option<u64>,
    /// Unset means "follow `seed`".
    pub shot_seed: Option<u64>,
    pub bootstrap_seed: Option<u64>,
    pub resamples: usize,
    pub noise: NoiseModel,
    pub population: PathBuf,
    pub results: PathBuf,
    pub reference: PathBuf,
    pub svg: Option<PathBuf>,
}

struct Reader<'a>(&'a Table);

impl Reader<'_> {
    fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { key: key.to_string(), message: message.into() }
    }

    fn float(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Self::invalid(key, format!("expected a number, found {v}"))),
        }
    }

    fn uint(&self, key: &'static str) -> Result<Option<u64>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(Self::invalid(key, format!("expected a nonnegative integer, found {v}"))),
        }
    }

    fn string(&self, key: &'static str) -> Result<Option<String>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Self::invalid(key, format!("expected a string, found {v}"))),
        }
    }

    fn req_float(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.float(key)?.ok_or(ConfigError::Missing(key))
    }

    fn req_uint(&self, key: &'static str) -> Result<u64, ConfigError> {
        self.uint(key)?.ok_or(ConfigError::Missing(key))
    }

    fn hamiltonian(&self, prefix: &str) -> Result<HamiltonianParams, ConfigError> {
        let [j, x, z] = match prefix {
            "h0" => ["h0_j_z", "h0_mu_x", "h0_mu_z"],
            _ => ["h1_j_z", "h1_mu_x", "h1_mu_z"],
        };
        HamiltonianParams::new(self.req_float(j)?, self.req_float(x)?, self.req_float(z)?)
            .map_err(|e| Self::invalid(prefix, e.to_string()))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text.parse().map_err(|e| ConfigError::Read(format!("config is not valid TOML: {e}")))?;
        if let Some(k) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Reader::invalid(k, "unknown key"));
        }
        let r = Reader(&table);

        let n = r.req_uint("n")? as usize;
        let lattice = Lattice::periodic_chain(n).map_err(|e| Reader::invalid("n", e.to_string()))?;
        let schedule = Schedule::quench(r.hamiltonian("h0")?, r.hamiltonian("h1")?);
        let dmqmc = DmqmcParams {
            beta: r.req_float("beta")?,
            delta_beta: r.req_float("delta_beta")?,
            n_initial: r.req_uint("n_initial")?,
            seed: r.req_uint("seed")?,
        };
        let trotter_dt = r.req_float("trotter_dt")?;
        let shots = match r.string("mode")?.as_deref().unwrap_or("exact") {
            "exact" => None,
            "shots" => Some(r.uint("shots")?.unwrap_or(1000)),
            other => return Err(Reader::invalid("mode", format!("expected \"exact\" or \"shots\", found {other:?}"))),
        };
        let path = |key: &'static str, default: &str| -> Result<PathBuf, ConfigError> {
            Ok(PathBuf::from(r.string(key)?.unwrap_or_else(|| default.to_string())))
        };
        let cfg = Self {
            lattice,
            schedule,
            trotter_dt,
            t_max: r.float("t_max")?.unwrap_or(3.0),
            grid_spacing: r.float("grid_spacing")?.unwrap_or(trotter_dt),
            shots,
            shot_seed: r.uint("shot_seed")?,
            bootstrap_seed: r.uint("bootstrap_seed")?,
            resamples: r.uint("resamples")?.unwrap_or(1000) as usize,
            noise: NoiseModel {
                readout_flip: r.float("noise_readout")?.unwrap_or(0.0),
                angle_bias: AngleBias {
                    offset: r.float("noise_angle_bias")?.unwrap_or(0.0),
                    slope: r.float("noise_angle_slope")?.unwrap_or(0.0),
                },
            },
            population: path("population", "population.txt")?,
            results: path("results", "results.csv")?,
            reference: path("reference", "reference.csv")?,
            svg: r.string("svg")?.map(PathBuf::from),
            dmqmc,
        };
        Ok(cfg)
    }

    pub fn mode(&self) -> ExecutionMode {
        match self.shots {
            None => ExecutionMode::Exact,
            Some(shots) => ExecutionMode::Shots { shots, seed: self.shot_seed.unwrap_or(self.dmqmc.seed) },
        }
    }

    pub fn bootstrap_seed(&self) -> u64 {
        self.bootstrap_seed.unwrap_or(self.dmqmc.seed)
    }
}
