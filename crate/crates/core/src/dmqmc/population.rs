use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::spin::SpinBasisState;

use super::DmqmcError;

/// `(row bits, column bits)` of a basis operator `|row><col|`.
pub type Key = (u32, u32);

/// One signed walker on `|row><col|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Psip {
    pub row: SpinBasisState,
    pub col: SpinBasisState,
    pub sign: i8,
}

/// Psip counts of each sign on one site. Equal only while annihilation is off.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Occupancy {
    pub pos: u64,
    pub neg: u64,
}

impl Occupancy {
    pub fn net(self) -> i64 {
        self.pos as i64 - self.neg as i64
    }

    pub fn is_empty(self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    fn from_net(w: i64) -> Self {
        if w >= 0 {
            Self { pos: w as u64, neg: 0 }
        } else {
            Self { pos: 0, neg: w.unsigned_abs() }
        }
    }
}

/// Sparse signed approximation to `exp(-βH)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsipPopulation {
    pub(crate) n: usize,
    pub(crate) beta: f64,
    pub(crate) seed: u64,
    pub(crate) n_initial: u64,
    pub(crate) steps: u64,
    pub(crate) entries: BTreeMap<Key, Occupancy>,
}

impl PsipPopulation {
    /// Builds a population from net weights. Zero weights are dropped.
    pub fn from_weights(
        n: usize,
        beta: f64,
        seed: u64,
        n_initial: u64,
        weights: impl IntoIterator<Item = (SpinBasisState, SpinBasisState, i64)>,
    ) -> Result<Self, DmqmcError> {
        if n == 0 || n > crate::spin::MAX_SITES {
            return Err(DmqmcError::InvalidParams(format!("site count {n}")));
        }
        let mut entries = BTreeMap::new();
        for (row, col, w) in weights {
            if row.n() != n || col.n() != n {
                return Err(DmqmcError::SiteMismatch {
                    expected: n,
                    found: row.n().max(col.n()),
                });
            }
            let e: &mut i64 = entries.entry((row.bits(), col.bits())).or_default();
            *e += w;
        }
        let entries = entries
            .into_iter()
            .filter(|&(_, w)| w != 0)
            .map(|(k, w)| (k, Occupancy::from_net(w)))
            .collect();
        Ok(Self {
            n,
            beta,
            seed,
            n_initial,
            steps: 0,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_initial(&self) -> u64 {
        self.n_initial
    }

    /// Number of occupied sites.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn state(&self, bits: u32) -> SpinBasisState {
        SpinBasisState::new(bits, self.n).expect("stored states fit the site count")
    }

    /// `(row, col, net weight)` for every site with nonzero net weight, in
    /// key order.
    pub fn weights(&self) -> impl Iterator<Item = (SpinBasisState, SpinBasisState, i64)> + '_ {
        self.entries
            .iter()
            .filter(|(_, o)| o.net() != 0)
            .map(|(&(r, c), o)| (self.state(r), self.state(c), o.net()))
    }

    pub fn weight(&self, row: SpinBasisState, col: SpinBasisState) -> i64 {
        self.entries
            .get(&(row.bits(), col.bits()))
            .map_or(0, |o| o.net())
    }

    /// Expands the population into individual psips.
    pub fn psips(&self) -> impl Iterator<Item = Psip> + '_ {
        self.entries.iter().flat_map(move |(&(r, c), o)| {
            let (row, col) = (self.state(r), self.state(c));
            let pos = (0..o.pos).map(move |_| Psip { row, col, sign: 1 });
            let neg = (0..o.neg).map(move |_| Psip { row, col, sign: -1 });
            pos.chain(neg)
        })
    }

    /// Number of psips of either sign.
    pub fn total_psips(&self) -> u64 {
        self.entries.values().map(|o| o.pos + o.neg).sum()
    }

    /// Signed sum over all psips.
    pub fn total_weight(&self) -> i64 {
        self.entries.values().map(|o| o.net()).sum()
    }

    /// Sum of net weights on the diagonal; off-diagonal psips carry no trace.
    pub fn trace_estimate(&self) -> Result<f64, DmqmcError> {
        let tr: i64 = self
            .entries
            .iter()
            .filter(|((r, c), _)| r == c)
            .map(|(_, o)| o.net())
            .sum();
        if tr == 0 {
            Err(DmqmcError::ZeroTrace)
        } else {
            Ok(tr as f64)
        }
    }

    /// Text form: `N=`, `beta=`, `seed=`, `n_initial=` headers, then
    /// `<row> <col> <net weight>` per nonzero site, bits site 0 first.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        writeln!(s, "N={}", self.n).unwrap();
        writeln!(s, "beta={}", self.beta).unwrap();
        writeln!(s, "seed={}", self.seed).unwrap();
        writeln!(s, "n_initial={}", self.n_initial).unwrap();
        for (row, col, w) in self.weights() {
            writeln!(s, "{row} {col} {w}").unwrap();
        }
        s
    }

    pub fn parse_file(text: &str) -> Result<Self, PopulationFileError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |key: &str| -> Result<(usize, String), PopulationFileError> {
            let (no, line) = lines.next().ok_or(PopulationFileError {
                line: 0,
                message: format!("missing header `{key}=`"),
            })?;
            match line.split_once('=') {
                Some((k, v)) if k.trim() == key => Ok((no, v.trim().to_string())),
                _ => Err(PopulationFileError {
                    line: no,
                    message: format!("expected header `{key}=<value>`, found {line:?}"),
                }),
            }
        };
        fn num<T: std::str::FromStr>(
            (no, v): (usize, String),
            what: &str,
        ) -> Result<T, PopulationFileError> {
            v.parse().map_err(|_| PopulationFileError {
                line: no,
                message: format!("invalid {what} {v:?}"),
            })
        }
        let n: usize = num(header("N")?, "site count")?;
        let beta: f64 = num(header("beta")?, "beta")?;
        let seed: u64 = num(header("seed")?, "seed")?;
        let n_initial: u64 = num(header("n_initial")?, "n_initial")?;
        if n == 0 || n > crate::spin::MAX_SITES {
            return Err(PopulationFileError {
                line: 1,
                message: format!("site count {n} out of range"),
            });
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(PopulationFileError {
                line: 2,
                message: format!("beta {beta} must be finite and nonnegative"),
            });
        }

        let mut entries = BTreeMap::new();
        for (no, line) in lines {
            let bad = |message: String| PopulationFileError { line: no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [row, col, w] = fields[..] else {
                return Err(bad(format!("expected `<row> <col> <weight>`, found {line:?}")));
            };
            let parse_state = |s: &str| -> Result<SpinBasisState, PopulationFileError> {
                let st: SpinBasisState = s.parse().map_err(|e| bad(format!("{e}")))?;
                if st.n() != n {
                    return Err(bad(format!("state {s:?} has {} sites, expected {n}", st.n())));
                }
                Ok(st)
            };
            let (row, col) = (parse_state(row)?, parse_state(col)?);
            let w: i64 = w.parse().map_err(|_| bad(format!("invalid weight {w:?}")))?;
            if w == 0 {
                return Err(bad("zero net weight".to_string()));
            }
            if entries
                .insert((row.bits(), col.bits()), Occupancy::from_net(w))
                .is_some()
            {
                return Err(bad(format!("duplicate site {row} {col}")));
            }
        }
        Ok(Self {
            n,
            beta,
            seed,
            n_initial,
            steps: 0,
            entries,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("population file line {line}: {message}")]
pub struct PopulationFileError {
    pub line: usize,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(s: &str) -> SpinBasisState {
        s.parse().unwrap()
    }

    #[test]
    fn trace_counts_diagonal_only() {
        let pop = PsipPopulation::from_weights(
            2,
            1.0,
            0,
            4,
            [(st("00"), st("00"), 3), (st("00"), st("01"), -2), (st("11"), st("11"), 1)],
        )
        .unwrap();
        assert_eq!(pop.trace_estimate().unwrap(), 4.0);
        assert_eq!(pop.total_weight(), 2);
        assert_eq!(pop.total_psips(), 6);
        assert_eq!(pop.psips().filter(|p| p.sign < 0).count(), 2);

        let off = PsipPopulation::from_weights(2, 1.0, 0, 1, [(st("00"), st("01"), 5)]).unwrap();
        assert!(matches!(off.trace_estimate(), Err(DmqmcError::ZeroTrace)));
    }

    #[test]
    fn file_layout() {
        let pop = PsipPopulation::from_weights(
            2,
            1.0,
            7,
            3,
            [(st("10"), st("00"), -1), (st("00"), st("00"), 3), (st("01"), st("01"), 0)],
        )
        .unwrap();
        assert_eq!(
            pop.to_file_string(),
            "N=2\nbeta=1\nseed=7\nn_initial=3\n00 00 3\n10 00 -1\n"
        );
    }

    #[test]
    fn malformed_files_name_the_line() {
        let cases = [
            ("N=2\nbeta=1\nseed=7\n", 0),
            ("N=2\nbeta=x\nseed=7\nn_initial=1\n", 2),
            ("N=2\nbeta=1\nseed=7\nn_initial=1\n00 00 1\n00 0 1\n", 6),
            ("N=2\nbeta=1\nseed=7\nn_initial=1\n00 00 1\n00 00 2\n", 6),
            ("N=2\nbeta=1\nseed=7\nn_initial=1\n00 00 0\n", 5),
            ("N=2\nbeta=1\nseed=7\nn_initial=1\n00 00\n", 5),
            ("N=2\nseed=7\nbeta=1\nn_initial=1\n", 2),
        ];
        for (text, line) in cases {
            let err = PsipPopulation::parse_file(text).unwrap_err();
            assert_eq!(err.line, line, "{text:?}: {err}");
        }
    }

    proptest! {
        #[test]
        fn file_roundtrip_is_byte_identical(
            n in 1usize..6,
            beta in 0.0f64..4.0,
            seed in any::<u64>(),
            raw in proptest::collection::vec((any::<u32>(), any::<u32>(), -50i64..50), 0..40),
        ) {
            let mask = (1u32 << n) - 1;
            let w = raw.into_iter().map(|(r, c, w)| {
                (SpinBasisState::new(r & mask, n).unwrap(), SpinBasisState::new(c & mask, n).unwrap(), w)
            });
            let pop = PsipPopulation::from_weights(n, beta, seed, 10, w).unwrap();
            let text = pop.to_file_string();
            let back = PsipPopulation::parse_file(&text).unwrap();
            prop_assert_eq!(back.to_file_string(), text);
            prop_assert_eq!(back.entries, pop.entries);
        }
    }
}
