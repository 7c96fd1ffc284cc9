//! Periodic 1D Heisenberg-type chain
//!
//! ```text
//! H = -J_z Σ_<ij> σz_i σz_j - μ_x Σ_i σx_i - μ_z Σ_i σz_i
//! ```
//!
//! Basis states are bit patterns: site `i` is bit `i`, and a clear bit is
//! spin up (`s = +1`), a set bit is spin down (`s = -1`). Every module in the
//! crate uses this encoding.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest chain handled anywhere in the crate.
pub const MAX_SITES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("site count {0} outside 1..={MAX_SITES}")]
    SiteCount(usize),
    #[error("bit pattern {bits:#b} does not fit in {n} sites")]
    BitsOutOfRange { bits: u32, n: usize },
    #[error("invalid basis string {0:?}: expected only '0' and '1'")]
    Parse(String),
    #[error("non-finite Hamiltonian parameter")]
    NonFinite,
    #[error("schedule switch times must start at 0 and strictly increase")]
    SwitchTimes,
}

/// Computational basis state of `n` spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinBasisState {
    bits: u32,
    n: u8,
}

impl SpinBasisState {
    pub fn new(bits: u32, n: usize) -> Result<Self, SpinError> {
        if n == 0 || n > MAX_SITES {
            return Err(SpinError::SiteCount(n));
        }
        if bits >> n != 0 {
            return Err(SpinError::BitsOutOfRange { bits, n });
        }
        Ok(Self { bits, n: n as u8 })
    }

    /// All spins up.
    pub fn all_up(n: usize) -> Result<Self, SpinError> {
        Self::new(0, n)
    }

    /// Builds a state from per-site spins, `true` meaning up.
    pub fn from_spins(up: &[bool]) -> Result<Self, SpinError> {
        let bits = up
            .iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .fold(0u32, |acc, (i, _)| acc | (1 << i));
        Self::new(bits, up.len())
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn n(self) -> usize {
        self.n as usize
    }

    /// `+1` for spin up, `-1` for spin down.
    #[inline]
    pub fn spin(self, site: usize) -> i32 {
        1 - 2 * ((self.bits >> site) & 1) as i32
    }

    #[inline]
    pub fn flipped(self, site: usize) -> Self {
        Self {
            bits: self.bits ^ (1 << site),
            n: self.n,
        }
    }

    /// Number of basis states for this site count.
    pub fn dimension(n: usize) -> usize {
        1usize << n
    }
}

/// Site 0 first, `0` for up and `1` for down.
impl fmt::Display for SpinBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            f.write_str(if (self.bits >> i) & 1 == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for SpinBasisState {
    type Err = SpinError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = 0u32;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' if i < 32 => bits |= 1 << i,
                _ => return Err(SpinError::Parse(s.to_string())),
            }
        }
        Self::new(bits, s.chars().count())
    }
}

/// Couplings of one Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    pub j_z: f64,
    pub mu_x: f64,
    pub mu_z: f64,
}

impl HamiltonianParams {
    pub fn new(j_z: f64, mu_x: f64, mu_z: f64) -> Result<Self, SpinError> {
        let p = Self { j_z, mu_x, mu_z };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpinError> {
        if self.j_z.is_finite() && self.mu_x.is_finite() && self.mu_z.is_finite() {
            Ok(())
        } else {
            Err(SpinError::NonFinite)
        }
    }
}

/// Nearest-neighbour bonds of a periodic chain.
///
/// `N = 1` has no bonds and `N = 2` a single bond, so no pair is counted
/// twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    n: usize,
    bonds: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn periodic_chain(n: usize) -> Result<Self, SpinError> {
        if n == 0 || n > MAX_SITES {
            return Err(SpinError::SiteCount(n));
        }
        let bonds = match n {
            1 => Vec::new(),
            2 => vec![(0, 1)],
            _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        };
        Ok(Self { n, bonds })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }
}

/// Piecewise-constant time dependence of the evolution Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Defines the thermal state.
    pub initial: HamiltonianParams,
    segments: Vec<(f64, HamiltonianParams)>,
}

impl Schedule {
    /// One evolution Hamiltonian for all `t > 0`.
    pub fn quench(initial: HamiltonianParams, evolved: HamiltonianParams) -> Self {
        Self {
            initial,
            segments: vec![(0.0, evolved)],
        }
    }

    /// `segments` are `(switch time, params)`; the first must start at 0.
    pub fn piecewise(
        initial: HamiltonianParams,
        segments: Vec<(f64, HamiltonianParams)>,
    ) -> Result<Self, SpinError> {
        match segments.first() {
            Some((t0, _)) if *t0 == 0.0 => {}
            _ => return Err(SpinError::SwitchTimes),
        }
        if segments.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(SpinError::SwitchTimes);
        }
        for (t, p) in &segments {
            if !t.is_finite() {
                return Err(SpinError::SwitchTimes);
            }
            p.validate()?;
        }
        initial.validate()?;
        Ok(Self { initial, segments })
    }

    pub fn segments(&self) -> &[(f64, HamiltonianParams)] {
        &self.segments
    }

    /// Parameters of the first evolution segment.
    pub fn evolved(&self) -> HamiltonianParams {
        self.segments[0].1
    }

    /// Splits `[0, t]` into `(duration, params)` pieces, in time order.
    pub fn pieces(&self, t: f64) -> Vec<(f64, HamiltonianParams)> {
        let mut out = Vec::new();
        for (i, &(start, p)) in self.segments.iter().enumerate() {
            if start >= t {
                break;
            }
            let end = self.segments.get(i + 1).map_or(t, |s| s.0.min(t));
            out.push((end - start, p));
        }
        out
    }
}

/// `<a|H|a>`.
pub fn diagonal_element(a: SpinBasisState, p: &HamiltonianParams, lat: &Lattice) -> f64 {
    debug_assert_eq!(a.n(), lat.n());
    let bond_sum: i32 = lat.bonds().iter().map(|&(i, j)| a.spin(i) * a.spin(j)).sum();
    let field_sum: i32 = (0..a.n()).map(|i| a.spin(i)).sum();
    -p.j_z * bond_sum as f64 - p.mu_z * field_sum as f64
}

/// Every `c != b` with `<c|H|b> != 0`, paired with that element.
///
/// Only the transverse field is off-diagonal, so these are the single spin
/// flips of `b`, each with element `-μ_x`.
pub fn column_connections(
    b: SpinBasisState,
    p: &HamiltonianParams,
    lat: &Lattice,
) -> Vec<(SpinBasisState, f64)> {
    debug_assert_eq!(b.n(), lat.n());
    if p.mu_x == 0.0 {
        return Vec::new();
    }
    (0..b.n()).map(|i| (b.flipped(i), -p.mu_x)).collect()
}

/// `H_x = -μ_x Σ σx_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseTerm {
    pub mu_x: f64,
}

impl TransverseTerm {
    pub fn is_zero(&self) -> bool {
        self.mu_x == 0.0
    }
}

/// `H_z = -J_z Σ σz_i σz_j - μ_z Σ σz_i`, diagonal in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalTerms {
    pub j_z: f64,
    pub mu_z: f64,
}

impl DiagonalTerms {
    pub fn is_zero(&self) -> bool {
        self.j_z == 0.0 && self.mu_z == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterSplit {
    pub x: TransverseTerm,
    pub z: DiagonalTerms,
}

pub fn trotter_split(p: &HamiltonianParams) -> TrotterSplit {
    TrotterSplit {
        x: TransverseTerm { mu_x: p.mu_x },
        z: DiagonalTerms {
            j_z: p.j_z,
            mu_z: p.mu_z,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(j_z: f64, mu_x: f64, mu_z: f64) -> HamiltonianParams {
        HamiltonianParams::new(j_z, mu_x, mu_z).unwrap()
    }

    fn state(s: &str) -> SpinBasisState {
        s.parse().unwrap()
    }

    #[test]
    fn bond_counts() {
        assert!(Lattice::periodic_chain(1).unwrap().bonds().is_empty());
        assert_eq!(Lattice::periodic_chain(2).unwrap().bonds(), &[(0, 1)]);
        assert_eq!(
            Lattice::periodic_chain(3).unwrap().bonds(),
            &[(0, 1), (1, 2), (2, 0)]
        );
        assert_eq!(Lattice::periodic_chain(5).unwrap().bonds().len(), 5);
        assert!(Lattice::periodic_chain(0).is_err());
        assert!(Lattice::periodic_chain(25).is_err());
    }

    #[test]
    fn encoding() {
        let s = state("01");
        assert_eq!(s.bits(), 0b10);
        assert_eq!(s.spin(0), 1);
        assert_eq!(s.spin(1), -1);
        assert_eq!(s.to_string(), "01");
        assert_eq!(SpinBasisState::from_spins(&[true, false]).unwrap(), s);
        assert!("012".parse::<SpinBasisState>().is_err());
        assert!(SpinBasisState::new(4, 2).is_err());
    }

    #[test]
    fn diagonal_single_spin_has_no_bonds() {
        let lat = Lattice::periodic_chain(1).unwrap();
        assert_eq!(diagonal_element(state("0"), &params(7.5, 0.0, 1.0), &lat), -1.0);
    }

    #[test]
    fn diagonal_three_site_ring() {
        let lat = Lattice::periodic_chain(3).unwrap();
        assert_eq!(diagonal_element(state("000"), &params(1.0, 0.0, 0.0), &lat), -3.0);
    }

    #[test]
    fn diagonal_two_site_antialigned() {
        let lat = Lattice::periodic_chain(2).unwrap();
        assert_eq!(diagonal_element(state("01"), &params(1.0, 0.0, 1.0), &lat), 1.0);
    }

    #[test]
    fn connections_flip_one_spin() {
        let lat = Lattice::periodic_chain(2).unwrap();
        let c = column_connections(state("00"), &params(0.0, 1.0, 0.0), &lat);
        assert_eq!(c, vec![(state("10"), -1.0), (state("01"), -1.0)]);

        let lat1 = Lattice::periodic_chain(1).unwrap();
        let c = column_connections(state("1"), &params(0.0, -1.0, 0.0), &lat1);
        assert_eq!(c, vec![(state("0"), 1.0)]);

        assert!(column_connections(state("01"), &params(1.0, 0.0, 1.0), &lat).is_empty());
    }

    #[test]
    fn split_terms() {
        let s = trotter_split(&params(1.0, -1.0, 0.0));
        assert_eq!(s.x.mu_x, -1.0);
        assert_eq!(s.z, DiagonalTerms { j_z: 1.0, mu_z: 0.0 });
        let s = trotter_split(&params(0.0, 0.0, 1.0));
        assert!(s.x.is_zero());
        assert!(!s.z.is_zero());
    }

    #[test]
    fn schedule_pieces() {
        let h0 = params(1.0, 1.0, 0.0);
        let a = params(1.0, -1.0, 0.0);
        let b = params(0.5, 2.0, 0.0);
        let s = Schedule::piecewise(h0, vec![(0.0, a), (1.0, b)]).unwrap();
        assert_eq!(s.pieces(0.5), vec![(0.5, a)]);
        assert_eq!(s.pieces(1.5), vec![(1.0, a), (0.5, b)]);
        assert!(s.pieces(0.0).is_empty());
        assert!(Schedule::piecewise(h0, vec![(0.1, a)]).is_err());
        assert!(Schedule::piecewise(h0, vec![(0.0, a), (0.0, b)]).is_err());
        assert!(HamiltonianParams::new(f64::NAN, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn connections_are_symmetric(n in 1usize..8, bits in any::<u32>(), mu_x in -3.0f64..3.0) {
            let lat = Lattice::periodic_chain(n).unwrap();
            let p = params(1.0, mu_x, 0.3);
            let b = SpinBasisState::new(bits & ((1 << n) - 1), n).unwrap();
            let conns = column_connections(b, &p, &lat);
            let mut seen = std::collections::HashSet::new();
            for (c, h) in conns {
                prop_assert!(c != b);
                prop_assert!(seen.insert(c));
                let back = column_connections(c, &p, &lat);
                prop_assert!(back.iter().any(|&(d, g)| d == b && g == h));
            }
        }

        #[test]
        fn display_parse_roundtrip(n in 1usize..=24, bits in any::<u32>()) {
            let s = SpinBasisState::new(bits & ((1u32 << n) - 1), n).unwrap();
            prop_assert_eq!(s.to_string().parse::<SpinBasisState>().unwrap(), s);
        }
    }
}
