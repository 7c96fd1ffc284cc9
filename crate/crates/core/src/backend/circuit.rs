use std::fmt;
use std::str::FromStr;

use super::BackendError;

/// Gate set of the simulated backend. Rotations follow `R_P(θ) = exp(-iθP/2)`,
/// with `ZZ(θ) = exp(-iθ Z⊗Z/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    Z(usize),
    Rx(f64, usize),
    Rz(f64, usize),
    Zz(f64, usize, usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    fn check(&self, n: usize) -> Result<(), BackendError> {
        let bad = |m: String| Err(BackendError::InvalidGate(m));
        let in_range = |q: usize| q < n;
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::Z(q) | Gate::Rx(_, q) | Gate::Rz(_, q) if !in_range(q) => {
                bad(format!("{self} targets qubit {q} of {n}"))
            }
            Gate::Rx(a, _) | Gate::Rz(a, _) | Gate::Zz(a, _, _) if !a.is_finite() => {
                bad(format!("{self} has a non-finite angle"))
            }
            Gate::Zz(_, a, b) | Gate::Cnot { control: a, target: b } => {
                if !in_range(a) || !in_range(b) {
                    bad(format!("{self} targets a qubit outside 0..{n}"))
                } else if a == b {
                    bad(format!("{self} needs two distinct qubits"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Same gate with `f` applied to its angle, if it has one.
    pub fn map_angle(self, f: impl Fn(f64) -> f64) -> Self {
        match self {
            Gate::Rx(a, q) => Gate::Rx(f(a), q),
            Gate::Rz(a, q) => Gate::Rz(f(a), q),
            Gate::Zz(a, p, q) => Gate::Zz(f(a), p, q),
            g => g,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::X(q) => write!(f, "X {q}"),
            Gate::H(q) => write!(f, "H {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::Rx(a, q) => write!(f, "RX {a} {q}"),
            Gate::Rz(a, q) => write!(f, "RZ {a} {q}"),
            Gate::Zz(a, p, q) => write!(f, "ZZ {a} {p} {q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
        }
    }
}

impl FromStr for Gate {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BackendError::InvalidGate(format!("cannot parse gate {s:?}"));
        let parts: Vec<&str> = s.split_whitespace().collect();
        let q = |i: usize| parts.get(i).and_then(|p| p.parse::<usize>().ok()).ok_or_else(bad);
        let a = |i: usize| parts.get(i).and_then(|p| p.parse::<f64>().ok()).ok_or_else(bad);
        let (name, arity) = match parts.first() {
            Some(&name) => (name, parts.len() - 1),
            None => return Err(bad()),
        };
        let gate = match (name, arity) {
            ("X", 1) => Gate::X(q(1)?),
            ("H", 1) => Gate::H(q(1)?),
            ("Z", 1) => Gate::Z(q(1)?),
            ("RX", 2) => Gate::Rx(a(1)?, q(2)?),
            ("RZ", 2) => Gate::Rz(a(1)?, q(2)?),
            ("ZZ", 3) => Gate::Zz(a(1)?, q(2)?, q(3)?),
            ("CNOT", 2) => Gate::Cnot { control: q(1)?, target: q(2)? },
            _ => return Err(bad()),
        };
        Ok(gate)
    }
}

/// Ordered gate list on `n` qubits; every gate is checked on insertion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self, BackendError> {
        if n == 0 || n > crate::spin::MAX_SITES {
            return Err(BackendError::InvalidGate(format!("qubit count {n} out of range")));
        }
        Ok(Self { n, gates: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<&mut Self, BackendError> {
        g.check(self.n)?;
        self.gates.push(g);
        Ok(self)
    }

    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self, BackendError> {
        if other.n != self.n {
            return Err(BackendError::SiteMismatch { expected: self.n, found: other.n });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }

    /// One gate per line, e.g. `RX 0.2 1` or `CNOT 0 3`.
    pub fn dump(&self) -> String {
        self.gates.iter().map(|g| format!("{g}\n")).collect()
    }

    pub fn parse_dump(n: usize, text: &str) -> Result<Self, BackendError> {
        let mut c = Self::new(n)?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            c.push(line.parse()?)?;
        }
        Ok(c)
    }
}
