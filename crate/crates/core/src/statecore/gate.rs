use std::fmt;

use serde::{Deserialize, Serialize};

use super::StateError;

/// The gate alphabet shared by the quantum and classical backends.
///
/// `Mcx` is a NOT controlled on every target but the last; it generalises
/// `Toffoli` and is what the function compiler uses for monomials of degree
/// three and higher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Z,
    H,
    Cnot,
    Cz,
    Toffoli,
    Mcx,
    Phase(f64),
}

impl GateKind {
    /// Required number of targets, or `None` for variable arity (`Mcx`).
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::X | GateKind::Z | GateKind::H | GateKind::Phase(_) => Some(1),
            GateKind::Cnot | GateKind::Cz => Some(2),
            GateKind::Toffoli => Some(3),
            GateKind::Mcx => None,
        }
    }

    /// Gates that permute computational basis states without phases. These
    /// are the only gates the classical backend accepts.
    pub fn is_permutation(&self) -> bool {
        matches!(
            self,
            GateKind::X | GateKind::Cnot | GateKind::Toffoli | GateKind::Mcx
        )
    }

    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::Phase(theta) => GateKind::Phase(-theta),
            other => other,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Mcx => "MCX",
            GateKind::Phase(_) => "PHASE",
        }
    }

    /// Parses a gate name; `theta` is only consulted for `PHASE`.
    pub fn from_name(name: &str, theta: Option<f64>) -> Option<GateKind> {
        Some(match name {
            "X" => GateKind::X,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "TOFFOLI" => GateKind::Toffoli,
            "MCX" => GateKind::Mcx,
            "PHASE" => GateKind::Phase(theta?),
            _ => return None,
        })
    }

    pub fn check_arity(&self, got: usize) -> Result<(), StateError> {
        match self.arity() {
            Some(expected) if expected != got => Err(StateError::Arity {
                gate: self.name(),
                expected,
                got,
            }),
            None if got == 0 => Err(StateError::Arity {
                gate: self.name(),
                expected: 1,
                got,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Phase(theta) => write!(f, "PHASE({theta})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A gate bound to global qubit indices (0 = first declared qubit).
///
/// For controlled gates the controls come first and the target last.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self, StateError> {
        kind.check_arity(targets.len())?;
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(StateError::DuplicateTarget(*t));
            }
        }
        Ok(Gate { kind, targets })
    }

    pub fn x(q: usize) -> Self {
        Gate { kind: GateKind::X, targets: vec![q] }
    }

    pub fn z(q: usize) -> Self {
        Gate { kind: GateKind::Z, targets: vec![q] }
    }

    pub fn h(q: usize) -> Self {
        Gate { kind: GateKind::H, targets: vec![q] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, targets: vec![control, target] }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Cz, targets: vec![a, b] }
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Gate { kind: GateKind::Toffoli, targets: vec![c1, c2, target] }
    }

    pub fn phase(theta: f64, q: usize) -> Self {
        Gate { kind: GateKind::Phase(theta), targets: vec![q] }
    }

    pub fn inverse(&self) -> Gate {
        Gate { kind: self.kind.inverse(), targets: self.targets.clone() }
    }

    /// Applies a permutation gate to a classical bit assignment.
    ///
    /// Returns an error for gates that are not basis permutations.
    pub fn apply_bits(&self, bits: &mut [bool]) -> Result<(), StateError> {
        if !self.kind.is_permutation() {
            return Err(StateError::NotClassical(self.kind.name()));
        }
        if let Some(&q) = self.targets.iter().find(|&&q| q >= bits.len()) {
            return Err(StateError::OutOfRange { qubit: q, width: bits.len() });
        }
        let (target, controls) = self.targets.split_last().expect("arity checked");
        if controls.iter().all(|&c| bits[c]) {
            bits[*target] = !bits[*target];
        }
        Ok(())
    }
}
