use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::statecore::QubitLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    #[serde(rename = "A")]
    Alice,
    #[serde(rename = "B")]
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Party::Alice => "A",
            Party::Bob => "B",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegKind {
    #[serde(rename = "qubit")]
    Qubit,
    #[serde(rename = "bit")]
    Bit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub width: usize,
    pub kind: RegKind,
    pub owner: Party,
}

impl Register {
    pub fn new(name: &str, width: usize, kind: RegKind, owner: Party) -> Self {
        Register { name: name.to_string(), width, kind, owner }
    }
}

/// Name of the register that carries the answer bit.
pub const ANSWER_REGISTER: &str = "ans";
/// Alice's input register.
pub const ALICE_INPUT: &str = "A";
/// Bob's input register.
pub const BOB_INPUT: &str = "B";

/// A single bit of a register, written `REG.i` with `i` 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub reg: String,
    pub bit: usize,
}

impl Coord {
    pub fn new(reg: &str, bit: usize) -> Self {
        Coord { reg: reg.to_string(), bit }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.reg, self.bit)
    }
}

impl FromStr for Coord {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (reg, bit) = s.rsplit_once('.').ok_or_else(|| EngineError::BadCoordinate(s.to_string()))?;
        let bit: usize = bit.parse().map_err(|_| EngineError::BadCoordinate(s.to_string()))?;
        if reg.is_empty() || bit == 0 {
            return Err(EngineError::BadCoordinate(s.to_string()));
        }
        Ok(Coord { reg: reg.to_string(), bit })
    }
}

/// What a `Send` step moves: a whole register or one of its bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Carrier {
    Register(String),
    Bit(Coord),
}

impl Carrier {
    pub fn register(name: &str) -> Self {
        Carrier::Register(name.to_string())
    }

    pub fn bit(reg: &str, bit: usize) -> Self {
        Carrier::Bit(Coord::new(reg, bit))
    }

    pub fn register_name(&self) -> &str {
        match self {
            Carrier::Register(name) => name,
            Carrier::Bit(c) => &c.reg,
        }
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Register(name) => f.write_str(name),
            Carrier::Bit(c) => c.fmt(f),
        }
    }
}

impl FromStr for Carrier {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains('.') {
            Ok(Carrier::Bit(s.parse()?))
        } else if s.is_empty() {
            Err(EngineError::BadCoordinate(s.to_string()))
        } else {
            Ok(Carrier::Register(s.to_string()))
        }
    }
}

/// Registers in declaration order together with their initial owners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new(registers: Vec<Register>) -> Result<Self, EngineError> {
        if registers.is_empty() {
            return Err(EngineError::Layout("layout has no registers".into()));
        }
        for (i, reg) in registers.iter().enumerate() {
            if reg.width == 0 {
                return Err(EngineError::Layout(format!("register `{}` has zero width", reg.name)));
            }
            if reg.name.is_empty() || reg.name.contains('.') {
                return Err(EngineError::Layout(format!("invalid register name `{}`", reg.name)));
            }
            if registers[..i].iter().any(|r| r.name == reg.name) {
                return Err(EngineError::Layout(format!("duplicate register `{}`", reg.name)));
            }
            if reg.name == ANSWER_REGISTER && (reg.width != 1 || reg.owner != Party::Bob) {
                return Err(EngineError::Layout(
                    "the answer register must have width 1 and start with Bob".into(),
                ));
            }
        }
        Ok(RegisterLayout { registers })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn get(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn total_width(&self) -> usize {
        self.registers.iter().map(|r| r.width).sum()
    }

    pub fn offset(&self, name: &str) -> Result<usize, EngineError> {
        let mut offset = 0;
        for reg in &self.registers {
            if reg.name == name {
                return Ok(offset);
            }
            offset += reg.width;
        }
        Err(EngineError::UnknownRegister(name.to_string()))
    }

    /// Global index of a coordinate.
    pub fn index_of(&self, coord: &Coord) -> Result<usize, EngineError> {
        let reg = self.get(&coord.reg).ok_or_else(|| EngineError::UnknownRegister(coord.reg.clone()))?;
        if coord.bit == 0 || coord.bit > reg.width {
            return Err(EngineError::BadCoordinate(coord.to_string()));
        }
        Ok(self.offset(&coord.reg)? + coord.bit - 1)
    }

    pub fn indices_of(&self, carrier: &Carrier) -> Result<Vec<usize>, EngineError> {
        match carrier {
            Carrier::Register(name) => {
                let reg = self.get(name).ok_or_else(|| EngineError::UnknownRegister(name.clone()))?;
                let start = self.offset(name)?;
                Ok((start..start + reg.width).collect())
            }
            Carrier::Bit(coord) => Ok(vec![self.index_of(coord)?]),
        }
    }

    pub fn register_indices(&self, name: &str) -> Result<std::ops::Range<usize>, EngineError> {
        let reg = self.get(name).ok_or_else(|| EngineError::UnknownRegister(name.to_string()))?;
        let start = self.offset(name)?;
        Ok(start..start + reg.width)
    }

    /// Coordinate of a global index.
    pub fn coord_of(&self, mut index: usize) -> Coord {
        for reg in &self.registers {
            if index < reg.width {
                return Coord::new(&reg.name, index + 1);
            }
            index -= reg.width;
        }
        panic!("index out of range for layout")
    }

    pub fn initial_owners(&self) -> Vec<Party> {
        self.registers.iter().flat_map(|r| std::iter::repeat_n(r.owner, r.width)).collect()
    }

    pub fn kinds(&self) -> Vec<RegKind> {
        self.registers.iter().flat_map(|r| std::iter::repeat_n(r.kind, r.width)).collect()
    }

    /// True when every register is classical.
    pub fn is_classical(&self) -> bool {
        self.registers.iter().all(|r| r.kind == RegKind::Bit)
    }

    pub fn qubit_layout(&self) -> QubitLayout {
        QubitLayout::new(self.registers.iter().map(|r| (r.name.clone(), r.width)))
            .expect("register layout invariants imply a valid qubit layout")
    }

    /// Packs per-register integer values (big-endian within each register)
    /// into a basis index. Registers not mentioned are zero.
    pub fn basis_index(&self, values: &[(&str, u64)]) -> Result<usize, EngineError> {
        let m = self.total_width();
        let mut idx = 0usize;
        for &(name, value) in values {
            let reg = self.get(name).ok_or_else(|| EngineError::UnknownRegister(name.to_string()))?;
            if reg.width < 64 && value >> reg.width != 0 {
                return Err(EngineError::WidthMismatch { register: name.to_string(), width: reg.width });
            }
            let offset = self.offset(name)?;
            let shift = m - offset - reg.width;
            idx |= (value as usize) << shift;
        }
        Ok(idx)
    }

    /// Reads register `name` out of a basis index.
    pub fn register_value(&self, index: usize, name: &str) -> Result<u64, EngineError> {
        let reg = self.get(name).ok_or_else(|| EngineError::UnknownRegister(name.to_string()))?;
        let shift = self.total_width() - self.offset(name)? - reg.width;
        Ok(((index >> shift) & ((1usize << reg.width) - 1)) as u64)
    }

    /// Bit assignment (one `bool` per global position) for the given values.
    pub fn bit_assignment(&self, values: &[(&str, u64)]) -> Result<Vec<bool>, EngineError> {
        let idx = self.basis_index(values)?;
        let m = self.total_width();
        Ok((0..m).map(|q| (idx >> (m - 1 - q)) & 1 == 1).collect())
    }

    pub fn bits_value(&self, bits: &[bool], name: &str) -> Result<u64, EngineError> {
        let range = self.register_indices(name)?;
        Ok(range.fold(0u64, |acc, q| (acc << 1) | bits[q] as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> RegisterLayout {
        RegisterLayout::new(vec![
            Register::new("A", 2, RegKind::Qubit, Party::Alice),
            Register::new("B", 2, RegKind::Qubit, Party::Bob),
            Register::new("ans", 1, RegKind::Qubit, Party::Bob),
        ])
        .unwrap()
    }

    #[test]
    fn coordinates_parse_and_resolve() {
        let c: Coord = "A.2".parse().unwrap();
        assert_eq!(c, Coord::new("A", 2));
        assert!("A.0".parse::<Coord>().is_err());
        assert!("A".parse::<Coord>().is_err());
        let l = layout();
        assert_eq!(l.index_of(&"B.1".parse().unwrap()).unwrap(), 2);
        assert!(matches!(l.index_of(&Coord::new("B", 3)), Err(EngineError::BadCoordinate(_))));
        assert!(matches!(l.index_of(&Coord::new("Q", 1)), Err(EngineError::UnknownRegister(_))));
        assert_eq!(l.coord_of(4), Coord::new("ans", 1));
    }

    #[test]
    fn basis_packing_is_big_endian() {
        let l = layout();
        let idx = l.basis_index(&[("A", 0b10), ("B", 0b01), ("ans", 1)]).unwrap();
        assert_eq!(idx, 0b10_01_1);
        assert_eq!(l.register_value(idx, "B").unwrap(), 0b01);
        assert!(matches!(
            l.basis_index(&[("A", 4)]),
            Err(EngineError::WidthMismatch { .. })
        ));
        let bits = l.bit_assignment(&[("A", 0b10)]).unwrap();
        assert_eq!(bits, vec![true, false, false, false, false]);
    }

    #[test]
    fn layout_invariants() {
        assert!(RegisterLayout::new(vec![]).is_err());
        assert!(RegisterLayout::new(vec![Register::new("ans", 2, RegKind::Bit, Party::Bob)]).is_err());
        assert!(RegisterLayout::new(vec![Register::new("ans", 1, RegKind::Bit, Party::Alice)]).is_err());
        assert!(RegisterLayout::new(vec![
            Register::new("A", 1, RegKind::Bit, Party::Alice),
            Register::new("A", 1, RegKind::Bit, Party::Bob),
        ])
        .is_err());
    }
}
