//! Two-party Boolean functions `f: {0,1}^n × {0,1}^n → {0,1}` as truth tables.
//!
//! Inputs are big-endian: `x_1` is the most significant bit of the integer
//! index `x`. The table is stored row-major by `x`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("table length {0} is not a power of 4")]
    NotPowerOfFour(usize),
    #[error("expected {expected} rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("row {row} has length {got}, expected {expected}")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error("row {0} contains a character other than 0 or 1")]
    BadDigit(usize),
    #[error("input length n = {0} is too large")]
    TooLarge(usize),
    #[error("malformed truth-table document: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n: usize,
    bits: Vec<bool>,
}

/// JSON form: `{"n": 2, "rows": ["0000", "0101", ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TruthTableDoc {
    pub n: usize,
    pub rows: Vec<String>,
}

pub const MAX_TABLE_N: usize = 12;

impl TruthTable {
    pub fn from_fn(n: usize, f: impl Fn(u64, u64) -> bool) -> Self {
        assert!(n <= MAX_TABLE_N, "truth tables are limited to n <= {MAX_TABLE_N}");
        let side = 1u64 << n;
        let bits = (0..side).flat_map(|x| (0..side).map(move |y| (x, y))).map(|(x, y)| f(x, y)).collect();
        TruthTable { n, bits }
    }

    /// Builds a table from `4^n` values in row-major order.
    pub fn from_bits(bits: Vec<bool>) -> Result<Self, TableError> {
        let len = bits.len();
        let mut n = 0;
        while (1usize << (2 * n)) < len {
            n += 1;
        }
        if 1usize << (2 * n) != len {
            return Err(TableError::NotPowerOfFour(len));
        }
        Ok(TruthTable { n, bits })
    }

    pub fn inner_product(n: usize) -> Self {
        Self::from_fn(n, |x, y| (x & y).count_ones() % 2 == 1)
    }

    pub fn equality(n: usize) -> Self {
        Self::from_fn(n, |x, y| x == y)
    }

    /// 1 when the sets encoded by `x` and `y` are disjoint.
    pub fn disjointness(n: usize) -> Self {
        Self::from_fn(n, |x, y| x & y == 0)
    }

    pub fn constant(n: usize, value: bool) -> Self {
        Self::from_fn(n, |_, _| value)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let bits = (0..1usize << (2 * n)).map(|_| rng.gen::<bool>()).collect();
        TruthTable { n, bits }
    }

    /// The `index`-th function on `n`-bit inputs, enumerating tables as
    /// integers with entry `(x, y)` at bit `x·2^n + y`.
    pub fn nth(n: usize, index: u64) -> Self {
        let side = 1u64 << n;
        Self::from_fn(n, |x, y| (index >> (x * side + y)) & 1 == 1)
    }

    pub fn by_name(name: &str, n: usize) -> Option<Self> {
        Some(match name {
            "ip" => Self::inner_product(n),
            "eq" => Self::equality(n),
            "disj" => Self::disjointness(n),
            "zero" => Self::constant(n, false),
            "one" => Self::constant(n, true),
            _ => return None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, x: u64, y: u64) -> bool {
        self.bits[(x as usize) * self.side() + y as usize]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_doc(&self) -> TruthTableDoc {
        let side = self.side();
        TruthTableDoc {
            n: self.n,
            rows: self
                .bits
                .chunks(side)
                .map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect())
                .collect(),
        }
    }

    pub fn from_doc(doc: &TruthTableDoc) -> Result<Self, TableError> {
        if doc.n > MAX_TABLE_N {
            return Err(TableError::TooLarge(doc.n));
        }
        let side = 1usize << doc.n;
        if doc.rows.len() != side {
            return Err(TableError::RowCount { expected: side, got: doc.rows.len() });
        }
        let mut bits = Vec::with_capacity(side * side);
        for (i, row) in doc.rows.iter().enumerate() {
            if row.len() != side {
                return Err(TableError::RowLength { row: i, expected: side, got: row.len() });
            }
            for ch in row.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(TableError::BadDigit(i)),
                }
            }
        }
        Ok(TruthTable { n: doc.n, bits })
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let doc: TruthTableDoc =
            serde_json::from_str(text).map_err(|e| TableError::Json(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_product_values() {
        let ip = TruthTable::inner_product(2);
        assert!(ip.get(0b11, 0b01));
        assert!(!ip.get(0b11, 0b11));
        assert!(ip.get(0b10, 0b10));
    }

    #[test]
    fn doc_round_trip_and_errors() {
        let eq = TruthTable::equality(2);
        assert_eq!(TruthTable::from_json(&eq.to_json()).unwrap(), eq);
        assert_eq!(eq.to_doc().rows[1], "0100");
        let bad = TruthTableDoc { n: 1, rows: vec!["01".into(), "0x".into()] };
        assert_eq!(TruthTable::from_doc(&bad), Err(TableError::BadDigit(1)));
        let short = TruthTableDoc { n: 1, rows: vec!["01".into()] };
        assert!(matches!(TruthTable::from_doc(&short), Err(TableError::RowCount { .. })));
        assert!(TruthTable::from_json("{").is_err());
    }

    #[test]
    fn from_bits_requires_power_of_four() {
        assert!(TruthTable::from_bits(vec![false; 16]).is_ok());
        assert_eq!(TruthTable::from_bits(vec![false; 8]), Err(TableError::NotPowerOfFour(8)));
    }

    #[test]
    fn nth_enumerates_all_n1_functions() {
        let all: std::collections::HashSet<Vec<bool>> =
            (0..16).map(|i| TruthTable::nth(1, i).bits().to_vec()).collect();
        assert_eq!(all.len(), 16);
    }
}
