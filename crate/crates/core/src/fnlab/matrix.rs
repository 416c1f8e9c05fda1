use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::boolfn::{TableError, TruthTable};

/// `M[x][y] = f(x, y)`, rows and columns indexed big-endian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommMatrix {
    n: usize,
    rows: Vec<Vec<bool>>,
}

impl CommMatrix {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self, TableError> {
        Ok(comm_matrix(&TruthTable::from_bits(bits)?))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.rows[x][y]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|&b| !b))
    }
}

pub fn comm_matrix(f: &TruthTable) -> CommMatrix {
    CommMatrix { n: f.n(), rows: f.bits().chunks(f.side()).map(<[bool]>::to_vec).collect() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Gf2,
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" | "rational" => Ok(Field::Real),
            "gf2" => Ok(Field::Gf2),
            _ => Err(format!("unknown field `{s}` (expected real or gf2)")),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Gf2 => "gf2",
        })
    }
}

pub fn rank(m: &CommMatrix, field: Field) -> usize {
    match field {
        Field::Real => rational_rank(m),
        Field::Gf2 => gf2_rank(m),
    }
}

/// Exact Gaussian elimination over the rationals.
fn rational_rank(m: &CommMatrix) -> usize {
    let d = m.side();
    let mut a: Vec<Vec<BigRational>> = m
        .rows
        .iter()
        .map(|r| r.iter().map(|&b| if b { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(pivot) = (rank..d).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, pivot);
        let inv = a[rank][col].recip();
        for r in rank + 1..d {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..d {
                let delta = &factor * &a[rank][c];
                a[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

/// Rows packed into 64-bit words, column 0 in the lowest bit of word 0.
pub(crate) fn pack_rows(m: &CommMatrix) -> Vec<Vec<u64>> {
    let words = m.side().div_ceil(64);
    m.rows
        .iter()
        .map(|row| {
            let mut packed = vec![0u64; words];
            for (y, &b) in row.iter().enumerate() {
                if b {
                    packed[y / 64] |= 1 << (y % 64);
                }
            }
            packed
        })
        .collect()
}

pub(crate) fn bit(row: &[u64], col: usize) -> bool {
    (row[col / 64] >> (col % 64)) & 1 == 1
}

/// Reduced row echelon form over GF(2), choosing at each column the
/// lowest-index row with a one. Returns the nonzero rows and their pivots.
pub(crate) fn gf2_rref(m: &CommMatrix) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut rows = pack_rows(m);
    let d = m.side();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else { continue };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && bit(row, col) {
                for (w, pw) in row.iter_mut().zip(&pivot_row) {
                    *w ^= pw;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    (rows, pivots)
}

fn gf2_rank(m: &CommMatrix) -> usize {
    gf2_rref(m).1.len()
}

/// `log₂ rank(M) + 1` over the reals; 0 for the zero matrix, where the
/// bound is undefined.
pub fn log_rank_bound(m: &CommMatrix) -> f64 {
    match rank(m, Field::Real) {
        0 => 0.0,
        r => (r as f64).log2() + 1.0,
    }
}
