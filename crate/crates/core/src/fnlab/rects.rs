use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::boolfn::TruthTable;
use crate::engine::{EngineError, ProtocolScript, ALICE_INPUT, ANSWER_REGISTER, BOB_INPUT};

fn bitstring(v: u64, width: usize) -> String {
    (0..width).rev().map(|i| if (v >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inputs sharing one full transcript.
#[derive(Debug, Clone, Serialize)]
pub struct Rectangle {
    pub transcript: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// `g(y)` for each column when the class is striped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stripe: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The class is not the product of its row and column sets.
    NotRectangle { transcript: String, size: usize, rows: usize, cols: usize },
    /// `f` depends on `x` inside the class.
    NotStriped { transcript: String, y: String },
    /// The script leaves a wrong answer in `ans`.
    WrongAnswer { x: String, y: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct RectanglePartition {
    pub n: usize,
    pub pairs: usize,
    pub rectangles: Vec<Rectangle>,
    pub violations: Vec<Violation>,
}

impl RectanglePartition {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Groups all input pairs (with `z = 0`) by the full transcript of a
/// deterministic classical script and checks that every class is a
/// combinatorial rectangle on which `f` depends only on `y`.
pub fn extract_rectangles(script: &ProtocolScript, f: &TruthTable) -> Result<RectanglePartition, EngineError> {
    if !script.layout.is_classical() {
        return Err(EngineError::ClassicalBackend("rectangles need an all-bit script".into()));
    }
    if f.n() != script.n {
        return Err(EngineError::Precondition(format!("function has n = {}, script has n = {}", f.n(), script.n)));
    }
    let plan = script.plan()?;
    let n = script.n;
    let side = 1u64 << n;
    let has_ans = script.layout.get(ANSWER_REGISTER).is_some();
    let mut classes: BTreeMap<String, Vec<(u64, u64)>> = BTreeMap::new();
    let mut violations = Vec::new();
    for x in 0..side {
        for y in 0..side {
            let mut bits = script.layout.bit_assignment(&[(ALICE_INPUT, x), (BOB_INPUT, y)])?;
            let mut messages = Vec::new();
            plan.execute_classical(&mut bits, Some(&mut messages))?;
            let transcript = messages
                .iter()
                .map(|m| m.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
                .collect::<Vec<_>>()
                .join("|");
            if has_ans && script.layout.bits_value(&bits, ANSWER_REGISTER)? != u64::from(f.get(x, y)) {
                violations.push(Violation::WrongAnswer { x: bitstring(x, n), y: bitstring(y, n) });
            }
            classes.entry(transcript).or_default().push((x, y));
        }
    }

    let mut rectangles = Vec::new();
    for (transcript, members) in classes {
        let rows: BTreeSet<u64> = members.iter().map(|&(x, _)| x).collect();
        let cols: BTreeSet<u64> = members.iter().map(|&(_, y)| y).collect();
        let mut stripe = Some(Vec::new());
        if members.len() != rows.len() * cols.len() {
            violations.push(Violation::NotRectangle {
                transcript: transcript.clone(),
                size: members.len(),
                rows: rows.len(),
                cols: cols.len(),
            });
            stripe = None;
        }
        for &y in &cols {
            let values: BTreeSet<bool> =
                members.iter().filter(|&&(_, my)| my == y).map(|&(x, _)| f.get(x, y)).collect();
            if values.len() > 1 {
                violations.push(Violation::NotStriped { transcript: transcript.clone(), y: bitstring(y, n) });
                stripe = None;
            } else if let Some(s) = stripe.as_mut() {
                s.push(values.into_iter().next().unwrap_or(false));
            }
        }
        rectangles.push(Rectangle {
            transcript,
            rows: rows.iter().map(|&x| bitstring(x, n)).collect(),
            cols: cols.iter().map(|&y| bitstring(y, n)).collect(),
            stripe,
        });
    }
    Ok(RectanglePartition { n, pairs: (side * side) as usize, rectangles, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RegKind;
    use crate::protocols::{build_classical_ip, build_one_way};

    #[test]
    fn one_way_rows() {
        let p = extract_rectangles(&build_one_way(2, RegKind::Bit).unwrap(), &TruthTable::inner_product(2)).unwrap();
        assert!(p.is_valid());
        assert_eq!(p.rectangles.len(), 4);
        assert!(p.rectangles.iter().all(|r| r.rows.len() == 1 && r.cols.len() == 4));
    }

    #[test]
    fn classical_ip_is_striped() {
        let p = extract_rectangles(&build_classical_ip(2, None).unwrap(), &TruthTable::inner_product(2)).unwrap();
        assert!(p.is_valid(), "{:?}", p.violations);
        let covered: usize = p.rectangles.iter().map(|r| r.rows.len() * r.cols.len()).sum();
        assert_eq!(covered, 16);
    }

    #[test]
    fn wrong_function_is_caught() {
        let p = extract_rectangles(&build_classical_ip(2, None).unwrap(), &TruthTable::equality(2)).unwrap();
        assert!(!p.is_valid());
    }
}
