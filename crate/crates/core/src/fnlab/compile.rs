use std::collections::BTreeMap;

use serde::Serialize;

use super::matrix::{bit, gf2_rref, CommMatrix};
use crate::boolfn::TruthTable;
use crate::engine::{
    AnswerMode, Coord, Party, ProtocolScript, RegKind, Register, RegisterLayout, Step, ALICE_INPUT,
    ANSWER_REGISTER, BOB_INPUT,
};
use crate::protocols::{build_classical_ip, build_clean_quantum_ip, BuildError};
use crate::statecore::GateKind;

/// `f(x, y) = Σ_i P_i(x)·Q_i(y) mod 2` with `k` minimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Decomposition {
    pub n: usize,
    pub k: usize,
    /// `p[i][x] = P_i(x)`.
    pub p: Vec<Vec<bool>>,
    /// `q[i][y] = Q_i(y)`.
    pub q: Vec<Vec<bool>>,
}

impl Gf2Decomposition {
    pub fn eval(&self, x: usize, y: usize) -> bool {
        (0..self.k).fold(false, |acc, i| acc ^ (self.p[i][x] & self.q[i][y]))
    }

    pub fn reconstruct(&self) -> TruthTable {
        TruthTable::from_fn(self.n, |x, y| self.eval(x as usize, y as usize))
    }
}

/// Factors `M` over GF(2) through its reduced row echelon form `R`:
/// `Q_i` is the `i`-th nonzero row of `R` and `P_i(x) = M[x][pivot_i]`.
pub fn gf2_decompose(m: &CommMatrix) -> Gf2Decomposition {
    let (rows, pivots) = gf2_rref(m);
    let side = m.side();
    Gf2Decomposition {
        n: m.n(),
        k: pivots.len(),
        p: pivots.iter().map(|&c| (0..side).map(|x| m.get(x, c)).collect()).collect(),
        q: rows.iter().map(|r| (0..side).map(|y| bit(r, y)).collect()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CompileMode {
    Quantum,
    Classical,
}

impl std::str::FromStr for CompileMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quantum" => Ok(CompileMode::Quantum),
            "classical" => Ok(CompileMode::Classical),
            _ => Err(format!("unknown mode `{s}` (expected quantum or classical)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompileReport {
    pub n: usize,
    pub k: usize,
    pub mode: CompileMode,
    /// Communication of the embedded `IP_k` protocol (0 when `k = 0`).
    pub ip_cost: usize,
    /// `2n − 3` (quantum) or `2n − 4√(2n) + 4` (classical).
    pub threshold: f64,
    /// `k < threshold`: the compiled protocol beats the naive `2n`-style
    /// bound.
    pub nontrivial: bool,
}

pub struct Compiled {
    pub script: ProtocolScript,
    pub report: CompileReport,
}

pub fn threshold(n: usize, mode: CompileMode) -> f64 {
    let n = n as f64;
    match mode {
        CompileMode::Quantum => 2.0 * n - 3.0,
        CompileMode::Classical => 2.0 * n - 4.0 * (2.0 * n).sqrt() + 4.0,
    }
}

/// Algebraic normal form: coefficient of monomial `S` (as a bitmask over
/// input positions, bit `n−1−j` for position `j+1`) at index `S`.
fn anf(values: &[bool]) -> Vec<bool> {
    let mut c = values.to_vec();
    let mut step = 1;
    while step < c.len() {
        for i in 0..c.len() {
            if i & step != 0 {
                c[i] ^= c[i ^ step];
            }
        }
        step <<= 1;
    }
    c
}

/// Gates XORing `g(input)` into `out.1` for each monomial of `g`.
fn evaluate_into(steps: &mut Vec<Step>, party: Party, input: &str, n: usize, g: &[bool], out: Coord) {
    for (mask, &c) in anf(g).iter().enumerate() {
        if !c {
            continue;
        }
        let mut targets: Vec<Coord> =
            (0..n).filter(|j| (mask >> (n - 1 - j)) & 1 == 1).map(|j| Coord::new(input, j + 1)).collect();
        let kind = match targets.len() {
            0 => GateKind::X,
            1 => GateKind::Cnot,
            2 => GateKind::Toffoli,
            _ => GateKind::Mcx,
        };
        targets.push(out.clone());
        steps.push(Step::Local { party, gate: kind, targets });
    }
}

/// Compiles a decomposition into a clean protocol: each party evaluates its
/// `k` functions into a private scratch register (`P` for Alice, `Q` for
/// Bob), the parties run the clean `IP_k` protocol on the scratch registers,
/// and the scratch is uncomputed. Only the `IP_k` protocol communicates.
pub fn compile_clean(decomp: &Gf2Decomposition, mode: CompileMode) -> Result<Compiled, BuildError> {
    let (n, k) = (decomp.n, decomp.k);
    let kind = match mode {
        CompileMode::Quantum => RegKind::Qubit,
        CompileMode::Classical => RegKind::Bit,
    };
    let mut registers = vec![
        Register::new(ALICE_INPUT, n.max(1), kind, Party::Alice),
        Register::new(BOB_INPUT, n.max(1), kind, Party::Bob),
    ];
    let mut prepare = Vec::new();
    let mut core = Vec::new();
    if k > 0 {
        registers.push(Register::new("P", k, kind, Party::Alice));
        registers.push(Register::new("Q", k, kind, Party::Bob));
        for i in 0..k {
            evaluate_into(&mut prepare, Party::Alice, ALICE_INPUT, n, &decomp.p[i], Coord::new("P", i + 1));
            evaluate_into(&mut prepare, Party::Bob, BOB_INPUT, n, &decomp.q[i], Coord::new("Q", i + 1));
        }
        let ip = match mode {
            CompileMode::Quantum => build_clean_quantum_ip(k)?,
            CompileMode::Classical => build_classical_ip(k, None)?,
        };
        let rename: BTreeMap<String, String> =
            [(ALICE_INPUT, "P"), (BOB_INPUT, "Q")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        core = ip.steps.iter().map(|s| s.renamed(&rename)).collect();
    }
    registers.push(Register::new(ANSWER_REGISTER, 1, kind, Party::Bob));

    let mut steps = prepare.clone();
    steps.extend(core);
    steps.extend(prepare.iter().rev().map(Step::inverse));
    let script = ProtocolScript::new(
        &format!("compiled-{}", match mode {
            CompileMode::Quantum => "quantum",
            CompileMode::Classical => "classical",
        }),
        n,
        AnswerMode::Register,
        RegisterLayout::new(registers)?,
        steps,
    )?;
    let t = threshold(n, mode);
    let report = CompileReport {
        n,
        k,
        mode,
        ip_cost: script.cost().total(),
        threshold: t,
        nontrivial: (k as f64) < t,
    };
    Ok(Compiled { script, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{verify_clean, VerifyOptions};
    use crate::fnlab::{comm_matrix, rank, Field};
    use rand::SeedableRng;

    #[test]
    fn anf_of_and_and_xor() {
        // g(x1, x2) = x1 AND x2 → single monomial {1, 2}
        assert_eq!(anf(&[false, false, false, true]), vec![false, false, false, true]);
        // g = x1 XOR x2 → monomials {2} (mask 1) and {1} (mask 2)
        assert_eq!(anf(&[false, true, true, false]), vec![false, true, true, false]);
        // g = NOT x2 → 1 ⊕ x2
        assert_eq!(anf(&[true, false, true, false]), vec![true, true, false, false]);
    }

    #[test]
    fn decompositions_reconstruct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            for _ in 0..20 {
                let f = TruthTable::random(n, &mut rng);
                let m = comm_matrix(&f);
                let d = gf2_decompose(&m);
                assert_eq!(d.reconstruct(), f);
                assert_eq!(d.k, rank(&m, Field::Gf2));
            }
        }
        let ip = gf2_decompose(&comm_matrix(&TruthTable::inner_product(3)));
        assert_eq!(ip.k, 3);
        // lowest-index pivots land on single-bit columns, giving P_i(x) = x_j
        for i in 0..3 {
            assert!((0..8).all(|x| ip.p[i][x] == ((x >> i) & 1 == 1)));
        }
        assert_eq!(gf2_decompose(&comm_matrix(&TruthTable::equality(2))).k, 4);
        assert_eq!(gf2_decompose(&comm_matrix(&TruthTable::constant(2, false))).k, 0);
    }

    #[test]
    fn compiled_scripts_are_clean() {
        let opts = VerifyOptions { superposition_samples: 4, ..VerifyOptions::default() };
        for f in [TruthTable::inner_product(2), TruthTable::equality(2), TruthTable::disjointness(2)] {
            let d = gf2_decompose(&comm_matrix(&f));
            for mode in [CompileMode::Quantum, CompileMode::Classical] {
                let c = compile_clean(&d, mode).unwrap();
                let r = verify_clean(&c.script, &f, &opts).unwrap();
                assert!(r.passed, "{mode:?}: {r:?}");
            }
        }
    }

    #[test]
    fn compiler_reports() {
        let d = gf2_decompose(&comm_matrix(&TruthTable::inner_product(4)));
        let c = compile_clean(&d, CompileMode::Quantum).unwrap();
        assert_eq!(c.report.ip_cost, 6);
        assert!(c.report.nontrivial);
        let eq = gf2_decompose(&comm_matrix(&TruthTable::equality(2)));
        assert!(!compile_clean(&eq, CompileMode::Quantum).unwrap().report.nontrivial);
        let zero = gf2_decompose(&comm_matrix(&TruthTable::constant(2, false)));
        let c = compile_clean(&zero, CompileMode::Classical).unwrap();
        assert_eq!(c.script.cost().total(), 0);
        assert!(c.script.steps.is_empty());
    }
}
