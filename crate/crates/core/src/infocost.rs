//! Quantum information cost of protocols on purified input families, and
//! Shannon transcript bounds for deterministic classical protocols.
//!
//! The global state is the script's registers followed by Bob's copy `B'`
//! (c-s family only) and the purification `R`, which nobody ever touches.
//! Each `Send` is one round: with `C` the transferred positions and `H` the
//! receiver's holdings just before receipt, the round contributes
//! `I(C:R|H)` to `QLA` (Alice to Bob) or `QLB` (Bob to Alice).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    AnswerMode, EngineError, Party, PlannedOp, ProtocolScript, ALICE_INPUT, ANSWER_REGISTER, BOB_INPUT,
};
use crate::statecore::{conditional_mutual_information, mutual_information, Gate, PureState, QubitLayout, StateError};

/// Default cap on the number of amplitudes of a global state.
pub const DEFAULT_MAX_AMPLITUDES: u128 = 1 << 24;
pub const MAX_AMPLITUDES_ENV: &str = "CLEANCOMM_MAX_AMPLITUDES";

const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// Amplitude budget from the environment, falling back to the default.
pub fn amplitude_budget() -> u128 {
    std::env::var(MAX_AMPLITUDES_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_AMPLITUDES)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("distribution {which} has length {got}, expected {expected}")]
    DistributionLength { which: &'static str, expected: usize, got: usize },
    #[error("distribution {which} is not a probability distribution (sum {sum})")]
    NotNormalized { which: &'static str, sum: f64 },
    #[error("script is incompatible with the input family: {0}")]
    Incompatible(String),
    #[error("script has qubit registers; transcript bounds need a classical script")]
    NotClassical,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    /// Both inputs classical: `R` holds copies of `x` and `y`.
    #[serde(rename = "c-c")]
    ClassicalClassical,
    /// Alice classical, Bob coherent with his copy `B'`: `R` holds `x`.
    #[serde(rename = "c-s")]
    ClassicalSuperposed,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::ClassicalClassical => "cc",
            FamilyKind::ClassicalSuperposed => "cs",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cc" | "c-c" => Ok(FamilyKind::ClassicalClassical),
            "cs" | "c-s" => Ok(FamilyKind::ClassicalSuperposed),
            _ => Err(format!("unknown input family `{s}` (expected cc or cs)")),
        }
    }
}

/// Purified input state. `mu_a` and `mu_b` are indexed by the big-endian
/// value of the input string.
#[derive(Debug, Clone, PartialEq)]
pub struct InputFamily {
    pub kind: FamilyKind,
    pub n: usize,
    mu_a: Vec<f64>,
    mu_b: Vec<f64>,
}

fn check_distribution(which: &'static str, mu: &[f64], expected: usize) -> Result<(), InfoError> {
    if mu.len() != expected {
        return Err(InfoError::DistributionLength { which, expected, got: mu.len() });
    }
    let sum: f64 = mu.iter().sum();
    if mu.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(InfoError::NotNormalized { which, sum });
    }
    Ok(())
}

impl InputFamily {
    pub fn uniform(kind: FamilyKind, n: usize) -> Self {
        let side = 1usize << n;
        let p = 1.0 / side as f64;
        InputFamily { kind, n, mu_a: vec![p; side], mu_b: vec![p; side] }
    }

    pub fn new(kind: FamilyKind, n: usize, mu_a: Vec<f64>, mu_b: Vec<f64>) -> Result<Self, InfoError> {
        check_distribution("mu_A", &mu_a, 1 << n)?;
        check_distribution("mu_B", &mu_b, 1 << n)?;
        Ok(InputFamily { kind, n, mu_a, mu_b })
    }

    pub fn mu_a(&self) -> &[f64] {
        &self.mu_a
    }

    pub fn mu_b(&self) -> &[f64] {
        &self.mu_b
    }

    fn extra_registers(&self) -> Vec<(String, usize)> {
        match self.kind {
            FamilyKind::ClassicalClassical => vec![("R".into(), 2 * self.n)],
            FamilyKind::ClassicalSuperposed => vec![("B'".into(), self.n), ("R".into(), self.n)],
        }
    }
}

/// One `Send` with its leak term.
#[derive(Debug, Clone, Serialize)]
pub struct RoundTerm {
    pub index: usize,
    pub dir: &'static str,
    pub width: usize,
    pub cmi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoCostReport {
    pub protocol: String,
    pub n: usize,
    pub family: FamilyKind,
    pub rounds: Vec<RoundTerm>,
    #[serde(rename = "QLA")]
    pub qla: f64,
    #[serde(rename = "QLB")]
    pub qlb: f64,
    #[serde(rename = "QIC")]
    pub qic: f64,
    /// `I(B_IN:R)` with `B_IN` Bob's initial holdings.
    pub i_bin_r: f64,
    /// `I(B_OUT:R)` with `B_OUT` Bob's final holdings.
    pub i_bout_r: f64,
    /// `|I(B_OUT:R) − I(B_IN:R) + QLB − QLA|`.
    pub flow_residual: f64,
}

impl InfoCostReport {
    fn assemble(script: &ProtocolScript, family: FamilyKind, rounds: Vec<RoundTerm>, i_bin_r: f64, i_bout_r: f64) -> Self {
        let qla = rounds.iter().filter(|r| r.dir == DIR_AB).map(|r| r.cmi).sum::<f64>();
        let qlb = rounds.iter().filter(|r| r.dir == DIR_BA).map(|r| r.cmi).sum::<f64>();
        InfoCostReport {
            protocol: script.name.clone(),
            n: script.n,
            family,
            rounds,
            qla,
            qlb,
            qic: (qla + qlb) / 2.0,
            i_bin_r,
            i_bout_r,
            flow_residual: (i_bout_r - i_bin_r + qlb - qla).abs(),
        }
    }

    /// Recomputes the flow residual after moving the term of round `index`
    /// to the other direction. Used to show the identity is sensitive to
    /// the bookkeeping.
    pub fn with_round_misattributed(&self, index: usize) -> f64 {
        let term = self.rounds.iter().find(|r| r.index == index).map_or(0.0, |r| r.cmi);
        let (qla, qlb) = match self.rounds.iter().find(|r| r.index == index).map(|r| r.dir) {
            Some(DIR_AB) => (self.qla - term, self.qlb + term),
            Some(_) => (self.qla + term, self.qlb - term),
            None => (self.qla, self.qlb),
        };
        (self.i_bout_r - self.i_bin_r + qlb - qla).abs()
    }
}

const DIR_AB: &str = "A→B";
const DIR_BA: &str = "B→A";

/// The script's initial state tensored with the family's purification.
pub fn purified_input(script: &ProtocolScript, family: &InputFamily) -> Result<PureState, InfoError> {
    let n = family.n;
    for name in [ALICE_INPUT, BOB_INPUT] {
        match script.layout.get(name) {
            Some(r) if r.width == n => {}
            _ => {
                return Err(InfoError::Incompatible(format!("needs input register `{name}` of width {n}")));
            }
        }
    }
    let m = script.layout.total_width();
    let extra = family.extra_registers();
    if let Some((name, _)) = extra.iter().find(|(name, _)| script.layout.get(name).is_some()) {
        return Err(InfoError::Incompatible(format!("register name `{name}` is reserved for the purification")));
    }
    let width = m + extra.iter().map(|(_, w)| w).sum::<usize>();
    let limit = amplitude_budget();
    let needed = 1u128 << width.min(127);
    if needed > limit {
        return Err(EngineError::AmplitudeBudget { needed, limit }.into());
    }
    let mut regs: Vec<(String, usize)> =
        script.layout.registers().iter().map(|r| (r.name.clone(), r.width)).collect();
    regs.extend(extra);
    let layout = Arc::new(QubitLayout::new(regs)?);
    let has_ans = script.layout.get(ANSWER_REGISTER).is_some();
    let ans_value = u64::from(has_ans && script.answer_mode == AnswerMode::Register);
    let tail = width - m;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
    for (x, &pa) in family.mu_a.iter().enumerate() {
        for (y, &pb) in family.mu_b.iter().enumerate() {
            let amp = (pa * pb).sqrt();
            if amp == 0.0 {
                continue;
            }
            let mut values = vec![(ALICE_INPUT, x as u64), (BOB_INPUT, y as u64)];
            if ans_value == 1 {
                values.push((ANSWER_REGISTER, 1));
            }
            let head = script.layout.basis_index(&values)?;
            // c-c: R = x‖y;  c-s: B' = y, R = x
            let suffix = match family.kind {
                FamilyKind::ClassicalClassical => (x << n) | y,
                FamilyKind::ClassicalSuperposed => (y << n) | x,
            };
            amps[(head << tail) | suffix] = Complex64::new(amp, 0.0);
        }
    }
    let mut state = PureState::from_amplitudes(layout, amps)?;
    if ans_value == 1 {
        // |1⟩ → |−⟩
        state.apply(&Gate::h(script.layout.offset(ANSWER_REGISTER)?))?;
    }
    Ok(state)
}

/// Per-round leak terms, `QLA`, `QLB`, `QIC` and the flow residual.
pub fn qic(script: &ProtocolScript, family: &InputFamily) -> Result<InfoCostReport, InfoError> {
    let plan = script.plan()?;
    let mut state = purified_input(script, family)?;
    let m = plan.width;
    let total = state.num_qubits();
    let r_range: Vec<usize> = state.layout().qubits("R")?.collect();
    let bob_extra: Vec<usize> = match family.kind {
        FamilyKind::ClassicalSuperposed => state.layout().qubits("B'")?.collect(),
        FamilyKind::ClassicalClassical => Vec::new(),
    };
    debug_assert!(r_range.iter().all(|&q| q >= m && q < total));
    let held = |owners: &[Party], party: Party| -> Vec<usize> {
        let mut v: Vec<usize> = (0..m).filter(|&q| owners[q] == party).collect();
        if party == Party::Bob {
            v.extend(&bob_extra);
        }
        v
    };

    let i_bin_r = mutual_information(&state, &held(&plan.initial_owners, Party::Bob), &r_range)?;
    let mut rounds = Vec::new();
    for op in &plan.ops {
        match op {
            PlannedOp::Gate { gate, .. } => state.apply(gate)?,
            PlannedOp::Send { from, to, qubits, owners_before, .. } => {
                let receiver = held(owners_before, *to);
                let cmi = conditional_mutual_information(&state, qubits, &r_range, &receiver)?;
                rounds.push(RoundTerm {
                    index: rounds.len() + 1,
                    dir: if *from == Party::Alice { DIR_AB } else { DIR_BA },
                    width: qubits.len(),
                    cmi,
                });
            }
        }
    }
    let i_bout_r = mutual_information(&state, &held(&plan.final_owners, Party::Bob), &r_range)?;
    Ok(InfoCostReport::assemble(script, family.kind, rounds, i_bin_r, i_bout_r))
}

pub fn info_flow_residual(script: &ProtocolScript, family: &InputFamily) -> Result<f64, InfoError> {
    Ok(qic(script, family)?.flow_residual)
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakComparison {
    pub protocol: String,
    pub n: usize,
    #[serde(rename = "QLA_cc")]
    pub qla_cc: f64,
    #[serde(rename = "QLA_cs")]
    pub qla_cs: f64,
    /// `QLA_cc − QLA_cs`; nonnegative up to rounding.
    pub margin: f64,
}

/// Alice's leak on the c-c and c-s families built from the same
/// distributions.
pub fn leak_comparison(
    script: &ProtocolScript,
    mu_a: Vec<f64>,
    mu_b: Vec<f64>,
) -> Result<LeakComparison, InfoError> {
    let n = script.n;
    let cc = qic(script, &InputFamily::new(FamilyKind::ClassicalClassical, n, mu_a.clone(), mu_b.clone())?)?;
    let cs = qic(script, &InputFamily::new(FamilyKind::ClassicalSuperposed, n, mu_a, mu_b)?)?;
    Ok(LeakComparison {
        protocol: script.name.clone(),
        n,
        qla_cc: cc.qla,
        qla_cs: cs.qla,
        margin: cc.qla - cs.qla,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalInfoReport {
    pub protocol: String,
    pub n: usize,
    pub h_x: f64,
    pub h_y: f64,
    pub i_x_y: f64,
    pub i_x_yb: f64,
    pub i_y_xa: f64,
    /// Bits received by Alice.
    pub a_bits: usize,
    /// Bits received by Bob.
    pub b_bits: usize,
    /// `|a| − (I(X:YB) − I(X:Y) − 1)`.
    pub residual_a: f64,
    /// `|b| − (I(Y:XA) − I(X:Y))`.
    pub residual_b: f64,
    /// `I(X:B_j | Y B_1 … B_{j−1})` for each message `B_j` received by Bob.
    pub chain_terms: Vec<f64>,
    /// `|I(X:Y) + Σ chain_terms − I(X:YB)|`.
    pub chain_residual: f64,
}

/// Shannon entropy (bits) of the marginal selected by `key`.
fn shannon<K: std::hash::Hash + Eq>(support: &[(f64, usize)], key: impl Fn(usize) -> K) -> f64 {
    let mut marginal: HashMap<K, f64> = HashMap::new();
    for &(p, i) in support {
        *marginal.entry(key(i)).or_default() += p;
    }
    -marginal.values().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Enumerates the support of `dist` (row-major by `x`, length `4^n`; `None`
/// for uniform) and evaluates the transcript information bounds.
pub fn classical_info_bounds(
    script: &ProtocolScript,
    dist: Option<&[f64]>,
) -> Result<ClassicalInfoReport, InfoError> {
    if !script.layout.is_classical() {
        return Err(InfoError::NotClassical);
    }
    let n = script.n;
    let side = 1usize << n;
    let uniform;
    let dist = match dist {
        Some(d) => d,
        None => {
            uniform = vec![1.0 / (side * side) as f64; side * side];
            &uniform
        }
    };
    check_distribution("p_XY", dist, side * side)?;
    let plan = script.plan()?;
    let sends: Vec<Party> = plan.sends().map(|(_, to, _)| to).collect();

    struct Sample {
        x: u64,
        y: u64,
        to_alice: Vec<bool>,
        to_bob: Vec<Vec<bool>>,
    }
    let mut samples = Vec::new();
    let mut support = Vec::new();
    for x in 0..side as u64 {
        for y in 0..side as u64 {
            let p = dist[(x as usize) * side + y as usize];
            if p == 0.0 {
                continue;
            }
            let mut bits = script.layout.bit_assignment(&[(ALICE_INPUT, x), (BOB_INPUT, y)])?;
            let mut messages = Vec::new();
            plan.execute_classical(&mut bits, Some(&mut messages))?;
            let mut to_alice = Vec::new();
            let mut to_bob = Vec::new();
            for (msg, to) in messages.into_iter().zip(&sends) {
                match to {
                    Party::Alice => to_alice.extend(msg),
                    Party::Bob => to_bob.push(msg),
                }
            }
            support.push((p, samples.len()));
            samples.push(Sample { x, y, to_alice, to_bob });
        }
    }

    let s = &samples;
    let h_x = shannon(&support, |i| s[i].x);
    let h_y = shannon(&support, |i| s[i].y);
    let h_xy = shannon(&support, |i| (s[i].x, s[i].y));
    let i_x_y = h_x + h_y - h_xy;
    // I(X : Y B_1..B_j) for every prefix j
    let i_x_yb_prefix = |j: usize| {
        let h_yb = shannon(&support, |i| (s[i].y, s[i].to_bob[..j].to_vec()));
        let h_xyb = shannon(&support, |i| (s[i].x, s[i].y, s[i].to_bob[..j].to_vec()));
        h_x + h_yb - h_xyb
    };
    let messages_to_bob = samples.first().map_or(0, |s| s.to_bob.len());
    let i_x_yb = i_x_yb_prefix(messages_to_bob);
    let chain_terms: Vec<f64> =
        (1..=messages_to_bob).map(|j| i_x_yb_prefix(j) - i_x_yb_prefix(j - 1)).collect();
    let chain_residual = (i_x_y + chain_terms.iter().sum::<f64>() - i_x_yb).abs();
    let h_xa = shannon(&support, |i| (s[i].x, s[i].to_alice.clone()));
    let h_xya = shannon(&support, |i| (s[i].x, s[i].y, s[i].to_alice.clone()));
    let i_y_xa = h_y + h_xa - h_xya;

    let cost = script.cost();
    Ok(ClassicalInfoReport {
        protocol: script.name.clone(),
        n,
        h_x,
        h_y,
        i_x_y,
        i_x_yb,
        i_y_xa,
        a_bits: cost.received_by_alice,
        b_bits: cost.received_by_bob,
        residual_a: cost.received_by_alice as f64 - (i_x_yb - i_x_y - 1.0),
        residual_b: cost.received_by_bob as f64 - (i_y_xa - i_x_y),
        chain_terms,
        chain_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Register, RegisterLayout, RegKind};
    use crate::protocols::{build_classical_ip, build_clean_quantum_ip, build_one_way, build_phase_ip};

    fn cc(n: usize) -> InputFamily {
        InputFamily::uniform(FamilyKind::ClassicalClassical, n)
    }

    /// Entropy oracle independent of the library: explicit reduced density
    /// matrix, real-symmetric embedding, cyclic Jacobi diagonalization.
    mod oracle {
        use num_complex::Complex64;

        fn reduced(amps: &[Complex64], width: usize, keep: &[usize]) -> Vec<Vec<Complex64>> {
            let d = 1 << keep.len();
            let sub = |i: usize| {
                keep.iter().fold(0usize, |acc, &q| (acc << 1) | ((i >> (width - 1 - q)) & 1))
            };
            let rest = |i: usize| {
                (0..width)
                    .filter(|q| !keep.contains(q))
                    .fold(0usize, |acc, q| (acc << 1) | ((i >> (width - 1 - q)) & 1))
            };
            let mut rho = vec![vec![Complex64::new(0.0, 0.0); d]; d];
            for i in 0..amps.len() {
                for j in 0..amps.len() {
                    if rest(i) == rest(j) {
                        rho[sub(i)][sub(j)] += amps[i] * amps[j].conj();
                    }
                }
            }
            rho
        }

        fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
            let n = a.len();
            for _ in 0..100 {
                let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| a[i][j] * a[i][j])
                    .sum();
                if off < 1e-24 {
                    break;
                }
                for p in 0..n {
                    for q in p + 1..n {
                        if a[p][q].abs() < 1e-300 {
                            continue;
                        }
                        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                        let t = if theta == 0.0 { 1.0 } else { t };
                        let c = 1.0 / (t * t + 1.0).sqrt();
                        let s = t * c;
                        for k in 0..n {
                            let (akp, akq) = (a[k][p], a[k][q]);
                            a[k][p] = c * akp - s * akq;
                            a[k][q] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let (apk, aqk) = (a[p][k], a[q][k]);
                            a[p][k] = c * apk - s * aqk;
                            a[q][k] = s * apk + c * aqk;
                        }
                    }
                }
            }
            (0..n).map(|i| a[i][i]).collect()
        }

        pub fn entropy(amps: &[Complex64], width: usize, keep: &[usize]) -> f64 {
            if keep.is_empty() {
                return 0.0;
            }
            let rho = reduced(amps, width, keep);
            let d = rho.len();
            // [[Re, −Im], [Im, Re]] has every eigenvalue of rho twice
            let mut big = vec![vec![0.0; 2 * d]; 2 * d];
            for i in 0..d {
                for j in 0..d {
                    big[i][j] = rho[i][j].re;
                    big[i + d][j + d] = rho[i][j].re;
                    big[i][j + d] = -rho[i][j].im;
                    big[i + d][j] = rho[i][j].im;
                }
            }
            let mut ev = jacobi_eigenvalues(big);
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ev.chunks(2).map(|c| c[0].max(0.0)).filter(|&p| p > 1e-12).map(|p| -p * p.log2()).sum()
        }

        pub fn cmi(amps: &[Complex64], width: usize, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
            let join = |xs: &[&[usize]]| {
                let mut v: Vec<usize> = xs.iter().flat_map(|x| x.iter().copied()).collect();
                v.sort();
                v
            };
            entropy(amps, width, &join(&[a, c])) + entropy(amps, width, &join(&[b, c]))
                - entropy(amps, width, c)
                - entropy(amps, width, &join(&[a, b, c]))
        }
    }

    /// Recomputes every round term with the oracle by replaying the plan.
    fn oracle_rounds(script: &ProtocolScript, family: &InputFamily) -> Vec<f64> {
        let plan = script.plan().unwrap();
        let mut state = purified_input(script, family).unwrap();
        let width = state.num_qubits();
        let r: Vec<usize> = state.layout().qubits("R").unwrap().collect();
        let extra: Vec<usize> = state.layout().qubits("B'").map(|r| r.collect()).unwrap_or_default();
        let mut out = Vec::new();
        for op in &plan.ops {
            match op {
                PlannedOp::Gate { gate, .. } => state.apply(gate).unwrap(),
                PlannedOp::Send { to, qubits, owners_before, .. } => {
                    let mut held: Vec<usize> = (0..plan.width).filter(|&q| owners_before[q] == *to).collect();
                    if *to == Party::Bob {
                        held.extend(&extra);
                    }
                    out.push(oracle::cmi(state.amplitudes(), width, qubits, &r, &held));
                }
            }
        }
        out
    }

    #[test]
    fn oracle_agrees_on_known_entropies() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [Complex64::new(h, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, h)];
        assert!((oracle::entropy(&bell, 2, &[0]) - 1.0).abs() < 1e-12);
        assert!(oracle::entropy(&bell, 2, &[0, 1]).abs() < 1e-12);
    }

    #[test]
    fn phase_ip_one_bit_leaks_one_each_way() {
        let script = build_phase_ip(1, true).unwrap();
        let report = qic(&script, &cc(1)).unwrap();
        assert_eq!(report.rounds.len(), 2);
        assert!((report.qla - 1.0).abs() < 1e-9, "{report:?}");
        assert!((report.qlb - 1.0).abs() < 1e-9);
        assert!(report.flow_residual < 1e-9);
        let oracle = oracle_rounds(&script, &cc(1));
        for (r, o) in report.rounds.iter().zip(&oracle) {
            assert!((r.cmi - o).abs() < 1e-9, "{} vs {o}", r.cmi);
        }
    }

    #[test]
    fn round_terms_match_oracle() {
        for script in [
            build_phase_ip(2, true).unwrap(),
            build_phase_ip(2, false).unwrap(),
            build_clean_quantum_ip(2).unwrap(),
        ] {
            for kind in [FamilyKind::ClassicalClassical, FamilyKind::ClassicalSuperposed] {
                let fam = InputFamily::uniform(kind, 2);
                let report = qic(&script, &fam).unwrap();
                let oracle = oracle_rounds(&script, &fam);
                for (r, o) in report.rounds.iter().zip(&oracle) {
                    assert!((r.cmi - o).abs() < 1e-8, "{}: {} vs {o}", script.name, r.cmi);
                }
                assert!(report.flow_residual < 1e-8);
                assert!((report.qic - (report.qla + report.qlb) / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_script_has_no_cost() {
        let layout = RegisterLayout::new(vec![
            Register::new("A", 1, RegKind::Qubit, Party::Alice),
            Register::new("B", 1, RegKind::Qubit, Party::Bob),
        ])
        .unwrap();
        let script = ProtocolScript::new("empty", 1, AnswerMode::None, layout, vec![]).unwrap();
        let report = qic(&script, &cc(1)).unwrap();
        assert_eq!(report.qic, 0.0);
        let cmp = leak_comparison(&script, vec![0.5; 2], vec![0.5; 2]).unwrap();
        assert_eq!((cmp.qla_cc, cmp.qla_cs), (0.0, 0.0));
    }

    #[test]
    fn flow_identity_holds_for_unclean_one_way() {
        let script = build_one_way(1, RegKind::Qubit).unwrap();
        let report = qic(&script, &cc(1)).unwrap();
        assert!(report.flow_residual < 1e-8);
    }

    #[test]
    fn misattribution_breaks_the_identity() {
        let report = qic(&build_phase_ip(2, true).unwrap(), &cc(2)).unwrap();
        assert!(report.flow_residual < 1e-8);
        let worst = report.rounds.iter().map(|r| report.with_round_misattributed(r.index)).fold(0.0, f64::max);
        assert!(worst > 0.5);
    }

    #[test]
    fn non_uniform_distributions() {
        let script = build_phase_ip(1, true).unwrap();
        let cmp = leak_comparison(&script, vec![0.9, 0.1], vec![0.3, 0.7]).unwrap();
        assert!(cmp.margin >= -1e-8);
        assert!(InputFamily::new(FamilyKind::ClassicalClassical, 1, vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(InputFamily::new(FamilyKind::ClassicalClassical, 1, vec![1.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn one_way_transcript_information() {
        let report = classical_info_bounds(&build_one_way(2, RegKind::Bit).unwrap(), None).unwrap();
        assert_eq!(report.i_x_y, 0.0);
        assert!(report.i_y_xa.abs() < 1e-12);
        assert_eq!(report.b_bits, 2);
        assert!((report.i_x_yb - 2.0).abs() < 1e-12);
        assert!((report.h_x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classical_ip_bounds_hold() {
        for n in 2..=3 {
            let report = classical_info_bounds(&build_classical_ip(n, None).unwrap(), None).unwrap();
            assert_eq!(report.i_x_y, 0.0);
            assert!(report.residual_a >= -1e-9 && report.residual_b >= -1e-9, "{report:?}");
            assert!(report.chain_residual < 1e-9);
        }
        assert!(matches!(
            classical_info_bounds(&build_phase_ip(1, true).unwrap(), None),
            Err(InfoError::NotClassical)
        ));
    }
}
