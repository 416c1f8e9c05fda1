//! Builders for the inner-product protocol families, the naive
//! run/copy/reverse wrapper and the superdense extraction check.
//!
//! Inputs live in registers `A` (Alice) and `B` (Bob), the answer in `ans`
//! (Bob). Coordinates are 1-based, so `x_i` is `A.i`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    AnswerMode, Carrier, Coord, EngineError, Party, RegKind, Register, RegisterLayout, ProtocolScript,
    Step, ALICE_INPUT, ANSWER_REGISTER, BOB_INPUT,
};
use crate::statecore::{fidelity, Gate, GateKind, PureState};

use Party::{Alice, Bob};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("n must be at least 1")]
    EmptyInput,
    #[error("block size k = {k} must satisfy 1 <= k <= n = {n}")]
    BlockSize { k: usize, n: usize },
    #[error("the answer register is not held by Bob at the end of the input script")]
    AnswerNotAtBob,
    #[error("register name `{0}` is already used by the input script")]
    NameClash(String),
    #[error("unknown protocol `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Step list under construction. Coordinates are `(register, 1-based bit)`.
#[derive(Default)]
struct Steps(Vec<Step>);

impl Steps {
    fn gate(&mut self, party: Party, kind: GateKind, targets: &[(&str, usize)]) {
        let targets: Vec<Coord> = targets.iter().map(|&(r, i)| Coord::new(r, i)).collect();
        self.0.push(Step::Local { party, gate: kind, targets });
    }

    fn cnot(&mut self, party: Party, control: (&str, usize), target: (&str, usize)) {
        self.gate(party, GateKind::Cnot, &[control, target]);
    }

    fn cz(&mut self, party: Party, a: (&str, usize), b: (&str, usize)) {
        self.gate(party, GateKind::Cz, &[a, b]);
    }

    fn h(&mut self, party: Party, q: (&str, usize)) {
        self.gate(party, GateKind::H, &[q]);
    }

    fn toffoli(&mut self, party: Party, c1: (&str, usize), c2: (&str, usize), t: (&str, usize)) {
        self.gate(party, GateKind::Toffoli, &[c1, c2, t]);
    }

    fn send(&mut self, from: Party, carriers: &[(&str, usize)]) {
        self.0.push(Step::send(from, carriers.iter().map(|&(r, i)| Carrier::bit(r, i)).collect()));
    }

    fn send_regs(&mut self, from: Party, regs: &[&str]) {
        self.0.push(Step::send(from, regs.iter().map(|r| Carrier::register(r)).collect()));
    }
}

fn input_of(p: Party) -> &'static str {
    match p {
        Alice => ALICE_INPUT,
        Bob => BOB_INPUT,
    }
}

fn inputs(n: usize, kind: RegKind) -> Vec<Register> {
    vec![Register::new(ALICE_INPUT, n, kind, Alice), Register::new(BOB_INPUT, n, kind, Bob)]
}

fn finish(
    name: &str,
    n: usize,
    mode: AnswerMode,
    registers: Vec<Register>,
    steps: Steps,
) -> Result<ProtocolScript, BuildError> {
    Ok(ProtocolScript::new(name, n, mode, RegisterLayout::new(registers)?, steps.0)?)
}

/// Implements `|x⟩|y⟩ ↦ (−1)^{x·y}|x⟩|y⟩`.
///
/// With `use_ancilla` a single carrier `C` shuttles one input bit per
/// message and is cleaned by the last receiver (cost `n+1`; `C` ends with
/// Bob for even `n`). Without it, Alice's qubit `A.1` is the carrier (cost
/// `n+2` for even `n`, `n+1` for odd `n`).
pub fn build_phase_ip(n: usize, use_ancilla: bool) -> Result<ProtocolScript, BuildError> {
    if n == 0 {
        return Err(BuildError::EmptyInput);
    }
    if use_ancilla {
        let mut s = Steps::default();
        phase_ip_with_carrier(&mut s, n, "C", |s, party, input| s.cz(party, ("C", 1), input));
        let mut regs = inputs(n, RegKind::Qubit);
        regs.push(Register::new("C", 1, RegKind::Qubit, Alice));
        finish("phase-ip", n, AnswerMode::Phase, regs, s)
    } else {
        finish("phase-ip-noanc", n, AnswerMode::Phase, inputs(n, RegKind::Qubit), phase_ip_noanc(n))
    }
}

/// Message `t` carries the sender's bit `t` XORed with the bit it received
/// before; the receiver strips its own earlier bit, applies the phase for
/// index `t` via `phase`, and adds its next bit.
fn phase_ip_with_carrier(
    s: &mut Steps,
    n: usize,
    carrier: &'static str,
    phase: impl Fn(&mut Steps, Party, (&'static str, usize)),
) {
    let sender = |t: usize| if t % 2 == 1 { Alice } else { Bob };
    s.cnot(Alice, (ALICE_INPUT, 1), (carrier, 1));
    s.send(Alice, &[(carrier, 1)]);
    for t in 1..=n {
        let r = sender(t).other();
        let own = input_of(r);
        if t >= 2 {
            s.cnot(r, (own, t - 1), (carrier, 1));
        }
        phase(s, r, (own, t));
        if t < n {
            s.cnot(r, (own, t + 1), (carrier, 1));
        }
        s.send(r, &[(carrier, 1)]);
    }
    let last = sender(n);
    s.cnot(last, (input_of(last), n), (carrier, 1));
}

fn phase_ip_noanc(n: usize) -> Steps {
    let a = |i| (ALICE_INPUT, i);
    let b = |i| (BOB_INPUT, i);
    let mut s = Steps::default();
    for i in (2..=n).step_by(2) {
        s.cz(Alice, a(1), a(i));
    }
    s.send(Alice, &[a(1)]);
    for i in (1..=n).step_by(2) {
        s.cz(Bob, a(1), b(i));
    }
    if n >= 2 {
        s.cnot(Bob, b(2), a(1));
    }
    s.send(Bob, &[a(1)]);
    for j in 2..=n.div_ceil(2) {
        s.cz(Alice, a(1), a(2 * j - 2));
        s.cnot(Alice, a(2 * j - 1), a(1));
        s.send(Alice, &[a(1)]);
        s.cnot(Bob, b(2 * j - 2), a(1));
        s.cz(Bob, a(1), b(2 * j - 1));
        if 2 * j <= n {
            s.cnot(Bob, b(2 * j), a(1));
        }
        s.send(Bob, &[a(1)]);
        s.cnot(Alice, a(2 * j - 1), a(1));
    }
    if n.is_multiple_of(2) {
        s.cz(Alice, a(1), a(n));
        s.send(Alice, &[a(1)]);
        s.cnot(Bob, b(n), a(1));
        s.send(Bob, &[a(1)]);
    }
    s
}

/// Computes `z ↦ z ⊕ IP_n(x, y)` into `ans` with qubits only and no
/// ancillas. Cost `n+2` for even `n`. Odd `n` runs the even protocol on the
/// first `n−1` coordinates, then ships `x_n` over and back.
pub fn build_clean_quantum_ip(n: usize) -> Result<ProtocolScript, BuildError> {
    if n == 0 {
        return Err(BuildError::EmptyInput);
    }
    let a = |i| (ALICE_INPUT, i);
    let b = |i| (BOB_INPUT, i);
    let ans = (ANSWER_REGISTER, 1);
    let even = n - n % 2;
    let mut s = Steps::default();
    if even >= 2 {
        s.send(Alice, &[a(1), a(2)]);
        for i in 1..=even {
            s.toffoli(Bob, a(2 - i % 2), b(i), ans);
        }
        s.h(Bob, a(1));
        s.cnot(Bob, a(1), a(2));
        s.send(Bob, &[a(1)]);
        for j in 2..=even / 2 {
            s.cz(Alice, a(1), a(2 * j - 1));
            s.cnot(Alice, a(2 * j), a(1));
            s.send(Alice, &[a(1)]);
            s.cnot(Bob, a(2), a(1));
            s.h(Bob, a(2));
            s.toffoli(Bob, a(1), b(2 * j), ans);
            s.toffoli(Bob, a(2), b(2 * j - 1), ans);
            s.h(Bob, a(2));
            s.cnot(Bob, a(2), a(1));
            s.send(Bob, &[a(1)]);
            s.cnot(Alice, a(2 * j), a(1));
            s.cz(Alice, a(1), a(2 * j - 1));
        }
        s.send(Bob, &[a(2)]);
        s.cnot(Alice, a(1), a(2));
        s.h(Alice, a(1));
    }
    if n % 2 == 1 {
        s.send(Alice, &[a(n)]);
        s.toffoli(Bob, a(n), b(n), ans);
        s.send(Bob, &[a(n)]);
    }
    let mut regs = inputs(n, RegKind::Qubit);
    regs.push(Register::new(ANSWER_REGISTER, 1, RegKind::Qubit, Bob));
    finish("clean-ip", n, AnswerMode::Register, regs, s)
}

/// Two qubits and `n+1` bits: Bob splits `ans` into an entangled pair
/// `(ans, E)`, sends `E`, the parties run the ancilla phase protocol over a
/// classical carrier `C` with every phase conditioned on their half of the
/// pair, then `E` comes back and Bob folds the pair into `ans`.
pub fn build_mixed_ip(n: usize) -> Result<ProtocolScript, BuildError> {
    if n == 0 {
        return Err(BuildError::EmptyInput);
    }
    let ans = (ANSWER_REGISTER, 1);
    let e = ("E", 1);
    let mut s = Steps::default();
    s.h(Bob, ans);
    s.cnot(Bob, ans, e);
    s.send(Bob, &[e]);
    phase_ip_with_carrier(&mut s, n, "C", |s, party, input| {
        // doubly controlled Z as H · Toffoli · H on the input qubit
        let half = if party == Alice { e } else { ans };
        s.h(party, input);
        s.toffoli(party, half, ("C", 1), input);
        s.h(party, input);
    });
    s.send(Alice, &[e]);
    s.cnot(Bob, ans, e);
    s.h(Bob, ans);
    let mut regs = inputs(n, RegKind::Qubit);
    regs.push(Register::new(ANSWER_REGISTER, 1, RegKind::Qubit, Bob));
    regs.push(Register::new("E", 1, RegKind::Qubit, Bob));
    regs.push(Register::new("C", 1, RegKind::Bit, Alice));
    finish("mixed-ip", n, AnswerMode::Register, regs, s)
}

pub fn default_block_size(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while k * k > n {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    k.max(1)
}

/// Classical block protocol with blocks of `k` bits (default `⌊√n⌋`).
///
/// Bob's first block `B.1..B.k` travels back and forth together with `ans`,
/// accumulating block inner products. The last block is zero-padded when
/// `k` does not divide `n`; padded positions are simply skipped.
pub fn build_classical_ip(n: usize, k: Option<usize>) -> Result<ProtocolScript, BuildError> {
    if n == 0 {
        return Err(BuildError::EmptyInput);
    }
    let k = k.unwrap_or_else(|| default_block_size(n));
    if k == 0 || k > n {
        return Err(BuildError::BlockSize { k, n });
    }
    let l = n / k;
    let blocks = l + 1;
    let ans = (ANSWER_REGISTER, 1);
    // position t of block `blk`, or None inside the padding
    let pos = |blk: usize, t: usize| {
        let i = (blk - 1) * k + t;
        (i <= n).then_some(i)
    };
    let carrier: Vec<(&str, usize)> = (1..=k).map(|t| (BOB_INPUT, t)).collect();
    let mut with_ans = carrier.clone();
    with_ans.push(ans);

    let mut s = Steps::default();
    // XOR the inner product of the carrier with block `blk` of `reg` into ans
    let ip_into_ans = |s: &mut Steps, party: Party, reg: &'static str, blk: usize| {
        for t in 1..=k {
            if let Some(i) = pos(blk, t) {
                s.toffoli(party, (BOB_INPUT, t), (reg, i), ans);
            }
        }
    };
    let xor_block = |s: &mut Steps, party: Party, reg: &'static str, blk: usize| {
        for t in 1..=k {
            if let Some(i) = pos(blk, t) {
                s.cnot(party, (reg, i), (BOB_INPUT, t));
            }
        }
    };

    for blk in (2..=blocks).step_by(2) {
        ip_into_ans(&mut s, Bob, BOB_INPUT, blk);
    }
    s.send(Bob, &with_ans);
    for blk in (1..=blocks).step_by(2) {
        ip_into_ans(&mut s, Alice, ALICE_INPUT, blk);
    }
    xor_block(&mut s, Alice, ALICE_INPUT, 2);
    s.send(Alice, &with_ans);
    let full_rounds = if blocks.is_multiple_of(2) { blocks / 2 } else { blocks.div_ceil(2) };
    for j in 2..=full_rounds {
        ip_into_ans(&mut s, Bob, BOB_INPUT, 2 * j - 2);
        xor_block(&mut s, Bob, BOB_INPUT, 2 * j - 1);
        s.send(Bob, &with_ans);
        xor_block(&mut s, Alice, ALICE_INPUT, 2 * j - 2);
        ip_into_ans(&mut s, Alice, ALICE_INPUT, 2 * j - 1);
        if 2 * j <= blocks {
            xor_block(&mut s, Alice, ALICE_INPUT, 2 * j);
        }
        s.send(Alice, &with_ans);
        xor_block(&mut s, Bob, BOB_INPUT, 2 * j - 1);
    }
    if blocks.is_multiple_of(2) {
        ip_into_ans(&mut s, Bob, BOB_INPUT, blocks);
        s.send(Bob, &carrier);
        xor_block(&mut s, Alice, ALICE_INPUT, blocks);
        s.send(Alice, &carrier);
    }

    let mut regs = inputs(n, RegKind::Bit);
    regs.push(Register::new(ANSWER_REGISTER, 1, RegKind::Bit, Bob));
    finish("classical-ip", n, AnswerMode::Register, regs, s)
}

/// Alice sends all of `A`; Bob XORs `x·y` into `ans`. Correct but unclean,
/// since `A` ends with Bob.
pub fn build_one_way(n: usize, kind: RegKind) -> Result<ProtocolScript, BuildError> {
    if n == 0 {
        return Err(BuildError::EmptyInput);
    }
    let mut s = Steps::default();
    s.send_regs(Alice, &[ALICE_INPUT]);
    for i in 1..=n {
        s.toffoli(Bob, (ALICE_INPUT, i), (BOB_INPUT, i), (ANSWER_REGISTER, 1));
    }
    let mut regs = inputs(n, kind);
    regs.push(Register::new(ANSWER_REGISTER, 1, kind, Bob));
    finish("one-way", n, AnswerMode::Register, regs, s)
}

/// Register that holds the wrapped script's answer before it is copied.
pub const WRAP_OUTPUT: &str = "out";

/// Runs `unclean`, copies its answer into a fresh `ans`, then runs it
/// backwards. Communication exactly doubles.
///
/// Scripts without an answer register are wrapped as forward + reverse,
/// which is the identity.
pub fn wrap_naive_clean(unclean: &ProtocolScript) -> Result<ProtocolScript, BuildError> {
    if unclean.layout.get(WRAP_OUTPUT).is_some() {
        return Err(BuildError::NameClash(WRAP_OUTPUT.into()));
    }
    let answer = unclean.layout.get(ANSWER_REGISTER).cloned();
    let plan = unclean.plan()?;
    if answer.is_some() {
        let q = unclean.layout.offset(ANSWER_REGISTER)?;
        if plan.final_owners[q] != Bob {
            return Err(BuildError::AnswerNotAtBob);
        }
    }
    let rename: BTreeMap<String, String> =
        [(ANSWER_REGISTER.to_string(), WRAP_OUTPUT.to_string())].into_iter().collect();
    let forward: Vec<Step> = unclean.steps.iter().map(|s| s.renamed(&rename)).collect();
    let mut steps = forward.clone();
    let mut registers: Vec<Register> = unclean
        .layout
        .registers()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if r.name == ANSWER_REGISTER {
                r.name = WRAP_OUTPUT.into();
            }
            r
        })
        .collect();
    let mode = match &answer {
        Some(reg) => {
            steps.push(Step::local(
                Bob,
                GateKind::Cnot,
                &[Coord::new(WRAP_OUTPUT, 1), Coord::new(ANSWER_REGISTER, 1)],
            ));
            registers.push(Register::new(ANSWER_REGISTER, 1, reg.kind, Bob));
            AnswerMode::Register
        }
        None => AnswerMode::None,
    };
    steps.extend(forward.iter().rev().map(Step::inverse));
    let name = format!("naive-wrap({})", unclean.name);
    Ok(ProtocolScript::new(&name, unclean.n, mode, RegisterLayout::new(registers)?, steps)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Alice's input is uniform; Bob's basis input should appear at Alice.
    #[serde(rename = "B→A")]
    BobToAlice,
    /// Bob's input is uniform; Alice's basis input should appear at Bob.
    #[serde(rename = "A→B")]
    AliceToBob,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperdenseReport {
    pub protocol: String,
    pub n: usize,
    pub direction: Direction,
    pub value: String,
    pub fidelity: f64,
}

/// Feeds a phase protocol a uniform superposition on one side and a basis
/// string `value` on the other, applies Hadamards to the superposed side
/// and returns the fidelity with `|value⟩_A|value⟩_B`.
pub fn superdense_extraction(
    script: &ProtocolScript,
    value: u64,
    direction: Direction,
) -> Result<SuperdenseReport, BuildError> {
    if script.answer_mode != AnswerMode::Phase {
        return Err(EngineError::Precondition("superdense extraction needs a phase-mode script".into()).into());
    }
    let n = script.n;
    let layout = Arc::new(script.layout.qubit_layout());
    let (spread, fixed) = match direction {
        Direction::BobToAlice => (ALICE_INPUT, BOB_INPUT),
        Direction::AliceToBob => (BOB_INPUT, ALICE_INPUT),
    };
    let start = script.layout.basis_index(&[(fixed, value)])?;
    let mut state = PureState::basis(layout.clone(), start);
    let spread_range = script.layout.register_indices(spread)?;
    for q in spread_range.clone() {
        state.apply(&Gate::h(q)).map_err(EngineError::from)?;
    }
    script.plan()?.execute_quantum(&mut state)?;
    for q in spread_range {
        state.apply(&Gate::h(q)).map_err(EngineError::from)?;
    }
    let target = script.layout.basis_index(&[(ALICE_INPUT, value), (BOB_INPUT, value)])?;
    let expected = PureState::basis(layout, target);
    Ok(SuperdenseReport {
        protocol: script.name.clone(),
        n,
        direction,
        value: (0..n).rev().map(|i| if (value >> i) & 1 == 1 { '1' } else { '0' }).collect(),
        fidelity: fidelity(&expected, &state).map_err(EngineError::from)?,
    })
}

/// Declared communication of a family at a given size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeclaredCost {
    pub qubits: usize,
    pub bits: usize,
}

impl DeclaredCost {
    pub fn total(&self) -> usize {
        self.qubits + self.bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolFamily {
    PhaseIp,
    PhaseIpNoanc,
    CleanIp,
    MixedIp,
    ClassicalIp,
    /// The wrapper applied to the one-way bit protocol.
    NaiveWrap,
    OneWay,
}

impl ProtocolFamily {
    pub const ALL: [ProtocolFamily; 7] = [
        ProtocolFamily::PhaseIp,
        ProtocolFamily::PhaseIpNoanc,
        ProtocolFamily::CleanIp,
        ProtocolFamily::MixedIp,
        ProtocolFamily::ClassicalIp,
        ProtocolFamily::NaiveWrap,
        ProtocolFamily::OneWay,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ProtocolFamily::PhaseIp => "phase-ip",
            ProtocolFamily::PhaseIpNoanc => "phase-ip-noanc",
            ProtocolFamily::CleanIp => "clean-ip",
            ProtocolFamily::MixedIp => "mixed-ip",
            ProtocolFamily::ClassicalIp => "classical-ip",
            ProtocolFamily::NaiveWrap => "naive-wrap",
            ProtocolFamily::OneWay => "one-way",
        }
    }

    /// Closed-form cost of the emitted script. `k` only matters for
    /// `classical-ip`.
    pub fn declared_cost(self, n: usize, k: Option<usize>) -> DeclaredCost {
        let q = |qubits| DeclaredCost { qubits, bits: 0 };
        match self {
            ProtocolFamily::PhaseIp => q(n + 1),
            ProtocolFamily::PhaseIpNoanc => q(if n.is_multiple_of(2) { n + 2 } else { n + 1 }),
            // with no even prefix, only x_n travels there and back
            ProtocolFamily::CleanIp if n == 1 => q(2),
            ProtocolFamily::CleanIp => q(if n.is_multiple_of(2) { n + 2 } else { n + 3 }),
            ProtocolFamily::MixedIp => DeclaredCost { qubits: 2, bits: n + 1 },
            ProtocolFamily::ClassicalIp => {
                let k = k.unwrap_or_else(|| default_block_size(n));
                let l = n / k;
                let bits = if (l + 1).is_multiple_of(2) { k * l + 3 * k + l + 1 } else { (l + 2) * (k + 1) };
                DeclaredCost { qubits: 0, bits }
            }
            ProtocolFamily::NaiveWrap => DeclaredCost { qubits: 0, bits: 2 * n },
            ProtocolFamily::OneWay => DeclaredCost { qubits: 0, bits: n },
        }
    }

    pub fn build(self, n: usize, k: Option<usize>) -> Result<ProtocolScript, BuildError> {
        match self {
            ProtocolFamily::PhaseIp => build_phase_ip(n, true),
            ProtocolFamily::PhaseIpNoanc => build_phase_ip(n, false),
            ProtocolFamily::CleanIp => build_clean_quantum_ip(n),
            ProtocolFamily::MixedIp => build_mixed_ip(n),
            ProtocolFamily::ClassicalIp => build_classical_ip(n, k),
            ProtocolFamily::NaiveWrap => wrap_naive_clean(&build_one_way(n, RegKind::Bit)?),
            ProtocolFamily::OneWay => build_one_way(n, RegKind::Bit),
        }
    }

    /// True for families meant to be clean.
    pub fn is_clean(self) -> bool {
        self != ProtocolFamily::OneWay
    }
}

impl fmt::Display for ProtocolFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ProtocolFamily {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolFamily::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| BuildError::UnknownFamily(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, verify_clean, Assignment, FinalState, VerifyOptions};
    use crate::TruthTable;

    fn ip(x: u64, y: u64) -> bool {
        (x & y).count_ones() % 2 == 1
    }

    fn exhaustive() -> VerifyOptions {
        VerifyOptions { superposition_samples: 8, ..VerifyOptions::default() }
    }

    #[test]
    fn declared_costs_match_scripts() {
        for family in ProtocolFamily::ALL {
            for n in 1..=9 {
                let script = family.build(n, None).unwrap();
                let c = script.cost();
                let d = family.declared_cost(n, None);
                assert_eq!((c.qubits(), c.bits()), (d.qubits, d.bits), "{family} n={n}");
            }
        }
    }

    #[test]
    fn classical_ip_costs() {
        assert_eq!(build_classical_ip(9, None).unwrap().cost().bits(), 22);
        assert_eq!(build_classical_ip(1, Some(1)).unwrap().cost().bits(), 6);
        // odd number of blocks: strictly below the even-case formula
        let c = build_classical_ip(4, None).unwrap().cost().bits();
        assert_eq!(c, 12);
        assert!(c < 2 * 2 + 3 * 2 + 2 + 1);
        for n in 2..=8 {
            for k in 1..=n {
                let script = build_classical_ip(n, Some(k)).unwrap();
                let d = ProtocolFamily::ClassicalIp.declared_cost(n, Some(k));
                assert_eq!(script.cost().bits(), d.bits, "n={n} k={k}");
            }
        }
        assert!(matches!(build_classical_ip(3, Some(4)), Err(BuildError::BlockSize { .. })));
        assert!(matches!(build_classical_ip(3, Some(0)), Err(BuildError::BlockSize { .. })));
    }

    #[test]
    fn builders_reject_empty_input() {
        assert_eq!(build_phase_ip(0, true).unwrap_err(), BuildError::EmptyInput);
        assert_eq!(build_clean_quantum_ip(0).unwrap_err(), BuildError::EmptyInput);
        assert_eq!(build_mixed_ip(0).unwrap_err(), BuildError::EmptyInput);
    }

    #[test]
    fn phase_examples() {
        let script = build_phase_ip(2, true).unwrap();
        for (x, y, sign) in [(0b11, 0b11, 1.0), (0b10, 0b10, -1.0)] {
            let out = run(&script, Assignment::Basis(vec![("A".into(), x), ("B".into(), y)])).unwrap();
            let FinalState::Quantum(state) = out.final_state else { panic!() };
            let idx = script.layout.basis_index(&[("A", x), ("B", y)]).unwrap();
            assert!((state.amplitude(idx).re - sign).abs() < 1e-12);
        }
        assert_eq!(build_phase_ip(2, false).unwrap().send_count(), 4);
    }

    #[test]
    fn every_clean_family_verifies_small_n() {
        for family in ProtocolFamily::ALL.into_iter().filter(|f| f.is_clean()) {
            for n in 1..=4 {
                let script = family.build(n, None).unwrap();
                let report = verify_clean(&script, &TruthTable::inner_product(n), &exhaustive()).unwrap();
                assert!(report.passed, "{family} n={n}: {report:?}");
            }
        }
    }

    #[test]
    fn classical_ip_every_block_size() {
        for n in 1..=7 {
            for k in 1..=n {
                let script = build_classical_ip(n, Some(k)).unwrap();
                let report = verify_clean(&script, &TruthTable::inner_product(n), &exhaustive()).unwrap();
                assert!(report.passed, "n={n} k={k}: {report:?}");
            }
        }
    }

    #[test]
    fn one_way_is_correct_but_unclean() {
        let script = build_one_way(3, RegKind::Bit).unwrap();
        let report = verify_clean(&script, &TruthTable::inner_product(3), &exhaustive()).unwrap();
        assert!(report.answers_correct);
        assert!(!report.passed);
        assert!(report.misplaced.iter().any(|c| c.starts_with("A.")));
        let out = run(&script, Assignment::Basis(vec![("A".into(), 0b101), ("B".into(), 0b111)])).unwrap();
        let FinalState::Classical(bits) = out.final_state else { panic!() };
        assert_eq!(*bits.last().unwrap(), ip(0b101, 0b111));
    }

    #[test]
    fn wrapper_doubles_and_cleans() {
        let one_way = build_one_way(5, RegKind::Bit).unwrap();
        assert_eq!(wrap_naive_clean(&one_way).unwrap().cost().bits(), 10);
        let phase = build_phase_ip(3, true).unwrap();
        let wrapped = wrap_naive_clean(&phase).unwrap();
        assert_eq!(wrapped.cost().total(), 2 * phase.cost().total());
        assert_eq!(wrapped.answer_mode, AnswerMode::None);
        let quantum_one_way = build_one_way(2, RegKind::Qubit).unwrap();
        let report = verify_clean(
            &wrap_naive_clean(&quantum_one_way).unwrap(),
            &TruthTable::inner_product(2),
            &exhaustive(),
        )
        .unwrap();
        assert!(report.passed);
    }

    #[test]
    fn wrapper_requires_answer_at_bob() {
        let mut steps = Steps::default();
        steps.send_regs(Bob, &[ANSWER_REGISTER]);
        let mut regs = inputs(1, RegKind::Bit);
        regs.push(Register::new(ANSWER_REGISTER, 1, RegKind::Bit, Bob));
        let script = finish("away", 1, AnswerMode::Register, regs, steps).unwrap();
        assert_eq!(wrap_naive_clean(&script).unwrap_err(), BuildError::AnswerNotAtBob);
    }

    #[test]
    fn superdense_twist_small() {
        for anc in [true, false] {
            let script = build_phase_ip(2, anc).unwrap();
            let r = superdense_extraction(&script, 0b01, Direction::BobToAlice).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-10);
            let r = superdense_extraction(&script, 0b10, Direction::AliceToBob).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn family_ids_round_trip() {
        for f in ProtocolFamily::ALL {
            assert_eq!(f.id().parse::<ProtocolFamily>().unwrap(), f);
        }
        assert!("nope".parse::<ProtocolFamily>().is_err());
    }
}
