use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::layout::{Party, ALICE_INPUT, ANSWER_REGISTER, BOB_INPUT};
use super::script::{AnswerMode, CostReport, Plan, ProtocolScript};
use super::EngineError;
use crate::boolfn::TruthTable;
use crate::statecore::PureState;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    /// `None` checks every basis input; `Some(s)` checks `s` random ones.
    pub basis_samples: Option<usize>,
    /// Random two-term superpositions checked for linear consistency.
    pub superposition_samples: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Require ancillas to end with their initial owner.
    pub strict_ownership: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            basis_samples: None,
            superposition_samples: 32,
            tolerance: 1e-10,
            seed: 0,
            strict_ownership: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cleanliness {
    Clean,
    Unclean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputCase {
    pub x: String,
    pub y: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CleanlinessReport {
    pub protocol: String,
    pub n: usize,
    pub backend: &'static str,
    pub mode: Cleanliness,
    pub passed: bool,
    pub inputs_checked: usize,
    /// Largest `1 − Re⟨expected|final⟩` over basis inputs (0 is exact,
    /// 2 is a flipped sign).
    pub worst_deviation: f64,
    pub worst_input: Option<InputCase>,
    pub answers_correct: bool,
    pub answer_failures: usize,
    pub first_answer_failure: Option<InputCase>,
    pub superposition_samples: usize,
    pub superposition_max_deviation: f64,
    pub ownership_ok: bool,
    /// Input or answer positions that end away from home.
    pub misplaced: Vec<String>,
    /// Ancilla positions whose final owner differs from the initial one.
    pub moved_ancillas: BTreeMap<String, Party>,
    pub cost: CostReport,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn bitstring(value: u64, width: usize) -> String {
    (0..width).rev().map(|i| if (value >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Basis input `(x, y, z)`; `z` is unused in phase mode.
#[derive(Debug, Clone, Copy)]
struct Case {
    x: u64,
    y: u64,
    z: u64,
}

impl Case {
    fn describe(&self, n: usize, mode: AnswerMode) -> InputCase {
        InputCase {
            x: bitstring(self.x, n),
            y: bitstring(self.y, n),
            z: (mode == AnswerMode::Register).then_some(self.z as u8),
        }
    }
}

struct Context<'a> {
    script: &'a ProtocolScript,
    f: &'a TruthTable,
    plan: Plan,
}

impl Context<'_> {
    fn input_index(&self, case: Case) -> usize {
        let mut values = vec![(ALICE_INPUT, case.x), (BOB_INPUT, case.y)];
        if self.script.answer_mode == AnswerMode::Register {
            values.push((ANSWER_REGISTER, case.z));
        }
        self.script.layout.basis_index(&values).expect("inputs fit their registers")
    }

    /// Expected final basis index and sign.
    fn expected(&self, case: Case) -> (usize, f64) {
        let fx = self.f.get(case.x, case.y) as u64;
        match self.script.answer_mode {
            AnswerMode::Register => (self.input_index(Case { z: case.z ^ fx, ..case }), 1.0),
            _ => (self.input_index(case), if fx == 1 { -1.0 } else { 1.0 }),
        }
    }
}

fn check_preconditions(script: &ProtocolScript, f: &TruthTable) -> Result<(), EngineError> {
    if script.answer_mode == AnswerMode::None {
        return Err(EngineError::Precondition(
            "script declares no answer mode; nothing to verify".into(),
        ));
    }
    if f.n() != script.n {
        return Err(EngineError::Precondition(format!(
            "function has n = {}, script has n = {}",
            f.n(),
            script.n
        )));
    }
    for name in [ALICE_INPUT, BOB_INPUT] {
        match script.layout.get(name) {
            Some(reg) if reg.width == script.n => {}
            _ => {
                return Err(EngineError::Precondition(format!(
                    "script needs an input register `{name}` of width {}",
                    script.n
                )))
            }
        }
    }
    if script.answer_mode == AnswerMode::Register && script.layout.get(ANSWER_REGISTER).is_none() {
        return Err(EngineError::Precondition("answer mode `register` needs an `ans` register".into()));
    }
    Ok(())
}

/// Checks that `script` computes `f` cleanly.
///
/// Every basis pair `(x, y)` (and both `z` in register mode) must end in
/// exactly the expected basis state, including its sign, with every other
/// position back at zero and inputs/answer held by their home party. In the
/// quantum backend random two-term superpositions are checked as well.
///
/// Failures are reported in the returned report; only precondition
/// mismatches (answer mode, register shapes) are errors.
pub fn verify_clean(
    script: &ProtocolScript,
    f: &TruthTable,
    options: &VerifyOptions,
) -> Result<CleanlinessReport, EngineError> {
    check_preconditions(script, f)?;
    let classical = script.layout.is_classical();
    let mut report = CleanlinessReport {
        protocol: script.name.clone(),
        n: script.n,
        backend: if classical { "classical" } else { "quantum" },
        mode: Cleanliness::Unclean,
        passed: false,
        inputs_checked: 0,
        worst_deviation: 0.0,
        worst_input: None,
        answers_correct: true,
        answer_failures: 0,
        first_answer_failure: None,
        superposition_samples: 0,
        superposition_max_deviation: 0.0,
        ownership_ok: true,
        misplaced: Vec::new(),
        moved_ancillas: BTreeMap::new(),
        cost: script.cost(),
        tolerance: options.tolerance,
        error: None,
    };

    let n = script.n;
    let z_values: &[u64] = if script.answer_mode == AnswerMode::Register { &[0, 1] } else { &[0] };
    let side = 1u64 << n;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let cases: Vec<Case> = match options.basis_samples {
        None => (0..side)
            .flat_map(|x| (0..side).flat_map(move |y| z_values.iter().map(move |&z| Case { x, y, z })))
            .collect(),
        Some(s) => (0..s)
            .map(|_| Case {
                x: rng.gen_range(0..side),
                y: rng.gen_range(0..side),
                z: z_values[rng.gen_range(0..z_values.len())],
            })
            .collect(),
    };

    let plan = match script.plan() {
        Ok(plan) => plan,
        Err(err) => {
            report.error = Some(err.to_string());
            report.worst_deviation = 1.0;
            report.worst_input = cases.first().map(|c| c.describe(n, script.answer_mode));
            report.answers_correct = false;
            return Ok(report);
        }
    };

    // Ownership is input-independent.
    let home: Vec<Option<Party>> = script
        .layout
        .registers()
        .iter()
        .flat_map(|r| {
            let h = match r.name.as_str() {
                ALICE_INPUT => Some(Party::Alice),
                BOB_INPUT | ANSWER_REGISTER => Some(Party::Bob),
                _ => None,
            };
            std::iter::repeat_n(h, r.width)
        })
        .collect();
    for q in 0..plan.width {
        let coord = script.layout.coord_of(q).to_string();
        match home[q] {
            Some(p) if plan.final_owners[q] != p => report.misplaced.push(coord),
            None if plan.final_owners[q] != plan.initial_owners[q] => {
                report.moved_ancillas.insert(coord.clone(), plan.final_owners[q]);
                if options.strict_ownership {
                    report.misplaced.push(coord);
                }
            }
            _ => {}
        }
    }
    report.ownership_ok = report.misplaced.is_empty();
    let penalty = if report.ownership_ok { 0.0 } else { 1.0 };

    let ctx = Context { script, f, plan };
    let mut record = |report: &mut CleanlinessReport, case: Case, deviation: f64, answer_ok: bool| {
        report.inputs_checked += 1;
        let deviation = deviation.max(penalty);
        if report.worst_input.is_none() || deviation > report.worst_deviation {
            report.worst_deviation = deviation;
            report.worst_input = Some(case.describe(n, script.answer_mode));
        }
        if !answer_ok {
            report.answers_correct = false;
            report.answer_failures += 1;
            if report.first_answer_failure.is_none() {
                report.first_answer_failure = Some(case.describe(n, script.answer_mode));
            }
        }
    };

    let outcome = if classical {
        verify_classical(&ctx, &cases, &mut report, &mut record)
    } else {
        verify_quantum(&ctx, &cases, options, &mut rng, &mut report, &mut record)
    };
    if let Err(err) = outcome {
        report.error = Some(err.to_string());
        report.worst_deviation = report.worst_deviation.max(1.0);
    }

    report.passed = report.error.is_none()
        && report.ownership_ok
        && report.answers_correct
        && report.worst_deviation <= options.tolerance
        && report.superposition_max_deviation <= options.tolerance;
    report.mode = if report.passed { Cleanliness::Clean } else { Cleanliness::Unclean };
    Ok(report)
}

type Recorder<'r> = dyn FnMut(&mut CleanlinessReport, Case, f64, bool) + 'r;

fn verify_classical(
    ctx: &Context<'_>,
    cases: &[Case],
    report: &mut CleanlinessReport,
    record: &mut Recorder<'_>,
) -> Result<(), EngineError> {
    let m = ctx.plan.width;
    let ans_pos = ctx.script.layout.register_indices(ANSWER_REGISTER).ok().map(|r| r.start);
    let mut bits = vec![false; m];
    for &case in cases {
        let start = ctx.input_index(case);
        for (q, b) in bits.iter_mut().enumerate() {
            *b = (start >> (m - 1 - q)) & 1 == 1;
        }
        ctx.plan.execute_classical(&mut bits, None)?;
        let got = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let (expected, sign) = ctx.expected(case);
        // a classical run can never produce a sign
        let deviation = if got == expected && sign > 0.0 { 0.0 } else { 1.0 };
        let answer_ok = match ans_pos {
            Some(p) if ctx.script.answer_mode == AnswerMode::Register => {
                bits[p] == ((expected >> (m - 1 - p)) & 1 == 1)
            }
            _ => deviation == 0.0,
        };
        record(report, case, deviation, answer_ok);
    }
    Ok(())
}

fn verify_quantum(
    ctx: &Context<'_>,
    cases: &[Case],
    options: &VerifyOptions,
    rng: &mut ChaCha8Rng,
    report: &mut CleanlinessReport,
    record: &mut Recorder<'_>,
) -> Result<(), EngineError> {
    let layout = Arc::new(ctx.script.layout.qubit_layout());
    let m = ctx.plan.width;
    let ans_mask = ctx
        .script
        .layout
        .register_indices(ANSWER_REGISTER)
        .ok()
        .map(|r| 1usize << (m - 1 - r.start));
    let register_mode = ctx.script.answer_mode == AnswerMode::Register;
    for &case in cases {
        let mut state = PureState::basis(layout.clone(), ctx.input_index(case));
        ctx.plan.execute_quantum(&mut state)?;
        let (expected, sign) = ctx.expected(case);
        let overlap = state.amplitude(expected) * sign;
        let deviation = 1.0 - overlap.re;
        let answer_ok = match ans_mask {
            Some(mask) if register_mode => {
                let want = expected & mask;
                let p: f64 = state
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i & mask == want)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                p >= 1.0 - options.tolerance
            }
            _ => deviation <= options.tolerance,
        };
        record(report, case, deviation, answer_ok);
    }

    let side = 1u64 << ctx.script.n;
    let z_max = if register_mode { 2 } else { 1 };
    for _ in 0..options.superposition_samples {
        let mut pick = || Case { x: rng.gen_range(0..side), y: rng.gen_range(0..side), z: rng.gen_range(0..z_max) };
        let (c1, c2) = (pick(), pick());
        let (i1, i2) = (ctx.input_index(c1), ctx.input_index(c2));
        if i1 == i2 {
            continue;
        }
        let alpha = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let beta = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm < 1e-3 {
            continue;
        }
        let (alpha, beta) = (alpha / norm, beta / norm);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m];
        amps[i1] = alpha;
        amps[i2] = beta;
        let mut state = PureState::from_amplitudes(layout.clone(), amps)?;
        ctx.plan.execute_quantum(&mut state)?;
        let (e1, s1) = ctx.expected(c1);
        let (e2, s2) = ctx.expected(c2);
        let overlap = alpha.conj() * s1 * state.amplitude(e1) + beta.conj() * s2 * state.amplitude(e2);
        report.superposition_samples += 1;
        report.superposition_max_deviation = report.superposition_max_deviation.max(1.0 - overlap.re);
    }
    Ok(())
}
