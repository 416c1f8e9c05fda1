use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::layout::{Carrier, Coord, Party, RegKind, RegisterLayout};
use super::EngineError;
use crate::statecore::{Gate, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerMode {
    /// `|z⟩_ans ↦ |z ⊕ f(x,y)⟩_ans`.
    Register,
    /// `|x⟩|y⟩ ↦ (−1)^{f(x,y)} |x⟩|y⟩`.
    Phase,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Local { party: Party, gate: GateKind, targets: Vec<Coord> },
    Send { from: Party, to: Party, carriers: Vec<Carrier> },
}

impl Step {
    pub fn local(party: Party, gate: GateKind, targets: &[Coord]) -> Self {
        Step::Local { party, gate, targets: targets.to_vec() }
    }

    pub fn send(from: Party, carriers: Vec<Carrier>) -> Self {
        Step::Send { from, to: from.other(), carriers }
    }

    /// The step that undoes this one.
    pub fn inverse(&self) -> Step {
        match self {
            Step::Local { party, gate, targets } => {
                Step::Local { party: *party, gate: gate.inverse(), targets: targets.clone() }
            }
            Step::Send { from, to, carriers } => {
                Step::Send { from: *to, to: *from, carriers: carriers.clone() }
            }
        }
    }

    pub fn is_send(&self) -> bool {
        matches!(self, Step::Send { .. })
    }

    /// Rewrites register names through `map`; unmapped names are kept.
    pub fn renamed(&self, map: &BTreeMap<String, String>) -> Step {
        let rename = |name: &str| map.get(name).cloned().unwrap_or_else(|| name.to_string());
        match self {
            Step::Local { party, gate, targets } => Step::Local {
                party: *party,
                gate: *gate,
                targets: targets.iter().map(|c| Coord { reg: rename(&c.reg), bit: c.bit }).collect(),
            },
            Step::Send { from, to, carriers } => Step::Send {
                from: *from,
                to: *to,
                carriers: carriers
                    .iter()
                    .map(|c| match c {
                        Carrier::Register(name) => Carrier::Register(rename(name)),
                        Carrier::Bit(coord) => Carrier::Bit(Coord { reg: rename(&coord.reg), bit: coord.bit }),
                    })
                    .collect(),
            },
        }
    }
}

/// Communication totals of a script. `received_by_alice` and
/// `received_by_bob` are the `|a|` and `|b|` of the transcript bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub qubits_to_bob: usize,
    pub qubits_to_alice: usize,
    pub bits_to_bob: usize,
    pub bits_to_alice: usize,
    pub rounds: usize,
    pub received_by_alice: usize,
    pub received_by_bob: usize,
}

impl CostReport {
    pub fn qubits(&self) -> usize {
        self.qubits_to_bob + self.qubits_to_alice
    }

    pub fn bits(&self) -> usize {
        self.bits_to_bob + self.bits_to_alice
    }

    pub fn total(&self) -> usize {
        self.qubits() + self.bits()
    }

    fn add(&mut self, to: Party, kind: RegKind, width: usize) {
        match (to, kind) {
            (Party::Bob, RegKind::Qubit) => self.qubits_to_bob += width,
            (Party::Alice, RegKind::Qubit) => self.qubits_to_alice += width,
            (Party::Bob, RegKind::Bit) => self.bits_to_bob += width,
            (Party::Alice, RegKind::Bit) => self.bits_to_alice += width,
        }
        match to {
            Party::Alice => self.received_by_alice += width,
            Party::Bob => self.received_by_bob += width,
        }
    }
}

/// A two-party protocol: a register layout plus an ordered list of local
/// gates and register transfers.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolScript {
    pub name: String,
    pub n: usize,
    pub answer_mode: AnswerMode,
    pub layout: RegisterLayout,
    pub steps: Vec<Step>,
}

/// A resolved script step.
#[derive(Debug, Clone)]
pub enum PlannedOp {
    Gate { party: Party, gate: Gate },
    Send {
        from: Party,
        to: Party,
        qubits: Vec<usize>,
        kinds: Vec<RegKind>,
        /// Owner of every position immediately before this transfer.
        owners_before: Vec<Party>,
    },
}

/// A script resolved to global indices with ownership checked at every
/// step. Ownership never depends on inputs, so a plan that resolves is
/// guaranteed to respect locality on every run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub ops: Vec<PlannedOp>,
    pub width: usize,
    pub kinds: Vec<RegKind>,
    pub initial_owners: Vec<Party>,
    pub final_owners: Vec<Party>,
}

impl ProtocolScript {
    /// Builds a script and checks locality and gate/register compatibility.
    pub fn new(
        name: &str,
        n: usize,
        answer_mode: AnswerMode,
        layout: RegisterLayout,
        steps: Vec<Step>,
    ) -> Result<Self, EngineError> {
        let script = ProtocolScript { name: name.to_string(), n, answer_mode, layout, steps };
        script.validate()?;
        Ok(script)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.plan().map(|_| ())
    }

    /// Resolves every step, enforcing that local gates only touch positions
    /// the acting party holds and that sends only move held positions.
    pub fn plan(&self) -> Result<Plan, EngineError> {
        let layout = &self.layout;
        let kinds = layout.kinds();
        let mut owners = layout.initial_owners();
        let mut ops = Vec::with_capacity(self.steps.len());
        for (step_no, step) in self.steps.iter().enumerate() {
            match step {
                Step::Local { party, gate, targets } => {
                    let indices: Vec<usize> =
                        targets.iter().map(|c| layout.index_of(c)).collect::<Result<_, _>>()?;
                    for (c, &q) in targets.iter().zip(&indices) {
                        if owners[q] != *party {
                            return Err(EngineError::Locality {
                                step: step_no,
                                party: *party,
                                coord: c.to_string(),
                            });
                        }
                    }
                    let resolved = Gate::new(*gate, indices.clone())
                        .map_err(|source| EngineError::Gate { step: step_no, source })?;
                    check_gate_kinds(step_no, gate, targets, &indices, &kinds)?;
                    ops.push(PlannedOp::Gate { party: *party, gate: resolved });
                }
                Step::Send { from, to, carriers } => {
                    if from == to {
                        return Err(EngineError::SelfSend { step: step_no });
                    }
                    if carriers.is_empty() {
                        return Err(EngineError::EmptySend { step: step_no });
                    }
                    let mut qubits = Vec::new();
                    for carrier in carriers {
                        for q in layout.indices_of(carrier)? {
                            if qubits.contains(&q) {
                                return Err(EngineError::DuplicateCarrier {
                                    step: step_no,
                                    coord: layout.coord_of(q).to_string(),
                                });
                            }
                            if owners[q] != *from {
                                return Err(EngineError::SendNotOwned {
                                    step: step_no,
                                    party: *from,
                                    coord: layout.coord_of(q).to_string(),
                                });
                            }
                            qubits.push(q);
                        }
                    }
                    let owners_before = owners.clone();
                    for &q in &qubits {
                        owners[q] = *to;
                    }
                    ops.push(PlannedOp::Send {
                        from: *from,
                        to: *to,
                        kinds: qubits.iter().map(|&q| kinds[q]).collect(),
                        qubits,
                        owners_before,
                    });
                }
            }
        }
        Ok(Plan {
            ops,
            width: layout.total_width(),
            kinds,
            initial_owners: layout.initial_owners(),
            final_owners: owners,
        })
    }

    /// Static communication count; never depends on inputs.
    pub fn cost(&self) -> CostReport {
        let mut report = CostReport::default();
        for step in &self.steps {
            if let Step::Send { to, carriers, .. } = step {
                report.rounds += 1;
                for carrier in carriers {
                    if let Some(reg) = self.layout.get(carrier.register_name()) {
                        let width = match carrier {
                            Carrier::Register(_) => reg.width,
                            Carrier::Bit(_) => 1,
                        };
                        report.add(*to, reg.kind, width);
                    }
                }
            }
        }
        report
    }

    pub fn send_count(&self) -> usize {
        self.steps.iter().filter(|s| s.is_send()).count()
    }
}

fn check_gate_kinds(
    step: usize,
    gate: &GateKind,
    targets: &[Coord],
    indices: &[usize],
    kinds: &[RegKind],
) -> Result<(), EngineError> {
    let is_bit = |i: usize| kinds[indices[i]] == RegKind::Bit;
    let offending = match gate {
        GateKind::H | GateKind::Z | GateKind::Phase(_) => (0..indices.len()).find(|&i| is_bit(i)),
        // a classically controlled Z is fine, but a phase between two bits is not
        GateKind::Cz if is_bit(0) && is_bit(1) => Some(0),
        // a bit may only be flipped by permutation gates; it can always act as a control
        _ => None,
    };
    match offending {
        Some(i) => Err(EngineError::BitRegisterGate {
            step,
            gate: gate.name(),
            coord: targets[i].to_string(),
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::layout::Register;

    fn layout() -> RegisterLayout {
        RegisterLayout::new(vec![
            Register::new("A", 2, RegKind::Qubit, Party::Alice),
            Register::new("B", 2, RegKind::Qubit, Party::Bob),
            Register::new("C", 1, RegKind::Bit, Party::Alice),
        ])
        .unwrap()
    }

    #[test]
    fn locality_is_enforced() {
        let steps = vec![Step::local(Party::Bob, GateKind::Cz, &[Coord::new("A", 1), Coord::new("B", 1)])];
        let err = ProtocolScript::new("bad", 2, AnswerMode::None, layout(), steps).unwrap_err();
        assert!(matches!(err, EngineError::Locality { step: 0, party: Party::Bob, .. }));
    }

    #[test]
    fn ownership_moves_with_sends() {
        let steps = vec![
            Step::send(Party::Alice, vec![Carrier::bit("A", 1)]),
            Step::local(Party::Bob, GateKind::Cz, &[Coord::new("A", 1), Coord::new("B", 1)]),
            Step::local(Party::Bob, GateKind::Cz, &[Coord::new("A", 2), Coord::new("B", 1)]),
        ];
        let err = ProtocolScript::new("s", 2, AnswerMode::None, layout(), steps).unwrap_err();
        assert!(matches!(err, EngineError::Locality { step: 2, .. }));
    }

    #[test]
    fn send_of_unowned_register_is_rejected() {
        let steps = vec![Step::send(Party::Alice, vec![Carrier::register("B")])];
        let err = ProtocolScript::new("s", 2, AnswerMode::None, layout(), steps).unwrap_err();
        assert!(matches!(err, EngineError::SendNotOwned { step: 0, .. }));
    }

    #[test]
    fn bit_registers_reject_quantum_gates() {
        let steps = vec![Step::local(Party::Alice, GateKind::H, &[Coord::new("C", 1)])];
        let err = ProtocolScript::new("s", 2, AnswerMode::None, layout(), steps).unwrap_err();
        assert!(matches!(err, EngineError::BitRegisterGate { .. }));
        // classically controlled phase is allowed
        let steps = vec![Step::local(Party::Alice, GateKind::Cz, &[Coord::new("C", 1), Coord::new("A", 1)])];
        assert!(ProtocolScript::new("s", 2, AnswerMode::None, layout(), steps).is_ok());
    }

    #[test]
    fn cost_counts_widths_by_kind_and_direction() {
        let steps = vec![
            Step::send(Party::Alice, vec![Carrier::register("A"), Carrier::register("C")]),
            Step::send(Party::Bob, vec![Carrier::bit("A", 2)]),
        ];
        let script = ProtocolScript::new("s", 2, AnswerMode::None, layout(), steps).unwrap();
        let cost = script.cost();
        assert_eq!(cost.qubits_to_bob, 2);
        assert_eq!(cost.bits_to_bob, 1);
        assert_eq!(cost.qubits_to_alice, 1);
        assert_eq!(cost.received_by_bob, 3);
        assert_eq!(cost.received_by_alice, 1);
        assert_eq!(cost.rounds, 2);
        let empty = ProtocolScript::new("e", 2, AnswerMode::None, layout(), vec![]).unwrap();
        assert_eq!(empty.cost(), CostReport::default());
    }
}
