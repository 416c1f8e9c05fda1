use std::sync::Arc;

use serde::Serialize;

use super::layout::{Party, RegKind};
use super::script::{CostReport, Plan, PlannedOp, ProtocolScript};
use super::EngineError;
use crate::statecore::PureState;

/// One transferred message. `values` is filled by the classical backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub from: Party,
    pub to: Party,
    pub carriers: Vec<String>,
    pub width: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<String>,
}

pub type Transcript = Vec<Message>;

/// Initial data for [`run`].
#[derive(Debug, Clone)]
pub enum Assignment {
    /// Integer value per register; unnamed registers start at zero.
    Basis(Vec<(String, u64)>),
    State(PureState),
}

#[derive(Debug, Clone)]
pub enum FinalState {
    Quantum(PureState),
    Classical(Vec<bool>),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: FinalState,
    pub cost: CostReport,
    pub transcript: Transcript,
    pub final_owners: Vec<Party>,
}

fn message(script: &ProtocolScript, from: Party, to: Party, qubits: &[usize], values: Option<String>) -> Message {
    Message {
        from,
        to,
        carriers: qubits.iter().map(|&q| script.layout.coord_of(q).to_string()).collect(),
        width: qubits.len(),
        values,
    }
}

impl Plan {
    /// Applies every gate to `state`, which may carry extra trailing
    /// qubits (e.g. a purification) that the script never touches.
    pub fn execute_quantum(&self, state: &mut PureState) -> Result<(), EngineError> {
        if state.num_qubits() < self.width {
            return Err(EngineError::Precondition(format!(
                "state has {} qubits, script needs {}",
                state.num_qubits(),
                self.width
            )));
        }
        for op in &self.ops {
            if let PlannedOp::Gate { gate, .. } = op {
                state.apply(gate)?;
            }
        }
        Ok(())
    }

    /// Runs the plan on a bit assignment, recording message values.
    pub fn execute_classical(&self, bits: &mut [bool], record: Option<&mut Vec<Vec<bool>>>) -> Result<(), EngineError> {
        if self.kinds.contains(&RegKind::Qubit) {
            return Err(EngineError::ClassicalBackend(
                "script declares qubit registers".into(),
            ));
        }
        if bits.len() != self.width {
            return Err(EngineError::Precondition(format!(
                "assignment has {} bits, script needs {}",
                bits.len(),
                self.width
            )));
        }
        let mut record = record;
        for op in &self.ops {
            match op {
                PlannedOp::Gate { gate, .. } => gate.apply_bits(bits)?,
                PlannedOp::Send { qubits, .. } => {
                    if let Some(rec) = record.as_deref_mut() {
                        rec.push(qubits.iter().map(|&q| bits[q]).collect());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sends(&self) -> impl Iterator<Item = (Party, Party, &[usize])> {
        self.ops.iter().filter_map(|op| match op {
            PlannedOp::Send { from, to, qubits, .. } => Some((*from, *to, qubits.as_slice())),
            _ => None,
        })
    }
}

/// Runs on the statevector backend.
pub fn run_quantum(script: &ProtocolScript, mut state: PureState) -> Result<RunOutput, EngineError> {
    let plan = script.plan()?;
    if state.num_qubits() != plan.width {
        return Err(EngineError::Precondition(format!(
            "state has {} qubits, layout has {}",
            state.num_qubits(),
            plan.width
        )));
    }
    plan.execute_quantum(&mut state)?;
    let transcript = plan.sends().map(|(f, t, q)| message(script, f, t, q, None)).collect();
    Ok(RunOutput {
        final_state: FinalState::Quantum(state),
        cost: script.cost(),
        transcript,
        final_owners: plan.final_owners,
    })
}

/// Runs on the reversible-bit backend; only permutation gates are allowed.
pub fn run_classical(script: &ProtocolScript, mut bits: Vec<bool>) -> Result<RunOutput, EngineError> {
    let plan = script.plan()?;
    let mut values = Vec::new();
    plan.execute_classical(&mut bits, Some(&mut values))?;
    let transcript = plan
        .sends()
        .zip(values)
        .map(|((f, t, q), v)| {
            let s: String = v.iter().map(|&b| if b { '1' } else { '0' }).collect();
            message(script, f, t, q, Some(s))
        })
        .collect();
    Ok(RunOutput {
        final_state: FinalState::Classical(bits),
        cost: script.cost(),
        transcript,
        final_owners: plan.final_owners,
    })
}

/// Runs a script. Basis assignments use the classical backend when every
/// register is a bit and the statevector backend otherwise.
pub fn run(script: &ProtocolScript, assignment: Assignment) -> Result<RunOutput, EngineError> {
    match assignment {
        Assignment::Basis(values) => {
            let refs: Vec<(&str, u64)> = values.iter().map(|(n, v)| (n.as_str(), *v)).collect();
            if script.layout.is_classical() {
                run_classical(script, script.layout.bit_assignment(&refs)?)
            } else {
                let idx = script.layout.basis_index(&refs)?;
                let layout = Arc::new(script.layout.qubit_layout());
                run_quantum(script, PureState::basis(layout, idx))
            }
        }
        Assignment::State(state) => run_quantum(script, state),
    }
}
