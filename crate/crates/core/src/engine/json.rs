use serde::{Deserialize, Serialize};

use super::layout::{Carrier, Coord, Party, Register, RegisterLayout};
use super::script::{AnswerMode, ProtocolScript, Step};
use super::EngineError;
use crate::statecore::GateKind;

/// On-disk form of a [`ProtocolScript`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptDoc {
    pub name: String,
    pub n: usize,
    pub answer_mode: AnswerMode,
    pub registers: Vec<Register>,
    pub steps: Vec<StepDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum StepDoc {
    Gate {
        party: Party,
        gate: String,
        targets: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    Send { from: Party, to: Party, regs: Vec<String> },
}

impl From<&Step> for StepDoc {
    fn from(step: &Step) -> Self {
        match step {
            Step::Local { party, gate, targets } => StepDoc::Gate {
                party: *party,
                gate: gate.name().to_string(),
                targets: targets.iter().map(Coord::to_string).collect(),
                theta: match gate {
                    GateKind::Phase(theta) => Some(*theta),
                    _ => None,
                },
            },
            Step::Send { from, to, carriers } => StepDoc::Send {
                from: *from,
                to: *to,
                regs: carriers.iter().map(Carrier::to_string).collect(),
            },
        }
    }
}

impl StepDoc {
    fn to_step(&self) -> Result<Step, EngineError> {
        match self {
            StepDoc::Gate { party, gate, targets, theta } => {
                let kind = GateKind::from_name(gate, *theta)
                    .ok_or_else(|| EngineError::Json(format!("unknown gate `{gate}`")))?;
                if theta.is_some() && !matches!(kind, GateKind::Phase(_)) {
                    return Err(EngineError::Json(format!("gate `{gate}` takes no angle")));
                }
                let targets = targets.iter().map(|t| t.parse()).collect::<Result<Vec<Coord>, _>>()?;
                Ok(Step::Local { party: *party, gate: kind, targets })
            }
            StepDoc::Send { from, to, regs } => Ok(Step::Send {
                from: *from,
                to: *to,
                carriers: regs.iter().map(|r| r.parse()).collect::<Result<_, _>>()?,
            }),
        }
    }
}

impl ProtocolScript {
    pub fn to_doc(&self) -> ScriptDoc {
        ScriptDoc {
            name: self.name.clone(),
            n: self.n,
            answer_mode: self.answer_mode,
            registers: self.layout.registers().to_vec(),
            steps: self.steps.iter().map(StepDoc::from).collect(),
        }
    }

    /// Loads a document, re-checking every layout and locality invariant.
    pub fn from_doc(doc: &ScriptDoc) -> Result<Self, EngineError> {
        let layout = RegisterLayout::new(doc.registers.clone())?;
        let steps = doc.steps.iter().map(StepDoc::to_step).collect::<Result<_, _>>()?;
        ProtocolScript::new(&doc.name, doc.n, doc.answer_mode, layout, steps)
    }
}

pub fn script_to_json(script: &ProtocolScript) -> String {
    serde_json::to_string_pretty(&script.to_doc()).expect("plain data serializes")
}

pub fn script_from_json(text: &str) -> Result<ProtocolScript, EngineError> {
    let doc: ScriptDoc = serde_json::from_str(text).map_err(|e| EngineError::Json(e.to_string()))?;
    ProtocolScript::from_doc(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
  "name": "toy",
  "n": 1,
  "answer_mode": "phase",
  "registers": [
    {"name": "A", "width": 1, "kind": "qubit", "owner": "A"},
    {"name": "B", "width": 1, "kind": "qubit", "owner": "B"}
  ],
  "steps": [
    {"op": "send", "from": "A", "to": "B", "regs": ["A"]},
    {"op": "gate", "party": "B", "gate": "CZ", "targets": ["A.1", "B.1"]},
    {"op": "gate", "party": "B", "gate": "PHASE", "targets": ["B.1"], "theta": 0.5},
    {"op": "send", "from": "B", "to": "A", "regs": ["A.1"]}
  ]
}"#;

    #[test]
    fn canonical_document_round_trips() {
        let script = script_from_json(DOC).unwrap();
        assert_eq!(script.send_count(), 2);
        let again: serde_json::Value = serde_json::from_str(&script_to_json(&script)).unwrap();
        let original: serde_json::Value = serde_json::from_str(DOC).unwrap();
        assert_eq!(again, original);
    }

    #[test]
    fn load_rejects_bad_documents() {
        let unowned = DOC.replace(r#""from": "A", "to": "B", "regs": ["A"]"#, r#""from": "A", "to": "B", "regs": ["B"]"#);
        assert!(matches!(script_from_json(&unowned), Err(EngineError::SendNotOwned { .. })));
        assert!(matches!(script_from_json("{\"name\": 1}"), Err(EngineError::Json(_))));
        let bad_gate = DOC.replace("\"CZ\"", "\"FOO\"");
        assert!(matches!(script_from_json(&bad_gate), Err(EngineError::Json(_))));
        let bad_coord = DOC.replace("\"A.1\", \"B.1\"", "\"A.7\", \"B.1\"");
        assert!(matches!(script_from_json(&bad_coord), Err(EngineError::BadCoordinate(_))));
    }
}
