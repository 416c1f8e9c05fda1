//! Protocol scripts and their execution.
//!
//! A [`ProtocolScript`] is a register layout plus a list of local gates and
//! transfers. Ownership is tracked per position, so sending a single bit of
//! a register is allowed. Scripts run on a statevector backend or, when
//! every register is classical, on a reversible-bit backend.

mod json;
mod layout;
mod run;
mod script;
mod verify;

use thiserror::Error;

use crate::statecore::StateError;

pub use json::{script_from_json, script_to_json, ScriptDoc, StepDoc};
pub use layout::{
    Carrier, Coord, Party, RegKind, Register, RegisterLayout, ALICE_INPUT, ANSWER_REGISTER, BOB_INPUT,
};
pub use run::{run, run_classical, run_quantum, Assignment, FinalState, Message, RunOutput, Transcript};
pub use script::{AnswerMode, CostReport, Plan, PlannedOp, ProtocolScript, Step};
pub use verify::{verify_clean, Cleanliness, CleanlinessReport, InputCase, VerifyOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("bad coordinate `{0}`")]
    BadCoordinate(String),
    #[error("step {step}: {party} acts on {coord}, which it does not hold")]
    Locality { step: usize, party: Party, coord: String },
    #[error("step {step}: {party} sends {coord}, which it does not hold")]
    SendNotOwned { step: usize, party: Party, coord: String },
    #[error("step {step}: a party cannot send to itself")]
    SelfSend { step: usize },
    #[error("step {step}: send with no carriers")]
    EmptySend { step: usize },
    #[error("step {step}: {coord} is sent twice in one message")]
    DuplicateCarrier { step: usize, coord: String },
    #[error("step {step}: {source}")]
    Gate { step: usize, source: StateError },
    #[error("step {step}: {gate} cannot act on classical position {coord}")]
    BitRegisterGate { step: usize, gate: &'static str, coord: String },
    #[error("classical backend: {0}")]
    ClassicalBackend(String),
    #[error("value does not fit register `{register}` of width {width}")]
    WidthMismatch { register: String, width: usize },
    #[error("state needs {needed} amplitudes, budget is {limit}")]
    AmplitudeBudget { needed: u128, limit: u128 },
    #[error("{0}")]
    Precondition(String),
    #[error("malformed script document: {0}")]
    Json(String),
    #[error(transparent)]
    State(#[from] StateError),
}
