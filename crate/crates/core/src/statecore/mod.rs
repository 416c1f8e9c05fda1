//! Dense linear-algebra kernel: pure states, gates, reduced density
//! matrices, von Neumann entropies and (conditional) mutual information.
//!
//! Everything is exact dense simulation in double precision. Information
//! quantities are reported in bits.

mod density;
mod gate;
mod state;

use thiserror::Error;

pub use density::{
    conditional_mutual_information, conditional_mutual_information_named, entropy,
    mutual_information, partial_trace, partial_trace_named, subsystem_entropy, DensityMatrix,
    EIGEN_CLAMP, HERMITIAN_TOLERANCE,
};
pub use gate::{Gate, GateKind};
pub use state::{apply_gate, fidelity, PureState, QubitLayout, NORM_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("qubit {qubit} out of range for a {width}-qubit system")]
    OutOfRange { qubit: usize, width: usize },
    #[error("qubit {0} appears more than once")]
    DuplicateTarget(usize),
    #[error("{gate} expects {expected} target(s), got {got}")]
    Arity { gate: &'static str, expected: usize, got: usize },
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),
    #[error("register `{0}` has zero width")]
    EmptyRegister(String),
    #[error("subsystems overlap on qubit {0}")]
    Overlap(usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("states live on different layouts")]
    LayoutMismatch,
    #[error("length {len} does not match a {qubits}-qubit system")]
    BadLength { len: usize, qubits: usize },
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("{0} is not a classical (permutation) gate")]
    NotClassical(&'static str),
}
