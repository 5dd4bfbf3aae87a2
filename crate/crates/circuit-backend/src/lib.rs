//! Translation of oracle-assembly programs to gate circuits over physical
//! qubits, lowering, OpenQASM 2.0 output, resource counts and a dense
//! state-vector simulator used as the reference for translation checks.

pub mod dense;
pub mod gate;
pub mod lower;
pub mod map;
pub mod qasm;
pub mod resources;
pub mod translate;

pub use dense::{basis_state, dense_sim, dense_sim_capped, embed_state, max_amp_diff, DEFAULT_CAP};
pub use gate::{Circuit, Gate};
pub use lower::{lower, Level};
pub use map::QubitMap;
pub use num_complex::Complex64;
pub use qasm::{emit_qasm, parse_qasm};
pub use resources::{count_resources, ResourceReport};
pub use translate::{ctrl, ctrl_peeled, qft_gates, translate, translate_default};

use oqasm_core::Position;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("unknown position {0}")]
    UnknownPosition(Position),
    #[error("malformed instruction: {0}")]
    BadInstr(String),
    #[error("invalid gate: {0}")]
    BadGate(String),
    #[error("control {0} collides with {1}")]
    ControlCollision(usize, Gate),
    #[error("cannot add a control to {0}")]
    Uncontrollable(Gate),
    #[error("{qubits} qubits exceed the simulator cap of {cap}")]
    TooLarge { qubits: usize, cap: usize },
    #[error("state vector has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("qasm line {line}: {msg}")]
    Qasm { line: usize, msg: String },
}
