//! Oracle assembly: instruction trees over variables in the computational
//! (Nor) or Fourier (Phi n) basis, the basis checker, inversion, and a
//! text format.

pub mod analysis;
pub mod invert;
pub mod state;
pub mod syntax;
pub mod text;
pub mod typecheck;
pub mod var;

pub use analysis::{fresh, neutral, Perm};
pub use invert::invert;
pub use state::{well_formed_state, OqasmState, Payload, QubitValue};
pub use syntax::{nor_env, Basis, Instr, Position, SizeEnv, TypeEnv};
pub use text::{parse_instr, parse_program, print_instr, print_program, ParseError};
pub use typecheck::{typecheck, TypeError};
pub use var::Var;

/// Declare `name` with `size` qubits and return its handle.
pub fn declare(sizes: &mut SizeEnv, name: &str, size: usize) -> Var {
    let v = Var::new(name);
    sizes.insert(v, size);
    v
}
