//! OQIMP: a small imperative language for reversible oracles.
//!
//! Source goes through [`parse`], in-place function expansion, the mode
//! checker and the `inv` discipline check; the result can be run directly
//! with [`interpret`] or lowered to OQASM with [`compile`].

pub mod ast;
pub mod check;
pub mod compile;
pub mod corpus;
pub mod interp;
pub mod parse;
pub mod value;

pub use ast::{Base, Mode, Program};
pub use check::{check_inv, typecheck_program, InvError, TypeError, TypeSummary};
pub use compile::{compile, CompileError, CompileOptions, Compiled, Manifest, VarEntry, VarRole};
pub use interp::{interpret, Inputs, Outcome, RunError};
pub use parse::{expand, parse, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FrontendError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error("inv error: {0}")]
    Inv(#[from] InvError),
    #[error("compile error: {0}")]
    Compile(#[from] CompileError),
    #[error("runtime error: {0}")]
    Run(#[from] RunError),
}

/// Parse, expand and check a program.
pub fn load(src: &str) -> Result<(Program, TypeSummary), FrontendError> {
    let prog = expand(&parse(src)?)?;
    let summary = typecheck_program(&prog)?;
    check_inv(&prog)?;
    Ok((prog, summary))
}
