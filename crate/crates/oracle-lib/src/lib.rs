//! Arithmetic oracles as oracle-assembly programs.
//!
//! Every constructor returns an [`OracleSpec`]: the program, its variable
//! declarations, register roles and the classical function it implements.
//! Registers are little-endian (offset 0 is the least significant bit).
//! The lower-level gadget functions work on caller-supplied variables so
//! they can be composed (the front end uses them directly).

use std::fmt;
use std::str::FromStr;

pub mod compare;
pub mod divmod;
pub mod gates;
pub mod modular;
pub mod mult;
pub mod qft;
pub mod registry;
pub mod spec;
pub mod toff;

pub use compare::{comparator, CmpForm};
pub use divmod::{div_iterations, div_mod};
pub use modular::{mod_add_const, mod_mult_const};
pub use mult::{multiplier, multiplier_const};
pub use qft::{aqft_adder, rz_adder, rz_adder_const, rz_const_sub, rz_sub, rz_sub_const};
pub use registry::{build, Params, OPERATORS};
pub use spec::{OracleSpec, Register, Role};
pub use toff::{toff_adder, toff_adder_const, toff_const_sub, toff_sub, toff_sub_const};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Qft,
    Aqft,
    Toff,
}

impl FromStr for Flavor {
    type Err = String;
    fn from_str(s: &str) -> Result<Flavor, String> {
        match s.to_ascii_lowercase().as_str() {
            "qft" => Ok(Flavor::Qft),
            "aqft" => Ok(Flavor::Aqft),
            "toff" | "classical" => Ok(Flavor::Toff),
            other => Err(format!("unknown flavor {other}")),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Qft => "qft",
            Flavor::Aqft => "aqft",
            Flavor::Toff => "toff",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("division by zero")]
    ZeroDivisor,
    #[error("constant {c} is not coprime to {modulus}")]
    NotCoprime { c: u128, modulus: u128 },
    #[error("{0}")]
    BadParam(String),
    #[error("unknown operator {0}")]
    UnknownOperator(String),
}
