use std::fmt;
use std::sync::Arc;

use oqasm_core::{nor_env, typecheck, Instr, SizeEnv, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Operand,
    /// Register that holds a loaded constant during the run; starts and ends at 0.
    Constant,
    Ancilla,
    Result,
}

#[derive(Clone, Debug)]
pub struct Register {
    pub var: Var,
    pub bits: usize,
    pub role: Role,
    /// Valid inputs are `0..bound`. Ancillae and results use 1.
    pub bound: u128,
}

pub type ClassicalFn = Arc<dyn Fn(&[u128]) -> Vec<u128> + Send + Sync>;

/// An oracle program with its declarations and intended classical meaning.
///
/// `classical_spec` maps the values of `inputs` (in order) to their expected
/// values after the program runs.
#[derive(Clone)]
pub struct OracleSpec {
    pub name: String,
    pub program: Instr,
    pub sizes: SizeEnv,
    pub inputs: Vec<Register>,
    pub classical_spec: ClassicalFn,
    /// True when the program only approximates `classical_spec`.
    pub approximate: bool,
}

impl fmt::Debug for OracleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleSpec")
            .field("name", &self.name)
            .field("sizes", &self.sizes)
            .field("inputs", &self.inputs)
            .finish_non_exhaustive()
    }
}

impl OracleSpec {
    pub fn qubits(&self) -> usize {
        self.sizes.values().sum()
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.inputs.iter().find(|r| r.var.name() == name)
    }

    /// Checks that the program typechecks from all-Nor back to all-Nor.
    pub fn validate(&self) -> Result<(), String> {
        let env = nor_env(&self.sizes);
        let out = typecheck(&self.sizes, &env, &self.program).map_err(|e| e.to_string())?;
        if out != env {
            return Err("oracle does not return every variable to Nor".into());
        }
        if !oqasm_core::neutral(&self.sizes, &self.program) {
            return Err("oracle is not shift-neutral".into());
        }
        Ok(())
    }

    pub fn eval(&self, inputs: &[u128]) -> Vec<u128> {
        (self.classical_spec)(inputs)
    }
}

/// Declares registers in order and packages a program with its classical function.
pub struct SpecBuilder {
    name: String,
    sizes: SizeEnv,
    inputs: Vec<Register>,
}

impl SpecBuilder {
    pub fn new(name: impl Into<String>) -> SpecBuilder {
        SpecBuilder {
            name: name.into(),
            sizes: SizeEnv::new(),
            inputs: Vec::new(),
        }
    }

    pub fn reg(&mut self, name: &str, bits: usize, role: Role, bound: u128) -> Var {
        let v = Var::new(name);
        assert!(bits >= 1, "register {name} has no qubits");
        self.sizes.insert(v, bits);
        self.inputs.push(Register { var: v, bits, role, bound });
        v
    }

    pub fn operand(&mut self, name: &str, bits: usize) -> Var {
        self.reg(name, bits, Role::Operand, pow2(bits))
    }

    pub fn ancilla(&mut self, name: &str, bits: usize) -> Var {
        self.reg(name, bits, Role::Ancilla, 1)
    }

    pub fn finish(
        self,
        program: Instr,
        approximate: bool,
        f: impl Fn(&[u128]) -> Vec<u128> + Send + Sync + 'static,
    ) -> OracleSpec {
        OracleSpec {
            name: self.name,
            program,
            sizes: self.sizes,
            inputs: self.inputs,
            classical_spec: Arc::new(f),
            approximate,
        }
    }
}

/// 2^bits, saturating at u128::MAX for 128 bits.
pub fn pow2(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

pub fn mask(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}
