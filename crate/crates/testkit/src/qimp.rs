//! Simulation of compiled imperative programs.

use std::collections::BTreeMap;

use oqasm_core::Var;
use oqasm_sim::{decode_nor, encode_inputs, Tape};
use oqimp_frontend::{Compiled, Inputs, VarRole};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QimpRun {
    /// Q globals after the run.
    pub globals: BTreeMap<String, Vec<u64>>,
    /// Value of the output register, or the compile-time result.
    pub ret: Option<u64>,
    /// Locals and scratch registers that did not return to 0.
    pub dirty: Vec<String>,
}

/// A compiled program prepared for repeated simulation.
pub struct QimpRunner<'a> {
    pub compiled: &'a Compiled,
    tape: Option<Tape>,
}

impl<'a> QimpRunner<'a> {
    pub fn new(compiled: &'a Compiled) -> Result<QimpRunner<'a>, String> {
        let tape = match compiled.program() {
            Some(p) => Some(Tape::compile(&compiled.sizes, &p).map_err(|e| e.to_string())?),
            None => None,
        };
        Ok(QimpRunner { compiled, tape })
    }

    /// Run with values for the Q globals (missing ones are 0).
    pub fn run(&self, q_inputs: &Inputs) -> Result<QimpRun, String> {
        let c = self.compiled;
        let mut assign: Vec<(Var, u128)> = Vec::new();
        for (g, vs) in &c.globals {
            if let Some(vals) = q_inputs.get(g) {
                if vals.len() != vs.len() {
                    return Err(format!("{g} expects {} values, got {}", vs.len(), vals.len()));
                }
                assign.extend(vs.iter().zip(vals).map(|(v, x)| (*v, *x as u128)));
            }
        }
        if let Some(bad) = q_inputs.keys().find(|k| !c.globals.contains_key(*k)) {
            return Err(format!("{bad} is not a Q global of the program"));
        }
        let mut st = encode_inputs(&c.sizes, assign).map_err(|e| e.to_string())?;
        if let Some(t) = &self.tape {
            t.run(&mut st).map_err(|e| e.to_string())?;
        }
        let dec = |v: Var| decode_nor(&st, v).map(|x| x as u64).map_err(|e| e.to_string());
        let mut globals = BTreeMap::new();
        for (g, vs) in &c.globals {
            globals.insert(g.clone(), vs.iter().map(|v| dec(*v)).collect::<Result<Vec<_>, _>>()?);
        }
        let ret = match c.output {
            Some(o) => Some(dec(o)?),
            None => c.manifest.ret_const,
        };
        let mut dirty = Vec::new();
        for e in &c.manifest.vars {
            if matches!(e.role, VarRole::Local | VarRole::Scratch) && dec(Var::new(&e.oqasm))? != 0 {
                dirty.push(e.oqasm.clone());
            }
        }
        Ok(QimpRun { globals, ret, dirty })
    }
}
