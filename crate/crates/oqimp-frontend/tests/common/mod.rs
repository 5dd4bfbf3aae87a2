//! Shared check: compiled circuits, simulated, agree with the interpreter.

use oqasm_core::Var;
use oqasm_sim::{decode_nor, encode_inputs, Tape};
use oqimp_frontend::{compile, interpret, load, CompileOptions, Inputs, VarRole};
use oracle_lib::Flavor;

#[allow(dead_code)]
pub const FLAVORS: [Flavor; 3] = [Flavor::Qft, Flavor::Aqft, Flavor::Toff];

/// Compile with `consts`, run on `qin`, and compare against the interpreter.
pub fn agree(src: &str, sz: usize, flavor: Flavor, consts: &Inputs, qin: &Inputs) {
    let (prog, _) = load(src).unwrap();
    let mut all = consts.clone();
    all.extend(qin.clone());
    let expect = interpret(&prog, sz, &all).unwrap();
    let opts = CompileOptions { flavor, sz, consts: consts.clone() };
    let c = compile(&prog, &opts).unwrap();
    let assign: Vec<(Var, u128)> = c
        .globals
        .iter()
        .flat_map(|(g, vs)| {
            let vals = qin.get(g).cloned().unwrap_or_else(|| vec![0; vs.len()]);
            vs.iter().zip(vals).map(|(v, x)| (*v, x as u128)).collect::<Vec<_>>()
        })
        .collect();
    let mut st = encode_inputs(&c.sizes, assign).unwrap();
    if let Some(p) = c.program() {
        Tape::compile(&c.sizes, &p).unwrap().run(&mut st).unwrap();
    }
    for (g, vs) in &c.globals {
        let got: Vec<u64> = vs.iter().map(|v| decode_nor(&st, *v).unwrap() as u64).collect();
        assert_eq!(&got, &expect.globals[g], "global {g} ({flavor})");
    }
    for e in &c.manifest.vars {
        let v = Var::new(&e.oqasm);
        let got = decode_nor(&st, v).unwrap() as u64;
        match e.role {
            VarRole::Output => assert_eq!(Some(got), expect.ret, "return value ({flavor})"),
            VarRole::Local | VarRole::Scratch => assert_eq!(got, 0, "{} not restored ({flavor})", e.oqasm),
            _ => {}
        }
    }
    if c.output.is_none() {
        assert_eq!(c.manifest.ret_const, expect.ret);
    }
    for (g, v) in &c.manifest.consts {
        assert_eq!(v, &expect.globals[g]);
    }
}

#[allow(dead_code)]
pub fn inputs(kv: &[(&str, u64)]) -> Inputs {
    kv.iter().map(|(k, v)| (k.to_string(), vec![*v])).collect()
}
