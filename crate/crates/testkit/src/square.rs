//! Dense-simulation checks of the circuit translation, and state-level
//! properties of the oracle-assembly semantics.

use circuit_backend::{dense_sim, embed_state, lower, max_amp_diff, translate, BackendError, Circuit, Complex64, Level, QubitMap};
use oqasm_core::{invert, nor_env, typecheck, well_formed_state, Instr, OqasmState, QubitValue, SizeEnv};
use oracle_lib::{OracleSpec, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Per-amplitude tolerance for dense comparisons.
pub const AMP_TOL: f64 = 1e-9;

pub type Translator = dyn Fn(&SizeEnv, &QubitMap, &Instr) -> Result<(QubitMap, Circuit), BackendError> + Sync;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareReport {
    pub cases: usize,
    pub max_diff: f64,
    pub failures: usize,
    /// First failing case, described.
    pub first_failure: Option<String>,
}

impl SquareReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn new() -> SquareReport {
        SquareReport { cases: 0, max_diff: 0.0, failures: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, diff: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if diff.is_finite() {
            self.max_diff = self.max_diff.max(diff);
        } else {
            self.max_diff = f64::INFINITY;
        }
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn merge(&mut self, o: SquareReport) {
        self.cases += o.cases;
        self.max_diff = self.max_diff.max(o.max_diff);
        self.failures += o.failures;
        if self.first_failure.is_none() {
            self.first_failure = o.first_failure;
        }
    }
}

/// Nor basis state with random bits and random per-qubit global phases.
/// With a spec, operand registers stay below their bounds and every other
/// register is 0.
pub fn random_nor_state(sizes: &SizeEnv, spec: Option<&OracleSpec>, rng: &mut impl Rng) -> OqasmState {
    let mut st = OqasmState::zero(sizes);
    let m = st.mask();
    for (&v, &s) in sizes {
        let value: u128 = match spec.and_then(|sp| sp.inputs.iter().find(|r| r.var == v)) {
            Some(r) if r.role == Role::Operand => rng.gen_range(0..r.bound.min(1u128 << s.min(127))),
            Some(_) => 0,
            None => rng.gen::<u128>() & oracle_lib::spec::mask(s),
        };
        for (k, q) in st.var_qubits_mut(v).iter_mut().enumerate() {
            *q = QubitValue::nor(k < 128 && (value >> k) & 1 == 1);
            q.phase = rng.gen::<u128>() & m;
        }
    }
    st
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// dense(lower(translate ι))·embed(φ) against embed(interpret(ι, φ)) under γ′
/// on `cases` random states.
pub fn check_translation_with(
    tr: &Translator,
    sizes: &SizeEnv,
    prog: &Instr,
    spec: Option<&OracleSpec>,
    cases: usize,
    seed: u64,
    level: Level,
) -> Result<SquareReport, BackendError> {
    let map0 = QubitMap::initial(sizes);
    let (map1, circ) = tr(sizes, &map0, prog)?;
    let circ = lower(&circ, level);
    let mut rep = SquareReport::new();
    for i in 0..cases {
        let st = random_nor_state(sizes, spec, &mut rng_for(seed, i as u64));
        let lhs = dense_sim(&circ, &embed_state(&st, &map0)?)?;
        let out = oqasm_sim::interpret(sizes, prog, &st).map_err(|e| BackendError::BadInstr(e.to_string()))?;
        let rhs = embed_state(&out, &map1)?;
        let d = max_amp_diff(&lhs, &rhs);
        rep.record(d <= AMP_TOL, d, || format!("case {i}: amplitude difference {d:.3e}"));
    }
    Ok(rep)
}

pub fn check_translation(sizes: &SizeEnv, prog: &Instr, cases: usize, seed: u64) -> Result<SquareReport, BackendError> {
    check_translation_with(&translate, sizes, prog, None, cases, seed, Level::Base)
}

pub fn check_spec_translation(spec: &OracleSpec, cases: usize, seed: u64) -> Result<SquareReport, BackendError> {
    check_translation_with(&translate, &spec.sizes, &spec.program, Some(spec), cases, seed, Level::Base)
}

/// The translated circuit applied to a random superposition of 2–4 embedded
/// basis states equals the same superposition of per-state semantics.
pub fn check_linearity(
    sizes: &SizeEnv,
    prog: &Instr,
    spec: Option<&OracleSpec>,
    cases: usize,
    seed: u64,
) -> Result<SquareReport, BackendError> {
    let map0 = QubitMap::initial(sizes);
    let (map1, circ) = translate(sizes, &map0, prog)?;
    let circ = lower(&circ, Level::Macro);
    let d = 1usize << map0.num_qubits();
    let mut rep = SquareReport::new();
    for i in 0..cases {
        let mut rng = rng_for(seed, i as u64);
        let terms = rng.gen_range(2..=4);
        let mut input = vec![Complex64::new(0.0, 0.0); d];
        let mut expect = vec![Complex64::new(0.0, 0.0); d];
        let mut coeffs = Vec::new();
        for _ in 0..terms {
            coeffs.push(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in coeffs {
            let c = c / norm;
            let st = random_nor_state(sizes, spec, &mut rng);
            let out = oqasm_sim::interpret(sizes, prog, &st).map_err(|e| BackendError::BadInstr(e.to_string()))?;
            for (acc, a) in input.iter_mut().zip(embed_state(&st, &map0)?) {
                *acc += c * a;
            }
            for (acc, a) in expect.iter_mut().zip(embed_state(&out, &map1)?) {
                *acc += c * a;
            }
        }
        let got = dense_sim(&circ, &input)?;
        let diff = max_amp_diff(&got, &expect);
        rep.record(diff <= AMP_TOL, diff, || format!("case {i}: {terms}-term superposition off by {diff:.3e}"));
    }
    Ok(rep)
}

/// interpret(ι; invert ι, φ) = φ bit-exactly, including phases.
pub fn check_reversibility(sizes: &SizeEnv, prog: &Instr, spec: Option<&OracleSpec>, cases: usize, seed: u64) -> SquareReport {
    let round = Instr::Seq(prog.clone().into(), invert(prog).into());
    let mut rep = SquareReport::new();
    let tape = oqasm_sim::Tape::compile(sizes, &round);
    for i in 0..cases {
        let st = random_nor_state(sizes, spec, &mut rng_for(seed, i as u64));
        let ok = match &tape {
            Ok(t) => {
                let mut out = st.clone();
                t.run(&mut out).is_ok() && out == st
            }
            Err(_) => false,
        };
        rep.record(ok, if ok { 0.0 } else { 1.0 }, || format!("case {i}: state not restored"));
    }
    rep
}

/// A well-typed program maps a well-formed state to one well-formed for its
/// output environment, without a runtime error.
pub fn check_soundness(sizes: &SizeEnv, prog: &Instr, cases: usize, seed: u64) -> SquareReport {
    let env = nor_env(sizes);
    let mut rep = SquareReport::new();
    let Ok(out_env) = typecheck(sizes, &env, prog) else {
        rep.record(false, 1.0, || "program does not typecheck".into());
        return rep;
    };
    for i in 0..cases {
        let st = random_nor_state(sizes, None, &mut rng_for(seed, i as u64));
        let ok = well_formed_state(sizes, &env, &st)
            && matches!(oqasm_sim::interpret(sizes, prog, &st), Ok(out) if well_formed_state(sizes, &out_env, &out));
        rep.record(ok, if ok { 0.0 } else { 1.0 }, || format!("case {i}: ill-formed result"));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use oqasm_core::{declare, Position};

    #[test]
    fn single_x_square() {
        let mut s = SizeEnv::new();
        let x = declare(&mut s, "tk_sq_x", 2);
        let r = check_translation(&s, &Instr::X(Position::new(x, 1)), 8, 3).unwrap();
        assert!(r.passed() && r.cases == 8);
    }

    #[test]
    fn skip_round_trips() {
        let mut s = SizeEnv::new();
        let x = declare(&mut s, "tk_sq_y", 3);
        assert!(check_reversibility(&s, &Instr::Skip(Position::new(x, 0)), None, 5, 1).passed());
    }
}
