//! Differential testing of oracles against their classical functions.

use std::time::Instant;

use oqasm_sim::{decode_nor, encode_inputs, Tape};
use oracle_lib::spec::{mask, pow2};
use oracle_lib::{OracleSpec, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Default seed when `SEED` is unset.
pub const DEFAULT_SEED: u64 = 0x5eed_0f_0a_c1e5;

/// Witnesses kept per report.
const MAX_WITNESSES: usize = 5;

/// `SEED` from the environment, or `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var("SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    /// Operands are drawn as multiples of this value.
    pub multiple_of: u128,
    /// Largest accepted circular error per register (0 = exact).
    pub tolerance: u128,
}

impl TrialConfig {
    pub fn new(trials: usize, seed: u64) -> TrialConfig {
        TrialConfig { trials, seed, multiple_of: 1, tolerance: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub inputs: Vec<u128>,
    pub expected: Vec<u128>,
    pub got: Vec<u128>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub name: String,
    pub trials: usize,
    pub seed: u64,
    /// Largest circular distance seen on any register.
    pub max_abs_error: u128,
    pub failures: usize,
    pub witnesses: Vec<Witness>,
    pub wall_secs: f64,
}

impl ErrorReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// min(|a − b|, 2ⁿ − |a − b|).
pub fn circular_distance(a: u128, b: u128, bits: usize) -> u128 {
    let m = mask(bits);
    let d = a.wrapping_sub(b) & m;
    let e = b.wrapping_sub(a) & m;
    d.min(e)
}

/// A spec compiled once for repeated simulation.
pub struct Runner<'a> {
    pub spec: &'a OracleSpec,
    tape: Tape,
}

impl<'a> Runner<'a> {
    pub fn new(spec: &'a OracleSpec) -> Runner<'a> {
        let tape = Tape::compile(&spec.sizes, &spec.program).expect("oracle program compiles for simulation");
        Runner { spec, tape }
    }

    /// Encode, simulate and decode every register in declaration order.
    pub fn run(&self, inputs: &[u128]) -> Vec<u128> {
        let s = self.spec;
        let mut st = encode_inputs(&s.sizes, s.inputs.iter().map(|r| r.var).zip(inputs.iter().copied())).expect("inputs fit");
        self.tape.run(&mut st).expect("simulation");
        s.inputs.iter().map(|r| decode_nor(&st, r.var).expect("register ends in Nor")).collect()
    }
}

/// Random inputs for trial `i`: operands uniform below their bound, every
/// other register 0.
pub fn trial_inputs(spec: &OracleSpec, cfg: &TrialConfig, i: usize) -> Vec<u128> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(i as u64);
    spec.inputs
        .iter()
        .map(|r| match r.role {
            Role::Operand => {
                let bound = r.bound.min(pow2(r.bits));
                let step = cfg.multiple_of.max(1);
                let slots = (bound - 1) / step + 1;
                let k = if slots == u128::MAX { rng.gen::<u128>() } else { rng.gen_range(0..slots) };
                k * step
            }
            _ => 0,
        })
        .collect()
}

fn worst(spec: &OracleSpec, a: &[u128], b: &[u128]) -> u128 {
    spec.inputs.iter().zip(a.iter().zip(b)).map(|(r, (x, y))| circular_distance(*x, *y, r.bits)).max().unwrap_or(0)
}

/// Clear operand bits greedily (high to low) while the failure persists.
fn shrink(spec: &OracleSpec, runner: &Runner, tol: u128, inputs: &[u128]) -> Witness {
    let fails = |v: &[u128]| {
        let got = runner.run(v);
        let want = spec.eval(v);
        worst(spec, &got, &want) > tol
    };
    let mut cur = inputs.to_vec();
    for (k, r) in spec.inputs.iter().enumerate() {
        if r.role != Role::Operand {
            continue;
        }
        for b in (0..r.bits.min(128)).rev() {
            if cur[k] >> b & 1 == 1 {
                let mut cand = cur.clone();
                cand[k] &= !(1u128 << b);
                if fails(&cand) {
                    cur = cand;
                }
            }
        }
    }
    Witness { trial: 0, expected: spec.eval(&cur), got: runner.run(&cur), inputs: cur }
}

/// Run `cfg.trials` random trials of `spec` against its classical function.
pub fn run_pbt(spec: &OracleSpec, cfg: &TrialConfig) -> ErrorReport {
    let t0 = Instant::now();
    let runner = Runner::new(spec);
    let results: Vec<(usize, u128, Vec<u128>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let inputs = trial_inputs(spec, cfg, i);
            let got = runner.run(&inputs);
            let want = spec.eval(&inputs);
            (i, worst(spec, &got, &want), inputs)
        })
        .collect();
    let max_abs_error = results.iter().map(|r| r.1).max().unwrap_or(0);
    let bad: Vec<&(usize, u128, Vec<u128>)> = results.iter().filter(|r| r.1 > cfg.tolerance).collect();
    let witnesses = bad
        .iter()
        .take(MAX_WITNESSES)
        .map(|(i, _, inputs)| Witness { trial: *i, ..shrink(spec, &runner, cfg.tolerance, inputs) })
        .collect();
    ErrorReport {
        name: spec.name.clone(),
        trials: cfg.trials,
        seed: cfg.seed,
        max_abs_error,
        failures: bad.len(),
        witnesses,
        wall_secs: t0.elapsed().as_secs_f64(),
    }
}

/// Re-run a witness; true when it still fails.
pub fn replay(spec: &OracleSpec, w: &Witness, tolerance: u128) -> bool {
    let runner = Runner::new(spec);
    worst(spec, &runner.run(&w.inputs), &spec.eval(&w.inputs)) > tolerance
}

/// Max circular distance between the simulated outputs of two specs with the
/// same register signature. Trials over `cfg.tolerance` count as failures.
pub fn max_error(exact: &OracleSpec, approx: &OracleSpec, cfg: &TrialConfig) -> ErrorReport {
    let t0 = Instant::now();
    assert_eq!(
        exact.inputs.iter().map(|r| r.bits).collect::<Vec<_>>(),
        approx.inputs.iter().map(|r| r.bits).collect::<Vec<_>>(),
        "specs must share a register signature"
    );
    let (re, ra) = (Runner::new(exact), Runner::new(approx));
    let results: Vec<(usize, u128, Vec<u128>, Vec<u128>, Vec<u128>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let inputs = trial_inputs(exact, cfg, i);
            let want = re.run(&inputs);
            let got = ra.run(&inputs);
            (i, worst(exact, &got, &want), inputs, want, got)
        })
        .collect();
    let bad: Vec<_> = results.iter().filter(|r| r.1 > cfg.tolerance).collect();
    ErrorReport {
        name: format!("{} vs {}", approx.name, exact.name),
        trials: cfg.trials,
        seed: cfg.seed,
        max_abs_error: results.iter().map(|r| r.1).max().unwrap_or(0),
        failures: bad.len(),
        witnesses: bad
            .iter()
            .take(MAX_WITNESSES)
            .map(|(i, _, inputs, want, got)| Witness { trial: *i, inputs: inputs.clone(), expected: want.clone(), got: got.clone() })
            .collect(),
        wall_secs: t0.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular() {
        assert_eq!(circular_distance(0, 15, 4), 1);
        assert_eq!(circular_distance(3, 5, 4), 2);
        assert_eq!(circular_distance(0, 8, 4), 8);
        assert_eq!(circular_distance(u128::MAX, 0, 128), 1);
    }

    #[test]
    fn zero_trials_pass() {
        let s = oracle_lib::rz_adder(4);
        let r = run_pbt(&s, &TrialConfig::new(0, 1));
        assert!(r.passed());
        assert_eq!(r.trials, 0);
    }

    #[test]
    fn inputs_are_deterministic_and_aligned() {
        let s = oracle_lib::rz_adder(8);
        let cfg = TrialConfig { multiple_of: 4, ..TrialConfig::new(10, 7) };
        for i in 0..10 {
            let a = trial_inputs(&s, &cfg, i);
            assert_eq!(a, trial_inputs(&s, &cfg, i));
            assert!(a.iter().all(|x| x % 4 == 0 && *x < 256));
        }
    }
}
