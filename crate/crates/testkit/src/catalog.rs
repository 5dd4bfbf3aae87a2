//! Operator instances exercised by the suites and the command line.

use oracle_lib::spec::pow2;
use oracle_lib::{build, Flavor, OracleError, OracleSpec, Params, OPERATORS};

/// Flavors that change the construction of `op`.
pub fn flavors(op: &str) -> &'static [Flavor] {
    match op {
        "div_mod" => &[Flavor::Qft, Flavor::Aqft, Flavor::Toff],
        "cmp_lt_const" | "cmp_lt" | "cmp_eq_const" | "cmp_eq" | "mult" | "mult_const" | "mod_add_const" | "mod_mult_const" => {
            &[Flavor::Qft, Flavor::Toff]
        }
        _ => &[Flavor::Qft],
    }
}

/// Constant and modulus used for `op` at `bits`: an odd constant with
/// high bits set, and a modulus coprime to it close to 2^(bits−1).
pub fn default_params(op: &str, bits: usize, flavor: Flavor) -> Params {
    let c = (0x5DEE_CE66_D5DE_ECE6_6Du128 & (pow2(bits) - 1)) | 1;
    let modulus = match op {
        "div_mod" => (pow2(bits) / 3).max(1),
        _ => {
            let mut m = (pow2(bits.saturating_sub(1)) + 1).max(2);
            while gcd(c % m, m) != 1 {
                m += 2;
            }
            m
        }
    };
    Params { bits, c: Some(c), modulus: Some(modulus), flavor: Some(flavor), drop: None }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Every operator in every relevant flavor at `bits`.
pub fn all_instances(bits: usize) -> Result<Vec<OracleSpec>, OracleError> {
    let mut v = Vec::new();
    for op in OPERATORS {
        for &f in flavors(op) {
            v.push(build(op, &default_params(op, bits, f))?);
        }
    }
    Ok(v)
}

/// Each operator and flavor at the largest width (≤ 8) whose total qubit
/// count is at most `cap`. Operators with no instance that small come at
/// their narrowest buildable width instead.
pub fn small_instances(cap: usize) -> Vec<OracleSpec> {
    let mut v = Vec::new();
    for op in OPERATORS {
        for &f in flavors(op) {
            let built: Vec<OracleSpec> = (1..=8).filter_map(|b| build(op, &default_params(op, b, f)).ok()).collect();
            let fit = built.iter().rev().find(|s| s.qubits() <= cap);
            v.extend(fit.or(built.first()).cloned());
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_build() {
        assert_eq!(all_instances(16).unwrap().len(), 30);
        assert_eq!(all_instances(60).unwrap().len(), 30);
        let small = small_instances(12);
        let over: Vec<_> = small.iter().filter(|s| s.qubits() > 12).map(|s| (s.name.as_str(), s.qubits())).collect();
        assert_eq!(over, [("mod_mult_const_toff/2/1/3", 13)]);
        assert_eq!(small.len(), 30, "{:?}", small.iter().map(|s| (&s.name, s.qubits())).collect::<Vec<_>>());
    }
}
