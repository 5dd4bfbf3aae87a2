//! Controlled modular addition of a constant and the modular multiplier
//! built from it.

use oqasm_core::{Instr, Position, Var};

use crate::divmod::{div_iterations, div_mod_qft, div_mod_toff};
use crate::gates::{bits, cx, load_const_ctl, p, seq, x as xg};
use crate::qft::sr_const;
use crate::spec::{pow2, OracleSpec, Role, SpecBuilder};
use crate::toff::{cuccaro, cuccaro_sub, inverse, with_const};
use crate::{Flavor, OracleError};

fn cu_opt(ctl: Position, body: Vec<Instr>) -> Vec<Instr> {
    match Instr::seq(body) {
        Some(b) => vec![Instr::cu(ctl, b)],
        None => vec![],
    }
}

/// If ctl: b ← (b + c) mod N, for b < N held in an (n+1)-bit register.
/// `anc` is a zero ancilla that is restored.
pub fn mod_add_qft(ctl: Position, b: Var, anc: Position, c: u128, modulus: u128, n: usize) -> Vec<Instr> {
    let w = n + 1;
    let msb = p(b, 0); // after Rev
    let mut v = vec![Instr::Rev(b), Instr::QFT(w, b)];
    v.extend(cu_opt(ctl, sr_const(b, w, c, false)));
    v.extend(sr_const(b, w, modulus, true));
    v.extend([Instr::QFTInv(w, b), cx(msb, anc), Instr::QFT(w, b)]);
    v.extend(cu_opt(anc, sr_const(b, w, modulus, false)));
    v.extend(cu_opt(ctl, sr_const(b, w, c, true)));
    v.extend([Instr::QFTInv(w, b), xg(msb), cx(msb, anc), xg(msb), Instr::QFT(w, b)]);
    v.extend(cu_opt(ctl, sr_const(b, w, c, false)));
    v.extend([Instr::QFTInv(w, b), Instr::Rev(b)]);
    v
}

/// Ripple-carry version; `b` and `k` are (n+1)-bit, `k` a zero constant register.
pub fn mod_add_toff(ctl: Position, b: &[Position], k: &[Position], c0: Position, anc: Position, c: u128, modulus: u128) -> Vec<Instr> {
    let msb = *b.last().unwrap();
    let ctl_add = |sub: bool| {
        let mut v = load_const_ctl(ctl, k, c);
        v.extend(if sub { cuccaro_sub(k, b, c0, None) } else { cuccaro(k, b, c0, None, None) });
        v.extend(load_const_ctl(ctl, k, c));
        v
    };
    let mut v = ctl_add(false);
    v.extend(with_const(k, modulus, cuccaro_sub(k, b, c0, None)));
    v.push(cx(msb, anc));
    v.extend(load_const_ctl(anc, k, modulus));
    v.extend(cuccaro(k, b, c0, None, None));
    v.extend(load_const_ctl(anc, k, modulus));
    v.extend(ctl_add(true));
    v.extend([xg(msb), cx(msb, anc), xg(msb)]);
    v.extend(ctl_add(false));
    v
}

fn check_modulus(n: usize, modulus: u128) -> Result<(), OracleError> {
    if modulus == 0 {
        return Err(OracleError::ZeroDivisor);
    }
    if n == 0 || n >= 126 || modulus >= pow2(n) {
        return Err(OracleError::BadParam(format!("modulus {modulus} does not fit in {n} bits")));
    }
    Ok(())
}

/// Controlled b ← (b + c) mod N.
pub fn mod_add_const(n: usize, c: u128, modulus: u128, flavor: Flavor) -> Result<OracleSpec, OracleError> {
    check_modulus(n, modulus)?;
    let c = c % modulus;
    let toff = flavor == Flavor::Toff;
    let mut sb = SpecBuilder::new(format!("mod_add_const_{}/{n}/{c}/{modulus}", if toff { "toff" } else { "qft" }));
    let ctl = p(sb.reg("ctl", 1, Role::Operand, 2), 0);
    let b = sb.reg("b", n + 1, Role::Operand, modulus);
    let prog = if toff {
        let k = sb.reg("k", n + 1, Role::Constant, 1);
        let c0 = p(sb.ancilla("c0", 1), 0);
        let anc = p(sb.ancilla("anc", 1), 0);
        mod_add_toff(ctl, &bits(b, n + 1), &bits(k, n + 1), c0, anc, c, modulus)
    } else {
        let anc = p(sb.ancilla("anc", 1), 0);
        mod_add_qft(ctl, b, anc, c, modulus, n)
    };
    Ok(sb.finish(seq(prog), false, move |v| {
        let mut out = v.to_vec();
        if v[0] == 1 {
            out[1] = (v[1] + c) % modulus;
        }
        out
    }))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// |x⟩|0⟩ → |x⟩|(c·x) mod N⟩ for gcd(c, N) = 1. The input is first reduced
/// mod N by a division stage, which is undone at the end.
/// Budgets at n=8, N=255: qft 19, toff 37.
pub fn mod_mult_const(n: usize, c: u128, modulus: u128, flavor: Flavor) -> Result<OracleSpec, OracleError> {
    check_modulus(n, modulus)?;
    if gcd(c % modulus, modulus) != 1 {
        return Err(OracleError::NotCoprime { c, modulus });
    }
    let it = div_iterations(n, modulus)?;
    let toff = flavor == Flavor::Toff;
    let mut sb = SpecBuilder::new(format!("mod_mult_const_{}/{n}/{c}/{modulus}", if toff { "toff" } else { "qft" }));
    let step = |k: usize| (c % modulus) * (pow2(k) % modulus) % modulus;
    let prog = if toff {
        let x = sb.operand("x", n);
        let kd = sb.reg("kd", n, Role::Constant, 1);
        let c0 = p(sb.ancilla("c0", 1), 0);
        let q = sb.ancilla("q", it + 1);
        let b = sb.reg("b", n + 1, Role::Result, 1);
        let k = sb.reg("k", n + 1, Role::Constant, 1);
        let anc = p(sb.ancilla("anc", 1), 0);
        let xs = bits(x, n);
        let pre = div_mod_toff(&xs, &bits(kd, n), c0, &bits(q, it + 1), modulus)?;
        let mut v = pre.clone();
        for (kk, &xk) in xs.iter().enumerate() {
            v.extend(mod_add_toff(xk, &bits(b, n + 1), &bits(k, n + 1), c0, anc, step(kk), modulus));
        }
        v.extend(inverse(&pre));
        v
    } else {
        let x = sb.reg("x", n + 1, Role::Operand, pow2(n));
        let q = sb.ancilla("q", it + 1);
        let b = sb.reg("b", n + 1, Role::Result, 1);
        let pre = div_mod_qft(x, q, n, modulus)?;
        let mut v = pre.clone();
        // the spare top bit of x is zero after reduction and serves as the ancilla
        for kk in 0..n {
            v.extend(mod_add_qft(p(x, kk), b, p(x, n), step(kk), modulus, n));
        }
        v.extend(inverse(&pre));
        v
    };
    Ok(sb.finish(seq(prog), false, move |v| {
        let mut out = v.to_vec();
        let r = (c % modulus) * (v[0] % modulus) % modulus;
        let bi = if toff { 4 } else { 2 };
        out[bi] = r;
        out
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::run_spec;

    #[test]
    fn mod_add_example() {
        for flavor in [Flavor::Qft, Flavor::Toff] {
            let s = mod_add_const(8, 100, 255, flavor).unwrap();
            s.validate().unwrap();
            let mut inp = vec![0; s.inputs.len()];
            inp[0] = 1;
            inp[1] = 200;
            let out = run_spec(&s, &inp);
            assert_eq!(out[1], 45);
            assert!(out[2..].iter().all(|&z| z == 0));
        }
    }

    #[test]
    fn mod_add_exhaustive() {
        for flavor in [Flavor::Qft, Flavor::Toff] {
            for n in 1..=3usize {
                for m in 1..(1u128 << n) {
                    for c in 0..m {
                        let s = mod_add_const(n, c, m, flavor).unwrap();
                        for b in 0..m {
                            for ctl in 0..2 {
                                let mut inp = vec![0; s.inputs.len()];
                                inp[0] = ctl;
                                inp[1] = b;
                                assert_eq!(run_spec(&s, &inp), s.eval(&inp), "{} b={b} ctl={ctl}", s.name);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn budgets() {
        assert_eq!(mod_mult_const(8, 173, 255, Flavor::Qft).unwrap().qubits(), 19);
        assert!(mod_mult_const(8, 173, 255, Flavor::Toff).unwrap().qubits() <= 41);
        assert!(mod_mult_const(8, 5, 255, Flavor::Qft).is_err());
    }

    #[test]
    fn mod_mult_small() {
        for flavor in [Flavor::Qft, Flavor::Toff] {
            for n in 2..=4usize {
                for m in 2..(1u128 << n) {
                    for c in 1..m {
                        let Ok(s) = mod_mult_const(n, c, m, flavor) else { continue };
                        s.validate().unwrap();
                        for xv in 0..(1u128 << n) {
                            let mut inp = vec![0; s.inputs.len()];
                            inp[0] = xv;
                            assert_eq!(run_spec(&s, &inp), s.eval(&inp), "{} x={xv}", s.name);
                        }
                    }
                }
            }
        }
    }
}
