//! Shift-and-add multipliers into a zero-initialized result register.

use oqasm_core::{Instr, Position, Var};

use crate::gates::{bits, p, seq};
use crate::qft::{in_phi, sr_const};
use crate::spec::{mask, OracleSpec, SpecBuilder};
use crate::toff::cuccaro;
use crate::Flavor;

/// Fourier-basis body: r += x·y mod 2^rn (r already in Phi at precision rn).
pub fn qft_mul_body(x: &[Position], y: &[Position], r: Var, rn: usize) -> Vec<Instr> {
    let mut v = Vec::new();
    for (k, &yk) in y.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            if j + k >= rn {
                break;
            }
            v.push(Instr::cu(yk, Instr::cu(xj, Instr::SR(rn - 1 - k - j, r))));
        }
    }
    v
}

/// Fourier-basis body: r += c·x mod 2^rn.
pub fn qft_mul_const_body(x: &[Position], c: u128, r: Var, rn: usize) -> Vec<Instr> {
    let mut v = Vec::new();
    for (j, &xj) in x.iter().enumerate() {
        if j >= 128 {
            break;
        }
        let cj = (c << j) & mask(rn);
        let adds = sr_const(r, rn, cj, false);
        if let Some(body) = Instr::seq(adds) {
            v.push(Instr::cu(xj, body));
        }
    }
    v
}

/// Ripple-carry: r += x·y mod 2^|r|, with x at least as wide as r.
pub fn toff_mul(x: &[Position], y: &[Position], r: &[Position], c0: Position) -> Vec<Instr> {
    let rn = r.len();
    let mut v = Vec::new();
    for (k, &yk) in y.iter().enumerate().take(rn) {
        let w = rn - k;
        v.extend(cuccaro(&x[..w], &r[k..], c0, None, Some(yk)));
    }
    v
}

/// Ripple-carry: r += c·x mod 2^|r|, with x at least as wide as r.
pub fn toff_mul_const(x: &[Position], c: u128, r: &[Position], c0: Position) -> Vec<Instr> {
    let rn = r.len();
    let mut v = Vec::new();
    for j in 0..rn.min(128) {
        if (c >> j) & 1 == 1 {
            let w = rn - j;
            v.extend(cuccaro(&x[..w], &r[j..], c0, None, None));
        }
    }
    v
}

/// r ← (x·y) mod 2ⁿ. Budgets: qft 3n, toff 3n+1.
pub fn multiplier(n: usize, flavor: Flavor) -> OracleSpec {
    let toff = flavor == Flavor::Toff;
    let mut sb = SpecBuilder::new(format!("mult_{}/{n}", if toff { "toff" } else { "qft" }));
    let x = sb.operand("x", n);
    let y = sb.operand("y", n);
    let r = sb.reg("r", n, crate::Role::Result, 1);
    let prog = if toff {
        let c0 = sb.ancilla("c0", 1);
        seq(toff_mul(&bits(x, n), &bits(y, n), &bits(r, n), p(c0, 0)))
    } else {
        seq(in_phi(r, n, qft_mul_body(&bits(x, n), &bits(y, n), r, n)))
    };
    sb.finish(prog, false, move |v| {
        let mut out = vec![v[0], v[1], v[0].wrapping_mul(v[1]) & mask(n)];
        if toff {
            out.push(0);
        }
        out
    })
}

/// r ← (c·x) mod 2ⁿ. Budgets: qft 2n, toff 2n+1.
pub fn multiplier_const(n: usize, c: u128, flavor: Flavor) -> OracleSpec {
    let c = c & mask(n);
    let toff = flavor == Flavor::Toff;
    let mut sb = SpecBuilder::new(format!("mult_const_{}/{n}/{c}", if toff { "toff" } else { "qft" }));
    let x = sb.operand("x", n);
    let r = sb.reg("r", n, crate::Role::Result, 1);
    let prog = if toff {
        let c0 = sb.ancilla("c0", 1);
        let body = toff_mul_const(&bits(x, n), c, &bits(r, n), p(c0, 0));
        // c = 0 emits nothing; keep the program non-empty
        if body.is_empty() {
            Instr::Skip(p(r, 0))
        } else {
            seq(body)
        }
    } else {
        seq(in_phi(r, n, qft_mul_const_body(&bits(x, n), c, r, n)))
    };
    sb.finish(prog, false, move |v| {
        let mut out = vec![v[0], c.wrapping_mul(v[0]) & mask(n)];
        if toff {
            out.push(0);
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::run_spec;

    #[test]
    fn budgets() {
        assert_eq!(multiplier(16, Flavor::Qft).qubits(), 48);
        assert_eq!(multiplier(16, Flavor::Toff).qubits(), 49);
        assert_eq!(multiplier_const(16, 12345, Flavor::Qft).qubits(), 32);
        assert_eq!(multiplier_const(16, 12345, Flavor::Toff).qubits(), 33);
    }

    #[test]
    fn exhaustive_small() {
        for flavor in [Flavor::Qft, Flavor::Toff] {
            for n in 1..=3usize {
                let lim = 1u128 << n;
                let s = multiplier(n, flavor);
                s.validate().unwrap();
                for xv in 0..lim {
                    for yv in 0..lim {
                        let mut inp = vec![0; s.inputs.len()];
                        inp[0] = xv;
                        inp[1] = yv;
                        assert_eq!(run_spec(&s, &inp), s.eval(&inp));
                    }
                }
                for c in 0..lim {
                    let s = multiplier_const(n, c, flavor);
                    s.validate().unwrap();
                    for xv in 0..lim {
                        let mut inp = vec![0; s.inputs.len()];
                        inp[0] = xv;
                        assert_eq!(run_spec(&s, &inp), s.eval(&inp), "{}", s.name);
                    }
                }
            }
        }
    }
}
