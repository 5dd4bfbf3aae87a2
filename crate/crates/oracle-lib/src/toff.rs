//! Ripple-carry adders built from X and controlled X only (Cuccaro MAJ/UMA).

use oqasm_core::{invert, Instr, Position};

use crate::gates::{bits, ccx, cx, load_const, p, seq, x as xg};
use crate::spec::{mask, OracleSpec, Role, SpecBuilder};

fn maj(x: Position, y: Position, z: Position) -> Vec<Instr> {
    vec![cx(z, y), cx(z, x), ccx(x, y, z)]
}

fn uma(x: Position, y: Position, z: Position) -> Vec<Instr> {
    vec![ccx(x, y, z), cx(z, x), cx(x, y)]
}

// Same as uma but the sum bit is only produced when `e` is set; otherwise
// it exactly undoes maj.
fn uma_ctl(e: Position, x: Position, y: Position, z: Position) -> Vec<Instr> {
    vec![ccx(x, y, z), cx(z, x), cx(z, y), ccx(e, z, y), ccx(e, x, y)]
}

/// b ← b + a (mod 2^len), carry-in ancilla `c0` (restored to 0), optional
/// carry-out xor'ed into `cout`, optional control `ctl`.
pub fn cuccaro(a: &[Position], b: &[Position], c0: Position, cout: Option<Position>, ctl: Option<Position>) -> Vec<Instr> {
    let n = a.len();
    assert!(n >= 1 && b.len() == n, "cuccaro needs equal nonempty registers");
    let carry = |i: usize| if i == 0 { c0 } else { a[i - 1] };
    let mut v = Vec::with_capacity(6 * n + 1);
    for i in 0..n {
        v.extend(maj(carry(i), b[i], a[i]));
    }
    if let Some(co) = cout {
        match ctl {
            Some(e) => v.push(ccx(e, a[n - 1], co)),
            None => v.push(cx(a[n - 1], co)),
        }
    }
    for i in (0..n).rev() {
        match ctl {
            Some(e) => v.extend(uma_ctl(e, carry(i), b[i], a[i])),
            None => v.extend(uma(carry(i), b[i], a[i])),
        }
    }
    v
}

/// Reverse and invert a straight-line gadget.
pub fn inverse(v: &[Instr]) -> Vec<Instr> {
    v.iter().rev().map(invert).collect()
}

/// b ← b − a; with `cout`, cout ^= [b < a] (the borrow).
pub fn cuccaro_sub(a: &[Position], b: &[Position], c0: Position, cout: Option<Position>) -> Vec<Instr> {
    inverse(&cuccaro(a, b, c0, cout, None))
}

/// b ← (a + b) mod 2ⁿ with one carry ancilla.
pub fn toff_adder(n: usize) -> OracleSpec {
    let mut sb = SpecBuilder::new(format!("toff_adder/{n}"));
    let a = sb.operand("a", n);
    let b = sb.operand("b", n);
    let c = sb.ancilla("c0", 1);
    let prog = seq(cuccaro(&bits(a, n), &bits(b, n), p(c, 0), None, None));
    sb.finish(prog, false, move |v| vec![v[0], v[0].wrapping_add(v[1]) & mask(n), 0])
}

/// b ← (b − a) mod 2ⁿ.
pub fn toff_sub(n: usize) -> OracleSpec {
    let mut sb = SpecBuilder::new(format!("toff_sub/{n}"));
    let a = sb.operand("a", n);
    let b = sb.operand("b", n);
    let c = sb.ancilla("c0", 1);
    let prog = seq(cuccaro_sub(&bits(a, n), &bits(b, n), p(c, 0), None));
    sb.finish(prog, false, move |v| vec![v[0], v[1].wrapping_sub(v[0]) & mask(n), 0])
}

/// Load c into `k`, run `body`, unload.
pub fn with_const(k: &[Position], c: u128, body: Vec<Instr>) -> Vec<Instr> {
    let load = load_const(k, c);
    let mut v = load.clone();
    v.extend(body);
    v.extend(load);
    v
}

fn const_spec(name: &str, n: usize, c: u128, kind: u8) -> OracleSpec {
    let c = c & mask(n);
    let mut sb = SpecBuilder::new(format!("{name}/{n}/{c}"));
    let x = sb.operand("x", n);
    let k = sb.reg("k", n, Role::Constant, 1);
    let c0 = sb.ancilla("c0", 1);
    let (xs, ks) = (bits(x, n), bits(k, n));
    let prog = match kind {
        0 => with_const(&ks, c, cuccaro(&ks, &xs, p(c0, 0), None, None)),
        1 => with_const(&ks, c, cuccaro_sub(&ks, &xs, p(c0, 0), None)),
        _ => {
            let mut v: Vec<Instr> = xs.iter().map(|&q| xg(q)).collect();
            let c1 = c.wrapping_add(1) & mask(n);
            v.extend(with_const(&ks, c1, cuccaro(&ks, &xs, p(c0, 0), None, None)));
            v
        }
    };
    sb.finish(seq(prog), false, move |v| {
        let r = match kind {
            0 => v[0].wrapping_add(c),
            1 => v[0].wrapping_sub(c),
            _ => c.wrapping_sub(v[0]),
        };
        vec![r & mask(n), 0, 0]
    })
}

/// x ← (x + c) mod 2ⁿ; the constant is loaded into an ancilla register.
pub fn toff_adder_const(n: usize, c: u128) -> OracleSpec {
    const_spec("toff_adder_const", n, c, 0)
}

pub fn toff_sub_const(n: usize, c: u128) -> OracleSpec {
    const_spec("toff_sub_const", n, c, 1)
}

/// x ← (c − x) mod 2ⁿ.
pub fn toff_const_sub(n: usize, c: u128) -> OracleSpec {
    const_spec("toff_const_sub", n, c, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::run_spec;
    use oqasm_core::declare;

    #[test]
    fn exhaustive_small() {
        for n in 1..=3 {
            let s = toff_adder(n);
            let t = toff_sub(n);
            assert_eq!(s.qubits(), 2 * n + 1);
            for a in 0..(1u128 << n) {
                for b in 0..(1u128 << n) {
                    assert_eq!(run_spec(&s, &[a, b, 0]), s.eval(&[a, b, 0]));
                    assert_eq!(run_spec(&t, &[a, b, 0]), t.eval(&[a, b, 0]));
                }
            }
        }
    }

    #[test]
    fn consts_exhaustive() {
        for n in 1..=3 {
            for c in 0..(1u128 << n) {
                for xv in 0..(1u128 << n) {
                    for s in [toff_adder_const(n, c), toff_sub_const(n, c), toff_const_sub(n, c)] {
                        assert_eq!(run_spec(&s, &[xv, 0, 0]), s.eval(&[xv, 0, 0]), "{}", s.name);
                    }
                }
            }
        }
    }

    #[test]
    fn carry_out_and_control() {
        let mut sizes = oqasm_core::SizeEnv::new();
        let a = declare(&mut sizes, "ca", 3);
        let b = declare(&mut sizes, "cb", 3);
        let c0 = declare(&mut sizes, "cc", 1);
        let co = declare(&mut sizes, "co", 1);
        let e = declare(&mut sizes, "ce", 1);
        let add = seq(cuccaro(&bits(a, 3), &bits(b, 3), p(c0, 0), Some(p(co, 0)), Some(p(e, 0))));
        let sub = seq(cuccaro_sub(&bits(a, 3), &bits(b, 3), p(c0, 0), Some(p(co, 0))));
        for av in 0..8u128 {
            for bv in 0..8u128 {
                for ev in 0..2u128 {
                    let st = oqasm_sim::encode_inputs(&sizes, [(a, av), (b, bv), (e, ev)]).unwrap();
                    let out = oqasm_sim::interpret(&sizes, &add, &st).unwrap();
                    let s = if ev == 1 { av + bv } else { bv };
                    assert_eq!(oqasm_sim::decode_nor(&out, b).unwrap(), s & 7);
                    assert_eq!(oqasm_sim::decode_nor(&out, co).unwrap(), (ev == 1 && s >= 8) as u128);
                    assert_eq!(oqasm_sim::decode_nor(&out, a).unwrap(), av);
                    assert_eq!(oqasm_sim::decode_nor(&out, c0).unwrap(), 0);
                }
                let st = oqasm_sim::encode_inputs(&sizes, [(a, av), (b, bv)]).unwrap();
                let out = oqasm_sim::interpret(&sizes, &sub, &st).unwrap();
                assert_eq!(oqasm_sim::decode_nor(&out, b).unwrap(), bv.wrapping_sub(av) & 7);
                assert_eq!(oqasm_sim::decode_nor(&out, co).unwrap(), (bv < av) as u128);
            }
        }
    }
}
