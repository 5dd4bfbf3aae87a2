//! Fourier-basis adders.
//!
//! A register is put into Phi by `Rev x; QFT p x`, so the transform reads
//! its top `p` bits big-endian and `SR m x` adds 2^(p-1-m) to that value.

use oqasm_core::{Instr, Position, Var};

use crate::gates::{p, seq, x as xg};
use crate::spec::{mask, OracleSpec, SpecBuilder};

/// `CU (a,m) (SR m b)` for m < prec, with `a` and `b` both reversed.
pub fn phi_add_rev(a: Var, b: Var, prec: usize, sub: bool) -> Vec<Instr> {
    (0..prec)
        .map(|m| {
            let sr = if sub { Instr::SRInv(m, b) } else { Instr::SR(m, b) };
            Instr::cu(p(a, m), sr)
        })
        .collect()
}

/// Add (or subtract) a little-endian register `a` to the Phi-`prec` value of `b`.
pub fn phi_add_le(a: &[Position], b: Var, prec: usize, sub: bool) -> Vec<Instr> {
    a.iter()
        .enumerate()
        .take(prec)
        .map(|(j, &q)| {
            let m = prec - 1 - j;
            Instr::cu(q, if sub { Instr::SRInv(m, b) } else { Instr::SR(m, b) })
        })
        .collect()
}

/// Add (or subtract) `c mod 2^prec` to the Phi-`prec` value of `x`.
pub fn sr_const(x: Var, prec: usize, c: u128, sub: bool) -> Vec<Instr> {
    let c = c & mask(prec);
    (0..prec.min(128))
        .filter(|j| (c >> j) & 1 == 1)
        .map(|j| {
            let m = prec - 1 - j;
            if sub {
                Instr::SRInv(m, x)
            } else {
                Instr::SR(m, x)
            }
        })
        .collect()
}

/// `Rev x; QFT prec x; body; QFT⁻¹ prec x; Rev x`.
pub fn in_phi(x: Var, prec: usize, body: Vec<Instr>) -> Vec<Instr> {
    let mut v = vec![Instr::Rev(x), Instr::QFT(prec, x)];
    v.extend(body);
    v.push(Instr::QFTInv(prec, x));
    v.push(Instr::Rev(x));
    v
}

/// Full adder program `b += a` (both n bits).
pub fn adder_program(a: Var, b: Var, prec: usize, sub: bool) -> Instr {
    let mut v = vec![Instr::Rev(a)];
    v.extend(in_phi(b, prec, phi_add_rev(a, b, prec, sub)));
    v.push(Instr::Rev(a));
    seq(v)
}

/// Constant adder program `x += c` (or `-=`) on n bits.
pub fn const_adder_program(x: Var, n: usize, c: u128, sub: bool) -> Instr {
    let body = sr_const(x, n, c, sub);
    seq(in_phi(x, n, body))
}

/// b ← (a + b) mod 2ⁿ.
pub fn rz_adder(n: usize) -> OracleSpec {
    let mut sb = SpecBuilder::new(format!("rz_adder/{n}"));
    let a = sb.operand("a", n);
    let b = sb.operand("b", n);
    let prog = adder_program(a, b, n, false);
    sb.finish(prog, false, move |v| vec![v[0], (v[0].wrapping_add(v[1])) & mask(n)])
}

/// b ← (b − a) mod 2ⁿ.
pub fn rz_sub(n: usize) -> OracleSpec {
    let mut sb = SpecBuilder::new(format!("rz_sub/{n}"));
    let a = sb.operand("a", n);
    let b = sb.operand("b", n);
    let prog = adder_program(a, b, n, true);
    sb.finish(prog, false, move |v| vec![v[0], (v[1].wrapping_sub(v[0])) & mask(n)])
}

/// x ← (x + c) mod 2ⁿ.
pub fn rz_adder_const(n: usize, c: u128) -> OracleSpec {
    let c = c & mask(n);
    let mut sb = SpecBuilder::new(format!("rz_adder_const/{n}/{c}"));
    let x = sb.operand("x", n);
    let prog = const_adder_program(x, n, c, false);
    sb.finish(prog, false, move |v| vec![(v[0].wrapping_add(c)) & mask(n)])
}

/// x ← (x − c) mod 2ⁿ.
pub fn rz_sub_const(n: usize, c: u128) -> OracleSpec {
    let c = c & mask(n);
    let mut sb = SpecBuilder::new(format!("rz_sub_const/{n}/{c}"));
    let x = sb.operand("x", n);
    let prog = const_adder_program(x, n, c, true);
    sb.finish(prog, false, move |v| vec![(v[0].wrapping_sub(c)) & mask(n)])
}

/// x ← (c − x) mod 2ⁿ: complement every bit, then add c + 1.
pub fn rz_const_sub(n: usize, c: u128) -> OracleSpec {
    let c = c & mask(n);
    let mut sb = SpecBuilder::new(format!("rz_const_sub/{n}/{c}"));
    let x = sb.operand("x", n);
    let mut v: Vec<Instr> = (0..n).map(|k| xg(p(x, k))).collect();
    v.extend(in_phi(x, n, sr_const(x, n, c.wrapping_add(1), false)));
    sb.finish(seq(v), false, move |v| vec![(c.wrapping_sub(v[0])) & mask(n)])
}

/// Adder whose Fourier transform keeps only the top n − drop bits of b.
/// The classical spec is the exact sum; the result is off by `a mod 2^drop`.
pub fn aqft_adder(n: usize, drop: usize) -> OracleSpec {
    assert!(drop < n, "drop must be below the width");
    let mut sb = SpecBuilder::new(format!("aqft_adder/{n}/{drop}"));
    let a = sb.operand("a", n);
    let b = sb.operand("b", n);
    let prog = adder_program(a, b, n - drop, false);
    sb.finish(prog, true, move |v| vec![v[0], (v[0].wrapping_add(v[1])) & mask(n)])
}

/// What the truncated adder actually computes.
pub fn aqft_adder_exact_output(n: usize, drop: usize, a: u128, b: u128) -> u128 {
    let hi = ((b >> drop).wrapping_add(a >> drop)) & mask(n - drop);
    (hi << drop) | (b & mask(drop))
}
