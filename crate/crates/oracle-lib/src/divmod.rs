//! Restoring division by a constant: x ← x mod n, q ← x div n.
//!
//! Iteration i tries to subtract 2^(I−i)·n and records success in the
//! quotient bit q[I−i] (q is little-endian).

use oqasm_core::{Instr, Position, Var};

use crate::gates::{bits, cx, load_const, load_const_ctl, p, seq, x as xg};
use crate::qft::sr_const;
use crate::spec::{pow2, OracleSpec, Role, SpecBuilder};
use crate::toff::{cuccaro, cuccaro_sub};
use crate::{Flavor, OracleError};

/// I such that 2^(N−1) ≤ 2^I·n < 2^N; the circuit runs I+1 iterations.
pub fn div_iterations(nbits: usize, n: u128) -> Result<usize, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroDivisor);
    }
    if nbits == 0 || nbits >= 127 || n >= pow2(nbits) {
        return Err(OracleError::BadParam(format!("divisor {n} does not fit in {nbits} bits")));
    }
    let mut i = 0;
    while (n << (i + 1)) < pow2(nbits) {
        i += 1;
    }
    Ok(i)
}

/// Fourier-basis division on x (N+1 bits, top bit a zero ancilla) and q (I+1 bits).
pub fn div_mod_qft(x: Var, q: Var, nbits: usize, n: u128) -> Result<Vec<Instr>, OracleError> {
    let it = div_iterations(nbits, n)?;
    let w = nbits + 1;
    let mut v = vec![Instr::Rev(x), Instr::QFT(w, x)];
    for i in 0..=it {
        let c = n << (it - i);
        let qb = p(q, it - i);
        v.extend(sr_const(x, w, c, true));
        v.push(Instr::QFTInv(w, x));
        // offset 0 of the reversed register is the sign bit
        v.push(cx(p(x, 0), qb));
        v.push(Instr::QFT(w, x));
        if let Some(add) = Instr::seq(sr_const(x, w, c, false)) {
            v.push(Instr::cu(qb, add));
        }
        v.push(xg(qb));
    }
    v.push(Instr::QFTInv(w, x));
    v.push(Instr::Rev(x));
    Ok(v)
}

/// Approximate-QFT division: precision drops by one every iteration. After
/// each trial subtraction the sign bit is swapped into the quotient bit and
/// the register is doubled by a (free) left shift of the reversed layout.
pub fn div_mod_aqft(x: Var, q: Var, nbits: usize, n: u128) -> Result<Vec<Instr>, OracleError> {
    let it = div_iterations(nbits, n)?;
    let prec = |i: usize| nbits + 1 - i;
    let mut v = vec![Instr::Rev(x), Instr::QFT(prec(0), x)];
    for i in 0..=it {
        let c = n << (it - i);
        let qb = p(q, it - i);
        v.extend(sr_const(x, prec(i), c, true));
        v.push(Instr::QFTInv(prec(i), x));
        v.push(cx(p(x, 0), qb));
        v.push(cx(qb, p(x, 0)));
        v.push(Instr::Lshift(x));
        v.push(Instr::QFT(prec(i + 1), x));
        if let Some(add) = Instr::seq(sr_const(x, prec(i + 1), c, false)) {
            v.push(Instr::cu(qb, add));
        }
        v.push(xg(qb));
    }
    v.push(Instr::QFTInv(prec(it + 1), x));
    for _ in 0..=it {
        v.push(Instr::Rshift(x));
    }
    v.push(Instr::Rev(x));
    Ok(v)
}

/// Ripple-carry division; `k` is an N-bit constant register, `c0` a carry ancilla.
pub fn div_mod_toff(x: &[Position], k: &[Position], c0: Position, q: &[Position], n: u128) -> Result<Vec<Instr>, OracleError> {
    let nbits = x.len();
    let it = div_iterations(nbits, n)?;
    assert_eq!(q.len(), it + 1, "quotient register width");
    let mut v = Vec::new();
    for i in 0..=it {
        let c = n << (it - i);
        let qb = q[it - i];
        v.extend(load_const(k, c));
        v.extend(cuccaro_sub(k, x, c0, Some(qb)));
        v.extend(load_const(k, c));
        v.extend(load_const_ctl(qb, k, c));
        v.extend(cuccaro(k, x, c0, None, None));
        v.extend(load_const_ctl(qb, k, c));
        v.push(xg(qb));
    }
    Ok(v)
}

/// Division/modulo oracle. Budgets at N=16, n=1: qft 33, aqft 33, toff 49.
pub fn div_mod(nbits: usize, n: u128, flavor: Flavor) -> Result<OracleSpec, OracleError> {
    let it = div_iterations(nbits, n)?;
    let name = match flavor {
        Flavor::Qft => "div_mod_qft",
        Flavor::Aqft => "div_mod_aqft",
        Flavor::Toff => "div_mod_toff",
    };
    let mut sb = SpecBuilder::new(format!("{name}/{nbits}/{n}"));
    let toff = flavor == Flavor::Toff;
    let prog = if toff {
        let x = sb.operand("x", nbits);
        let k = sb.reg("k", nbits, Role::Constant, 1);
        let c0 = sb.ancilla("c0", 1);
        let q = sb.reg("q", it + 1, Role::Result, 1);
        div_mod_toff(&bits(x, nbits), &bits(k, nbits), p(c0, 0), &bits(q, it + 1), n)?
    } else {
        let x = sb.reg("x", nbits + 1, Role::Operand, pow2(nbits));
        let q = sb.reg("q", it + 1, Role::Result, 1);
        if flavor == Flavor::Qft {
            div_mod_qft(x, q, nbits, n)?
        } else {
            div_mod_aqft(x, q, nbits, n)?
        }
    };
    Ok(sb.finish(seq(prog), false, move |v| {
        if toff {
            vec![v[0] % n, 0, 0, v[0] / n]
        } else {
            vec![v[0] % n, v[0] / n]
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::run_spec;

    #[test]
    fn iteration_counts() {
        assert_eq!(div_iterations(16, 1).unwrap(), 15);
        assert_eq!(div_iterations(16, 3).unwrap(), 14);
        assert_eq!(div_iterations(4, 15).unwrap(), 0);
        assert!(div_iterations(4, 0).is_err());
        assert!(div_iterations(4, 16).is_err());
    }

    #[test]
    fn budgets() {
        assert_eq!(div_mod(16, 1, Flavor::Qft).unwrap().qubits(), 33);
        assert_eq!(div_mod(16, 1, Flavor::Aqft).unwrap().qubits(), 33);
        assert_eq!(div_mod(16, 1, Flavor::Toff).unwrap().qubits(), 49);
    }

    #[test]
    fn exhaustive_small() {
        for flavor in [Flavor::Qft, Flavor::Aqft, Flavor::Toff] {
            for nbits in 1..=5usize {
                for n in 1..(1u128 << nbits) {
                    let s = div_mod(nbits, n, flavor).unwrap();
                    s.validate().unwrap();
                    for xv in 0..(1u128 << nbits) {
                        let mut inp = vec![0; s.inputs.len()];
                        inp[0] = xv;
                        assert_eq!(run_spec(&s, &inp), s.eval(&inp), "{} x={xv}", s.name);
                    }
                }
            }
        }
    }
}
