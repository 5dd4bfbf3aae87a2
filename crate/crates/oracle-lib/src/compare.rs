//! Comparators: target ⊕= predicate, operands restored.
//!
//! The Toffoli flavor subtracts with a borrow-out into the target and adds
//! back. The QFT flavor widens x by one (zero) bit, subtracts in the
//! Fourier basis, copies the sign bit, and adds back.

use oqasm_core::{Instr, Position, Var};

use crate::gates::{bits, ccx, cx, p, seq, x as xg};
use crate::qft::{in_phi, phi_add_le, sr_const};
use crate::spec::{mask, pow2, OracleSpec, Role, SpecBuilder};
use crate::toff::{cuccaro, cuccaro_sub, inverse, with_const};
use crate::Flavor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpForm {
    /// x < N
    LtConst(u128),
    /// x < y
    Lt,
    /// x = N
    EqConst(u128),
    /// x = y
    Eq,
}

impl CmpForm {
    pub fn name(&self) -> &'static str {
        match self {
            CmpForm::LtConst(_) => "lt_const",
            CmpForm::Lt => "lt",
            CmpForm::EqConst(_) => "eq_const",
            CmpForm::Eq => "eq",
        }
    }
}

/// t ^= [x < N] on an (n+1)-bit x whose top bit is 0.
pub fn qft_lt_const(x: Var, n: usize, c: u128, t: Position) -> Vec<Instr> {
    let sub = sr_const(x, n + 1, c, true);
    sign_copy(x, n, sub, t)
}

/// t ^= [x < y] on an (n+1)-bit x (top bit 0) and n-bit y.
pub fn qft_lt(x: Var, y: &[Position], n: usize, t: Position) -> Vec<Instr> {
    let sub = phi_add_le(y, x, n + 1, true);
    sign_copy(x, n, sub, t)
}

/// Run a Fourier-basis subtraction, copy the sign bit (x,n) into t, undo.
pub fn sign_copy(x: Var, n: usize, sub: Vec<Instr>, t: Position) -> Vec<Instr> {
    let undo = inverse(&sub);
    let mut v = in_phi(x, n + 1, sub);
    v.push(cx(p(x, n), t));
    v.extend(in_phi(x, n + 1, undo));
    v
}

/// t ^= [x < y] with a Cuccaro subtractor (borrow into t) and re-add.
pub fn toff_lt(x: &[Position], y: &[Position], c0: Position, t: Position) -> Vec<Instr> {
    let mut v = cuccaro_sub(y, x, c0, Some(t));
    v.extend(cuccaro(y, x, c0, None, None));
    v
}

/// t ^= ¬t1 ∧ ¬t2
fn nor_into(t1: Position, t2: Position, t: Position) -> Vec<Instr> {
    vec![xg(t1), xg(t2), ccx(t1, t2, t), xg(t1), xg(t2)]
}

/// Standalone comparator oracle.
pub fn comparator(n: usize, form: CmpForm, flavor: Flavor) -> OracleSpec {
    let fl = match flavor {
        Flavor::Toff => "toff",
        _ => "qft",
    };
    let mut sb = SpecBuilder::new(format!("cmp_{}_{fl}/{n}", form.name()));
    let cval = match form {
        CmpForm::LtConst(c) | CmpForm::EqConst(c) => c & mask(n),
        _ => 0,
    };
    let two_operand = matches!(form, CmpForm::Lt | CmpForm::Eq);
    let is_eq = matches!(form, CmpForm::EqConst(_) | CmpForm::Eq);
    let prog;
    match flavor {
        Flavor::Toff => {
            let x = sb.operand("x", n);
            let y = if two_operand { sb.operand("y", n) } else { sb.reg("k", n, Role::Constant, 1) };
            let c0 = sb.ancilla("c0", 1);
            let (xs, ys, c0) = (bits(x, n), bits(y, n), p(c0, 0));
            let wrap = |body: Vec<Instr>| if two_operand { body } else { with_const(&ys, cval, body) };
            if is_eq {
                let t1 = p(sb.ancilla("t1", 1), 0);
                let t2 = p(sb.ancilla("t2", 1), 0);
                let t = p(sb.reg("t", 1, Role::Result, 2), 0);
                let mut cmp = toff_lt(&xs, &ys, c0, t1);
                cmp.extend(toff_lt(&ys, &xs, c0, t2));
                let cmp = wrap(cmp);
                let mut v = cmp.clone();
                v.extend(nor_into(t1, t2, t));
                v.extend(cmp);
                prog = seq(v);
            } else {
                let t = p(sb.reg("t", 1, Role::Result, 2), 0);
                prog = seq(wrap(toff_lt(&xs, &ys, c0, t)));
            }
        }
        _ => {
            let x = sb.reg("x", n + 1, Role::Operand, pow2(n));
            let y = if two_operand { Some(sb.operand("y", n)) } else { None };
            let lt = |bias: u128, t: Position| -> Vec<Instr> {
                // t ^= [x < rhs + bias]
                let mut sub = match y {
                    Some(y) => phi_add_le(&bits(y, n), x, n + 1, true),
                    None => sr_const(x, n + 1, cval, true),
                };
                sub.extend(sr_const(x, n + 1, bias, true));
                sign_copy(x, n, sub, t)
            };
            if is_eq {
                let t1 = p(sb.ancilla("t1", 1), 0);
                let t2 = p(sb.ancilla("t2", 1), 0);
                let t = p(sb.reg("t", 1, Role::Result, 2), 0);
                // x = rhs  ⟺  ¬[x < rhs] ∧ [x < rhs + 1]
                let mut cmp = lt(0, t1);
                cmp.extend(lt(1, t2));
                let mut v = cmp.clone();
                v.extend([xg(t1), ccx(t1, t2, t), xg(t1)]);
                v.extend(cmp);
                prog = seq(v);
            } else {
                let t = p(sb.reg("t", 1, Role::Result, 2), 0);
                prog = seq(lt(0, t));
            }
        }
    }
    let toff = flavor == Flavor::Toff;
    sb.finish(prog, false, move |v| {
        let xv = v[0];
        let rhs = if two_operand { v[1] } else { cval };
        let pred = match form {
            CmpForm::Lt | CmpForm::LtConst(_) => xv < rhs,
            _ => xv == rhs,
        };
        let mut out = v.to_vec();
        let last = out.len() - 1;
        out[last] ^= pred as u128;
        if !two_operand && toff {
            out[1] = 0;
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::run_spec;

    #[test]
    fn exhaustive_small() {
        for flavor in [Flavor::Qft, Flavor::Toff] {
            for n in 1..=3usize {
                let lim = 1u128 << n;
                for c in 0..lim {
                    for form in [CmpForm::LtConst(c), CmpForm::EqConst(c)] {
                        let s = comparator(n, form, flavor);
                        s.validate().unwrap();
                        for xv in 0..lim {
                            for t in 0..2 {
                                let mut inp = vec![0u128; s.inputs.len()];
                                inp[0] = xv;
                                *inp.last_mut().unwrap() = t;
                                assert_eq!(run_spec(&s, &inp), s.eval(&inp), "{} x={xv} c={c}", s.name);
                            }
                        }
                    }
                }
                for form in [CmpForm::Lt, CmpForm::Eq] {
                    let s = comparator(n, form, flavor);
                    for xv in 0..lim {
                        for yv in 0..lim {
                            let mut inp = vec![0u128; s.inputs.len()];
                            inp[0] = xv;
                            inp[1] = yv;
                            assert_eq!(run_spec(&s, &inp), s.eval(&inp), "{} x={xv} y={yv}", s.name);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn example_three_below_five() {
        let s = comparator(4, CmpForm::LtConst(5), Flavor::Qft);
        let out = run_spec(&s, &[3, 0]);
        assert_eq!(out, vec![3, 1]);
    }
}
