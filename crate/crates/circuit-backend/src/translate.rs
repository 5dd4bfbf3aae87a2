//! Oracle-assembly → gate list, threading the virtual qubit map.

use oqasm_core::{Instr, SizeEnv, Var};

use crate::gate::{Circuit, Gate};
use crate::map::QubitMap;
use crate::BackendError;

pub fn translate(sizes: &SizeEnv, map0: &QubitMap, prog: &Instr) -> Result<(QubitMap, Circuit), BackendError> {
    let mut gamma = map0.clone();
    let mut out = Vec::new();
    emit(sizes, &mut gamma, prog, &mut out)?;
    Ok((gamma, Circuit::with_gates(map0.num_qubits(), out)))
}

/// `translate` from the declaration-order layout.
pub fn translate_default(sizes: &SizeEnv, prog: &Instr) -> Result<(QubitMap, Circuit), BackendError> {
    translate(sizes, &QubitMap::initial(sizes), prog)
}

fn size(sizes: &SizeEnv, x: Var) -> Result<usize, BackendError> {
    sizes
        .get(&x)
        .copied()
        .ok_or_else(|| BackendError::BadInstr(format!("undeclared variable {x}")))
}

fn emit(sizes: &SizeEnv, gamma: &mut QubitMap, prog: &Instr, out: &mut Vec<Gate>) -> Result<(), BackendError> {
    for leaf in prog.leaves() {
        match leaf {
            Instr::Skip(p) => out.push(Gate::ID(gamma.get(*p)?)),
            Instr::X(p) => out.push(Gate::X(gamma.get(*p)?)),
            Instr::SR(m, x) | Instr::SRInv(m, x) => {
                let qs = gamma.var(*x)?;
                if *m >= qs.len() {
                    return Err(BackendError::BadInstr(format!("SR {m} on {x} of size {}", qs.len())));
                }
                let inv = matches!(leaf, Instr::SRInv(..));
                for (i, &q) in qs.iter().enumerate().take(m + 1) {
                    let k = (m - i + 1) as u32;
                    out.push(if inv { Gate::RZkInv(k, q) } else { Gate::RZk(k, q) });
                }
            }
            Instr::QFT(n, x) => {
                let qs = gamma.var(*x)?;
                check_prec(*n, x, qs.len())?;
                out.extend(qft_gates(qs, *n));
            }
            Instr::QFTInv(n, x) => {
                let qs = gamma.var(*x)?;
                check_prec(*n, x, qs.len())?;
                out.extend(qft_gates(qs, *n).iter().rev().map(Gate::inverse));
            }
            Instr::Lshift(x) | Instr::Rshift(x) | Instr::Rev(x) => {
                let s = size(sizes, *x)?;
                let qs = gamma.var_mut(*x)?;
                if qs.len() != s {
                    return Err(BackendError::BadInstr(format!("map and declaration disagree on {x}")));
                }
                match leaf {
                    Instr::Lshift(_) => qs.rotate_left(1),
                    Instr::Rshift(_) => qs.rotate_right(1),
                    _ => qs.reverse(),
                }
                if let Some(&q0) = qs.first() {
                    out.push(Gate::ID(q0));
                }
            }
            Instr::CU(p, body) => {
                let c = gamma.get(*p)?;
                let before = gamma.clone();
                let mut inner = Vec::new();
                emit(sizes, gamma, body, &mut inner)?;
                if *gamma != before {
                    return Err(BackendError::BadInstr(format!("body of CU {p} is not neutral")));
                }
                out.extend(ctrl_peeled(c, &inner)?);
            }
            Instr::Seq(..) => unreachable!("leaves() flattens sequences"),
        }
    }
    Ok(())
}

fn check_prec(n: usize, x: &Var, len: usize) -> Result<(), BackendError> {
    if n == 0 || n > len {
        return Err(BackendError::BadInstr(format!("QFT precision {n} on {x} of size {len}")));
    }
    Ok(())
}

/// QFT at precision n on physical qubits `qs` (offset 0 = most significant
/// bit of the transformed value). No final swaps: offset k ends holding
/// rotation (y mod 2^(n−k))/2^(n−k), the layout the assembly semantics use.
/// Offsets ≥ n only get a Hadamard.
pub fn qft_gates(qs: &[usize], n: usize) -> Vec<Gate> {
    let mut v = Vec::new();
    for k in 0..n {
        v.push(Gate::H(qs[k]));
        for j in k + 1..n {
            v.push(Gate::CRZk((j - k + 1) as u32, qs[j], qs[k]));
        }
    }
    for &q in &qs[n..] {
        v.push(Gate::H(q));
    }
    v
}

/// Gate-wise controlled version of `body`. Rejects Hadamards, a third
/// control and gates touching `c`. ID gates are dropped.
pub fn ctrl(c: usize, body: &[Gate]) -> Result<Vec<Gate>, BackendError> {
    use Gate::*;
    let mut out = Vec::with_capacity(body.len());
    for g in body {
        if g.qubits().contains(&c) && !g.is_id() {
            return Err(BackendError::ControlCollision(c, *g));
        }
        out.push(match *g {
            ID(_) => continue,
            X(q) => CX(c, q),
            CX(a, q) => CCX(c, a, q),
            RZk(k, q) => CRZk(k, c, q),
            RZkInv(k, q) => CRZkInv(k, c, q),
            CRZk(k, a, q) => CCRZk(k, c, a, q),
            CRZkInv(k, a, q) => CCRZkInv(k, c, a, q),
            H(_) | CCX(..) | CCRZk(..) | CCRZkInv(..) => return Err(BackendError::Uncontrollable(*g)),
        });
    }
    Ok(out)
}

/// Controlled version that first cancels adjacent inverse pairs, then
/// leaves a conjugating prefix/suffix (A; B; A⁻¹ → A; ctrl(B); A⁻¹)
/// uncontrolled. This is what lets a QFT-wrapped adder sit under CU.
pub fn ctrl_peeled(c: usize, body: &[Gate]) -> Result<Vec<Gate>, BackendError> {
    let mut stack: Vec<Gate> = Vec::with_capacity(body.len());
    for g in body.iter().filter(|g| !g.is_id()) {
        if stack.last() == Some(&g.inverse()) {
            stack.pop();
        } else {
            stack.push(*g);
        }
    }
    let len = stack.len();
    let mut k = 0;
    while 2 * (k + 1) <= len && stack[k] == stack[len - 1 - k].inverse() {
        k += 1;
    }
    // only peel what cannot be controlled directly
    while k > 0 && ctrl(c, &[stack[k - 1], stack[len - k]]).is_ok() {
        k -= 1;
    }
    let mut out = stack[..k].to_vec();
    out.extend(ctrl(c, &stack[k..len - k])?);
    out.extend_from_slice(&stack[len - k..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use oqasm_core::{declare, Position};

    #[test]
    fn x_maps_through_gamma() {
        let mut s = SizeEnv::new();
        let a = declare(&mut s, "tx_a", 4);
        let x = declare(&mut s, "tx_x", 2);
        let (_, c) = translate_default(&s, &Instr::X(Position::new(x, 1))).unwrap();
        assert_eq!(c.gates, vec![Gate::X(5)]);
        let _ = a;
    }

    #[test]
    fn lshift_updates_map() {
        let mut s = SizeEnv::new();
        let x = declare(&mut s, "tl_x", 3);
        let y = declare(&mut s, "tl_y", 1);
        let (g, c) = translate_default(&s, &Instr::Lshift(x)).unwrap();
        assert_eq!(g.var(x).unwrap(), &[1, 2, 0]);
        assert_eq!(g.var(y).unwrap(), &[3]);
        assert_eq!(c.gates, vec![Gate::ID(1)]);
    }

    #[test]
    fn sr_ladder() {
        let mut s = SizeEnv::new();
        let x = declare(&mut s, "ts_x", 3);
        let (_, c) = translate_default(&s, &Instr::SR(2, x)).unwrap();
        assert_eq!(c.gates, vec![Gate::RZk(3, 0), Gate::RZk(2, 1), Gate::RZk(1, 2)]);
    }

    #[test]
    fn ctrl_examples() {
        assert_eq!(ctrl(0, &[Gate::X(1)]).unwrap(), vec![Gate::CX(0, 1)]);
        assert_eq!(ctrl(0, &[Gate::RZk(2, 1)]).unwrap(), vec![Gate::CRZk(2, 0, 1)]);
        assert_eq!(ctrl(0, &[Gate::CX(1, 2)]).unwrap(), vec![Gate::CCX(0, 1, 2)]);
        assert!(ctrl(0, &[Gate::CCX(1, 2, 3)]).is_err());
        assert!(ctrl(0, &[Gate::X(0)]).is_err());
        assert!(ctrl(0, &[Gate::H(1)]).is_err());
    }

    #[test]
    fn peeling_keeps_conjugation_uncontrolled() {
        let body = [Gate::H(1), Gate::RZk(2, 1), Gate::H(1)];
        assert_eq!(ctrl_peeled(0, &body).unwrap(), vec![Gate::H(1), Gate::CRZk(2, 0, 1), Gate::H(1)]);
        // nothing to peel when the body is controllable as a whole
        let body = [Gate::X(1), Gate::RZk(2, 1), Gate::X(1)];
        assert_eq!(ctrl_peeled(0, &body).unwrap(), vec![Gate::CX(0, 1), Gate::CRZk(2, 0, 1), Gate::CX(0, 1)]);
    }

    #[test]
    fn cu_body_must_be_neutral() {
        let mut s = SizeEnv::new();
        let c = declare(&mut s, "tn_c", 1);
        let x = declare(&mut s, "tn_x", 3);
        let p = Instr::cu(Position::new(c, 0), Instr::Lshift(x));
        assert!(translate_default(&s, &p).is_err());
        let p = Instr::cu(Position::new(c, 0), Instr::Lshift(x).then(Instr::Rshift(x)));
        let (g, circ) = translate_default(&s, &p).unwrap();
        assert_eq!(g, QubitMap::initial(&s));
        assert!(circ.gates.is_empty());
    }
}
