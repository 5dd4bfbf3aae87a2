//! OpenQASM 2.0 text.

use std::fmt::Write as _;

use crate::gate::{Circuit, Gate};
use crate::lower::expand_ccrz;
use crate::BackendError;

/// `±2π/2^k` as a qelib1 angle expression.
fn angle(k: u32, neg: bool) -> String {
    let sign = if neg { "-" } else { "" };
    match k {
        1 => format!("{sign}pi"),
        2..=128 => format!("{sign}pi/{}", 1u128 << (k - 1)),
        _ => format!("{sign}pi/(2^{})", k - 1),
    }
}

/// Deterministic text over a single register `q`. ID gates are omitted and
/// doubly-controlled rotations are written as cu1/cx.
pub fn emit_qasm(circ: &Circuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", circ.num_qubits);
    for g in &circ.gates {
        emit_gate(*g, &mut s);
    }
    s
}

fn emit_gate(g: Gate, s: &mut String) {
    use Gate::*;
    let _ = match g {
        ID(_) => Ok(()),
        X(q) => writeln!(s, "x q[{q}];"),
        H(q) => writeln!(s, "h q[{q}];"),
        RZk(k, q) => writeln!(s, "u1({}) q[{q}];", angle(k, false)),
        RZkInv(k, q) => writeln!(s, "u1({}) q[{q}];", angle(k, true)),
        CX(c, q) => writeln!(s, "cx q[{c}],q[{q}];"),
        CCX(a, b, q) => writeln!(s, "ccx q[{a}],q[{b}],q[{q}];"),
        CRZk(k, c, q) => writeln!(s, "cu1({}) q[{c}],q[{q}];", angle(k, false)),
        CRZkInv(k, c, q) => writeln!(s, "cu1({}) q[{c}],q[{q}];", angle(k, true)),
        CCRZk(..) | CCRZkInv(..) => {
            for h in expand_ccrz(g) {
                emit_gate(h, s);
            }
            Ok(())
        }
    };
}

fn perr(line: usize, msg: impl Into<String>) -> BackendError {
    BackendError::Qasm { line, msg: msg.into() }
}

/// Parse an angle of the form `[-]pi[/D]` or `[-]pi/(2^N)` back to (k, negative).
fn parse_angle(e: &str, line: usize) -> Result<(u32, bool), BackendError> {
    let e: String = e.chars().filter(|c| !c.is_whitespace()).collect();
    let (neg, e) = match e.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, e.as_str()),
    };
    let rest = e.strip_prefix("pi").ok_or_else(|| perr(line, format!("unsupported angle {e}")))?;
    if rest.is_empty() {
        return Ok((1, neg));
    }
    let d = rest.strip_prefix('/').ok_or_else(|| perr(line, format!("unsupported angle {e}")))?;
    if let Some(p) = d.strip_prefix("(2^").and_then(|p| p.strip_suffix(')')) {
        let n: u32 = p.parse().map_err(|_| perr(line, format!("bad exponent {p}")))?;
        return Ok((n + 1, neg));
    }
    let d: u128 = d.parse().map_err(|_| perr(line, format!("bad divisor {d}")))?;
    if !d.is_power_of_two() || d < 2 {
        return Err(perr(line, format!("divisor {d} is not a power of two")));
    }
    Ok((d.trailing_zeros() + 1, neg))
}

fn parse_qubit(t: &str, n: usize, line: usize) -> Result<usize, BackendError> {
    let t = t.trim();
    let inner = t
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| perr(line, format!("bad operand {t}")))?;
    let q: usize = inner.trim().parse().map_err(|_| perr(line, format!("bad index {inner}")))?;
    if q >= n {
        return Err(perr(line, format!("q[{q}] out of range")));
    }
    Ok(q)
}

/// Parser for the subset this crate emits (plus `id`, `t`, `tdg`).
pub fn parse_qasm(text: &str) -> Result<Circuit, BackendError> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();
    let mut header = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split("//").next().unwrap_or("");
        for stmt in body.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            if let Some(v) = stmt.strip_prefix("OPENQASM") {
                if v.trim() != "2.0" {
                    return Err(perr(line, "only OPENQASM 2.0 is supported"));
                }
                header = true;
                continue;
            }
            if !header {
                return Err(perr(line, "missing OPENQASM 2.0 header"));
            }
            if stmt.starts_with("include") {
                continue;
            }
            if let Some(r) = stmt.strip_prefix("qreg") {
                let r = r.trim();
                let size = r
                    .strip_prefix("q[")
                    .and_then(|r| r.strip_suffix(']'))
                    .and_then(|r| r.trim().parse().ok())
                    .ok_or_else(|| perr(line, format!("bad qreg {r}")))?;
                if n.is_some() {
                    return Err(perr(line, "only one register is supported"));
                }
                n = Some(size);
                continue;
            }
            let nq = n.ok_or_else(|| perr(line, "gate before qreg"))?;
            let (head, args) = match stmt.find(|c: char| c.is_whitespace() || c == '(') {
                Some(i) if stmt[i..].starts_with('(') => {
                    let close = stmt.find(')').ok_or_else(|| perr(line, "unclosed parameter"))?;
                    // nested parentheses in pi/(2^N)
                    let close = if stmt[i + 1..close].contains('(') {
                        close + 1 + stmt[close + 1..].find(')').ok_or_else(|| perr(line, "unclosed parameter"))?
                    } else {
                        close
                    };
                    (&stmt[..close + 1], &stmt[close + 1..])
                }
                Some(i) => (&stmt[..i], &stmt[i..]),
                None => return Err(perr(line, format!("malformed statement {stmt}"))),
            };
            let ops: Vec<usize> = args.split(',').map(|t| parse_qubit(t, nq, line)).collect::<Result<_, _>>()?;
            let name = head.split('(').next().unwrap().trim();
            let param = head.find('(').map(|i| &head[i + 1..head.len() - 1]);
            let arity = |k: usize| {
                if ops.len() == k {
                    Ok(())
                } else {
                    Err(perr(line, format!("{name} takes {k} operands")))
                }
            };
            let g = match (name, param) {
                ("x", None) => arity(1).map(|_| Gate::X(ops[0]))?,
                ("h", None) => arity(1).map(|_| Gate::H(ops[0]))?,
                ("id", None) => arity(1).map(|_| Gate::ID(ops[0]))?,
                ("t", None) => arity(1).map(|_| Gate::RZk(3, ops[0]))?,
                ("tdg", None) => arity(1).map(|_| Gate::RZkInv(3, ops[0]))?,
                ("cx", None) => arity(2).map(|_| Gate::CX(ops[0], ops[1]))?,
                ("ccx", None) => arity(3).map(|_| Gate::CCX(ops[0], ops[1], ops[2]))?,
                ("u1", Some(a)) => {
                    arity(1)?;
                    let (k, neg) = parse_angle(a, line)?;
                    if neg { Gate::RZkInv(k, ops[0]) } else { Gate::RZk(k, ops[0]) }
                }
                ("cu1", Some(a)) => {
                    arity(2)?;
                    let (k, neg) = parse_angle(a, line)?;
                    if neg { Gate::CRZkInv(k, ops[0], ops[1]) } else { Gate::CRZk(k, ops[0], ops[1]) }
                }
                _ => return Err(perr(line, format!("unsupported gate {head}"))),
            };
            gates.push(g);
        }
    }
    let c = Circuit::with_gates(n.ok_or_else(|| perr(0, "no qreg"))?, gates);
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_expected_lines() {
        let s = emit_qasm(&Circuit::with_gates(1, vec![Gate::X(0), Gate::RZk(1, 0), Gate::RZkInv(3, 0), Gate::ID(0)]));
        assert!(s.contains("x q[0];"));
        assert!(s.contains("u1(pi) q[0];"));
        assert!(s.contains("u1(-pi/4) q[0];"));
        assert!(!s.contains("id"));
        assert!(s.starts_with("OPENQASM 2.0;"));
    }

    #[test]
    fn round_trip_large_angles() {
        let c = Circuit::with_gates(3, vec![Gate::RZk(128, 0), Gate::CRZkInv(130, 1, 0), Gate::CCX(0, 1, 2), Gate::H(2)]);
        assert_eq!(parse_qasm(&emit_qasm(&c)).unwrap(), c);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_qasm("qreg q[1];").is_err());
        assert!(parse_qasm("OPENQASM 2.0;\nqreg q[1];\nx q[1];").is_err());
        assert!(parse_qasm("OPENQASM 2.0;\nqreg q[1];\nu1(pi/3) q[0];").is_err());
        assert!(parse_qasm("OPENQASM 2.0;\nqreg q[2];\nfoo q[0];").is_err());
    }
}
