use std::fmt;

use crate::analysis::{fresh, neutral};
use crate::syntax::{Basis, Instr, Position, SizeEnv, TypeEnv};
use crate::var::Var;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub rule: &'static str,
    pub var: Option<Var>,
    pub pos: Option<Position>,
    pub expected: Option<Basis>,
    pub actual: Option<Basis>,
    pub msg: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.rule)?;
        if let Some(p) = self.pos {
            write!(f, " at {p}")?;
        } else if let Some(v) = self.var {
            write!(f, " on {v}")?;
        }
        if let (Some(e), Some(a)) = (self.expected, self.actual) {
            write!(f, ": expected {e}, found {a}")?;
        }
        if !self.msg.is_empty() {
            write!(f, ": {}", self.msg)?;
        }
        Ok(())
    }
}

impl std::error::Error for TypeError {}

fn err(rule: &'static str, msg: impl Into<String>) -> TypeError {
    TypeError {
        rule,
        var: None,
        pos: None,
        expected: None,
        actual: None,
        msg: msg.into(),
    }
}

fn lookup(sizes: &SizeEnv, env: &TypeEnv, rule: &'static str, x: Var) -> Result<(usize, Basis), TypeError> {
    match (sizes.get(&x), env.get(&x)) {
        (Some(&s), Some(&b)) => Ok((s, b)),
        _ => Err(TypeError {
            var: Some(x),
            ..err(rule, "undeclared variable")
        }),
    }
}

fn check_pos(sizes: &SizeEnv, env: &TypeEnv, rule: &'static str, p: Position) -> Result<Basis, TypeError> {
    let (s, b) = lookup(sizes, env, rule, p.var)?;
    if p.offset >= s {
        return Err(TypeError {
            pos: Some(p),
            ..err(rule, format!("offset out of range (size {s})"))
        });
    }
    Ok(b)
}

fn want_nor(rule: &'static str, b: Basis, var: Var, pos: Option<Position>) -> Result<(), TypeError> {
    if b == Basis::Nor {
        Ok(())
    } else {
        Err(TypeError {
            rule,
            var: Some(var),
            pos,
            expected: Some(Basis::Nor),
            actual: Some(b),
            msg: String::new(),
        })
    }
}

/// Basis checker. Returns the output type environment.
pub fn typecheck(sizes: &SizeEnv, env: &TypeEnv, prog: &Instr) -> Result<TypeEnv, TypeError> {
    let mut env = env.clone();
    for leaf in prog.leaves() {
        step(sizes, &mut env, leaf)?;
    }
    Ok(env)
}

fn step(sizes: &SizeEnv, env: &mut TypeEnv, leaf: &Instr) -> Result<(), TypeError> {
    match leaf {
        Instr::Seq(..) => unreachable!("leaves never yield Seq"),
        Instr::Skip(p) => {
            check_pos(sizes, env, "ID", *p)?;
        }
        Instr::X(p) => {
            let b = check_pos(sizes, env, "X", *p)?;
            want_nor("X", b, p.var, Some(*p))?;
        }
        Instr::SR(m, x) | Instr::SRInv(m, x) => {
            let rule = if matches!(leaf, Instr::SR(..)) { "SR" } else { "SR⁻¹" };
            let (_, b) = lookup(sizes, env, rule, *x)?;
            match b {
                Basis::Phi(n) if *m < n => {}
                Basis::Phi(n) => {
                    return Err(TypeError {
                        var: Some(*x),
                        actual: Some(b),
                        ..err(rule, format!("rotation index {m} must be below precision {n}"))
                    })
                }
                Basis::Nor => {
                    return Err(TypeError {
                        var: Some(*x),
                        actual: Some(b),
                        ..err(rule, "requires Phi basis")
                    })
                }
            }
        }
        Instr::QFT(n, x) => {
            let (s, b) = lookup(sizes, env, "QFT", *x)?;
            want_nor("QFT", b, *x, None)?;
            if *n == 0 || *n > s {
                return Err(TypeError {
                    var: Some(*x),
                    ..err("QFT", format!("precision {n} outside 1..={s}"))
                });
            }
            env.insert(*x, Basis::Phi(*n));
        }
        Instr::QFTInv(n, x) => {
            let (_, b) = lookup(sizes, env, "RQFT", *x)?;
            if b != Basis::Phi(*n) {
                return Err(TypeError {
                    rule: "RQFT",
                    var: Some(*x),
                    pos: None,
                    expected: Some(Basis::Phi(*n)),
                    actual: Some(b),
                    msg: String::new(),
                });
            }
            env.insert(*x, Basis::Nor);
        }
        Instr::Lshift(x) | Instr::Rshift(x) | Instr::Rev(x) => {
            let rule = match leaf {
                Instr::Lshift(_) => "LSH",
                Instr::Rshift(_) => "RSH",
                _ => "REV",
            };
            let (_, b) = lookup(sizes, env, rule, *x)?;
            want_nor(rule, b, *x, None)?;
        }
        Instr::CU(p, body) => {
            let b = check_pos(sizes, env, "CU", *p)?;
            want_nor("CU", b, p.var, Some(*p))?;
            if !fresh(*p, body) {
                return Err(TypeError {
                    pos: Some(*p),
                    ..err("CU", "body touches the control qubit")
                });
            }
            let out = typecheck(sizes, env, body)?;
            if out != *env {
                return Err(TypeError {
                    pos: Some(*p),
                    ..err("CU", "body changes the type environment")
                });
            }
            if !neutral(sizes, body) {
                return Err(TypeError {
                    pos: Some(*p),
                    ..err("CU", "body is not shift-neutral")
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::nor_env;

    fn one(name: &str, size: usize) -> (SizeEnv, TypeEnv) {
        let mut s = SizeEnv::new();
        s.insert(Var::new(name), size);
        let e = nor_env(&s);
        (s, e)
    }

    #[test]
    fn qft_moves_to_phi() {
        let (s, e) = one("a", 4);
        let out = typecheck(&s, &e, &Instr::QFT(4, Var::new("a"))).unwrap();
        assert_eq!(out[&Var::new("a")], Basis::Phi(4));
    }

    #[test]
    fn x_rejected_in_phi() {
        let (s, mut e) = one("x", 4);
        e.insert(Var::new("x"), Basis::Phi(4));
        let r = typecheck(&s, &e, &Instr::X(Position::new("x", 2)));
        let te = r.unwrap_err();
        assert_eq!(te.rule, "X");
        assert_eq!(te.expected, Some(Basis::Nor));
        assert_eq!(te.actual, Some(Basis::Phi(4)));
    }

    #[test]
    fn conditional_shift_rejected() {
        let (s, e) = one("x", 4);
        let x = Var::new("x");
        let p = Instr::cu(Position::new(x, 0), Instr::Lshift(x)).then(Instr::X(Position::new(x, 0)));
        assert_eq!(typecheck(&s, &e, &p).unwrap_err().rule, "CU");
    }

    #[test]
    fn sr_needs_index_below_precision() {
        let (s, e) = one("y", 4);
        let y = Var::new("y");
        assert!(typecheck(&s, &e, &Instr::QFT(3, y).then(Instr::SR(2, y))).is_ok());
        assert!(typecheck(&s, &e, &Instr::QFT(3, y).then(Instr::SR(3, y))).is_err());
        assert!(typecheck(&s, &e, &Instr::QFT(3, y).then(Instr::QFTInv(4, y))).is_err());
    }

    #[test]
    fn rev_of_phi_rejected() {
        let (s, e) = one("r", 2);
        let r = Var::new("r");
        let te = typecheck(&s, &e, &Instr::QFT(2, r).then(Instr::Rev(r))).unwrap_err();
        assert_eq!(te.rule, "REV");
    }

    #[test]
    fn first_failure_is_reported() {
        let (s, e) = one("f", 2);
        let f = Var::new("f");
        let p = Instr::QFT(2, f)
            .then(Instr::X(Position::new(f, 0)))
            .then(Instr::Lshift(f));
        assert_eq!(typecheck(&s, &e, &p).unwrap_err().rule, "X");
    }

    #[test]
    fn undeclared_variable() {
        let (s, e) = one("u", 2);
        assert!(typecheck(&s, &e, &Instr::X(Position::new("nope", 0))).is_err());
        assert!(typecheck(&s, &e, &Instr::X(Position::new("u", 2))).is_err());
    }
}
