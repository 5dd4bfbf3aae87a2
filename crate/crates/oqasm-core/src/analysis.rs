use std::collections::HashMap;

use crate::syntax::{Instr, Position, SizeEnv};
use crate::var::Var;

/// True iff `body` never touches `pos`. Whole-variable instructions touch
/// every offset of their variable.
pub fn fresh(pos: Position, body: &Instr) -> bool {
    let mut stack = vec![body];
    while let Some(i) = stack.pop() {
        match i {
            Instr::Seq(a, b) => {
                stack.push(a);
                stack.push(b);
            }
            Instr::Skip(_) => {}
            Instr::X(p) => {
                if *p == pos {
                    return false;
                }
            }
            Instr::CU(p, b) => {
                if *p == pos {
                    return false;
                }
                stack.push(b);
            }
            Instr::SR(_, x)
            | Instr::SRInv(_, x)
            | Instr::QFT(_, x)
            | Instr::QFTInv(_, x)
            | Instr::Lshift(x)
            | Instr::Rshift(x)
            | Instr::Rev(x) => {
                if *x == pos.var {
                    return false;
                }
            }
        }
    }
    true
}

/// Net offset permutation of one variable: new[k] = old[sign*k + shift].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Perm {
    pub neg: bool,
    pub shift: i64,
}

impl Perm {
    pub const IDENTITY: Perm = Perm {
        neg: false,
        shift: 0,
    };

    fn sign(&self) -> i64 {
        if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn lshift(&mut self, size: usize) {
        self.shift = (self.shift + self.sign()).rem_euclid(size as i64);
    }

    pub fn rshift(&mut self, size: usize) {
        self.shift = (self.shift - self.sign()).rem_euclid(size as i64);
    }

    pub fn rev(&mut self, size: usize) {
        self.shift = (self.shift + self.sign() * (size as i64 - 1)).rem_euclid(size as i64);
        self.neg = !self.neg;
    }

    pub fn is_identity(&self, size: usize) -> bool {
        // a 1-qubit variable has only the identity permutation
        size <= 1 || (!self.neg && self.shift == 0)
    }

    /// Source offset that lands at offset `k`.
    pub fn apply(&self, k: usize, size: usize) -> usize {
        (self.sign() * k as i64 + self.shift).rem_euclid(size as i64) as usize
    }
}

/// Net permutation per variable of the shift/rev instructions in `body`,
/// ignoring CU bodies (which must be neutral themselves).
pub fn net_perms(sizes: &SizeEnv, body: &Instr) -> HashMap<Var, Perm> {
    let mut perms: HashMap<Var, Perm> = HashMap::new();
    for leaf in body.leaves() {
        let (x, f): (Var, fn(&mut Perm, usize)) = match leaf {
            Instr::Lshift(x) => (*x, Perm::lshift),
            Instr::Rshift(x) => (*x, Perm::rshift),
            Instr::Rev(x) => (*x, Perm::rev),
            _ => continue,
        };
        let size = sizes.get(&x).copied().unwrap_or(1).max(1);
        f(perms.entry(x).or_insert(Perm::IDENTITY), size);
    }
    perms
}

/// True iff every shift inside `body` is undone along the way, so the net
/// permutation of each variable is the identity. CU bodies are checked
/// recursively.
pub fn neutral(sizes: &SizeEnv, body: &Instr) -> bool {
    let mut work = vec![body];
    while let Some(b) = work.pop() {
        for (x, p) in net_perms(sizes, b) {
            let size = sizes.get(&x).copied().unwrap_or(1);
            if !p.is_identity(size) {
                return false;
            }
        }
        for leaf in b.leaves() {
            if let Instr::CU(_, inner) = leaf {
                work.push(inner);
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(v: &[(&str, usize)]) -> SizeEnv {
        v.iter().map(|&(n, s)| (Var::new(n), s)).collect()
    }

    #[test]
    fn fresh_examples() {
        let a3 = Position::new("a", 3);
        assert!(fresh(a3, &Instr::SR(2, Var::new("b"))));
        assert!(!fresh(a3, &Instr::Lshift(Var::new("a"))));
        let a0 = Position::new("a", 0);
        assert!(!fresh(a0, &Instr::X(a0)));
        assert!(fresh(a0, &Instr::Skip(a0)));
    }

    #[test]
    fn neutral_examples() {
        let s = sizes(&[("x", 4)]);
        let x = Var::new("x");
        let p = Instr::Lshift(x)
            .then(Instr::X(Position::new(x, 0)))
            .then(Instr::Rshift(x));
        assert!(neutral(&s, &p));
        assert!(!neutral(&s, &Instr::Lshift(x)));
        assert!(neutral(&s, &Instr::Rev(x).then(Instr::Rev(x))));
    }

    #[test]
    fn full_rotation_is_neutral() {
        let s = sizes(&[("x", 3)]);
        let x = Var::new("x");
        let p = Instr::Lshift(x).then(Instr::Lshift(x)).then(Instr::Lshift(x));
        assert!(neutral(&s, &p));
        // Rev; Lshift; Rev equals Rshift
        let q = Instr::Rev(x)
            .then(Instr::Lshift(x))
            .then(Instr::Rev(x))
            .then(Instr::Lshift(x));
        assert!(neutral(&s, &q));
    }

    #[test]
    fn perm_apply_matches_rules() {
        let mut p = Perm::IDENTITY;
        p.lshift(4);
        assert_eq!(p.apply(0, 4), 1);
        assert_eq!(p.apply(3, 4), 0);
        let mut r = Perm::IDENTITY;
        r.rev(4);
        assert_eq!(r.apply(0, 4), 3);
    }
}
