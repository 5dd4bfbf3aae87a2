use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;

use crate::var::Var;

/// A qubit address: variable plus offset.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub var: Var,
    pub offset: usize,
}

impl Position {
    pub fn new(var: impl Into<Var>, offset: usize) -> Position {
        Position {
            var: var.into(),
            offset,
        }
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.var, self.offset)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.var, self.offset)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Nor,
    Phi(usize),
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Nor => f.write_str("Nor"),
            Basis::Phi(n) => write!(f, "Phi {n}"),
        }
    }
}

/// Variable sizes in declaration order. Declaration order is also the
/// physical layout order used by the simulator and the translator.
pub type SizeEnv = IndexMap<Var, usize>;

pub type TypeEnv = BTreeMap<Var, Basis>;

/// All variables in Nor.
pub fn nor_env(sizes: &SizeEnv) -> TypeEnv {
    sizes.keys().map(|&v| (v, Basis::Nor)).collect()
}

/// Oracle assembly instruction tree.
///
/// `Seq` is associative for every purpose in this crate (typing, semantics,
/// printing, equality), so builders are free to balance it.
#[derive(Clone)]
pub enum Instr {
    Skip(Position),
    X(Position),
    Seq(Arc<Instr>, Arc<Instr>),
    SR(usize, Var),
    SRInv(usize, Var),
    QFT(usize, Var),
    QFTInv(usize, Var),
    CU(Position, Arc<Instr>),
    Lshift(Var),
    Rshift(Var),
    Rev(Var),
}

fn placeholder() -> Arc<Instr> {
    static P: OnceLock<Arc<Instr>> = OnceLock::new();
    P.get_or_init(|| Arc::new(Instr::Rev(Var::new("_"))))
        .clone()
}

fn take_children(i: &mut Instr, out: &mut Vec<Arc<Instr>>) {
    match i {
        Instr::Seq(a, b) => {
            out.push(std::mem::replace(a, placeholder()));
            out.push(std::mem::replace(b, placeholder()));
        }
        Instr::CU(_, b) => out.push(std::mem::replace(b, placeholder())),
        _ => {}
    }
}

impl Drop for Instr {
    fn drop(&mut self) {
        if !matches!(self, Instr::Seq(..) | Instr::CU(..)) {
            return;
        }
        let mut stack = Vec::new();
        take_children(self, &mut stack);
        while let Some(a) = stack.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(a) {
                take_children(&mut inner, &mut stack);
            }
        }
    }
}

impl Instr {
    pub fn x(p: Position) -> Instr {
        Instr::X(p)
    }

    pub fn cu(p: Position, body: Instr) -> Instr {
        Instr::CU(p, Arc::new(body))
    }

    pub fn then(self, next: Instr) -> Instr {
        Instr::Seq(Arc::new(self), Arc::new(next))
    }

    /// Balanced sequence of `items`; `None` when empty.
    pub fn seq(items: Vec<Instr>) -> Option<Instr> {
        fn build(mut v: Vec<Instr>) -> Instr {
            if v.len() == 1 {
                return v.pop().unwrap();
            }
            let right = v.split_off(v.len() / 2);
            Instr::Seq(Arc::new(build(v)), Arc::new(build(right)))
        }
        if items.is_empty() {
            None
        } else {
            Some(build(items))
        }
    }

    /// Non-`Seq` nodes in execution order. CU nodes are yielded whole.
    pub fn leaves(&self) -> Leaves<'_> {
        Leaves { stack: vec![self] }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Variables mentioned anywhere, including CU controls and bodies.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(i) = stack.pop() {
            match i {
                Instr::Seq(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                Instr::CU(p, b) => {
                    out.push(p.var);
                    stack.push(b);
                }
                Instr::Skip(p) | Instr::X(p) => out.push(p.var),
                Instr::SR(_, x)
                | Instr::SRInv(_, x)
                | Instr::QFT(_, x)
                | Instr::QFTInv(_, x)
                | Instr::Lshift(x)
                | Instr::Rshift(x)
                | Instr::Rev(x) => out.push(*x),
            }
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|v| seen.insert(*v));
        out
    }
}

pub struct Leaves<'a> {
    stack: Vec<&'a Instr>,
}

impl<'a> Iterator for Leaves<'a> {
    type Item = &'a Instr;
    fn next(&mut self) -> Option<&'a Instr> {
        while let Some(i) = self.stack.pop() {
            match i {
                Instr::Seq(a, b) => {
                    self.stack.push(b);
                    self.stack.push(a);
                }
                leaf => return Some(leaf),
            }
        }
        None
    }
}

// Equality up to Seq association.
impl PartialEq for Instr {
    fn eq(&self, other: &Instr) -> bool {
        let mut work = vec![(self, other)];
        while let Some((a, b)) = work.pop() {
            let mut la = a.leaves();
            let mut lb = b.leaves();
            loop {
                match (la.next(), lb.next()) {
                    (None, None) => break,
                    (Some(x), Some(y)) => match (x, y) {
                        (Instr::CU(p, bx), Instr::CU(q, by)) => {
                            if p != q {
                                return false;
                            }
                            work.push((bx, by));
                        }
                        (Instr::Skip(p), Instr::Skip(q)) | (Instr::X(p), Instr::X(q)) => {
                            if p != q {
                                return false;
                            }
                        }
                        (Instr::SR(m, x), Instr::SR(n, y))
                        | (Instr::SRInv(m, x), Instr::SRInv(n, y))
                        | (Instr::QFT(m, x), Instr::QFT(n, y))
                        | (Instr::QFTInv(m, x), Instr::QFTInv(n, y)) => {
                            if m != n || x != y {
                                return false;
                            }
                        }
                        (Instr::Lshift(x), Instr::Lshift(y))
                        | (Instr::Rshift(x), Instr::Rshift(y))
                        | (Instr::Rev(x), Instr::Rev(y)) => {
                            if x != y {
                                return false;
                            }
                        }
                        _ => return false,
                    },
                    _ => return false,
                }
            }
        }
        true
    }
}

impl Eq for Instr {}

impl fmt::Debug for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_instr(self))
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_instr(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_association_is_invisible() {
        let a = Instr::X(Position::new("q", 0));
        let b = Instr::SR(1, Var::new("r"));
        let c = Instr::Rev(Var::new("q"));
        let left = a.clone().then(b.clone()).then(c.clone());
        let right = a.then(b.then(c));
        assert_eq!(left, right);
    }

    #[test]
    fn deep_chain_drops() {
        let p = Position::new("deep", 0);
        let mut i = Instr::X(p);
        for _ in 0..200_000 {
            i = i.then(Instr::X(p));
        }
        assert_eq!(i.leaf_count(), 200_001);
        drop(i);
    }

    #[test]
    fn balanced_builder_keeps_order() {
        let items: Vec<Instr> = (0..7).map(|k| Instr::X(Position::new("b", k))).collect();
        let s = Instr::seq(items).unwrap();
        let offs: Vec<usize> = s
            .leaves()
            .map(|l| match l {
                Instr::X(p) => p.offset,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(offs, (0..7).collect::<Vec<_>>());
        assert!(Instr::seq(vec![]).is_none());
    }
}
