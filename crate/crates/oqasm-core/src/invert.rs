use std::sync::Arc;

use crate::syntax::Instr;

/// Structural inverse.
pub fn invert(prog: &Instr) -> Instr {
    let leaves: Vec<Instr> = prog.leaves().collect::<Vec<_>>().into_iter().rev().map(invert_leaf).collect();
    Instr::seq(leaves).expect("a program has at least one leaf")
}

fn invert_leaf(i: &Instr) -> Instr {
    match i {
        Instr::Skip(p) => Instr::Skip(*p),
        Instr::X(p) => Instr::X(*p),
        Instr::SR(m, x) => Instr::SRInv(*m, *x),
        Instr::SRInv(m, x) => Instr::SR(*m, *x),
        Instr::QFT(n, x) => Instr::QFTInv(*n, *x),
        Instr::QFTInv(n, x) => Instr::QFT(*n, *x),
        Instr::Lshift(x) => Instr::Rshift(*x),
        Instr::Rshift(x) => Instr::Lshift(*x),
        Instr::Rev(x) => Instr::Rev(*x),
        Instr::CU(p, b) => Instr::CU(*p, Arc::new(invert(b))),
        Instr::Seq(..) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Position;
    use crate::var::Var;

    #[test]
    fn examples() {
        let x = Var::new("x");
        assert_eq!(invert(&Instr::SR(2, x)), Instr::SRInv(2, x));
        let p = Position::new(x, 1);
        assert_eq!(invert(&Instr::X(p)), Instr::X(p));
        let a = Instr::QFT(3, x);
        let b = Instr::SR(1, x);
        assert_eq!(
            invert(&a.clone().then(b.clone())),
            invert(&b).then(invert(&a))
        );
    }

    #[test]
    fn controlled_body_is_inverted() {
        let x = Var::new("x");
        let c = Position::new("c", 0);
        let p = Instr::cu(c, Instr::SR(0, x).then(Instr::Lshift(x)));
        let expect = Instr::cu(c, Instr::Rshift(x).then(Instr::SRInv(0, x)));
        assert_eq!(invert(&p), expect);
    }
}
