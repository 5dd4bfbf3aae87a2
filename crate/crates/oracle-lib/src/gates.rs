use oqasm_core::{Instr, Position, Var};

pub fn p(v: Var, k: usize) -> Position {
    Position::new(v, k)
}

pub fn x(t: Position) -> Instr {
    Instr::X(t)
}

pub fn cx(c: Position, t: Position) -> Instr {
    Instr::cu(c, Instr::X(t))
}

pub fn ccx(a: Position, b: Position, t: Position) -> Instr {
    Instr::cu(a, Instr::cu(b, Instr::X(t)))
}

pub fn seq(items: Vec<Instr>) -> Instr {
    Instr::seq(items).expect("gadget produced no instructions")
}

/// Positions 0..n of `v`.
pub fn bits(v: Var, n: usize) -> Vec<Position> {
    (0..n).map(|k| p(v, k)).collect()
}

/// X on the positions where `c` has a one bit.
pub fn load_const(reg: &[Position], c: u128) -> Vec<Instr> {
    reg.iter()
        .enumerate()
        .filter(|(k, _)| *k < 128 && (c >> k) & 1 == 1)
        .map(|(_, &q)| x(q))
        .collect()
}

/// Like `load_const` but each X is controlled on `ctl`.
pub fn load_const_ctl(ctl: Position, reg: &[Position], c: u128) -> Vec<Instr> {
    load_const(reg, c)
        .into_iter()
        .map(|i| Instr::cu(ctl, i))
        .collect()
}

/// Copy (xor) `src` into `dst` bitwise.
pub fn copy(src: &[Position], dst: &[Position]) -> Vec<Instr> {
    src.iter().zip(dst).map(|(&s, &d)| cx(s, d)).collect()
}
