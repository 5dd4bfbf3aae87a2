//! Linear-cost simulator.
//!
//! A program is flattened to a tape of operations on physical qubit indices
//! (CU becomes a conditional jump), then executed without recursion. Phases
//! and rotations are integers mod 2^G, so every run is bit-exact.

use std::collections::HashMap;

use oqasm_core::state::{half, phi_rotation, phi_upsilon, Layout};
use oqasm_core::{Instr, OqasmState, Payload, QubitValue, SizeEnv, Var};

pub use oqasm_core::state::{precision_for, MAX_PRECISION};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("variable {0} is not in the state layout")]
    UnknownVar(Var),
    #[error("position {0}[{1}] out of range")]
    BadOffset(Var, usize),
    #[error("malformed state: {0}")]
    Malformed(String),
    #[error("precision {0} exceeds the supported maximum {MAX_PRECISION}")]
    Precision(usize),
    #[error("value {value} does not fit in {bits} qubits of {var}")]
    OutOfRange { var: Var, value: u128, bits: usize },
}

#[derive(Clone, Copy, Debug)]
enum Op {
    X(usize),
    /// start, m, inverse
    SR(usize, u32, bool),
    /// start, size, precision
    QFT(usize, usize, u32),
    QFTInv(usize, usize, u32),
    Lshift(usize, usize),
    Rshift(usize, usize),
    Rev(usize, usize),
    /// control, number of following ops forming the body
    CU(usize, usize),
}

/// A program compiled against a fixed layout; reusable across states.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    g: u32,
    total: usize,
}

impl Tape {
    pub fn compile(sizes: &SizeEnv, prog: &Instr) -> Result<Tape, SimError> {
        let layout = Layout::new(sizes);
        let g = precision_for(sizes);
        let mut ops = Vec::with_capacity(prog.leaf_count());
        // (instruction, index of the CU op whose body it closes)
        enum Work<'a> {
            Emit(&'a Instr),
            Close(usize),
        }
        let mut work = vec![Work::Emit(prog)];
        let range = |v: Var| layout.range(v).ok_or(SimError::UnknownVar(v));
        while let Some(w) = work.pop() {
            let i = match w {
                Work::Close(at) => {
                    let len = ops.len() - at - 1;
                    if let Op::CU(_, ref mut n) = ops[at] {
                        *n = len;
                    }
                    continue;
                }
                Work::Emit(i) => i,
            };
            match i {
                Instr::Seq(a, b) => {
                    work.push(Work::Emit(b));
                    work.push(Work::Emit(a));
                }
                Instr::Skip(p) => {
                    let r = range(p.var)?;
                    if p.offset >= r.len() {
                        return Err(SimError::BadOffset(p.var, p.offset));
                    }
                }
                Instr::X(p) => {
                    let r = range(p.var)?;
                    if p.offset >= r.len() {
                        return Err(SimError::BadOffset(p.var, p.offset));
                    }
                    ops.push(Op::X(r.start + p.offset));
                }
                Instr::SR(m, x) | Instr::SRInv(m, x) => {
                    let r = range(*x)?;
                    if *m >= r.len() {
                        return Err(SimError::BadOffset(*x, *m));
                    }
                    if *m + 1 > g as usize {
                        return Err(SimError::Precision(*m + 1));
                    }
                    ops.push(Op::SR(r.start, *m as u32, matches!(i, Instr::SRInv(..))));
                }
                Instr::QFT(n, x) | Instr::QFTInv(n, x) => {
                    let r = range(*x)?;
                    if *n == 0 || *n > r.len() {
                        return Err(SimError::BadOffset(*x, *n));
                    }
                    if *n > g as usize {
                        return Err(SimError::Precision(*n));
                    }
                    if matches!(i, Instr::QFT(..)) {
                        ops.push(Op::QFT(r.start, r.len(), *n as u32));
                    } else {
                        ops.push(Op::QFTInv(r.start, r.len(), *n as u32));
                    }
                }
                Instr::Lshift(x) => {
                    let r = range(*x)?;
                    ops.push(Op::Lshift(r.start, r.len()));
                }
                Instr::Rshift(x) => {
                    let r = range(*x)?;
                    ops.push(Op::Rshift(r.start, r.len()));
                }
                Instr::Rev(x) => {
                    let r = range(*x)?;
                    ops.push(Op::Rev(r.start, r.len()));
                }
                Instr::CU(p, body) => {
                    let r = range(p.var)?;
                    if p.offset >= r.len() {
                        return Err(SimError::BadOffset(p.var, p.offset));
                    }
                    let at = ops.len();
                    ops.push(Op::CU(r.start + p.offset, 0));
                    work.push(Work::Close(at));
                    work.push(Work::Emit(body));
                }
            }
        }
        Ok(Tape {
            ops,
            g,
            total: layout.total(),
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn run(&self, state: &mut OqasmState) -> Result<(), SimError> {
        if state.precision() != self.g || state.qubits.len() != self.total {
            return Err(SimError::Malformed("state layout does not match the program".into()));
        }
        let g = self.g;
        let mask = state.mask();
        let q = &mut state.qubits;
        let mut pc = 0;
        while pc < self.ops.len() {
            match self.ops[pc] {
                Op::X(i) => match &mut q[i].payload {
                    Payload::Nor(b) => *b = !*b,
                    Payload::Phi(_) => return Err(malformed("X on a Phi qubit", i)),
                },
                Op::SR(start, m, inv) => {
                    for k in 0..=m {
                        let idx = start + k as usize;
                        let delta = 1u128 << (g - (m - k + 1));
                        match &mut q[idx].payload {
                            Payload::Phi(r) => {
                                *r = if inv { r.wrapping_sub(delta) } else { r.wrapping_add(delta) } & mask;
                            }
                            Payload::Nor(_) => return Err(malformed("SR on a Nor qubit", idx)),
                        }
                    }
                }
                Op::QFT(start, size, n) => {
                    let qs = &mut q[start..start + size];
                    let mut y: u128 = 0;
                    for (k, v) in qs.iter().enumerate().take(n as usize) {
                        match v.payload {
                            Payload::Nor(b) => {
                                if b {
                                    y |= 1u128 << (n as usize - 1 - k);
                                }
                            }
                            Payload::Phi(_) => return Err(malformed("QFT on a Phi qubit", start + k)),
                        }
                    }
                    for (k, v) in qs.iter_mut().enumerate() {
                        let k = k as u32;
                        v.payload = if k < n {
                            Payload::Phi(phi_rotation(y, n, k, g))
                        } else {
                            match v.payload {
                                Payload::Nor(b) => Payload::Phi(if b { half(g) } else { 0 }),
                                Payload::Phi(_) => return Err(malformed("QFT on a Phi qubit", start + k as usize)),
                            }
                        };
                    }
                }
                Op::QFTInv(start, size, n) => {
                    let qs = &mut q[start..start + size];
                    let rot = |v: &QubitValue, idx: usize| match v.payload {
                        Payload::Phi(r) => Ok(r),
                        Payload::Nor(_) => Err(malformed("QFT⁻¹ on a Nor qubit", idx)),
                    };
                    let r0 = rot(&qs[0], start)?;
                    let u = phi_upsilon(r0, n, g).ok_or_else(|| malformed("rotation is not a multiple of 1/2^n", start))?;
                    for (k, v) in qs.iter_mut().enumerate() {
                        let r = rot(v, start + k)?;
                        let k32 = k as u32;
                        let bit = if k32 < n {
                            if r != phi_rotation(u, n, k32, g) {
                                return Err(malformed("inconsistent Fourier rotations", start + k));
                            }
                            (u >> (n - 1 - k32)) & 1 == 1
                        } else if r == 0 {
                            false
                        } else if r == half(g) {
                            true
                        } else {
                            return Err(malformed("tail rotation is not 0 or 1/2", start + k));
                        };
                        v.payload = Payload::Nor(bit);
                    }
                }
                Op::Lshift(start, size) => q[start..start + size].rotate_left(1),
                Op::Rshift(start, size) => q[start..start + size].rotate_right(1),
                Op::Rev(start, size) => q[start..start + size].reverse(),
                Op::CU(c, len) => match q[c].payload {
                    Payload::Nor(true) => {}
                    Payload::Nor(false) => pc += len,
                    Payload::Phi(_) => return Err(malformed("control qubit in Phi", c)),
                },
            }
            pc += 1;
        }
        Ok(())
    }
}

fn malformed(what: &str, idx: usize) -> SimError {
    SimError::Malformed(format!("{what} (physical qubit {idx})"))
}

/// Run `prog` on `state`.
pub fn interpret(sizes: &SizeEnv, prog: &Instr, state: &OqasmState) -> Result<OqasmState, SimError> {
    let tape = Tape::compile(sizes, prog)?;
    let mut out = state.clone();
    tape.run(&mut out)?;
    Ok(out)
}

/// Nor state with the given little-endian values; unlisted variables are 0.
pub fn encode_inputs<I>(sizes: &SizeEnv, assignments: I) -> Result<OqasmState, SimError>
where
    I: IntoIterator<Item = (Var, u128)>,
{
    let mut st = OqasmState::zero(sizes);
    for (v, value) in assignments {
        set_value(&mut st, v, value)?;
    }
    Ok(st)
}

/// Overwrite a variable with Nor bits of `value` (zero phase).
pub fn set_value(state: &mut OqasmState, v: Var, value: u128) -> Result<(), SimError> {
    let r = state.range(v).ok_or(SimError::UnknownVar(v))?;
    let bits = r.len();
    if bits < 128 && value >> bits != 0 {
        return Err(SimError::OutOfRange { var: v, value, bits });
    }
    for (k, q) in state.qubits[r].iter_mut().enumerate() {
        let b = k < 128 && (value >> k) & 1 == 1;
        *q = QubitValue::nor(b);
    }
    Ok(())
}

/// Little-endian bits of a Nor variable.
pub fn decode_bits(state: &OqasmState, v: Var) -> Result<Vec<bool>, SimError> {
    let r = state.range(v).ok_or(SimError::UnknownVar(v))?;
    let start = r.start;
    state.qubits[r]
        .iter()
        .enumerate()
        .map(|(k, q)| match q.payload {
            Payload::Nor(b) => Ok(b),
            Payload::Phi(_) => Err(malformed("decode of a Phi qubit", start + k)),
        })
        .collect()
}

/// Little-endian integer value of a Nor variable (at most 128 qubits).
pub fn decode_nor(state: &OqasmState, v: Var) -> Result<u128, SimError> {
    let bits = decode_bits(state, v)?;
    if bits.len() > 128 {
        return Err(SimError::Precision(bits.len()));
    }
    Ok(bits
        .iter()
        .enumerate()
        .fold(0u128, |acc, (k, &b)| acc | ((b as u128) << k)))
}

/// Decode every variable of the layout.
pub fn decode_all(state: &OqasmState) -> Result<HashMap<Var, u128>, SimError> {
    state
        .layout()
        .vars()
        .map(|(v, _)| decode_nor(state, *v).map(|x| (*v, x)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use oqasm_core::{declare, Position};

    fn one(name: &str, n: usize) -> (SizeEnv, Var) {
        let mut s = SizeEnv::new();
        let v = declare(&mut s, name, n);
        (s, v)
    }

    #[test]
    fn x_flips_and_keeps_phase() {
        let (s, x) = one("sx", 1);
        let mut st = OqasmState::zero(&s);
        st.qubits[0].phase = 1;
        let out = interpret(&s, &Instr::X(Position::new(x, 0)), &st).unwrap();
        assert_eq!(out.qubits[0].payload, Payload::Nor(true));
        assert_eq!(out.qubits[0].phase, 1);
    }

    #[test]
    fn sr_on_zero_rotations() {
        // SR 1 on (0,0): offset 0 gets 1/4, offset 1 gets 1/2
        let (s, x) = one("ssr", 2);
        let st = OqasmState::zero(&s);
        let out = interpret(&s, &Instr::QFT(2, x).then(Instr::SR(1, x)), &st).unwrap();
        let g = out.precision();
        assert_eq!(g, 2);
        assert_eq!(out.qubits[0].payload, Payload::Phi(1));
        assert_eq!(out.qubits[1].payload, Payload::Phi(2));
    }

    #[test]
    fn qft_round_trip() {
        let (s, x) = one("sq", 4);
        let st = encode_inputs(&s, [(x, 0b1101)]).unwrap();
        let out = interpret(&s, &Instr::QFT(4, x).then(Instr::QFTInv(4, x)), &st).unwrap();
        assert_eq!(out, st);
        for n in 1..=4 {
            let p = Instr::QFT(n, x).then(Instr::QFTInv(n, x));
            assert_eq!(interpret(&s, &p, &st).unwrap(), st, "precision {n}");
        }
    }

    #[test]
    fn qft_reads_big_endian() {
        // offset 0 is the most significant bit inside the transform
        let (s, x) = one("sbe", 3);
        let st = encode_inputs(&s, [(x, 0b001)]).unwrap();
        let out = interpret(&s, &Instr::QFT(3, x), &st).unwrap();
        // y = 4, r0 = 4/8
        assert_eq!(out.qubits[0].payload, Payload::Phi(4));
        assert_eq!(out.qubits[2].payload, Payload::Phi(0));
    }

    #[test]
    fn shifts_rotate() {
        let (s, x) = one("ssh", 4);
        let st = encode_inputs(&s, [(x, 0b0011)]).unwrap();
        // Rshift moves offset k to k+1: doubling
        assert_eq!(decode_nor(&interpret(&s, &Instr::Rshift(x), &st).unwrap(), x).unwrap(), 0b0110);
        assert_eq!(decode_nor(&interpret(&s, &Instr::Lshift(x), &st).unwrap(), x).unwrap(), 0b1001);
        assert_eq!(decode_nor(&interpret(&s, &Instr::Rev(x), &st).unwrap(), x).unwrap(), 0b1100);
    }

    #[test]
    fn cu_skips_when_clear() {
        let mut s = SizeEnv::new();
        let c = declare(&mut s, "sc", 1);
        let t = declare(&mut s, "st", 2);
        let p = Instr::cu(Position::new(c, 0), Instr::X(Position::new(t, 0)).then(Instr::X(Position::new(t, 1))))
            .then(Instr::X(Position::new(t, 1)));
        let out0 = interpret(&s, &p, &encode_inputs(&s, [(c, 0)]).unwrap()).unwrap();
        assert_eq!(decode_nor(&out0, t).unwrap(), 0b10);
        let out1 = interpret(&s, &p, &encode_inputs(&s, [(c, 1)]).unwrap()).unwrap();
        assert_eq!(decode_nor(&out1, t).unwrap(), 0b01);
    }

    #[test]
    fn encode_decode() {
        let mut s = SizeEnv::new();
        let a = declare(&mut s, "ea", 4);
        let b = declare(&mut s, "eb", 4);
        let st = encode_inputs(&s, [(a, 5), (b, 9)]).unwrap();
        let bits: Vec<bool> = st.qubits[..4].iter().map(|q| q.payload == Payload::Nor(true)).collect();
        assert_eq!(bits, vec![true, false, true, false]);
        assert_eq!(decode_nor(&st, a).unwrap(), 5);
        assert_eq!(decode_nor(&st, b).unwrap(), 9);
        assert!(encode_inputs(&s, [(a, 16)]).is_err());
    }

    #[test]
    fn inverse_on_malformed_faults() {
        let (s, x) = one("sm", 3);
        let mut st = OqasmState::zero(&s);
        for q in st.qubits.iter_mut() {
            q.payload = Payload::Phi(0);
        }
        st.qubits[1].payload = Payload::Phi(1);
        assert!(matches!(interpret(&s, &Instr::QFTInv(3, x), &st), Err(SimError::Malformed(_))));
    }
}
