//! Dense state-vector reference simulator. Physical qubit 0 is the most
//! significant bit of the basis index.

use std::f64::consts::PI;

use num_complex::Complex64;
use oqasm_core::{OqasmState, Payload};

use crate::gate::{Circuit, Gate};
use crate::map::QubitMap;
use crate::BackendError;

pub const DEFAULT_CAP: usize = 16;

/// e^{2πi·r/2^g}.
fn turn(r: u128, g: u32) -> Complex64 {
    let frac = r as f64 / 2f64.powi(g as i32);
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

fn rz_phase(k: u32, inv: bool) -> Complex64 {
    let a = 2.0 * PI / 2f64.powi(k as i32);
    Complex64::from_polar(1.0, if inv { -a } else { a })
}

pub fn dense_sim(circ: &Circuit, vec: &[Complex64]) -> Result<Vec<Complex64>, BackendError> {
    dense_sim_capped(circ, vec, DEFAULT_CAP)
}

pub fn dense_sim_capped(circ: &Circuit, vec: &[Complex64], cap: usize) -> Result<Vec<Complex64>, BackendError> {
    let d = circ.num_qubits;
    if d > cap {
        return Err(BackendError::TooLarge { qubits: d, cap });
    }
    if vec.len() != 1usize << d {
        return Err(BackendError::Dimension { expected: 1usize << d, got: vec.len() });
    }
    circ.validate()?;
    let mut v = vec.to_vec();
    let bit = |q: usize| 1usize << (d - 1 - q);
    for g in &circ.gates {
        use Gate::*;
        match *g {
            ID(_) => {}
            X(q) => swap_where(&mut v, 0, bit(q)),
            CX(c, q) => swap_where(&mut v, bit(c), bit(q)),
            CCX(a, b, q) => swap_where(&mut v, bit(a) | bit(b), bit(q)),
            H(q) => {
                let m = bit(q);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..v.len() {
                    if i & m == 0 {
                        let (a, b) = (v[i], v[i | m]);
                        v[i] = (a + b) * s;
                        v[i | m] = (a - b) * s;
                    }
                }
            }
            RZk(k, q) => phase_where(&mut v, bit(q), rz_phase(k, false)),
            RZkInv(k, q) => phase_where(&mut v, bit(q), rz_phase(k, true)),
            CRZk(k, c, q) => phase_where(&mut v, bit(c) | bit(q), rz_phase(k, false)),
            CRZkInv(k, c, q) => phase_where(&mut v, bit(c) | bit(q), rz_phase(k, true)),
            CCRZk(k, a, b, q) => phase_where(&mut v, bit(a) | bit(b) | bit(q), rz_phase(k, false)),
            CCRZkInv(k, a, b, q) => phase_where(&mut v, bit(a) | bit(b) | bit(q), rz_phase(k, true)),
        }
    }
    Ok(v)
}

/// Swap amplitude pairs differing in `target` whose `ctl` bits are all set.
fn swap_where(v: &mut [Complex64], ctl: usize, target: usize) {
    for i in 0..v.len() {
        if i & target == 0 && i & ctl == ctl {
            v.swap(i, i | target);
        }
    }
}

fn phase_where(v: &mut [Complex64], mask: usize, ph: Complex64) {
    for (i, a) in v.iter_mut().enumerate() {
        if i & mask == mask {
            *a *= ph;
        }
    }
}

/// Kronecker product over physical qubits 0..d of each qubit's local state:
/// Nor e^{2πiα}|b⟩, Phi e^{2πiα}(|0⟩ + e^{2πir}|1⟩)/√2.
pub fn embed_state(state: &OqasmState, map: &QubitMap) -> Result<Vec<Complex64>, BackendError> {
    let d = map.num_qubits();
    if d > DEFAULT_CAP {
        return Err(BackendError::TooLarge { qubits: d, cap: DEFAULT_CAP });
    }
    if d != state.qubits.len() || !map.is_bijective() {
        return Err(BackendError::Dimension { expected: state.qubits.len(), got: d });
    }
    let g = state.precision();
    let inv = map.inverse();
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for p in inv {
        let range = state.range(p.var).ok_or(BackendError::UnknownPosition(p))?;
        let qv = state.qubits[range.start + p.offset];
        let glob = turn(qv.phase, g);
        let (a0, a1) = match qv.payload {
            Payload::Nor(false) => (glob, Complex64::new(0.0, 0.0)),
            Payload::Nor(true) => (Complex64::new(0.0, 0.0), glob),
            Payload::Phi(r) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                (glob * s, glob * turn(r, g) * s)
            }
        };
        let mut next = Vec::with_capacity(v.len() * 2);
        for a in v {
            next.push(a * a0);
            next.push(a * a1);
        }
        v = next;
    }
    Ok(v)
}

/// Largest per-amplitude distance.
pub fn max_amp_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn basis_state(d: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << d];
    v[index] = Complex64::new(1.0, 0.0);
    v
}
