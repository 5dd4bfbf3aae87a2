use serde::{Deserialize, Serialize};

use crate::gate::{Circuit, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Multi-controlled gates kept as is.
    Macro,
    /// X, H, CX and single-qubit rotations only.
    Base,
}

impl std::str::FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Level, String> {
        match s {
            "macro" => Ok(Level::Macro),
            "base" => Ok(Level::Base),
            _ => Err(format!("unknown level {s} (macro|base)")),
        }
    }
}

pub fn lower(circ: &Circuit, level: Level) -> Circuit {
    match level {
        Level::Macro => circ.clone(),
        Level::Base => {
            let mut gates = Vec::with_capacity(circ.gates.len() * 4);
            for g in &circ.gates {
                lower_gate(*g, &mut gates);
            }
            Circuit::with_gates(circ.num_qubits, gates)
        }
    }
}

const T: u32 = 3;

fn lower_gate(g: Gate, out: &mut Vec<Gate>) {
    use Gate::*;
    match g {
        CCX(a, b, t) => out.extend([
            H(t),
            CX(b, t),
            RZkInv(T, t),
            CX(a, t),
            RZk(T, t),
            CX(b, t),
            RZkInv(T, t),
            CX(a, t),
            RZk(T, b),
            RZk(T, t),
            H(t),
            CX(a, b),
            RZk(T, a),
            RZkInv(T, b),
            CX(a, b),
        ]),
        CRZk(k, c, t) => out.extend([RZk(k + 1, t), CX(c, t), RZkInv(k + 1, t), CX(c, t), RZk(k + 1, c)]),
        CRZkInv(k, c, t) => out.extend([RZkInv(k + 1, t), CX(c, t), RZk(k + 1, t), CX(c, t), RZkInv(k + 1, c)]),
        CCRZk(..) | CCRZkInv(..) => {
            for h in expand_ccrz(g) {
                lower_gate(h, out);
            }
        }
        g => out.push(g),
    }
}

/// Doubly-controlled rotation as singly-controlled half rotations.
pub(crate) fn expand_ccrz(g: Gate) -> [Gate; 5] {
    use Gate::*;
    match g {
        CCRZk(k, a, b, t) => [CRZk(k + 1, b, t), CX(a, b), CRZkInv(k + 1, b, t), CX(a, b), CRZk(k + 1, a, t)],
        CCRZkInv(k, a, b, t) => [CRZkInv(k + 1, b, t), CX(a, b), CRZk(k + 1, b, t), CX(a, b), CRZkInv(k + 1, a, t)],
        _ => panic!("expand_ccrz on {g}"),
    }
}
