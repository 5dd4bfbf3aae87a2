use std::fmt;

use crate::BackendError;

/// Gates over physical qubit indices. `RZk(k, q)` rotates |1⟩ by 2π/2^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    X(usize),
    H(usize),
    RZk(u32, usize),
    RZkInv(u32, usize),
    CX(usize, usize),
    CCX(usize, usize, usize),
    CRZk(u32, usize, usize),
    CRZkInv(u32, usize, usize),
    CCRZk(u32, usize, usize, usize),
    CCRZkInv(u32, usize, usize, usize),
    ID(usize),
}

impl Gate {
    /// Operands, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match *self {
            X(q) | H(q) | ID(q) | RZk(_, q) | RZkInv(_, q) => vec![q],
            CX(c, q) | CRZk(_, c, q) | CRZkInv(_, c, q) => vec![c, q],
            CCX(a, b, q) | CCRZk(_, a, b, q) | CCRZkInv(_, a, b, q) => vec![a, b, q],
        }
    }

    pub fn inverse(&self) -> Gate {
        use Gate::*;
        match *self {
            RZk(k, q) => RZkInv(k, q),
            RZkInv(k, q) => RZk(k, q),
            CRZk(k, c, q) => CRZkInv(k, c, q),
            CRZkInv(k, c, q) => CRZk(k, c, q),
            CCRZk(k, a, b, q) => CCRZkInv(k, a, b, q),
            CCRZkInv(k, a, b, q) => CCRZk(k, a, b, q),
            g => g,
        }
    }

    /// Histogram key.
    pub fn name(&self) -> &'static str {
        use Gate::*;
        match self {
            X(_) => "x",
            H(_) => "h",
            RZk(..) => "rz",
            RZkInv(..) => "rzdg",
            CX(..) => "cx",
            CCX(..) => "ccx",
            CRZk(..) => "crz",
            CRZkInv(..) => "crzdg",
            CCRZk(..) => "ccrz",
            CCRZkInv(..) => "ccrzdg",
            ID(_) => "id",
        }
    }

    pub fn is_id(&self) -> bool {
        matches!(self, Gate::ID(_))
    }

    fn angle_k(&self) -> Option<u32> {
        use Gate::*;
        match *self {
            RZk(k, _) | RZkInv(k, _) | CRZk(k, _, _) | CRZkInv(k, _, _) | CCRZk(k, _, _, _) | CCRZkInv(k, _, _, _) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.qubits().iter().map(|q| q.to_string()).collect();
        match self.angle_k() {
            Some(k) => write!(f, "{}({k}) {}", self.name(), qs.join(",")),
            None => write!(f, "{} {}", self.name(), qs.join(",")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Circuit {
        Circuit { num_qubits, gates: Vec::new() }
    }

    pub fn with_gates(num_qubits: usize, gates: Vec<Gate>) -> Circuit {
        Circuit { num_qubits, gates }
    }

    /// Operands in range, pairwise distinct, rotation index ≥ 1.
    pub fn validate(&self) -> Result<(), BackendError> {
        for (i, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= self.num_qubits) {
                return Err(BackendError::BadGate(format!("gate {i} ({g}) uses qubit {q} of {}", self.num_qubits)));
            }
            for a in 0..qs.len() {
                if qs[a + 1..].contains(&qs[a]) {
                    return Err(BackendError::BadGate(format!("gate {i} ({g}) repeats qubit {}", qs[a])));
                }
            }
            if g.angle_k() == Some(0) {
                return Err(BackendError::BadGate(format!("gate {i} has rotation index 0")));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Gates other than ID.
    pub fn non_id(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| !g.is_id())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.num_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}
