use std::collections::HashMap;

use oqasm_core::{Position, SizeEnv, Var};

use crate::BackendError;

/// γ: logical position → physical qubit index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitMap {
    order: Vec<Var>,
    slots: HashMap<Var, Vec<usize>>,
    total: usize,
}

impl QubitMap {
    /// Declaration order, offsets contiguous.
    pub fn initial(sizes: &SizeEnv) -> QubitMap {
        let mut slots = HashMap::new();
        let mut next = 0;
        for (&v, &s) in sizes {
            slots.insert(v, (next..next + s).collect());
            next += s;
        }
        QubitMap {
            order: sizes.keys().copied().collect(),
            slots,
            total: next,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.total
    }

    pub fn get(&self, p: Position) -> Result<usize, BackendError> {
        self.slots
            .get(&p.var)
            .and_then(|s| s.get(p.offset))
            .copied()
            .ok_or(BackendError::UnknownPosition(p))
    }

    pub fn var(&self, v: Var) -> Result<&[usize], BackendError> {
        self.slots
            .get(&v)
            .map(|s| s.as_slice())
            .ok_or(BackendError::UnknownPosition(Position::new(v, 0)))
    }

    pub(crate) fn var_mut(&mut self, v: Var) -> Result<&mut Vec<usize>, BackendError> {
        self.slots.get_mut(&v).ok_or(BackendError::UnknownPosition(Position::new(v, 0)))
    }

    /// All (position, index) pairs in declaration order.
    pub fn entries(&self) -> impl Iterator<Item = (Position, usize)> + '_ {
        self.order
            .iter()
            .flat_map(move |&v| self.slots[&v].iter().enumerate().map(move |(k, &q)| (Position::new(v, k), q)))
    }

    /// Physical index → position.
    pub fn inverse(&self) -> Vec<Position> {
        let mut inv = vec![Position::new(Var::new("?"), 0); self.total];
        for (p, q) in self.entries() {
            inv[q] = p;
        }
        inv
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.total];
        for (_, q) in self.entries() {
            if q >= self.total || seen[q] {
                return false;
            }
            seen[q] = true;
        }
        true
    }
}
