use std::ops::Range;

use crate::syntax::{Basis, SizeEnv, TypeEnv};
use crate::var::Var;

/// Largest supported phase precision (bits of the dyadic denominator).
pub const MAX_PRECISION: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Nor(bool),
    /// Rotation numerator r·2^G of |Φ(r)⟩.
    Phi(u128),
}

/// One qubit: global phase numerator plus payload, both mod 2^G.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitValue {
    pub phase: u128,
    pub payload: Payload,
}

impl QubitValue {
    pub const ZERO: QubitValue = QubitValue {
        phase: 0,
        payload: Payload::Nor(false),
    };

    pub fn nor(b: bool) -> QubitValue {
        QubitValue {
            phase: 0,
            payload: Payload::Nor(b),
        }
    }
}

/// Layout of variables as contiguous ranges of a flat qubit array, indexed
/// by interned variable id for O(1) lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    order: Vec<(Var, Range<usize>)>,
    by_id: Vec<Option<Range<usize>>>,
    total: usize,
}

impl Layout {
    pub fn new(sizes: &SizeEnv) -> Layout {
        let mut order = Vec::with_capacity(sizes.len());
        let mut start = 0;
        let mut by_id: Vec<Option<Range<usize>>> = Vec::new();
        for (&v, &s) in sizes {
            let r = start..start + s;
            start += s;
            let id = v.id() as usize;
            if by_id.len() <= id {
                by_id.resize(id + 1, None);
            }
            by_id[id] = Some(r.clone());
            order.push((v, r));
        }
        Layout {
            order,
            by_id,
            total: start,
        }
    }

    pub fn range(&self, v: Var) -> Option<Range<usize>> {
        self.by_id.get(v.id() as usize).and_then(|r| r.clone())
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn vars(&self) -> impl Iterator<Item = &(Var, Range<usize>)> {
        self.order.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OqasmState {
    g: u32,
    layout: Layout,
    pub qubits: Vec<QubitValue>,
}

/// G for a size environment: the widest variable, capped.
pub fn precision_for(sizes: &SizeEnv) -> u32 {
    let m = sizes.values().copied().max().unwrap_or(1).max(1);
    (m as u32).min(MAX_PRECISION)
}

impl OqasmState {
    /// All-zero Nor state.
    pub fn zero(sizes: &SizeEnv) -> OqasmState {
        let layout = Layout::new(sizes);
        OqasmState {
            g: precision_for(sizes),
            qubits: vec![QubitValue::ZERO; layout.total()],
            layout,
        }
    }

    pub fn precision(&self) -> u32 {
        self.g
    }

    pub fn mask(&self) -> u128 {
        mask(self.g)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn range(&self, v: Var) -> Option<Range<usize>> {
        self.layout.range(v)
    }

    pub fn var_qubits(&self, v: Var) -> &[QubitValue] {
        let r = self.layout.range(v).expect("variable not in layout");
        &self.qubits[r]
    }

    pub fn var_qubits_mut(&mut self, v: Var) -> &mut [QubitValue] {
        let r = self.layout.range(v).expect("variable not in layout");
        &mut self.qubits[r]
    }
}

pub fn mask(g: u32) -> u128 {
    if g >= 128 {
        u128::MAX
    } else {
        (1u128 << g) - 1
    }
}

/// Rotation numerator (mod 2^g) of offset k < n in a Phi-n variable holding υ:
/// frac(υ/2^{n−k}).
pub fn phi_rotation(upsilon: u128, n: u32, k: u32, g: u32) -> u128 {
    let w = n - k;
    let low = if w >= 128 { upsilon } else { upsilon & ((1u128 << w) - 1) };
    if g - w >= 128 {
        0
    } else {
        low << (g - w)
    }
}

/// Recover υ from offset 0's rotation; `None` when r₀·2ⁿ is not an integer.
pub fn phi_upsilon(r0: u128, n: u32, g: u32) -> Option<u128> {
    let drop = g - n;
    if drop == 0 {
        return Some(r0);
    }
    if drop >= 128 {
        return if r0 == 0 { Some(0) } else { None };
    }
    if r0 & ((1u128 << drop) - 1) != 0 {
        None
    } else {
        Some(r0 >> drop)
    }
}

/// Rotation numerator of 1/2 at precision g.
pub fn half(g: u32) -> u128 {
    1u128 << (g - 1)
}

/// Well-formedness of a state against a type environment.
///
/// Phi-n variables need a single υ with r_k = frac(υ/2^{n−k}) for k < n
/// (υ read from offset 0). Offsets at or beyond the precision hold the
/// image of a plain bit under H, i.e. rotation 0 or 1/2.
pub fn well_formed_state(sizes: &SizeEnv, env: &TypeEnv, state: &OqasmState) -> bool {
    let g = state.precision();
    for (&v, &s) in sizes {
        let Some(r) = state.range(v) else {
            return false;
        };
        if r.len() != s {
            return false;
        }
        let qs = &state.qubits[r];
        match env.get(&v) {
            None => return false,
            Some(Basis::Nor) => {
                if qs.iter().any(|q| !matches!(q.payload, Payload::Nor(_))) {
                    return false;
                }
            }
            Some(Basis::Phi(n)) => {
                let n = *n as u32;
                if n == 0 || n > g || n as usize > s {
                    return false;
                }
                let rots: Option<Vec<u128>> = qs
                    .iter()
                    .map(|q| match q.payload {
                        Payload::Phi(r) => Some(r),
                        Payload::Nor(_) => None,
                    })
                    .collect();
                let Some(rots) = rots else {
                    return false;
                };
                let Some(u) = phi_upsilon(rots[0], n, g) else {
                    return false;
                };
                for (k, &rk) in rots.iter().enumerate() {
                    let k = k as u32;
                    let ok = if k < n {
                        rk == phi_rotation(u, n, k, g)
                    } else {
                        rk == 0 || rk == half(g)
                    };
                    if !ok {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes1(n: &str, s: usize) -> SizeEnv {
        let mut m = SizeEnv::new();
        m.insert(Var::new(n), s);
        m
    }

    #[test]
    fn zero_state_is_well_formed() {
        let s = sizes1("w0", 3);
        let env = crate::syntax::nor_env(&s);
        assert!(well_formed_state(&s, &env, &OqasmState::zero(&s)));
    }

    #[test]
    fn phi_consistency() {
        let s = sizes1("w1", 4);
        let v = Var::new("w1");
        let mut env = TypeEnv::new();
        env.insert(v, Basis::Phi(4));
        let mut st = OqasmState::zero(&s);
        let g = st.precision();
        for k in 0..4 {
            st.qubits[k].payload = Payload::Phi(phi_rotation(5, 4, k as u32, g));
        }
        assert!(well_formed_state(&s, &env, &st));
        st.qubits[1].payload = Payload::Phi(0);
        assert!(!well_formed_state(&s, &env, &st));
    }

    #[test]
    fn rotation_values() {
        // υ = 5, n = 4: offsets get 5/16, 5/8 mod 1, 5/4 mod 1, 5/2 mod 1
        let g = 4;
        assert_eq!(phi_rotation(5, 4, 0, g), 5);
        assert_eq!(phi_rotation(5, 4, 1, g), 10);
        assert_eq!(phi_rotation(5, 4, 2, g), 4);
        assert_eq!(phi_rotation(5, 4, 3, g), 8);
        assert_eq!(phi_upsilon(5, 4, 4), Some(5));
        assert_eq!(phi_upsilon(3, 3, 4), None);
    }

    #[test]
    fn layout_is_declaration_order() {
        let mut s = SizeEnv::new();
        s.insert(Var::new("l_b"), 2);
        s.insert(Var::new("l_a"), 3);
        let l = Layout::new(&s);
        assert_eq!(l.range(Var::new("l_b")), Some(0..2));
        assert_eq!(l.range(Var::new("l_a")), Some(2..5));
        assert_eq!(l.total(), 5);
    }
}
