use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::gate::Circuit;
use crate::lower::{lower, Level};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub qubits: usize,
    /// Non-ID gates after lowering.
    pub gates: usize,
    pub histogram: BTreeMap<String, usize>,
    pub level: Level,
}

pub fn count_resources(circ: &Circuit, level: Level) -> ResourceReport {
    let c = lower(circ, level);
    let mut histogram = BTreeMap::new();
    for g in c.non_id() {
        *histogram.entry(g.name().to_string()).or_insert(0) += 1;
    }
    ResourceReport {
        qubits: c.num_qubits,
        gates: histogram.values().sum(),
        histogram,
        level,
    }
}

impl ResourceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Gate;

    #[test]
    fn empty_and_ids() {
        let r = count_resources(&Circuit::new(0), Level::Base);
        assert_eq!((r.qubits, r.gates), (0, 0));
        let r = count_resources(&Circuit::with_gates(2, vec![Gate::ID(0), Gate::X(1)]), Level::Macro);
        assert_eq!(r.gates, 1);
        assert_eq!(r.histogram.get("x"), Some(&1));
        assert!(r.to_json().contains("\"level\": \"macro\""));
    }
}
