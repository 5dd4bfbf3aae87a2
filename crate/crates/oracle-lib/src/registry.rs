use crate::compare::{comparator, CmpForm};
use crate::divmod::div_mod;
use crate::modular::{mod_add_const, mod_mult_const};
use crate::mult::{multiplier, multiplier_const};
use crate::qft::{aqft_adder, rz_adder, rz_adder_const, rz_const_sub, rz_sub, rz_sub_const};
use crate::spec::OracleSpec;
use crate::toff::{toff_adder, toff_adder_const, toff_const_sub, toff_sub, toff_sub_const};
use crate::{Flavor, OracleError};

/// Parameters addressable by name (CLI, test harness).
#[derive(Clone, Debug, Default)]
pub struct Params {
    pub bits: usize,
    /// Constant operand.
    pub c: Option<u128>,
    /// Modulus or divisor.
    pub modulus: Option<u128>,
    pub flavor: Option<Flavor>,
    /// Precision bits removed (approximate adder).
    pub drop: Option<usize>,
}

impl Params {
    pub fn bits(bits: usize) -> Params {
        Params { bits, ..Params::default() }
    }
}

pub const OPERATORS: &[&str] = &[
    "rz_adder",
    "rz_sub",
    "rz_adder_const",
    "rz_sub_const",
    "rz_const_sub",
    "aqft_adder",
    "toff_adder",
    "toff_sub",
    "toff_adder_const",
    "toff_sub_const",
    "toff_const_sub",
    "cmp_lt_const",
    "cmp_lt",
    "cmp_eq_const",
    "cmp_eq",
    "mult",
    "mult_const",
    "mod_add_const",
    "mod_mult_const",
    "div_mod",
];

fn need<T>(v: Option<T>, what: &str, op: &str) -> Result<T, OracleError> {
    v.ok_or_else(|| OracleError::BadParam(format!("{op} needs --{what}")))
}

pub fn build(op: &str, prm: &Params) -> Result<OracleSpec, OracleError> {
    let n = prm.bits;
    if n == 0 || n > 120 {
        return Err(OracleError::BadParam(format!("bit width {n} outside 1..=120")));
    }
    let flavor = prm.flavor.unwrap_or(Flavor::Qft);
    let c = || need(prm.c, "c", op);
    let m = || need(prm.modulus, "n", op);
    Ok(match op {
        "rz_adder" => rz_adder(n),
        "rz_sub" => rz_sub(n),
        "rz_adder_const" => rz_adder_const(n, c()?),
        "rz_sub_const" => rz_sub_const(n, c()?),
        "rz_const_sub" => rz_const_sub(n, c()?),
        "aqft_adder" => {
            let d = prm.drop.unwrap_or(1);
            if d >= n {
                return Err(OracleError::BadParam("drop must be below the width".into()));
            }
            aqft_adder(n, d)
        }
        "toff_adder" => toff_adder(n),
        "toff_sub" => toff_sub(n),
        "toff_adder_const" => toff_adder_const(n, c()?),
        "toff_sub_const" => toff_sub_const(n, c()?),
        "toff_const_sub" => toff_const_sub(n, c()?),
        "cmp_lt_const" => comparator(n, CmpForm::LtConst(c()?), flavor),
        "cmp_lt" => comparator(n, CmpForm::Lt, flavor),
        "cmp_eq_const" => comparator(n, CmpForm::EqConst(c()?), flavor),
        "cmp_eq" => comparator(n, CmpForm::Eq, flavor),
        "mult" => multiplier(n, flavor),
        "mult_const" => multiplier_const(n, c()?, flavor),
        "mod_add_const" => mod_add_const(n, c()?, m()?, flavor)?,
        "mod_mult_const" => mod_mult_const(n, c()?, m()?, flavor)?,
        "div_mod" => div_mod(n, m()?, flavor)?,
        other => return Err(OracleError::UnknownOperator(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds_at_16() {
        for op in OPERATORS {
            let p = Params {
                bits: 16,
                c: Some(173),
                modulus: Some(255),
                flavor: None,
                drop: None,
            };
            let s = build(op, &p).unwrap();
            s.validate().unwrap();
        }
        assert!(build("nope", &Params::bits(4)).is_err());
        assert!(build("rz_adder_const", &Params::bits(4)).is_err());
    }

    #[test]
    fn table_budgets() {
        let q = |op: &str, bits, flavor, c, m| {
            build(op, &Params { bits, c, modulus: m, flavor: Some(flavor), drop: None })
                .unwrap()
                .qubits()
        };
        assert_eq!(q("rz_adder", 16, Flavor::Qft, None, None), 32);
        assert_eq!(q("toff_adder", 16, Flavor::Toff, None, None), 33);
        assert_eq!(q("rz_adder_const", 16, Flavor::Qft, Some(7), None), 16);
        assert_eq!(q("mult", 16, Flavor::Qft, None, None), 48);
        assert_eq!(q("mult", 16, Flavor::Toff, None, None), 49);
        assert_eq!(q("mult_const", 16, Flavor::Qft, Some(3), None), 32);
        assert_eq!(q("mult_const", 16, Flavor::Toff, Some(3), None), 33);
        assert!(q("div_mod", 16, Flavor::Qft, None, Some(1)) <= 34);
        assert!(q("div_mod", 16, Flavor::Aqft, None, Some(1)) <= 34);
        assert_eq!(q("div_mod", 16, Flavor::Toff, None, Some(1)), 49);
        assert_eq!(q("mod_mult_const", 8, Flavor::Qft, Some(173), Some(255)), 19);
        assert!(q("mod_mult_const", 8, Flavor::Toff, Some(173), Some(255)) <= 41);
    }
}
