//! Bit-level arithmetic shared by the interpreter and the compiler's
//! constant folding. Values are unsigned words of the type's width; a fixedp
//! word is a two's-complement numerator over 2^(sz-1).

use crate::ast::{Base, BinOp, Lit};

/// Upper bound for `n!` and loop trip counts, to keep runs finite.
pub const MAX_STEPS: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivZero,
    #[error("{0}")]
    Domain(String),
}

pub fn width(base: Base, sz: usize) -> usize {
    match base {
        Base::Bool => 1,
        _ => sz,
    }
}

pub fn mask(w: usize) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// Word for a literal read at type `base`.
pub fn lit(l: Lit, base: Base, sz: usize) -> u64 {
    let w = width(base, sz);
    match l {
        Lit::Int(n) => (n as u64) & mask(w),
        Lit::Bool(b) => b as u64,
        Lit::Dec { digits, scale } => {
            // floor(digits / 10^scale · 2^(w-1)); digits < 10^18 keeps this in u128
            let num = digits << (w - 1).min(64);
            ((num / 10u128.pow(scale)) as u64) & mask(w)
        }
    }
}

/// Base type of a binary operation's result, if the operand types are allowed.
pub fn result_base(op: BinOp, a: Base, b: Base) -> Option<Base> {
    use Base::*;
    use BinOp::*;
    match (op, a, b) {
        (Add | Sub | Xor, x, y) if x == y => Some(x),
        (Mul, Nat, Nat) => Some(Nat),
        (Mul, Fixedp, Fixedp | Nat) | (Mul, Nat, Fixedp) => Some(Fixedp),
        (Div, Nat, Nat) => Some(Nat),
        (Div, Fixedp, Nat) => Some(Fixedp),
        (Mod, Nat, Nat) => Some(Nat),
        (Lt | Eq, x, y) if x == y => Some(Bool),
        _ => None,
    }
}

/// `a op b` at operand bases `ba`, `bb`.
pub fn binop(op: BinOp, a: u64, ba: Base, b: u64, bb: Base, sz: usize) -> Result<u64, ArithError> {
    let rb = result_base(op, ba, bb).ok_or_else(|| ArithError::Domain(format!("{ba} {} {bb}", op.symbol())))?;
    let m = mask(width(rb, sz));
    Ok(match op {
        BinOp::Add => a.wrapping_add(b) & m,
        BinOp::Sub => a.wrapping_sub(b) & m,
        BinOp::Xor => (a ^ b) & m,
        BinOp::Mul if ba == Base::Fixedp && bb == Base::Fixedp => fmul(a, b, sz),
        BinOp::Mul => ((a as u128 * b as u128) as u64) & m,
        BinOp::Div | BinOp::Mod if b == 0 => return Err(ArithError::DivZero),
        BinOp::Div => a / b,
        BinOp::Mod => a % b,
        BinOp::Lt => (a < b) as u64,
        BinOp::Eq => (a == b) as u64,
    })
}

/// floor(a·b / 2^(sz-1)) mod 2^sz on unsigned numerators.
pub fn fmul(a: u64, b: u64, sz: usize) -> u64 {
    (((a as u128) * (b as u128)) >> (sz - 1)) as u64 & mask(sz)
}

pub fn pow(a: u64, base: Base, k: u64, sz: usize) -> Result<u64, ArithError> {
    if k > MAX_STEPS {
        return Err(ArithError::Domain(format!("exponent {k} too large")));
    }
    match base {
        Base::Nat => {
            let m = mask(sz);
            let mut r = 1u64 & m;
            for _ in 0..k {
                r = ((r as u128 * a as u128) as u64) & m;
            }
            Ok(r)
        }
        Base::Fixedp => {
            if k == 0 {
                return Err(ArithError::Domain("pow(fixedp, 0) is not representable".into()));
            }
            let mut r = a;
            for _ in 1..k {
                r = fmul(r, a, sz);
            }
            Ok(r)
        }
        Base::Bool => Err(ArithError::Domain("pow on bool".into())),
    }
}

pub fn fact(n: u64, sz: usize) -> Result<u64, ArithError> {
    if n > MAX_STEPS {
        return Err(ArithError::Domain(format!("{n}! too large to evaluate")));
    }
    let m = mask(sz);
    let mut r = 1u64 & m;
    for i in 2..=n {
        r = ((r as u128 * i as u128) as u64) & m;
        if r == 0 {
            break;
        }
    }
    Ok(r)
}

/// Raw reinterpretation of the bits at the target width.
pub fn cast(v: u64, to: Base, sz: usize) -> u64 {
    v & mask(width(to, sz))
}

/// Rotate a w-bit word left by k.
pub fn rotl(v: u64, k: u64, w: usize) -> u64 {
    let k = (k % w as u64) as u32;
    if k == 0 {
        return v;
    }
    ((v << k) | (v >> (w as u32 - k))) & mask(w)
}

/// Signed reading of a fixedp word.
pub fn fixedp_to_f64(v: u64, sz: usize) -> f64 {
    let signed = if sz < 64 && v >> (sz - 1) & 1 == 1 { v as i128 - (1i128 << sz) } else if sz == 64 { v as i64 as i128 } else { v as i128 };
    signed as f64 / 2f64.powi(sz as i32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixedp_literals() {
        assert_eq!(lit(Lit::Dec { digits: 5, scale: 1 }, Base::Fixedp, 8), 64);
        assert_eq!(lit(Lit::Dec { digits: 25, scale: 2 }, Base::Fixedp, 16), 1 << 13);
        assert_eq!(lit(Lit::Dec { digits: 1, scale: 1 }, Base::Fixedp, 4), 0);
        assert_eq!(fixedp_to_f64(0b1100_0000, 8), -0.5);
    }

    #[test]
    fn fixedp_products_truncate() {
        // 0.5 · 0.5 = 0.25 at 8 bits
        assert_eq!(fmul(64, 64, 8), 32);
        assert_eq!(pow(64, Base::Fixedp, 3, 8).unwrap(), 16);
        assert!(pow(64, Base::Fixedp, 0, 8).is_err());
        assert_eq!(binop(BinOp::Mul, 3, Base::Fixedp, 5, Base::Nat, 8).unwrap(), 15);
    }

    #[test]
    fn nat_ops_wrap() {
        assert_eq!(binop(BinOp::Add, 250, Base::Nat, 10, Base::Nat, 8).unwrap(), 4);
        assert_eq!(binop(BinOp::Sub, 1, Base::Nat, 2, Base::Nat, 8).unwrap(), 255);
        assert_eq!(binop(BinOp::Div, 1, Base::Nat, 0, Base::Nat, 8), Err(ArithError::DivZero));
        assert_eq!(fact(5, 8).unwrap(), 120);
        assert_eq!(fact(6, 8).unwrap(), 720 % 256);
        assert_eq!(rotl(0x8000_0001, 4, 32), 0x18);
        assert_eq!(binop(BinOp::Lt, 3, Base::Nat, 5, Base::Nat, 8).unwrap(), 1);
        assert!(binop(BinOp::Mod, 3, Base::Fixedp, 5, Base::Nat, 8).is_err());
    }
}
