use oqasm_core::Instr;
use oqimp_frontend::ast::StmtKind;
use oqimp_frontend::{compile, corpus, load, parse, CompileOptions, FrontendError, InvError};
use oracle_lib::Flavor;

#[test]
fn quarter_round_listing_has_twelve_statements() {
    let p = parse(corpus::CHACHA_QR_LISTING).unwrap();
    let qr = p.func("qr").unwrap();
    assert_eq!(qr.body.len(), 12);
    assert!(qr.ret_val.is_some());
    let p = parse(corpus::CHACHA_QR).unwrap();
    assert_eq!(p.func("qr").unwrap().body.len(), 12);
}

#[test]
fn aliasing_and_guard_rules() {
    let e = load("Q nat z; Q nat y; void main() { z = z * y; }").unwrap_err();
    assert!(matches!(e, FrontendError::Type(ref t) if t.rule == "binop_q"), "{e}");
    let e = load("Q nat q; C nat c; void main() { if (q < 3) { c = 1; } }").unwrap_err();
    assert!(matches!(e, FrontendError::Type(_)), "{e}");
    let e = load("Q nat x; void main() { inv(x); }").unwrap_err();
    assert!(matches!(e, FrontendError::Inv(InvError::NoPredecessor { .. })), "{e}");
}

fn body(src: &str, sz: usize, opts: CompileOptions) -> Vec<Instr> {
    let (p, _) = load(src).unwrap();
    compile(&p, &CompileOptions { sz, ..opts }).unwrap().body
}

#[test]
fn sine_with_three_terms_unrolls() {
    let unrolled = "Q fixedp x8;
        fixedp sin() {
          Q fixedp xr; Q fixedp xz; Q fixedp x1; Q fixedp x2; Q fixedp res;
          xr = x8;
          xz = pow(x8, 3); x1 = xz * 64; x2 = x1 / 6; xr -= x2; inv(x2); inv(x1); inv(xz);
          xz = pow(x8, 5); x1 = xz * 4096; x2 = x1 / 120; xr += x2; inv(x2); inv(x1); inv(xz);
          xz = pow(x8, 7); x1 = xz * 262144; x2 = x1 / 5040; xr -= x2; inv(x2); inv(x1); inv(xz);
          res = xr * 8;
          return res;
        }";
    for f in [Flavor::Qft, Flavor::Toff] {
        let a = body(corpus::SIN, 24, CompileOptions::new(f, 0).with_const("n", 3));
        let b = body(unrolled, 24, CompileOptions::new(f, 0));
        assert!(a == b, "{f}");
    }
}

#[test]
fn classical_if_compiles_the_taken_branch() {
    let src = "C nat c; Q nat a; void main() { if (c < 3) { a += 1; } else { a ^= 6; } }";
    let taken = "C nat c; Q nat a; void main() { a += 1; }";
    let other = "C nat c; Q nat a; void main() { a ^= 6; }";
    for f in [Flavor::Qft, Flavor::Aqft, Flavor::Toff] {
        assert_eq!(body(src, 8, CompileOptions::new(f, 0).with_const("c", 1)), body(taken, 8, CompileOptions::new(f, 0)));
        assert_eq!(body(src, 8, CompileOptions::new(f, 0).with_const("c", 5)), body(other, 8, CompileOptions::new(f, 0)));
    }
}

#[test]
fn classical_program_emits_nothing() {
    let (p, _) = load("C nat a; nat main() { C nat t; t = a * 3; a = t + 1; return t; }").unwrap();
    let c = compile(&p, &CompileOptions::new(Flavor::Qft, 8).with_const("a", 5)).unwrap();
    assert!(c.body.is_empty());
    assert_eq!(c.qubits(), 0);
    assert_eq!(c.manifest.ret_const, Some(15));
    // a returning main runs as a call, so its global writes are reverted
    assert_eq!(c.manifest.consts["a"], vec![5]);
}

#[test]
fn xy_partial_evaluation() {
    let (p, _) = load(corpus::XY_CC).unwrap();
    // 0.75 * 0.5 / 5 at 16 bits
    let opts = CompileOptions::new(Flavor::Qft, 16).with_const("x", 0x6000).with_const("y", 0x4000).with_const("m", 5);
    let c = compile(&p, &opts).unwrap();
    let out = c.output.unwrap();
    assert_eq!(c.qubits(), 16);
    assert!(c.body.iter().all(|i| matches!(i, Instr::X(q) if q.var == out)));

    let (p, _) = load(corpus::XY_CQ).unwrap();
    for f in [Flavor::Qft, Flavor::Toff] {
        let c = compile(&p, &CompileOptions::new(f, 16).with_const("x", 0x6000).with_const("m", 5)).unwrap();
        assert_eq!(c.manifest.ops.get("mult_const"), Some(&1), "{f}");
        assert!(!c.manifest.ops.contains_key("div_mod"), "{f}");
    }
    let (p, _) = load(corpus::XY_QQ).unwrap();
    let c = compile(&p, &CompileOptions::new(Flavor::Qft, 16).with_const("m", 5)).unwrap();
    assert_eq!(c.manifest.ops.get("div_mod"), Some(&1));
    assert_eq!(c.manifest.ops.get("mult"), Some(&1));
}

#[test]
fn in_place_calls_and_scope() {
    assert!(load("Q nat a; void main() { Q nat a; }").is_err());
    let e = load("nat f() { return 1; } nat main() { C nat a; a = g(); return a; }").unwrap_err();
    assert!(matches!(e, FrontendError::Type(ref t) if t.rule == "call"), "{e}");
    let p = load(corpus::CHACHA_DOUBLE).unwrap().0;
    assert_eq!(p.funcs.len(), 1);
    assert_eq!(p.funcs[0].body.len(), 8 * 12);
    assert!(p.funcs[0].body.iter().all(|s| !matches!(s.kind, StmtKind::InPlace { .. })));
}
