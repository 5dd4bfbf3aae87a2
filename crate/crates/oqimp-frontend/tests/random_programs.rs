//! Random programs: well-typed ones run to a store or a runtime error, never
//! a panic, and their compiled circuits agree with the interpreter.

mod common;

use common::{agree, FLAVORS};
use oqimp_frontend::{interpret, load, Inputs};
use proptest::prelude::*;

const SZ: usize = 8;
const Q: [&str; 3] = ["a", "b", "c"];

/// (kind, permutation of a/b/c, small constant)
type Stmt = (u8, usize, u64);

fn perm(i: usize) -> (&'static str, &'static str, &'static str) {
    const P: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let p = P[i % 6];
    (Q[p[0]], Q[p[1]], Q[p[2]])
}

fn stmt(&(kind, p, n): &Stmt) -> String {
    let (x, y, z) = perm(p);
    match kind {
        0 => format!("{x} += {y};"),
        1 => format!("{x} -= {y};"),
        2 => format!("{x} ^= {y};"),
        3 => format!("{x} += {n};"),
        4 => format!("{x} <<<= {};", n % SZ as u64),
        5 => format!("if ({y} < {z}) {{ {x} += {n}; }}"),
        6 => format!("if (k < {n}) {{ {x} += {y}; }} else {{ {x} -= 1; }}"),
        7 => format!("if ({y} == {n}) {{ {x} ^= {z}; }} else {{ {x} += {z}; }}"),
        8 => format!("k = k + {n};"),
        9 => format!("{x} += k;"),
        10 => format!("if (even({y})) {{ {x} -= {z}; }}"),
        _ => format!("inv({x});"),
    }
}

fn program(body: &[Stmt], returns: bool) -> String {
    let body: Vec<String> = body.iter().map(stmt).collect();
    let globals = "Q nat a; Q nat b; Q nat c; C nat k;";
    if returns {
        format!("{globals} nat main() {{ Q nat t; {} t = a + b; return t; }}", body.join(" "))
    } else {
        format!("{globals} void main() {{ {} }}", body.join(" "))
    }
}

fn store(a: u64, b: u64, c: u64, k: u64) -> (Inputs, Inputs) {
    let consts = Inputs::from([("k".to_string(), vec![k])]);
    let q = Inputs::from([("a".to_string(), vec![a]), ("b".to_string(), vec![b]), ("c".to_string(), vec![c])]);
    (consts, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn progress_and_compilation(
        body in prop::collection::vec((0u8..12, 0usize..6, 0u64..16), 1..7),
        returns: bool,
        a in 0u64..256, b in 0u64..256, c in 0u64..256, k in 0u64..16,
    ) {
        let src = program(&body, returns);
        if let Ok((prog, _)) = load(&src) {
            let (consts, q) = store(a, b, c, k);
            let mut all = consts.clone();
            all.extend(q.clone());
            if let Ok(out) = interpret(&prog, SZ, &all) {
                for (g, vs) in &out.globals {
                    prop_assert!(vs.iter().all(|v| *v < 1 << SZ), "{g} out of range in {src}");
                }
                prop_assert!(out.ret.is_some() == returns);
                for f in FLAVORS {
                    agree(&src, SZ, f, &consts, &q);
                }
            }
        }
    }
}

#[test]
fn generator_produces_well_typed_programs() {
    let mut ok = 0;
    for kind in 0..12u8 {
        for p in 0..6 {
            if load(&program(&[(kind, p, 3)], false)).is_ok() {
                ok += 1;
            }
        }
    }
    // only the bare inv statements are rejected
    assert_eq!(ok, 66);
}
