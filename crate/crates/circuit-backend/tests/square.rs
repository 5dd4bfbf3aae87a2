use circuit_backend::*;
use oqasm_core::{declare, Instr, OqasmState, Position, QubitValue, SizeEnv, Var};
use proptest::prelude::*;

fn p(v: Var, k: usize) -> Position {
    Position::new(v, k)
}

/// dense(translate(ι))·embed(φ) against embed(interpret(ι, φ)) under γ′.
fn square(sizes: &SizeEnv, prog: &Instr, st: &OqasmState, level: Level) -> f64 {
    let map0 = QubitMap::initial(sizes);
    let (map1, circ) = translate(sizes, &map0, prog).unwrap();
    assert!(map1.is_bijective());
    let lhs = dense_sim(&lower(&circ, level), &embed_state(st, &map0).unwrap()).unwrap();
    let out = oqasm_sim::interpret(sizes, prog, st).unwrap();
    max_amp_diff(&lhs, &embed_state(&out, &map1).unwrap())
}

fn nor_state(sizes: &SizeEnv, bits: u64, phases: &[u128]) -> OqasmState {
    let mut st = OqasmState::zero(sizes);
    let m = st.mask();
    for (i, q) in st.qubits.iter_mut().enumerate() {
        *q = QubitValue::nor((bits >> i) & 1 == 1);
        q.phase = phases.get(i).copied().unwrap_or(0) & m;
    }
    st
}

/// b += a over two n-bit registers in the Fourier basis.
fn adder(a: Var, b: Var, n: usize) -> Instr {
    let mut v = vec![Instr::Rev(b), Instr::QFT(n, b)];
    for i in 0..n {
        // bit i of a (little-endian) adds 2^i; reversed b has the MSB at offset 0
        v.push(Instr::cu(p(a, i), Instr::SR(n - 1 - i, b)));
    }
    v.extend([Instr::QFTInv(n, b), Instr::Rev(b)]);
    Instr::seq(v).unwrap()
}

#[test]
fn one_gate_square() {
    let mut s = SizeEnv::new();
    let x = declare(&mut s, "sq1_x", 2);
    for b in 0..4 {
        let st = nor_state(&s, b, &[1, 2]);
        assert!(square(&s, &Instr::X(p(x, 0)), &st, Level::Base) < 1e-9);
    }
}

#[test]
fn adder_square_exhaustive() {
    let mut s = SizeEnv::new();
    let a = declare(&mut s, "sq2_a", 3);
    let b = declare(&mut s, "sq2_b", 3);
    let prog = adder(a, b, 3);
    for bits in 0..64 {
        let st = nor_state(&s, bits, &[0, 1, 2, 3, 0, 1]);
        for level in [Level::Macro, Level::Base] {
            assert!(square(&s, &prog, &st, level) < 1e-9, "bits={bits}");
        }
    }
}

#[test]
fn approximate_qft_and_shifts() {
    let mut s = SizeEnv::new();
    let x = declare(&mut s, "sq3_x", 4);
    let c = declare(&mut s, "sq3_c", 1);
    let prog = Instr::seq(vec![
        Instr::Lshift(x),
        Instr::QFT(2, x),
        Instr::SR(1, x),
        Instr::cu(p(c, 0), Instr::SRInv(0, x)),
        Instr::QFTInv(2, x),
        Instr::Rev(x),
    ])
    .unwrap();
    for bits in 0..32 {
        let st = nor_state(&s, bits, &[3, 0, 1, 2, 1]);
        assert!(square(&s, &prog, &st, Level::Base) < 1e-9, "bits={bits}");
    }
}

#[test]
fn controlled_qft_block_is_peeled() {
    let mut s = SizeEnv::new();
    let c = declare(&mut s, "sq4_c", 1);
    let x = declare(&mut s, "sq4_x", 3);
    let body = Instr::seq(vec![Instr::QFT(3, x), Instr::SR(2, x), Instr::QFTInv(3, x)]).unwrap();
    let prog = Instr::cu(p(c, 0), body);
    let (_, circ) = translate_default(&s, &prog).unwrap();
    assert!(circ.gates.iter().any(|g| matches!(g, Gate::H(_))));
    for bits in 0..16 {
        let st = nor_state(&s, bits, &[]);
        assert!(square(&s, &prog, &st, Level::Base) < 1e-9);
    }
}

#[test]
fn balanced_shifts_add_no_gates() {
    let mut s = SizeEnv::new();
    let x = declare(&mut s, "sq5_x", 4);
    let plain = Instr::X(p(x, 1));
    let shifted = Instr::seq(vec![Instr::Lshift(x), Instr::X(p(x, 0)), Instr::Rshift(x)]).unwrap();
    let (_, a) = translate_default(&s, &plain).unwrap();
    let (g, b) = translate_default(&s, &shifted).unwrap();
    assert_eq!(g, QubitMap::initial(&s));
    assert_eq!(a.non_id().count(), b.non_id().count());
    assert_eq!(a.non_id().collect::<Vec<_>>(), b.non_id().collect::<Vec<_>>());
}

fn equivalent(a: &Circuit, b: &Circuit) -> bool {
    (0..1usize << a.num_qubits).all(|i| {
        let v = basis_state(a.num_qubits, i);
        max_amp_diff(&dense_sim(a, &v).unwrap(), &dense_sim(b, &v).unwrap()) < 1e-9
    })
}

#[test]
fn lowering_preserves_unitaries() {
    for g in [
        Gate::CCX(0, 1, 2),
        Gate::CCX(2, 0, 1),
        Gate::CRZk(1, 0, 2),
        Gate::CRZk(2, 2, 1),
        Gate::CRZkInv(3, 1, 0),
        Gate::CCRZk(1, 0, 1, 2),
        Gate::CCRZk(4, 2, 1, 0),
        Gate::CCRZkInv(2, 0, 2, 1),
    ] {
        let c = Circuit::with_gates(3, vec![Gate::H(0), Gate::H(1), Gate::H(2), g]);
        assert!(equivalent(&c, &lower(&c, Level::Base)), "{g}");
    }
}

#[test]
fn adder_qasm_round_trip() {
    let mut s = SizeEnv::new();
    let a = declare(&mut s, "sq6_a", 2);
    let b = declare(&mut s, "sq6_b", 2);
    let (_, circ) = translate_default(&s, &adder(a, b, 2)).unwrap();
    for level in [Level::Macro, Level::Base] {
        let c = lower(&circ, level);
        let text = emit_qasm(&c);
        assert_eq!(text, emit_qasm(&c), "deterministic");
        let back = parse_qasm(&text).unwrap();
        assert!(equivalent(&c, &back));
    }
    let r = count_resources(&circ, Level::Macro);
    assert_eq!(r.qubits, 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_sim_preserves_norm(gates in proptest::collection::vec((0u8..6, 0usize..4, 1usize..4, 1u32..5), 0..30)) {
        let gs: Vec<Gate> = gates
            .into_iter()
            .map(|(kind, a, off, k)| {
                let b = (a + off) % 4;
                match kind {
                    0 => Gate::X(a),
                    1 => Gate::H(a),
                    2 => Gate::RZk(k, a),
                    3 => Gate::CX(a, b),
                    4 => Gate::CRZk(k, a, b),
                    _ => Gate::CCX(a, b, (b + 1 + (b + 1 == a) as usize) % 4),
                }
            })
            .filter(|g| {
                let q = g.qubits();
                q.iter().enumerate().all(|(i, x)| !q[i + 1..].contains(x))
            })
            .collect();
        let c = Circuit::with_gates(4, gs);
        let v = dense_sim(&c, &basis_state(4, 5)).unwrap();
        let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((n - 1.0).abs() < 1e-9);
        prop_assert!(equivalent(&c, &lower(&c, Level::Base)));
    }
}
