use oracle_lib::{build, Flavor, Params};
use proptest::prelude::*;
use testkit::*;

fn strip(mut r: ErrorReport) -> ErrorReport {
    r.wall_secs = 0.0;
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn circular_distance_is_a_metric(a: u64, b: u64, bits in 1usize..64) {
        let m = (1u128 << bits) - 1;
        let (a, b) = (a as u128 & m, b as u128 & m);
        let d = circular_distance(a, b, bits);
        prop_assert_eq!(d, circular_distance(b, a, bits));
        prop_assert!(d <= 1u128 << (bits - 1));
        prop_assert_eq!(d == 0, a == b);
    }

    #[test]
    fn same_seed_same_report(seed: u64, bits in 2usize..12) {
        let s = build("aqft_adder", &Params { drop: Some(1), ..Params::bits(bits) }).unwrap();
        let cfg = TrialConfig::new(50, seed);
        prop_assert_eq!(strip(run_pbt(&s, &cfg)), strip(run_pbt(&s, &cfg)));
    }

    #[test]
    fn witnesses_refail_on_replay(seed: u64) {
        let s = build("aqft_adder", &Params { drop: Some(2), ..Params::bits(8) }).unwrap();
        let r = run_pbt(&s, &TrialConfig::new(100, seed));
        for w in &r.witnesses {
            prop_assert!(replay(&s, w, 0));
        }
    }

    #[test]
    fn identical_specs_have_no_error(seed: u64, bits in 1usize..20) {
        let s = build("rz_adder", &Params::bits(bits)).unwrap();
        let r = max_error(&s, &s, &TrialConfig::new(40, seed));
        prop_assert_eq!(r.max_abs_error, 0);
    }

    #[test]
    fn generated_programs_round_trip(seed: u64) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (s, p) = gen_program(&mut rng, &GenConfig::default());
        prop_assert!(check_reversibility(&s, &p, None, 4, seed).passed());
        prop_assert!(check_soundness(&s, &p, 4, seed).passed());
    }
}

#[test]
fn aqft_adder_vs_exact_adder_is_off_by_one() {
    let exact = build("rz_adder", &Params::bits(16)).unwrap();
    let approx = build("aqft_adder", &Params { drop: Some(1), ..Params::bits(16) }).unwrap();
    let r = max_error(&exact, &approx, &TrialConfig::new(2000, DEFAULT_SEED));
    assert_eq!(r.max_abs_error, 1);
}

#[test]
fn aqft_div_mod_matches_exact_quotient_and_remainder() {
    let p = |f| Params { modulus: Some(7), flavor: Some(f), ..Params::bits(16) };
    let exact = build("div_mod", &p(Flavor::Qft)).unwrap();
    let approx = build("div_mod", &p(Flavor::Aqft)).unwrap();
    let r = max_error(&exact, &approx, &TrialConfig::new(2000, DEFAULT_SEED));
    assert_eq!(r.max_abs_error, 0);
}

#[test]
fn adder_suite_passes_and_zero_trials_pass() {
    let s = build("rz_adder", &Params::bits(16)).unwrap();
    assert!(run_pbt(&s, &TrialConfig::new(0, 1)).passed());
    assert!(run_pbt(&s, &TrialConfig::new(10_000, DEFAULT_SEED)).passed());
}

#[test]
fn small_adder_square_and_linearity() {
    let s = build("rz_adder", &Params::bits(2)).unwrap();
    assert_eq!(s.qubits(), 4);
    assert!(check_spec_translation(&s, 32, 5).unwrap().passed());
    assert!(check_linearity(&s.sizes, &s.program, Some(&s), 32, 5).unwrap().passed());
    let m = build("mod_add_const", &Params { c: Some(3), modulus: Some(5), ..Params::bits(3) }).unwrap();
    assert!(check_linearity(&m.sizes, &m.program, Some(&m), 32, 6).unwrap().passed());
}

#[test]
fn reports_serialize() {
    let s = build("rz_adder", &Params::bits(4)).unwrap();
    let r = run_pbt(&s, &TrialConfig::new(10, 1));
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["trials"], 10);
    assert_eq!(v["failures"], 0);
}
