use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn oqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqc")).args(args).env_remove("SEED").output().expect("oqc runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../oqimp-frontend/corpus").join(name)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_reports_qubits() {
    for (args, q) in [
        (&["gen", "rz_adder", "--bits", "16"][..], 32),
        (&["gen", "mod_mult_const", "--bits", "8", "--c", "173", "--n", "255", "--flavor", "qft"][..], 19),
        (&["gen", "rz_adder", "--bits", "1"][..], 2),
    ] {
        let o = oqc(args);
        assert!(o.status.success());
        assert_eq!(json(&o)["qubits"], q, "{args:?}");
    }
}

#[test]
fn gen_writes_parseable_qasm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("add.qasm");
    let o = oqc(&["gen", "toff_adder", "--bits", "4", "-o", p(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let circ = circuit_backend::parse_qasm(&text).unwrap();
    assert_eq!(circ.num_qubits, 9);
    let c = oqc(&["count", p(&out)]);
    assert_eq!(json(&c)["gates"], json(&o)["gates"]);
}

#[test]
fn compile_sine_and_chacha() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sin.qasm");
    let o = oqc(&["compile", p(&corpus("sin.qimp")), "--flag", "qft", "--size", "16", "--const", "n=1", "-o", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("OPENQASM 2.0;"));
    circuit_backend::parse_qasm(&text).unwrap();
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sin.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["sz"], 16);
    assert_eq!(m["qubits"], json(&o)["qubits"]);

    let out = dir.path().join("c20.qasm");
    let o = oqc(&["compile", p(&corpus("chacha20.qimp")), "--size", "32", "--level", "macro", "-o", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["qubits"], 1024);
}

#[test]
fn empty_main_gives_header_only_qasm() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("e.qimp");
    std::fs::write(&src, "Q nat a; void main() { }").unwrap();
    let o = oqc(&["compile", p(&src), "--size", "4"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("e.qasm")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 3, "{text}");
}

#[test]
fn compile_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.qasm"), dir.path().join("b.qasm"));
    for out in [&a, &b] {
        assert!(oqc(&["compile", p(&corpus("xy_qq.qimp")), "--const", "m=3", "--size", "8", "-o", p(out)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(a.with_extension("manifest.json")).unwrap(), std::fs::read(b.with_extension("manifest.json")).unwrap());
}

#[test]
fn test_command() {
    let o = oqc(&["test", "rz_adder", "--bits", "60", "--trials", "2000"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["passed"], true);
    let o = oqc(&["test", "aqft_adder", "--drop", "1", "--trials", "2000"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["max_abs_error"], 1);
    let o = oqc(&["test", "rz_adder", "--trials", "0"]);
    assert!(o.status.success());
    let a = oqc(&["test", "mult", "--bits", "8", "--trials", "300", "--seed", "9"]);
    let b = oqc(&["test", "mult", "--bits", "8", "--trials", "300", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn test_command_writes_junit() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("r.xml");
    let o = oqc(&["test", "all", "--bits", "6", "--trials", "50", "--junit", p(&x)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(x).unwrap();
    assert!(text.contains("tests=\"30\" failures=\"0\""));
}

#[test]
fn run_programs() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("add.oqasm");
    std::fs::write(
        &f,
        "var a[4];\nvar b[4];\nRev a; Rev b; QFT 4 b;\nCU a[0] (SR 0 b); CU a[1] (SR 1 b); CU a[2] (SR 2 b); CU a[3] (SR 3 b);\nQFTInv 4 b; Rev b; Rev a\n",
    )
    .unwrap();
    let o = oqc(&["run", p(&f), "-i", "a=3", "-i", "b=5"]);
    assert_eq!(json(&o)["b"], 8);
    let o = oqc(&["run", p(&f), "-i", "a=0", "-i", "b=5"]);
    assert_eq!(json(&o)["b"], 5);
    let o = oqc(&["run", p(&corpus("sin.qimp")), "-i", "x8=0", "-i", "n=2"]);
    assert_eq!(json(&o)["ret"], 0);
}

#[test]
fn exit_codes() {
    assert_eq!(oqc(&["compile", "/nonexistent.qimp"]).status.code(), Some(1));
    assert_eq!(oqc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(oqc(&["gen", "no_such_op"]).status.code(), Some(1));
    assert_eq!(oqc(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qimp");
    std::fs::write(&bad, "Q nat a;\nvoid main() {\n  a += ;\n}").unwrap();
    let o = oqc(&["compile", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.qimp") && err.contains("line 3"), "{err}");
}
