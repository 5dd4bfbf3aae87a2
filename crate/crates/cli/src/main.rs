//! `oqc`: compile, generate, test, run and count oracle circuits.
//!
//! Exit codes: 0 success, 1 user or program error (including failed test
//! suites), 2 internal fault.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use circuit_backend::{count_resources, emit_qasm, lower, parse_qasm, translate_default, Circuit, Level};
use clap::{Args, Parser, Subcommand};
use oqasm_core::{nor_env, parse_program, typecheck, Var};
use oqasm_sim::{decode_all, encode_inputs, interpret as run_oqasm};
use oqimp_frontend::{compile, interpret as run_oqimp, load, CompileOptions, Inputs};
use oracle_lib::spec::pow2;
use oracle_lib::{build, Flavor, OracleSpec, Params};
use serde_json::{json, Value};
use testkit::{all_instances, run_pbt, seed_from_env, ErrorReport, Suite, TrialConfig, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "oqc", version, about = "Reversible oracle compiler and test driver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compile an imperative program to OpenQASM 2.0 plus a JSON manifest.
    Compile {
        file: PathBuf,
        /// Arithmetic flavor: qft, aqft or classical.
        #[arg(long, default_value = "qft")]
        flag: Flavor,
        /// Word size in bits.
        #[arg(long, default_value_t = 16)]
        size: usize,
        #[arg(long, default_value = "base")]
        level: Level,
        /// QASM output path (default: input with .qasm); the manifest goes
        /// next to it with extension .manifest.json.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Value of a C-mode global, `name=v` or `name=v1,v2,...`.
        #[arg(long = "const", value_name = "NAME=V")]
        consts: Vec<String>,
    },
    /// Emit a library operator as OpenQASM and print its resource counts.
    Gen {
        operator: String,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long, default_value = "base")]
        level: Level,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Differential test of operators against their classical functions.
    Test {
        /// Operator name, or `all` for every operator and flavor.
        target: String,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Seed (default: $SEED, else a fixed value).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write a JUnit XML report here.
        #[arg(long)]
        junit: Option<PathBuf>,
    },
    /// Run a .qimp program (reference interpreter) or an .oqasm program
    /// (simulator) and print the final values as JSON.
    Run {
        file: PathBuf,
        /// `name=v` or `name=v1,v2,...`; repeatable.
        #[arg(short, long = "inputs", value_name = "NAME=V")]
        inputs: Vec<String>,
        /// Word size for .qimp programs.
        #[arg(long, default_value_t = 16)]
        size: usize,
    },
    /// Count qubits and gates of a .qasm or .oqasm file.
    Count {
        file: PathBuf,
        #[arg(long, default_value = "base")]
        level: Level,
    },
}

#[derive(Args, Debug)]
struct OpArgs {
    #[arg(long, default_value_t = 16)]
    bits: usize,
    /// Constant operand.
    #[arg(long)]
    c: Option<u128>,
    /// Modulus or divisor.
    #[arg(long)]
    n: Option<u128>,
    #[arg(long)]
    flavor: Option<Flavor>,
    /// Precision bits dropped by the approximate adder.
    #[arg(long)]
    drop: Option<usize>,
}

impl OpArgs {
    fn params(&self) -> Params {
        Params { bits: self.bits, c: self.c, modulus: self.n, flavor: self.flavor, drop: self.drop }
    }
}

fn parse_value(s: &str) -> Result<u64> {
    let s = s.trim();
    let v = match s.strip_prefix("0x") {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    v.with_context(|| format!("bad value `{s}`"))
}

fn parse_assignments(items: &[String]) -> Result<Inputs> {
    let mut out = Inputs::new();
    for it in items {
        let (k, v) = it.split_once('=').ok_or_else(|| anyhow!("expected NAME=V, got `{it}`"))?;
        let vals = v.split(',').map(parse_value).collect::<Result<Vec<_>>>()?;
        out.insert(k.trim().to_string(), vals);
    }
    Ok(out)
}

/// Print a line to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_compile(file: &Path, flag: Flavor, size: usize, level: Level, output: Option<PathBuf>, consts: &[String]) -> Result<()> {
    let src = read(file)?;
    let (prog, _) = load(&src).map_err(|e| anyhow!("{}: {e}", file.display()))?;
    let opts = CompileOptions { flavor: flag, sz: size, consts: parse_assignments(consts)? };
    let c = compile(&prog, &opts).map_err(|e| anyhow!("{}: {e}", file.display()))?;
    let circ = match c.program() {
        Some(p) => {
            let (_, circ) = translate_default(&c.sizes, &p).map_err(|e| anyhow!("{}: circuit translation: {e}", file.display()))?;
            lower(&circ, level)
        }
        None => Circuit::new(c.qubits()),
    };
    let out = output.unwrap_or_else(|| file.with_extension("qasm"));
    write(&out, &emit_qasm(&circ))?;
    let manifest = out.with_extension("manifest.json");
    write(&manifest, &c.manifest.to_json())?;
    let rep = count_resources(&circ, level);
    emit(&json!({ "qasm": out, "manifest": manifest, "qubits": rep.qubits, "gates": rep.gates }).to_string())?;
    Ok(())
}

fn build_op(name: &str, p: &Params) -> Result<OracleSpec> {
    build(name, p).map_err(|e| anyhow!("{name}: {e}"))
}

fn cmd_gen(operator: &str, op: &OpArgs, level: Level, output: Option<PathBuf>) -> Result<()> {
    let spec = build_op(operator, &op.params())?;
    let (_, circ) = translate_default(&spec.sizes, &spec.program).map_err(|e| anyhow!("{}: {e}", spec.name))?;
    let circ = lower(&circ, level);
    if let Some(out) = output {
        write(&out, &emit_qasm(&circ))?;
    }
    emit(&count_resources(&circ, level).to_json())?;
    Ok(())
}

/// Report without wall time, so equal seeds give equal output.
fn report_json(r: &ErrorReport, tolerance: u128) -> Value {
    json!({
        "name": r.name,
        "trials": r.trials,
        "seed": r.seed,
        "tolerance": tolerance,
        "max_abs_error": r.max_abs_error,
        "failures": r.failures,
        "witnesses": r.witnesses,
        "passed": r.passed(),
    })
}

fn cmd_test(target: &str, op: &OpArgs, trials: usize, seed: Option<u64>, junit: Option<PathBuf>) -> Result<bool> {
    let seed = seed.unwrap_or_else(|| seed_from_env(DEFAULT_SEED));
    let specs = if target == "all" { all_instances(op.bits).map_err(|e| anyhow!("{e}"))? } else { vec![build_op(target, &op.params())?] };
    let mut suite = Suite::new(target);
    let mut reports = Vec::new();
    for s in &specs {
        let mut cfg = TrialConfig::new(trials, seed);
        if s.approximate {
            // bounded error of the approximate adder
            cfg.tolerance = pow2(op.drop.unwrap_or(1)) - 1;
        }
        let r = run_pbt(s, &cfg);
        eprintln!("{}: {} ({} trials, {:.2}s)", s.name, if r.passed() { "pass" } else { "FAIL" }, r.trials, r.wall_secs);
        suite.push(s.name.clone(), r.passed(), r.wall_secs, format!("{} failures, max error {}", r.failures, r.max_abs_error));
        reports.push(report_json(&r, cfg.tolerance));
    }
    let out = if reports.len() == 1 { reports.remove(0) } else { Value::Array(reports) };
    emit(&serde_json::to_string_pretty(&out)?)?;
    if let Some(path) = junit {
        write(&path, &suite.to_junit())?;
    }
    Ok(suite.passed())
}

fn cmd_run(file: &Path, inputs: &[String], size: usize) -> Result<()> {
    let src = read(file)?;
    let inputs = parse_assignments(inputs)?;
    if file.extension().is_some_and(|e| e == "oqasm") {
        let (sizes, prog) = parse_program(&src).map_err(|e| anyhow!("{}: {e}", file.display()))?;
        let mut assign = Vec::new();
        for (k, v) in &inputs {
            let var = Var::new(k);
            if !sizes.contains_key(&var) || v.len() != 1 {
                bail!("`{k}` is not a declared variable with a single value");
            }
            assign.push((var, v[0] as u128));
        }
        let mut st = encode_inputs(&sizes, assign).map_err(|e| anyhow!("{e}"))?;
        if let Some(p) = prog {
            typecheck(&sizes, &nor_env(&sizes), &p).map_err(|e| anyhow!("{}: {e}", file.display()))?;
            st = run_oqasm(&sizes, &p, &st).map_err(|e| anyhow!("{e}"))?;
        }
        let vals: BTreeMap<String, u128> =
            decode_all(&st).map_err(|e| anyhow!("{e}"))?.into_iter().map(|(v, x)| (v.to_string(), x)).collect();
        emit(&serde_json::to_string_pretty(&vals)?)?;
    } else {
        let (prog, _) = load(&src).map_err(|e| anyhow!("{}: {e}", file.display()))?;
        let out = run_oqimp(&prog, size, &inputs).map_err(|e| anyhow!("{}: {e}", file.display()))?;
        emit(&serde_json::to_string_pretty(&json!({ "globals": out.globals, "ret": out.ret }))?)?;
    }
    Ok(())
}

fn cmd_count(file: &Path, level: Level) -> Result<()> {
    let src = read(file)?;
    let circ = if file.extension().is_some_and(|e| e == "oqasm") {
        let (sizes, prog) = parse_program(&src).map_err(|e| anyhow!("{}: {e}", file.display()))?;
        match prog {
            Some(p) => translate_default(&sizes, &p).map_err(|e| anyhow!("{e}"))?.1,
            None => Circuit::new(sizes.values().sum()),
        }
    } else {
        parse_qasm(&src).map_err(|e| anyhow!("{}: {e}", file.display()))?
    };
    emit(&count_resources(&lower(&circ, level), level).to_json())?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Compile { file, flag, size, level, output, consts } => cmd_compile(&file, flag, size, level, output, &consts)?,
        Cmd::Gen { operator, op, level, output } => cmd_gen(&operator, &op, level, output)?,
        Cmd::Test { target, op, trials, seed, junit } => return cmd_test(&target, &op, trials, seed, junit),
        Cmd::Run { file, inputs, size } => cmd_run(&file, &inputs, size)?,
        Cmd::Count { file, level } => cmd_count(&file, level)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(2),
    }
}
