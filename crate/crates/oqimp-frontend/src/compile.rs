//! Partial-evaluating compiler to oracle assembly.
//!
//! C-mode code runs at compile time. Q locations additionally carry a lazy
//! state: a location that only ever received known values is physically 0
//! and logically `k`, and operations whose operands are all known fold to
//! another known value without emitting gates. A lazy value is written into
//! its qubits only when a run-time operation needs the location.

use std::collections::{BTreeMap, HashMap};

use oqasm_core::{Instr, Position, SizeEnv, Var};
use oracle_lib::compare::{qft_lt, qft_lt_const, toff_lt};
use oracle_lib::divmod::{div_iterations, div_mod_aqft, div_mod_qft, div_mod_toff};
use oracle_lib::gates::{bits, ccx, cx, p, x as xg};
use oracle_lib::mult::{qft_mul_body, qft_mul_const_body, toff_mul, toff_mul_const};
use oracle_lib::qft::{in_phi, phi_add_le, sr_const};
use oracle_lib::toff::{cuccaro, cuccaro_sub, inverse, with_const};
use oracle_lib::Flavor;
use serde::Serialize;

use crate::ast::*;
use crate::check::written;
use crate::interp::{validate_inputs, Inputs};
use crate::value::{self, mask, width, MAX_STEPS};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct CompileError {
    pub line: usize,
    pub msg: String,
}

fn cerr<T>(line: usize, msg: impl Into<String>) -> Result<T, CompileError> {
    Err(CompileError { line, msg: msg.into() })
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub flavor: Flavor,
    pub sz: usize,
    /// Values of C-mode globals.
    pub consts: Inputs,
}

impl CompileOptions {
    pub fn new(flavor: Flavor, sz: usize) -> CompileOptions {
        CompileOptions { flavor, sz, consts: Inputs::new() }
    }

    pub fn with_const(mut self, name: &str, v: u64) -> CompileOptions {
        self.consts.insert(name.to_string(), vec![v]);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarRole {
    /// Q global of a main that returns a value (restored at the end).
    Input,
    /// Q global of a void main (its final value is the result).
    Inout,
    Output,
    Local,
    Scratch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VarEntry {
    pub oqasm: String,
    /// Source location, e.g. `x[3]`; empty for scratch.
    pub source: String,
    pub start: usize,
    pub len: usize,
    pub role: VarRole,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub sz: usize,
    pub flag: String,
    pub qubits: usize,
    pub vars: Vec<VarEntry>,
    pub scratch_qubits: usize,
    /// Oracle constructors used, with counts.
    pub ops: BTreeMap<String, usize>,
    /// C globals after compilation.
    pub consts: BTreeMap<String, Vec<u64>>,
    /// Main's return value when it is C-mode (no output register).
    pub ret_const: Option<u64>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub body: Vec<Instr>,
    pub sizes: SizeEnv,
    pub manifest: Manifest,
    /// Q global → element variables.
    pub globals: BTreeMap<String, Vec<Var>>,
    pub output: Option<Var>,
}

impl Compiled {
    /// The whole program, or `None` when nothing was emitted.
    pub fn program(&self) -> Option<Instr> {
        Instr::seq(self.body.clone())
    }

    pub fn qubits(&self) -> usize {
        self.sizes.values().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum St {
    /// Physically 0, logically the value.
    Lazy(u64),
    Live,
}

#[derive(Clone)]
struct Hist {
    prev: St,
    code: Vec<Instr>,
    opaque: bool,
}

#[derive(Clone)]
struct Slot {
    var: Var,
    w: usize,
    st: St,
    hist: Vec<Hist>,
}

type Key = (usize, String, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
enum Opnd {
    K(u64),
    R(Vec<Position>),
}

struct Frame<'p> {
    id: usize,
    depth: usize,
    decls: HashMap<&'p str, &'p Decl>,
}

struct Ctx<'p> {
    prog: &'p Program,
    sz: usize,
    flavor: Flavor,
    globals: HashMap<&'p str, &'p Decl>,
    slots: HashMap<Key, Slot>,
    cstore: HashMap<Key, u64>,
    next_frame: usize,
    depth: usize,
    widths: HashMap<Var, usize>,
    sources: HashMap<Var, String>,
    scratch: Vec<Var>,
    ops: BTreeMap<String, usize>,
    out: Vec<Instr>,
}

pub fn compile(prog: &Program, opts: &CompileOptions) -> Result<Compiled, CompileError> {
    let sz = opts.sz;
    if sz == 0 || sz > 64 {
        return cerr(0, format!("word size {sz} outside 1..=64"));
    }
    validate_inputs(prog, sz, &opts.consts).map_err(|e| CompileError { line: 0, msg: e.to_string() })?;
    if let Some(q) = opts.consts.keys().find(|k| prog.globals.iter().any(|g| &g.name == *k && g.ty.mode == Mode::Q)) {
        return cerr(0, format!("{q} is a Q global and cannot be fixed at compile time"));
    }
    let main = prog.main().ok_or_else(|| CompileError { line: 0, msg: "no main function".into() })?;
    let mut cx = Ctx {
        prog,
        sz,
        flavor: opts.flavor,
        globals: prog.globals.iter().map(|g| (g.name.as_str(), g)).collect(),
        slots: HashMap::new(),
        cstore: HashMap::new(),
        next_frame: 1,
        depth: 0,
        widths: HashMap::new(),
        sources: HashMap::new(),
        scratch: Vec::new(),
        ops: BTreeMap::new(),
        out: Vec::new(),
    };
    let mut gvars = BTreeMap::new();
    for g in &prog.globals {
        let n = g.ty.len.unwrap_or(1);
        let w = width(g.ty.base, sz);
        let mut vs = Vec::new();
        for k in 0..n {
            let key = (0, g.name.clone(), k);
            match g.ty.mode {
                Mode::C => {
                    let v = opts.consts.get(&g.name).map_or(0, |v| v[k]);
                    cx.cstore.insert(key, v);
                }
                Mode::Q => {
                    let (name, src) = match g.ty.len {
                        None => (g.name.clone(), g.name.clone()),
                        Some(_) => (format!("{}.{k}", g.name), format!("{}[{k}]", g.name)),
                    };
                    let var = cx.new_var(&name, w, src);
                    vs.push(var);
                    cx.slots.insert(key, Slot { var, w, st: St::Live, hist: Vec::new() });
                }
            }
        }
        if g.ty.mode == Mode::Q {
            gvars.insert(g.name.clone(), vs);
        }
    }

    let returning = main.ret.is_some();
    let mut output = None;
    let mut ret_const = None;
    if returning {
        let csnap = cx.cstore.clone();
        let ssnap = cx.slots.clone();
        let frame = cx.enter(main, &[], 0);
        cx.block(&frame, &main.body)?;
        let Some(RetVal::Single(rv)) = &main.ret_val else { unreachable!("typechecked") };
        let (r, base) = cx.operand(&frame, rv, main.line)?;
        let u = std::mem::take(&mut cx.out);
        cx.cstore = csnap;
        cx.slots = ssnap;
        let ret_mode = match main.ret {
            Some((Some(m), _, _)) => m,
            _ => {
                let mut m = Mode::C;
                if let Value::L(l) = rv {
                    m = cx.decl(&frame, &l.var, main.line)?.1.ty.mode;
                }
                m
            }
        };
        match (ret_mode, r) {
            (Mode::C, Opnd::K(v)) => ret_const = Some(v),
            (Mode::C, Opnd::R(_)) => unreachable!("C values are known"),
            (Mode::Q, r) => {
                let w = width(base, sz);
                let ov = cx.new_var("out.ret", w, "return".into());
                output = Some(ov);
                let inv_u = inverse(&u);
                cx.out = u;
                cx.put(&r, &bits(ov, w));
                cx.out.extend(inv_u);
            }
        }
    } else {
        let frame = cx.enter(main, &[], 0);
        cx.block(&frame, &main.body)?;
    }

    // keep declared inputs/outputs and whatever the program touches
    let mut order: Vec<Var> = gvars.values().flatten().copied().collect();
    order.extend(output);
    for i in &cx.out {
        for v in i.vars() {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }
    let mut sizes = SizeEnv::new();
    let mut vars = Vec::new();
    let mut start = 0;
    let mut scratch_qubits = 0;
    let global_set: Vec<Var> = gvars.values().flatten().copied().collect();
    for v in order {
        let len = cx.widths[&v];
        sizes.insert(v, len);
        let role = if global_set.contains(&v) {
            if returning {
                VarRole::Input
            } else {
                VarRole::Inout
            }
        } else if Some(v) == output {
            VarRole::Output
        } else if cx.scratch.contains(&v) {
            scratch_qubits += len;
            VarRole::Scratch
        } else {
            VarRole::Local
        };
        vars.push(VarEntry {
            oqasm: v.name().to_string(),
            source: cx.sources.get(&v).cloned().unwrap_or_default(),
            start,
            len,
            role,
        });
        start += len;
    }
    let consts = prog
        .globals
        .iter()
        .filter(|g| g.ty.mode == Mode::C)
        .map(|g| (g.name.clone(), (0..g.ty.len.unwrap_or(1)).map(|k| cx.cstore[&(0, g.name.clone(), k)]).collect()))
        .collect();
    let manifest = Manifest {
        sz,
        flag: opts.flavor.to_string(),
        qubits: start,
        vars,
        scratch_qubits,
        ops: cx.ops,
        consts,
        ret_const,
    };
    Ok(Compiled { body: cx.out, sizes, manifest, globals: gvars, output })
}

enum QRhs {
    Copy(Opnd),
    Bin(BinOp, Opnd, Base, Opnd, Base),
    Pow(Opnd, Base, u64),
    Even(Opnd),
}

impl<'p> Ctx<'p> {
    fn new_var(&mut self, name: &str, w: usize, source: String) -> Var {
        let v = Var::new(name);
        self.widths.insert(v, w);
        if !source.is_empty() {
            self.sources.insert(v, source);
        }
        v
    }

    fn op(&mut self, name: &str) {
        *self.ops.entry(name.to_string()).or_insert(0) += 1;
    }

    fn alloc(&mut self, w: usize) -> Var {
        let name = format!("tmp.{}.{}", self.depth, w);
        self.depth += 1;
        let v = self.new_var(&name, w, String::new());
        if !self.scratch.contains(&v) {
            self.scratch.push(v);
        }
        v
    }

    fn free(&mut self, n: usize) {
        self.depth -= n;
    }

    fn enter(&mut self, f: &'p FunDef, args: &[u64], depth: usize) -> Frame<'p> {
        let id = self.next_frame;
        self.next_frame += 1;
        let mut decls = HashMap::new();
        for (d, v) in f.params.iter().zip(args) {
            decls.insert(d.name.as_str(), d);
            self.cstore.insert((id, d.name.clone(), 0), *v);
        }
        for d in &f.locals {
            decls.insert(d.name.as_str(), d);
            let w = width(d.ty.base, self.sz);
            for k in 0..d.ty.len.unwrap_or(1) {
                let key = (id, d.name.clone(), k);
                match d.ty.mode {
                    Mode::C => {
                        self.cstore.insert(key, 0);
                    }
                    Mode::Q => {
                        let mut name = if depth == 0 { d.name.clone() } else { format!("{}.{}.{depth}", f.name, d.name) };
                        let mut src = if depth == 0 { d.name.clone() } else { format!("{}.{}", f.name, d.name) };
                        if d.ty.len.is_some() {
                            name = format!("{name}.{k}");
                            src = format!("{src}[{k}]");
                        }
                        let var = self.new_var(&name, w, src);
                        self.slots.insert(key, Slot { var, w, st: St::Lazy(0), hist: Vec::new() });
                    }
                }
            }
        }
        Frame { id, depth, decls }
    }

    fn decl(&self, fr: &Frame<'p>, name: &str, line: usize) -> Result<(usize, &'p Decl), CompileError> {
        if let Some(d) = fr.decls.get(name) {
            return Ok((fr.id, d));
        }
        match self.globals.get(name) {
            Some(d) => Ok((0, d)),
            None => cerr(line, format!("unknown variable {name}")),
        }
    }

    fn key(&self, fr: &Frame<'p>, l: &LValue, line: usize) -> Result<(Key, Ty), CompileError> {
        let (scope, d) = self.decl(fr, &l.var, line)?;
        let idx = match &l.index {
            None => 0,
            Some(i) => {
                let Opnd::K(k) = self.operand(fr, i, line)?.0 else {
                    return cerr(line, "array index must be known at compile time");
                };
                if k >= d.ty.len.unwrap_or(1) as u64 {
                    return cerr(line, format!("index {k} out of bounds for {}", l.var));
                }
                k as usize
            }
        };
        Ok(((scope, l.var.clone(), idx), Ty { len: None, ..d.ty }))
    }

    fn operand(&self, fr: &Frame<'p>, v: &Value, line: usize) -> Result<(Opnd, Base), CompileError> {
        match v {
            Value::Lit(l) => {
                let b = match l {
                    Lit::Int(_) => Base::Nat,
                    Lit::Dec { .. } => Base::Fixedp,
                    Lit::Bool(_) => Base::Bool,
                };
                Ok((Opnd::K(value::lit(*l, b, self.sz)), b))
            }
            Value::L(l) => {
                let (k, t) = self.key(fr, l, line)?;
                match t.mode {
                    Mode::C => Ok((Opnd::K(self.cstore[&k]), t.base)),
                    Mode::Q => {
                        let s = &self.slots[&k];
                        Ok((
                            match s.st {
                                St::Lazy(v) => Opnd::K(v),
                                St::Live => Opnd::R(bits(s.var, s.w)),
                            },
                            t.base,
                        ))
                    }
                }
            }
        }
    }

    fn c_value(&self, fr: &Frame<'p>, v: &Value, line: usize) -> Result<u64, CompileError> {
        match self.operand(fr, v, line)?.0 {
            Opnd::K(k) => Ok(k),
            Opnd::R(_) => cerr(line, format!("{v} is not known at compile time")),
        }
    }

    fn block(&mut self, fr: &Frame<'p>, body: &'p [Stmt]) -> Result<(), CompileError> {
        body.iter().try_for_each(|s| self.stmt(fr, s))
    }

    fn mark(&self) -> usize {
        self.out.len()
    }

    fn since(&self, m: usize) -> Vec<Instr> {
        self.out[m..].to_vec()
    }

    fn emit_inverse(&mut self, code: &[Instr]) {
        self.out.extend(inverse(code));
    }

    // ----- primitive emitters -------------------------------------------------

    fn load(&mut self, reg: &[Position], c: u64) {
        for (k, &q) in reg.iter().enumerate() {
            if k < 64 && (c >> k) & 1 == 1 {
                self.out.push(xg(q));
            }
        }
    }

    fn put(&mut self, o: &Opnd, dst: &[Position]) {
        match o {
            Opnd::K(c) => self.load(dst, *c),
            Opnd::R(src) => {
                for (&s, &d) in src.iter().zip(dst) {
                    self.out.push(cx(s, d));
                }
            }
        }
    }

    /// t += b (or −=) on a live register.
    fn add_into(&mut self, t: Var, w: usize, b: &Opnd, sub: bool) {
        let tb = bits(t, w);
        match b {
            Opnd::K(c) => {
                let c = c & mask(w);
                if c == 0 {
                    return;
                }
                self.op(if sub { "sub_const" } else { "add_const" });
                match self.flavor {
                    Flavor::Qft | Flavor::Aqft => self.out.extend(in_phi(t, w, sr_const(t, w, c as u128, sub))),
                    Flavor::Toff => {
                        let k = self.alloc(w);
                        let c0 = self.alloc(1);
                        let kb = bits(k, w);
                        let core = if sub { cuccaro_sub(&kb, &tb, p(c0, 0), None) } else { cuccaro(&kb, &tb, p(c0, 0), None, None) };
                        self.out.extend(with_const(&kb, c as u128, core));
                        self.free(2);
                    }
                }
            }
            Opnd::R(bs) => {
                self.op(if sub { "sub" } else { "add" });
                match self.flavor {
                    Flavor::Qft | Flavor::Aqft => self.out.extend(in_phi(t, w, phi_add_le(bs, t, w, sub))),
                    Flavor::Toff => {
                        let c0 = self.alloc(1);
                        let core = if sub { cuccaro_sub(bs, &tb, p(c0, 0), None) } else { cuccaro(bs, &tb, p(c0, 0), None, None) };
                        self.out.extend(core);
                        self.free(1);
                    }
                }
            }
        }
    }

    /// Copy `y` to a fresh temp when it shares qubits with `x`. Returns the
    /// operand to use and the copy code to undo (with its temp count).
    fn unalias(&mut self, x: &[Position], y: &[Position]) -> (Vec<Position>, Option<Vec<Instr>>) {
        if !x.iter().any(|q| y.contains(q)) {
            return (y.to_vec(), None);
        }
        let t = self.alloc(y.len());
        let tb = bits(t, y.len());
        let m = self.mark();
        self.put(&Opnd::R(y.to_vec()), &tb);
        (tb, Some(self.since(m)))
    }

    fn undo_alias(&mut self, code: Option<Vec<Instr>>) {
        if let Some(c) = code {
            self.emit_inverse(&c);
            self.free(1);
        }
    }

    /// t ← x·b mod 2^w into a zero register (integer product).
    fn mul_into(&mut self, t: Var, w: usize, xs: &[Position], b: &Opnd) {
        let tb = bits(t, w);
        match b {
            Opnd::K(c) => {
                let c = c & mask(w);
                self.op("mult_const");
                match self.flavor {
                    Flavor::Qft | Flavor::Aqft => self.out.extend(in_phi(t, w, qft_mul_const_body(xs, c as u128, t, w))),
                    Flavor::Toff => {
                        let c0 = self.alloc(1);
                        self.out.extend(toff_mul_const(xs, c as u128, &tb, p(c0, 0)));
                        self.free(1);
                    }
                }
            }
            Opnd::R(ys) => {
                self.op("mult");
                let (ys, undo) = self.unalias(xs, ys);
                match self.flavor {
                    Flavor::Qft | Flavor::Aqft => self.out.extend(in_phi(t, w, qft_mul_body(xs, &ys, t, w))),
                    Flavor::Toff => {
                        let c0 = self.alloc(1);
                        self.out.extend(toff_mul(xs, &ys, &tb, p(c0, 0)));
                        self.free(1);
                    }
                }
                self.undo_alias(undo);
            }
        }
    }

    /// t ← floor(x·b / 2^(w−1)) via a 2w-bit product register.
    fn fmul_into(&mut self, t: Var, w: usize, xs: &[Position], b: &Opnd) {
        let pv = self.alloc(2 * w);
        let pb = bits(pv, 2 * w);
        let c0 = self.alloc(1);
        let c0p = p(c0, 0);
        let m = self.mark();
        let mut undo = None;
        match b {
            Opnd::K(c) => {
                self.op("mult_const");
                match self.flavor {
                    Flavor::Qft | Flavor::Aqft => self.out.extend(in_phi(pv, 2 * w, qft_mul_const_body(xs, *c as u128, pv, 2 * w))),
                    Flavor::Toff => {
                        for j in 0..w {
                            if (c >> j) & 1 == 1 {
                                self.out.extend(cuccaro(xs, &pb[j..j + w], c0p, Some(pb[j + w]), None));
                            }
                        }
                    }
                }
            }
            Opnd::R(ys) => {
                self.op("mult");
                let (ys, u) = self.unalias(xs, ys);
                undo = u;
                match self.flavor {
                    Flavor::Qft | Flavor::Aqft => self.out.extend(in_phi(pv, 2 * w, qft_mul_body(xs, &ys, pv, 2 * w))),
                    Flavor::Toff => {
                        for (k, &yk) in ys.iter().enumerate() {
                            self.out.extend(cuccaro(xs, &pb[k..k + w], c0p, Some(pb[k + w]), Some(yk)));
                        }
                    }
                }
            }
        }
        let code = self.since(m);
        let tb = bits(t, w);
        self.put(&Opnd::R(pb[w - 1..2 * w - 1].to_vec()), &tb);
        self.emit_inverse(&code);
        // the alias copy (if any) was part of `code` and is already undone
        if undo.is_some() {
            self.free(1);
        }
        self.free(2);
    }

    /// t ← x div c or x mod c, for a known divisor 0 < c < 2^w.
    fn divmod_into(&mut self, t: Var, w: usize, xs: &[Position], c: u64, quotient: bool, line: usize) -> Result<(), CompileError> {
        let it = div_iterations(w, c as u128).map_err(|e| CompileError { line, msg: e.to_string() })?;
        self.op("div_mod");
        let tb = bits(t, w);
        let (xv, xw) = match self.flavor {
            Flavor::Toff => (self.alloc(w), w),
            _ => (self.alloc(w + 1), w + 1),
        };
        let xb = bits(xv, xw);
        let qv = self.alloc(it + 1);
        let qb = bits(qv, it + 1);
        let mut held = 2;
        let ld = self.mark();
        self.put(&Opnd::R(xs.to_vec()), &xb[..w]);
        let load = self.since(ld);
        let m = self.mark();
        let res = match self.flavor {
            Flavor::Qft => div_mod_qft(xv, qv, w, c as u128),
            Flavor::Aqft => div_mod_aqft(xv, qv, w, c as u128),
            Flavor::Toff => {
                let k = self.alloc(w);
                let c0 = self.alloc(1);
                held += 2;
                div_mod_toff(&xb, &bits(k, w), p(c0, 0), &qb, c as u128)
            }
        };
        let code = res.map_err(|e| CompileError { line, msg: e.to_string() })?;
        self.out.extend(code);
        let code = self.since(m);
        if quotient {
            self.put(&Opnd::R(qb), &tb[..it + 1]);
        } else {
            self.put(&Opnd::R(xb[..w].to_vec()), &tb);
        }
        self.emit_inverse(&code);
        self.emit_inverse(&load);
        self.free(held);
        Ok(())
    }

    /// t ⊕= [a < b] (unsigned, w bits); at least one operand is live.
    fn lt_into(&mut self, t: Position, w: usize, a: &Opnd, b: &Opnd) {
        self.op("cmp_lt");
        match self.flavor {
            Flavor::Qft | Flavor::Aqft => {
                let xv = self.alloc(w + 1);
                let xb = bits(xv, w + 1);
                let m = self.mark();
                self.put(a, &xb[..w]);
                let ld = self.since(m);
                match b {
                    Opnd::K(c) => self.out.extend(qft_lt_const(xv, w, *c as u128, t)),
                    Opnd::R(ys) => self.out.extend(qft_lt(xv, ys, w, t)),
                }
                self.emit_inverse(&ld);
                self.free(1);
            }
            Flavor::Toff => {
                let m = self.mark();
                let mut held = 0;
                let mut reg = |cx: &mut Self, o: &Opnd| match o {
                    Opnd::R(r) => r.clone(),
                    Opnd::K(c) => {
                        let v = cx.alloc(w);
                        held += 1;
                        let vb = bits(v, w);
                        cx.load(&vb, *c);
                        vb
                    }
                };
                let xs = reg(self, a);
                let ys = reg(self, b);
                let ld = self.since(m);
                let c0 = self.alloc(1);
                self.out.extend(toff_lt(&xs, &ys, p(c0, 0), t));
                self.free(1);
                self.emit_inverse(&ld);
                self.free(held);
            }
        }
    }

    fn eq_into(&mut self, t: Position, w: usize, a: &Opnd, b: &Opnd) {
        self.op("cmp_eq");
        let t1 = self.alloc(1);
        let t2 = self.alloc(1);
        let (p1, p2) = (p(t1, 0), p(t2, 0));
        let m = self.mark();
        self.lt_into(p1, w, a, b);
        self.lt_into(p2, w, b, a);
        let code = self.since(m);
        self.out.extend([xg(p1), xg(p2), ccx(p1, p2, t), xg(p1), xg(p2)]);
        self.emit_inverse(&code);
        self.free(2);
    }

    /// Compute a run-time right-hand side into the zero register `t`.
    fn emit_rhs(&mut self, q: &QRhs, t: Var, w: usize, line: usize) -> Result<(), CompileError> {
        let tb = bits(t, w);
        match q {
            QRhs::Copy(o) => {
                let o = match o {
                    Opnd::R(r) => Opnd::R(r[..r.len().min(w)].to_vec()),
                    k => k.clone(),
                };
                self.put(&o, &tb);
            }
            QRhs::Even(Opnd::R(r)) => {
                self.out.push(cx(r[0], tb[0]));
                self.out.push(xg(tb[0]));
            }
            QRhs::Even(Opnd::K(_)) => unreachable!("folded"),
            QRhs::Bin(op, a, ba, b, bb) => match op {
                BinOp::Add | BinOp::Sub => {
                    self.put(a, &tb);
                    self.add_into(t, w, b, *op == BinOp::Sub);
                }
                BinOp::Xor => {
                    self.op("xor");
                    self.put(a, &tb);
                    self.put(b, &tb);
                }
                BinOp::Mul => {
                    let (x, y) = match (a, b) {
                        (Opnd::R(x), y) => (x.clone(), y.clone()),
                        (k, Opnd::R(y)) => (y.clone(), k.clone()),
                        _ => unreachable!("folded"),
                    };
                    if *ba == Base::Fixedp && *bb == Base::Fixedp {
                        self.fmul_into(t, w, &x, &y);
                    } else {
                        self.mul_into(t, w, &x, &y);
                    }
                }
                BinOp::Div | BinOp::Mod => {
                    let (Opnd::R(x), Opnd::K(c)) = (a, b) else {
                        return cerr(line, "division by a Q value is not supported");
                    };
                    if *c == 0 {
                        return cerr(line, "division by zero");
                    }
                    if *c > mask(w) {
                        // quotient 0, remainder x
                        if *op == BinOp::Mod {
                            self.put(&Opnd::R(x.clone()), &tb);
                        }
                    } else {
                        self.divmod_into(t, w, x, *c, *op == BinOp::Div, line)?;
                    }
                }
                BinOp::Lt => {
                    let aw = width(*ba, self.sz);
                    self.lt_into(tb[0], aw, a, b);
                }
                BinOp::Eq => {
                    let aw = width(*ba, self.sz);
                    self.eq_into(tb[0], aw, a, b);
                }
            },
            QRhs::Pow(a, base, k) => {
                let Opnd::R(x) = a else { unreachable!("folded") };
                self.op("pow");
                if *k == 1 {
                    self.put(a, &tb);
                    return Ok(());
                }
                let mut cur = x.clone();
                let mut temps: Vec<Vec<Instr>> = Vec::new();
                for i in 2..=*k {
                    let target = if i == *k { t } else { self.alloc(w) };
                    let m = self.mark();
                    if *base == Base::Fixedp {
                        self.fmul_into(target, w, &cur, &Opnd::R(x.clone()));
                    } else {
                        self.mul_into(target, w, &cur, &Opnd::R(x.clone()));
                    }
                    if i != *k {
                        temps.push(self.since(m));
                        cur = bits(target, w);
                    }
                }
                for code in temps.iter().rev() {
                    self.emit_inverse(code);
                    self.free(1);
                }
            }
        }
        Ok(())
    }

    /// Resolve a Q right-hand side: fold when every operand is known.
    fn resolve(&mut self, fr: &Frame<'p>, rhs: &'p Rhs, dest: &LValue, line: usize) -> Result<Result<u64, QRhs>, CompileError> {
        let sz = self.sz;
        let arith = |r: Result<u64, value::ArithError>| r.map_err(|e| CompileError { line, msg: e.to_string() });
        Ok(match rhs {
            Rhs::Val(v) | Rhs::Cast(_, v) => {
                let (o, b) = self.operand(fr, v, line)?;
                let to = match rhs {
                    Rhs::Cast(t, _) => *t,
                    _ => b,
                };
                match o {
                    Opnd::K(k) => Ok(value::cast(k, to, sz)),
                    r => Err(QRhs::Copy(r)),
                }
            }
            Rhs::Bin(op, a, b) => {
                let (oa, ba) = self.operand(fr, a, line)?;
                let (ob, bb) = self.operand(fr, b, line)?;
                match (&oa, &ob) {
                    (Opnd::K(x), Opnd::K(y)) => Ok(arith(value::binop(*op, *x, ba, *y, bb, sz))?),
                    _ => {
                        if let (BinOp::Mul, Opnd::K(0), _) | (BinOp::Mul, _, Opnd::K(0)) = (op, &oa, &ob) {
                            return Ok(Ok(0));
                        }
                        if let (BinOp::Div, _, Opnd::K(c)) = (op, &oa, &ob) {
                            if *c > mask(width(ba, sz)) {
                                return Ok(Ok(0));
                            }
                        }
                        Err(QRhs::Bin(*op, oa, ba, ob, bb))
                    }
                }
            }
            Rhs::Pow(a, k) => {
                let (oa, ba) = self.operand(fr, a, line)?;
                let k = self.c_value(fr, k, line)?;
                match oa {
                    Opnd::K(x) => Ok(arith(value::pow(x, ba, k, sz))?),
                    r => {
                        if k == 0 {
                            Ok(arith(value::pow(0, ba, 0, sz))?)
                        } else if k > MAX_STEPS {
                            return cerr(line, format!("exponent {k} too large"));
                        } else {
                            Err(QRhs::Pow(r, ba, k))
                        }
                    }
                }
            }
            Rhs::Even(a) => match self.operand(fr, a, line)?.0 {
                Opnd::K(x) => Ok((x & 1 == 0) as u64),
                r => Err(QRhs::Even(r)),
            },
            Rhs::Fact(a) => Ok(arith(value::fact(self.c_value(fr, a, line)?, sz))?),
            Rhs::Call(..) => unreachable!("calls are handled by the caller: {dest}"),
        })
    }

    // ----- statements ---------------------------------------------------------

    fn record(&mut self, key: &Key, prev: St, code: Vec<Instr>) {
        let s = self.slots.get_mut(key).expect("slot");
        s.hist.push(Hist { prev, code, opaque: false });
    }

    /// Make a Q destination live, loading its known value. Returns the code.
    fn materialize(&mut self, key: &Key) -> Vec<Instr> {
        let s = self.slots[key].clone();
        let m = self.mark();
        if let St::Lazy(k) = s.st {
            self.load(&bits(s.var, s.w), k);
            self.slots.get_mut(key).unwrap().st = St::Live;
        }
        self.since(m)
    }

    fn check_alias(&self, key: &Key, ops: &[&Opnd], line: usize) -> Result<(), CompileError> {
        let var = self.slots[key].var;
        if ops.iter().any(|o| matches!(o, Opnd::R(r) if r.iter().any(|q| q.var == var))) {
            return cerr(line, "destination is also an operand");
        }
        Ok(())
    }

    /// `dest ⊕= value` where the value is produced by `f` into a zero register.
    fn assign_q(
        &mut self,
        key: &Key,
        known: Result<u64, QRhs>,
        line: usize,
    ) -> Result<(), CompileError> {
        let s = self.slots[key].clone();
        let prev = s.st;
        let m = self.mark();
        match (s.st, known) {
            (St::Lazy(k), Ok(v)) => {
                self.slots.get_mut(key).unwrap().st = St::Lazy(k ^ v);
            }
            (St::Live, Ok(v)) => self.load(&bits(s.var, s.w), v),
            (St::Lazy(k), Err(q)) => {
                self.emit_rhs(&q, s.var, s.w, line)?;
                self.load(&bits(s.var, s.w), k);
                self.slots.get_mut(key).unwrap().st = St::Live;
            }
            (St::Live, Err(q)) => {
                let t = self.alloc(s.w);
                let cm = self.mark();
                self.emit_rhs(&q, t, s.w, line)?;
                let code = self.since(cm);
                self.put(&Opnd::R(bits(t, s.w)), &bits(s.var, s.w));
                self.emit_inverse(&code);
                self.free(1);
            }
        }
        let code = self.since(m);
        self.record(key, prev, code);
        Ok(())
    }

    /// Compile a call; returns its body code and the (possibly known) result.
    fn call(&mut self, fr: &Frame<'p>, f: &str, args: &[Value], line: usize) -> Result<(Vec<Instr>, Opnd), CompileError> {
        let g = self.prog.func(f).ok_or_else(|| CompileError { line, msg: format!("unknown function {f}") })?;
        let vals = args.iter().map(|a| self.c_value(fr, a, line)).collect::<Result<Vec<_>, _>>()?;
        let csnap = self.cstore.clone();
        let ssnap = self.slots.clone();
        let frame = self.enter(g, &vals, fr.depth + 1);
        let m = self.mark();
        self.block(&frame, &g.body)?;
        let Some(RetVal::Single(rv)) = &g.ret_val else {
            return cerr(line, format!("{f} returns nothing"));
        };
        let (r, _) = self.operand(&frame, rv, g.line)?;
        let u = self.out.split_off(m);
        self.cstore = csnap;
        self.slots = ssnap;
        Ok((u, r))
    }

    fn stmt(&mut self, fr: &Frame<'p>, s: &'p Stmt) -> Result<(), CompileError> {
        let line = s.line;
        match &s.kind {
            StmtKind::Assign(d, rhs) => {
                let (key, ty) = self.key(fr, d, line)?;
                if let Rhs::Call(f, args) = rhs {
                    let (u, r) = self.call(fr, f, args, line)?;
                    let r = match r {
                        Opnd::K(v) => v,
                        Opnd::R(pos) => {
                            if ty.mode == Mode::C {
                                return cerr(line, "C destination for a run-time result");
                            }
                            let sl = self.slots[&key].clone();
                            let m = self.mark();
                            self.out.extend(u.iter().cloned());
                            self.put(&Opnd::R(pos), &bits(sl.var, sl.w));
                            if let St::Lazy(k) = sl.st {
                                self.load(&bits(sl.var, sl.w), k);
                            }
                            self.emit_inverse(&u);
                            let code = self.since(m);
                            self.slots.get_mut(&key).unwrap().st = St::Live;
                            self.record(&key, sl.st, code);
                            return Ok(());
                        }
                    };
                    return match ty.mode {
                        Mode::C => {
                            self.cstore.insert(key, r & mask(width(ty.base, self.sz)));
                            Ok(())
                        }
                        Mode::Q => self.assign_q(&key, Ok(r), line),
                    };
                }
                let res = self.resolve(fr, rhs, d, line)?;
                match ty.mode {
                    Mode::C => {
                        let Ok(v) = res else {
                            return cerr(line, "C destination for a run-time value");
                        };
                        self.cstore.insert(key, v & mask(width(ty.base, self.sz)));
                        Ok(())
                    }
                    Mode::Q => {
                        if let Err(q) = &res {
                            let ops: Vec<&Opnd> = match q {
                                QRhs::Copy(o) | QRhs::Pow(o, _, _) | QRhs::Even(o) => vec![o],
                                QRhs::Bin(_, a, _, b, _) => vec![a, b],
                            };
                            self.check_alias(&key, &ops, line)?;
                        }
                        let res = res.map(|v| v & mask(width(ty.base, self.sz)));
                        self.assign_q(&key, res, line)
                    }
                }
            }
            StmtKind::Update(d, op, v) => {
                let (key, ty) = self.key(fr, d, line)?;
                let (o, vb) = self.operand(fr, v, line)?;
                let bop = match op {
                    UpOp::Add => BinOp::Add,
                    UpOp::Sub => BinOp::Sub,
                    UpOp::Xor => BinOp::Xor,
                };
                if ty.mode == Mode::C {
                    let Opnd::K(x) = o else { return cerr(line, "C update with a run-time value") };
                    let cur = self.cstore[&key];
                    let r = value::binop(bop, cur, ty.base, x, vb, self.sz).map_err(|e| CompileError { line, msg: e.to_string() })?;
                    self.cstore.insert(key, r);
                    return Ok(());
                }
                self.check_alias(&key, &[&o], line)?;
                let sl = self.slots[&key].clone();
                let m = self.mark();
                match (sl.st, &o) {
                    (St::Lazy(k), Opnd::K(x)) => {
                        let r = value::binop(bop, k, ty.base, *x, vb, self.sz).map_err(|e| CompileError { line, msg: e.to_string() })?;
                        self.slots.get_mut(&key).unwrap().st = St::Lazy(r);
                    }
                    (St::Lazy(k), Opnd::R(_)) => {
                        let q = QRhs::Bin(bop, Opnd::K(k), ty.base, o.clone(), vb);
                        self.emit_rhs(&q, sl.var, sl.w, line)?;
                        self.slots.get_mut(&key).unwrap().st = St::Live;
                    }
                    (St::Live, _) => match op {
                        UpOp::Xor => {
                            self.op("xor");
                            self.put(&o, &bits(sl.var, sl.w));
                        }
                        _ => self.add_into(sl.var, sl.w, &o, *op == UpOp::Sub),
                    },
                }
                let code = self.since(m);
                self.record(&key, sl.st, code);
                Ok(())
            }
            StmtKind::Rotl(d, n) => {
                let (key, ty) = self.key(fr, d, line)?;
                let n = self.c_value(fr, n, line)?;
                let w = width(ty.base, self.sz);
                if ty.mode == Mode::C {
                    let cur = self.cstore[&key];
                    self.cstore.insert(key, value::rotl(cur, n, w));
                    return Ok(());
                }
                let sl = self.slots[&key].clone();
                let m = self.mark();
                match sl.st {
                    St::Lazy(k) => self.slots.get_mut(&key).unwrap().st = St::Lazy(value::rotl(k, n, w)),
                    St::Live => {
                        for _ in 0..n % w as u64 {
                            self.out.push(Instr::Rshift(sl.var));
                        }
                    }
                }
                let code = self.since(m);
                self.record(&key, sl.st, code);
                Ok(())
            }
            StmtKind::Inv(d) => {
                let (key, _) = self.key(fr, d, line)?;
                let sl = self.slots.get_mut(&key).expect("inv on a Q location");
                let Some(h) = sl.hist.pop() else {
                    return cerr(line, format!("inv({d}) has nothing to undo"));
                };
                if h.opaque {
                    return cerr(line, format!("inv({d}) would undo a conditional assignment"));
                }
                sl.st = h.prev;
                self.emit_inverse(&h.code);
                Ok(())
            }
            StmtKind::For { var, init, rel, bound, step, body } => {
                let (key, _) = self.key(fr, &LValue::var(var), line)?;
                let start = self.c_value(fr, init, line)?;
                self.cstore.insert(key.clone(), start);
                let mut trips = 0u64;
                loop {
                    let i = self.cstore[&key];
                    let b = self.c_value(fr, bound, line)?;
                    let go = match rel {
                        Rel::Lt => i < b,
                        Rel::Le => i <= b,
                        Rel::Gt => i > b,
                        Rel::Ge => i >= b,
                        Rel::Ne => i != b,
                    };
                    if !go {
                        break;
                    }
                    trips += 1;
                    if trips > MAX_STEPS {
                        return cerr(line, format!("loop exceeded {MAX_STEPS} iterations"));
                    }
                    self.block(fr, body)?;
                    let i = self.cstore[&key];
                    let next = match step {
                        Step::Inc(v) => i.wrapping_add(self.c_value(fr, v, line)?),
                        Step::Dec(v) => i.wrapping_sub(self.c_value(fr, v, line)?),
                    } & mask(self.sz);
                    self.cstore.insert(key.clone(), next);
                }
                Ok(())
            }
            StmtKind::If { guard, then, els } => self.if_stmt(fr, guard, then, els, line),
            StmtKind::InPlace { f, .. } => cerr(line, format!("unexpanded in-place call to {f}")),
        }
    }

    fn if_stmt(&mut self, fr: &Frame<'p>, guard: &Guard, then: &'p [Stmt], els: &'p [Stmt], line: usize) -> Result<(), CompileError> {
        let (ops, w) = match guard {
            Guard::Lt(a, b) | Guard::Eq(a, b) => {
                let (oa, ba) = self.operand(fr, a, line)?;
                let (ob, _) = self.operand(fr, b, line)?;
                (vec![oa, ob], width(ba, self.sz))
            }
            Guard::Even(a) | Guard::Val(a) => {
                let (o, b) = self.operand(fr, a, line)?;
                (vec![o], width(b, self.sz))
            }
        };
        let known: Option<Vec<u64>> = ops.iter().map(|o| if let Opnd::K(k) = o { Some(*k) } else { None }).collect();
        if let Some(k) = known {
            let taken = match guard {
                Guard::Lt(..) => k[0] < k[1],
                Guard::Eq(..) => k[0] == k[1],
                Guard::Even(_) => k[0] & 1 == 0,
                Guard::Val(_) => k[0] != 0,
            };
            return self.block(fr, if taken { then } else { els });
        }

        // locations written under the guard become live up front
        let mut ws = Vec::new();
        written(then, &mut ws);
        written(els, &mut ws);
        let mut keys: Vec<(Key, usize)> = Vec::new();
        for l in ws {
            let (key, ty) = self.key(fr, l, line)?;
            if ty.mode == Mode::Q && !keys.iter().any(|(k, _)| *k == key) {
                let depth = self.slots[&key].hist.len();
                self.materialize(&key);
                keys.push((key, depth));
            }
        }

        let g = self.alloc(1);
        let gp = p(g, 0);
        let m = self.mark();
        match guard {
            Guard::Lt(..) => self.lt_into(gp, w, &ops[0], &ops[1]),
            Guard::Eq(..) => self.eq_into(gp, w, &ops[0], &ops[1]),
            Guard::Even(_) | Guard::Val(_) => {
                let Opnd::R(r) = &ops[0] else { unreachable!() };
                self.out.push(cx(r[0], gp));
                if matches!(guard, Guard::Even(_)) {
                    self.out.push(xg(gp));
                }
            }
        }
        let gcode = self.since(m);
        let mt = self.mark();
        self.block(fr, then)?;
        let u1 = self.out.split_off(mt);
        self.block(fr, els)?;
        let u2 = self.out.split_off(mt);
        if let Some(b) = Instr::seq(u1) {
            self.out.push(Instr::cu(gp, b));
        }
        if let Some(b) = Instr::seq(u2) {
            self.out.push(xg(gp));
            self.out.push(Instr::cu(gp, b));
            self.out.push(xg(gp));
        }
        self.emit_inverse(&gcode);
        self.free(1);
        for (key, depth) in keys {
            let sl = self.slots.get_mut(&key).unwrap();
            sl.hist.truncate(depth);
            sl.hist.push(Hist { prev: St::Live, code: Vec::new(), opaque: true });
        }
        Ok(())
    }
}
