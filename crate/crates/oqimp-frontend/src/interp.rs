//! Reference big-step interpreter over history stores.
//!
//! Q locations keep a stack of values (assignment pushes, `inv` pops); C
//! locations hold a single value that assignment replaces. A Q assignment
//! `l = e` pushes `top ⊕ e`, which is `e` whenever `l` was uncomputed first.

use std::collections::{BTreeMap, HashMap};

use crate::ast::*;
use crate::value::{self, mask, width, ArithError, MAX_STEPS};

/// Global name → element values (one element for scalars).
pub type Inputs = BTreeMap<String, Vec<u64>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// Main's return value, if it has one.
    pub ret: Option<u64>,
    /// Top value of every global after the run.
    pub globals: BTreeMap<String, Vec<u64>>,
}

/// The semantic `Error` result.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("line {line}: {err}")]
    Arith { line: usize, err: ArithError },
    #[error("line {line}: index {index} out of bounds for {var}")]
    OutOfBounds { line: usize, var: String, index: u64 },
    #[error("line {line}: loop exceeded {MAX_STEPS} iterations")]
    LoopBound { line: usize },
    #[error("line {line}: inv({var}) has nothing to undo")]
    EmptyHistory { line: usize, var: String },
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("line {line}: unknown {what} {name}")]
    Unknown { line: usize, what: &'static str, name: String },
}

type Key = (usize, String, usize);

struct Frame<'p> {
    id: usize,
    decls: HashMap<&'p str, &'p Decl>,
}

struct Interp<'p> {
    prog: &'p Program,
    sz: usize,
    globals: HashMap<&'p str, &'p Decl>,
    store: HashMap<Key, Vec<u64>>,
    next_frame: usize,
}

/// Check and mask user-provided inputs against the globals' types.
pub fn validate_inputs(prog: &Program, sz: usize, inputs: &Inputs) -> Result<(), RunError> {
    for (name, vals) in inputs {
        let g = prog
            .globals
            .iter()
            .find(|g| &g.name == name)
            .ok_or_else(|| RunError::BadInput(format!("{name} is not a global")))?;
        let n = g.ty.len.unwrap_or(1);
        if vals.len() != n {
            return Err(RunError::BadInput(format!("{name} needs {n} value(s), got {}", vals.len())));
        }
        let m = mask(width(g.ty.base, sz));
        if let Some(v) = vals.iter().find(|&&v| v & !m != 0) {
            return Err(RunError::BadInput(format!("{v} does not fit {name}")));
        }
    }
    Ok(())
}

/// Run the main function. Missing inputs default to 0.
pub fn interpret(prog: &Program, sz: usize, inputs: &Inputs) -> Result<Outcome, RunError> {
    if sz == 0 || sz > 64 {
        return Err(RunError::BadInput(format!("word size {sz} outside 1..=64")));
    }
    validate_inputs(prog, sz, inputs)?;
    let main = prog.main().ok_or_else(|| RunError::BadInput("no main function".into()))?;
    let mut it = Interp {
        prog,
        sz,
        globals: prog.globals.iter().map(|g| (g.name.as_str(), g)).collect(),
        store: HashMap::new(),
        next_frame: 1,
    };
    for g in &prog.globals {
        for k in 0..g.ty.len.unwrap_or(1) {
            let v = inputs.get(&g.name).map_or(0, |vs| vs[k]);
            it.store.insert((0, g.name.clone(), k), vec![v]);
        }
    }
    let ret = if main.ret.is_some() {
        Some(it.call(main, &[], main.line)?)
    } else {
        let frame = it.enter(main, &[]);
        it.block(&frame, &main.body)?;
        None
    };
    let globals = prog
        .globals
        .iter()
        .map(|g| {
            let vals = (0..g.ty.len.unwrap_or(1)).map(|k| *it.store[&(0, g.name.clone(), k)].last().unwrap()).collect();
            (g.name.clone(), vals)
        })
        .collect();
    Ok(Outcome { ret, globals })
}

impl<'p> Interp<'p> {
    fn enter(&mut self, f: &'p FunDef, args: &[u64]) -> Frame<'p> {
        let id = self.next_frame;
        self.next_frame += 1;
        let mut decls = HashMap::new();
        for (d, v) in f.params.iter().zip(args) {
            decls.insert(d.name.as_str(), d);
            self.store.insert((id, d.name.clone(), 0), vec![*v]);
        }
        for d in &f.locals {
            decls.insert(d.name.as_str(), d);
            for k in 0..d.ty.len.unwrap_or(1) {
                self.store.insert((id, d.name.clone(), k), vec![0]);
            }
        }
        Frame { id, decls }
    }

    /// Run `f` and undo every effect except producing the return value.
    fn call(&mut self, f: &'p FunDef, args: &[u64], _line: usize) -> Result<u64, RunError> {
        let snapshot = self.store.clone();
        let frame = self.enter(f, args);
        self.block(&frame, &f.body)?;
        let v = match &f.ret_val {
            Some(RetVal::Single(v)) => self.value(&frame, v, f.line)?.0,
            _ => 0,
        };
        self.store = snapshot;
        Ok(v)
    }

    fn decl(&self, fr: &Frame<'p>, name: &str, line: usize) -> Result<(usize, &'p Decl), RunError> {
        if let Some(d) = fr.decls.get(name) {
            return Ok((fr.id, d));
        }
        self.globals
            .get(name)
            .map(|d| (0, *d))
            .ok_or_else(|| RunError::Unknown { line, what: "variable", name: name.to_string() })
    }

    fn key(&self, fr: &Frame<'p>, l: &LValue, line: usize) -> Result<(Key, Ty), RunError> {
        let (scope, d) = self.decl(fr, &l.var, line)?;
        let idx = match &l.index {
            None => 0,
            Some(i) => {
                let k = self.value(fr, i, line)?.0;
                if k >= d.ty.len.unwrap_or(1) as u64 {
                    return Err(RunError::OutOfBounds { line, var: l.var.clone(), index: k });
                }
                k as usize
            }
        };
        Ok(((scope, l.var.clone(), idx), Ty { len: None, ..d.ty }))
    }

    fn value(&self, fr: &Frame<'p>, v: &Value, line: usize) -> Result<(u64, Base), RunError> {
        match v {
            Value::Lit(l) => {
                let b = match l {
                    Lit::Int(_) => Base::Nat,
                    Lit::Dec { .. } => Base::Fixedp,
                    Lit::Bool(_) => Base::Bool,
                };
                Ok((value::lit(*l, b, self.sz), b))
            }
            Value::L(l) => {
                let (k, t) = self.key(fr, l, line)?;
                Ok((*self.store[&k].last().unwrap(), t.base))
            }
        }
    }

    fn write(&mut self, key: Key, ty: Ty, v: u64, xor: bool) {
        let h = self.store.get_mut(&key).expect("initialized location");
        match ty.mode {
            Mode::C => *h = vec![v],
            Mode::Q => {
                let top = *h.last().unwrap();
                h.push(if xor { top ^ v } else { v });
            }
        }
    }

    fn block(&mut self, fr: &Frame<'p>, body: &'p [Stmt]) -> Result<(), RunError> {
        body.iter().try_for_each(|s| self.stmt(fr, s))
    }

    fn arith<T>(r: Result<T, ArithError>, line: usize) -> Result<T, RunError> {
        r.map_err(|err| RunError::Arith { line, err })
    }

    fn rhs(&mut self, fr: &Frame<'p>, rhs: &Rhs, to: Base, line: usize) -> Result<u64, RunError> {
        let sz = self.sz;
        Ok(match rhs {
            Rhs::Val(v) => self.value(fr, v, line)?.0,
            Rhs::Bin(op, a, b) => {
                let (x, bx) = self.value(fr, a, line)?;
                let (y, by) = self.value(fr, b, line)?;
                Self::arith(value::binop(*op, x, bx, y, by, sz), line)?
            }
            Rhs::Pow(a, k) => {
                let (x, bx) = self.value(fr, a, line)?;
                let k = self.value(fr, k, line)?.0;
                Self::arith(value::pow(x, bx, k, sz), line)?
            }
            Rhs::Fact(a) => Self::arith(value::fact(self.value(fr, a, line)?.0, sz), line)?,
            Rhs::Cast(t, a) => value::cast(self.value(fr, a, line)?.0, *t, sz),
            Rhs::Even(a) => (self.value(fr, a, line)?.0 & 1 == 0) as u64,
            Rhs::Call(f, args) => {
                let g = self.prog.func(f).ok_or_else(|| RunError::Unknown { line, what: "function", name: f.clone() })?;
                let vals = args.iter().map(|a| self.value(fr, a, line).map(|v| v.0)).collect::<Result<Vec<_>, _>>()?;
                self.call(g, &vals, line)?
            }
        } & mask(width(to, sz)))
    }

    fn guard(&self, fr: &Frame<'p>, g: &Guard, line: usize) -> Result<bool, RunError> {
        Ok(match g {
            Guard::Lt(a, b) => self.value(fr, a, line)?.0 < self.value(fr, b, line)?.0,
            Guard::Eq(a, b) => self.value(fr, a, line)?.0 == self.value(fr, b, line)?.0,
            Guard::Even(a) => self.value(fr, a, line)?.0 & 1 == 0,
            Guard::Val(a) => self.value(fr, a, line)?.0 != 0,
        })
    }

    fn stmt(&mut self, fr: &Frame<'p>, s: &'p Stmt) -> Result<(), RunError> {
        let line = s.line;
        match &s.kind {
            StmtKind::Assign(d, rhs) => {
                let (k, t) = self.key(fr, d, line)?;
                let v = self.rhs(fr, rhs, t.base, line)?;
                self.write(k, t, v, true);
            }
            StmtKind::Update(d, op, v) => {
                let (k, t) = self.key(fr, d, line)?;
                let (x, bx) = self.value(fr, v, line)?;
                let top = *self.store[&k].last().unwrap();
                let bop = match op {
                    UpOp::Add => BinOp::Add,
                    UpOp::Sub => BinOp::Sub,
                    UpOp::Xor => BinOp::Xor,
                };
                let r = Self::arith(value::binop(bop, top, t.base, x, bx, self.sz), line)?;
                self.write(k, t, r, false);
            }
            StmtKind::Rotl(d, n) => {
                let (k, t) = self.key(fr, d, line)?;
                let n = self.value(fr, n, line)?.0;
                let top = *self.store[&k].last().unwrap();
                self.write(k, t, value::rotl(top, n, width(t.base, self.sz)), false);
            }
            StmtKind::Inv(d) => {
                let (k, _) = self.key(fr, d, line)?;
                let h = self.store.get_mut(&k).unwrap();
                if h.len() < 2 {
                    return Err(RunError::EmptyHistory { line, var: d.to_string() });
                }
                h.pop();
            }
            StmtKind::For { var, init, rel, bound, step, body } => {
                let iv = LValue::var(var);
                let (k, t) = self.key(fr, &iv, line)?;
                let start = self.value(fr, init, line)?.0;
                self.write(k.clone(), t, start, false);
                let m = mask(self.sz);
                let mut trips = 0u64;
                loop {
                    let i = *self.store[&k].last().unwrap();
                    let b = self.value(fr, bound, line)?.0;
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
                        return Err(RunError::LoopBound { line });
                    }
                    self.block(fr, body)?;
                    let i = *self.store[&k].last().unwrap();
                    let next = match step {
                        Step::Inc(v) => i.wrapping_add(self.value(fr, v, line)?.0),
                        Step::Dec(v) => i.wrapping_sub(self.value(fr, v, line)?.0),
                    } & m;
                    self.write(k.clone(), t, next, false);
                }
            }
            StmtKind::If { guard, then, els } => {
                if self.guard(fr, guard, line)? {
                    self.block(fr, then)?;
                } else {
                    self.block(fr, els)?;
                }
            }
            StmtKind::InPlace { f, .. } => {
                return Err(RunError::Unknown { line, what: "unexpanded in-place call", name: f.clone() });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn run(src: &str, inputs: &[(&str, u64)]) -> Result<Outcome, RunError> {
        let p = crate::parse::expand(&parse(src).unwrap()).unwrap();
        let ins = inputs.iter().map(|(k, v)| (k.to_string(), vec![*v])).collect();
        interpret(&p, 8, &ins)
    }

    #[test]
    fn for_zero_leaves_store() {
        let o = run("Q nat x; C nat n; void main() { for (C nat i = 0; i < n; i++) { x += 1; } }", &[("x", 7)]).unwrap();
        assert_eq!(o.globals["x"], vec![7]);
        let o = run("Q nat x; C nat n; void main() { for (C nat i = 0; i < n; i++) { x += 1; } }", &[("x", 7), ("n", 3)]).unwrap();
        assert_eq!(o.globals["x"], vec![10]);
    }

    #[test]
    fn assign_then_inv_reverts() {
        let o = run("Q nat x; Q nat y; void main() { y = x * 3; inv(y); }", &[("x", 5)]).unwrap();
        assert_eq!(o.globals["y"], vec![0]);
        let o = run("Q nat x; Q nat y; void main() { y = x * 3; }", &[("x", 5)]).unwrap();
        assert_eq!(o.globals["y"], vec![15]);
    }

    #[test]
    fn errors_are_values() {
        assert!(matches!(run("C nat a; void main() { a = 3 / a; }", &[]), Err(RunError::Arith { .. })));
        assert!(matches!(run("C nat[2] a; C nat i; void main() { i = 2; a[i] = 1; }", &[]), Err(RunError::OutOfBounds { .. })));
        assert!(matches!(run("Q nat x; void main() { inv(x); }", &[]), Err(RunError::EmptyHistory { .. })));
        assert!(matches!(run("void main() { for (C nat i = 0; i < 1; i -= 0) { } }", &[]), Err(RunError::LoopBound { .. })));
    }

    #[test]
    fn calls_only_keep_the_result() {
        let src = "Q nat x; nat f(C nat k) { Q nat t; x += k; t = x * 2; return t; }
                   nat main() { Q nat r; r = f(3); return r; }";
        let o = run(src, &[("x", 4)]).unwrap();
        assert_eq!(o.ret, Some(14));
        assert_eq!(o.globals["x"], vec![4]);
    }
}
