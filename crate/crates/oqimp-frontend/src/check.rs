//! Mode/type checking and the `inv` discipline.

use std::collections::{BTreeSet, HashMap};

use crate::ast::*;
use crate::value::result_base;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: [{rule}] {msg}")]
pub struct TypeError {
    pub rule: &'static str,
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunSig {
    pub name: String,
    pub params: Vec<Ty>,
    /// Resolved return type; `None` for void.
    pub ret: Option<Ty>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TypeSummary {
    pub funcs: Vec<FunSig>,
}

impl TypeSummary {
    pub fn sig(&self, name: &str) -> Option<&FunSig> {
        self.funcs.iter().find(|f| f.name == name)
    }
}

fn terr<T>(rule: &'static str, line: usize, msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError { rule, line, msg: msg.into() })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Origin {
    Global,
    Param,
    Local,
}

struct Env<'a> {
    vars: HashMap<&'a str, (Ty, Origin)>,
    sigs: &'a [FunSig],
    globals: Vec<&'a str>,
}

impl<'a> Env<'a> {
    fn lookup(&self, l: &LValue, line: usize) -> Result<(Ty, Origin), TypeError> {
        let &(ty, o) = self.vars.get(l.var.as_str()).ok_or_else(|| TypeError {
            rule: "var",
            line,
            msg: format!("undeclared variable {}", l.var),
        })?;
        match (&l.index, ty.len) {
            (None, None) => Ok((ty, o)),
            (Some(i), Some(_)) => {
                let (m, b) = self.value(i, line)?;
                if m != Mode::C || b != Base::Nat {
                    return terr("index", line, format!("index of {} must be C nat", l.var));
                }
                Ok((Ty { len: None, ..ty }, o))
            }
            (None, Some(_)) => terr("index", line, format!("array {} used without an index", l.var)),
            (Some(_), None) => terr("index", line, format!("{} is not an array", l.var)),
        }
    }

    fn value(&self, v: &Value, line: usize) -> Result<(Mode, Base), TypeError> {
        match v {
            Value::Lit(Lit::Int(_)) => Ok((Mode::C, Base::Nat)),
            Value::Lit(Lit::Dec { .. }) => Ok((Mode::C, Base::Fixedp)),
            Value::Lit(Lit::Bool(_)) => Ok((Mode::C, Base::Bool)),
            Value::L(l) => self.lookup(l, line).map(|(t, _)| (t.mode, t.base)),
        }
    }

    fn c_nat(&self, v: &Value, line: usize, rule: &'static str, what: &str) -> Result<(), TypeError> {
        if self.value(v, line)? != (Mode::C, Base::Nat) {
            return terr(rule, line, format!("{what} must be C nat"));
        }
        Ok(())
    }
}

/// Same location, as far as can be told without running the program.
fn same_loc(a: &LValue, b: &LValue) -> bool {
    a.var == b.var && a.index == b.index
}

fn aliases(d: &LValue, v: &Value) -> bool {
    matches!(v, Value::L(l) if same_loc(d, l))
}

pub fn typecheck_program(prog: &Program) -> Result<TypeSummary, TypeError> {
    let mut sigs: Vec<FunSig> = Vec::new();
    for g in &prog.globals {
        if prog.globals.iter().filter(|h| h.name == g.name).count() > 1 {
            return terr("scope", g.line, format!("global {} declared twice", g.name));
        }
    }
    let last = prog.funcs.len().saturating_sub(1);
    for (fi, f) in prog.funcs.iter().enumerate() {
        if sigs.iter().any(|s| s.name == f.name) {
            return terr("fun", f.line, format!("function {} defined twice", f.name));
        }
        if fi == last && !f.params.is_empty() {
            return terr("fun", f.line, format!("main function {} takes no parameters", f.name));
        }
        let mut env = Env { vars: HashMap::new(), sigs: &sigs, globals: Vec::new() };
        for g in &prog.globals {
            env.vars.insert(&g.name, (g.ty, Origin::Global));
            env.globals.push(&g.name);
        }
        for (d, o) in f.params.iter().map(|d| (d, Origin::Param)).chain(f.locals.iter().map(|d| (d, Origin::Local))) {
            if env.vars.contains_key(d.name.as_str()) {
                return terr("scope", d.line, format!("{} shadows another declaration", d.name));
            }
            if o == Origin::Param && (d.ty.mode != Mode::C || d.ty.len.is_some()) {
                return terr("fun", d.line, format!("parameter {} must be a C scalar", d.name));
            }
            env.vars.insert(&d.name, (d.ty, o));
        }
        for s in &f.body {
            check_stmt(&env, s, Mode::C)?;
        }
        let ret = match (&f.ret, &f.ret_val) {
            (None, _) => None,
            (Some((mode, base, len)), Some(RetVal::Single(v))) => {
                if len.is_some() {
                    return terr("fun", f.line, format!("{} cannot return an array", f.name));
                }
                let (vm, vb) = env.value(v, f.line)?;
                if vb != *base {
                    return terr("fun", f.line, format!("{} returns {vb}, declared {base}", f.name));
                }
                let m = mode.unwrap_or(vm);
                if m == Mode::C && vm == Mode::Q {
                    return terr("fun", f.line, format!("{} is declared C but returns a Q value", f.name));
                }
                Some(Ty { mode: m, base: *base, len: None })
            }
            _ => return terr("fun", f.line, format!("{} must return a single value", f.name)),
        };
        sigs.push(FunSig { name: f.name.clone(), params: f.params.iter().map(|p| p.ty).collect(), ret });
    }
    Ok(TypeSummary { funcs: sigs })
}

fn check_stmt(env: &Env, s: &Stmt, ctx: Mode) -> Result<(), TypeError> {
    let line = s.line;
    match &s.kind {
        StmtKind::Assign(d, rhs) => {
            let (dt, origin) = env.lookup(d, line)?;
            let mut operands: Vec<&Value> = Vec::new();
            let (rb, rm) = match rhs {
                Rhs::Val(v) => {
                    operands.push(v);
                    let (m, b) = env.value(v, line)?;
                    (b, m)
                }
                Rhs::Bin(op, a, b) => {
                    operands.extend([a, b]);
                    let (ma, ba) = env.value(a, line)?;
                    let (mb, bb) = env.value(b, line)?;
                    let r = result_base(*op, ba, bb)
                        .ok_or_else(|| TypeError { rule: "binop", line, msg: format!("{ba} {} {bb} is not defined", op.symbol()) })?;
                    (r, ma.join(mb))
                }
                Rhs::Pow(a, k) => {
                    operands.push(a);
                    env.c_nat(k, line, "pow", "exponent")?;
                    let (m, b) = env.value(a, line)?;
                    if b == Base::Bool {
                        return terr("pow", line, "pow on bool");
                    }
                    (b, m)
                }
                Rhs::Fact(a) => {
                    env.c_nat(a, line, "fact", "factorial operand")?;
                    if dt.mode != Mode::C {
                        return terr("fact", line, "factorial is only available in C mode");
                    }
                    (Base::Nat, Mode::C)
                }
                Rhs::Cast(t, a) => {
                    operands.push(a);
                    let (m, _) = env.value(a, line)?;
                    (*t, m)
                }
                Rhs::Even(a) => {
                    operands.push(a);
                    let (m, b) = env.value(a, line)?;
                    if b != Base::Nat {
                        return terr("even", line, "even takes a nat");
                    }
                    (Base::Bool, m)
                }
                Rhs::Call(f, args) => {
                    let sig = env.sigs.iter().find(|g| g.name == *f).ok_or_else(|| TypeError {
                        rule: "call",
                        line,
                        msg: format!("{f} is not a function defined earlier"),
                    })?;
                    if args.len() != sig.params.len() {
                        return terr("call", line, format!("{f} takes {} arguments", sig.params.len()));
                    }
                    for (a, p) in args.iter().zip(&sig.params) {
                        let (m, b) = env.value(a, line)?;
                        if m != Mode::C || b != p.base {
                            return terr("call", line, format!("argument {a} of {f} must be C {}", p.base));
                        }
                    }
                    let r = sig.ret.ok_or_else(|| TypeError { rule: "call", line, msg: format!("{f} returns nothing") })?;
                    if dt.mode == Mode::Q && origin == Origin::Global {
                        return terr("call", line, format!("call result must go to a local, not global {}", d.var));
                    }
                    (r.base, r.mode)
                }
            };
            if rb != dt.base {
                return terr("assign", line, format!("cannot assign {rb} to {} of type {}", d, dt.base));
            }
            match dt.mode {
                Mode::C => {
                    if rm == Mode::Q {
                        return terr("binop_c", line, format!("C variable {d} computed from Q data"));
                    }
                    if ctx == Mode::Q {
                        return terr("binop_c", line, format!("C assignment to {d} under a Q guard"));
                    }
                }
                Mode::Q => {
                    if let Some(v) = operands.iter().find(|v| aliases(d, v)) {
                        return terr("binop_q", line, format!("destination {d} is also operand {v}"));
                    }
                }
            }
            Ok(())
        }
        StmtKind::Update(d, op, v) => {
            let (dt, _) = env.lookup(d, line)?;
            let (m, b) = env.value(v, line)?;
            let bop = match op {
                UpOp::Add => BinOp::Add,
                UpOp::Sub => BinOp::Sub,
                UpOp::Xor => BinOp::Xor,
            };
            if result_base(bop, dt.base, b) != Some(dt.base) {
                return terr("binop", line, format!("{} {}= {b} is not defined", dt.base, bop.symbol()));
            }
            match dt.mode {
                Mode::C if m == Mode::Q || ctx == Mode::Q => terr("binop_c", line, format!("C update of {d} depends on Q data")),
                Mode::Q if aliases(d, v) => terr("binop_q", line, format!("{d} updated with itself")),
                _ => Ok(()),
            }
        }
        StmtKind::Rotl(d, k) => {
            let (dt, _) = env.lookup(d, line)?;
            env.c_nat(k, line, "rotl", "rotation amount")?;
            if dt.base != Base::Nat {
                return terr("rotl", line, "rotation needs a nat");
            }
            if ctx == Mode::Q {
                return terr("rotl", line, "rotation under a Q guard");
            }
            Ok(())
        }
        StmtKind::Inv(d) => {
            let (dt, _) = env.lookup(d, line)?;
            if dt.mode != Mode::Q {
                return terr("inv", line, format!("inv target {d} must be Q"));
            }
            Ok(())
        }
        StmtKind::For { var, init, rel: _, bound, step, body } => {
            let (t, o) = env.lookup(&LValue::var(var), line)?;
            if t.mode != Mode::C || t.base != Base::Nat || t.len.is_some() || o == Origin::Global {
                return terr("for", line, format!("iterator {var} must be a local C nat"));
            }
            env.c_nat(init, line, "for", "loop start")?;
            env.c_nat(bound, line, "for", "loop bound")?;
            match step {
                Step::Inc(v) | Step::Dec(v) => env.c_nat(v, line, "for", "loop step")?,
            }
            if ctx == Mode::Q {
                return terr("for", line, "loop under a Q guard");
            }
            body.iter().try_for_each(|s| check_stmt(env, s, ctx))
        }
        StmtKind::If { guard, then, els } => {
            let ops: Vec<&Value> = match guard {
                Guard::Lt(a, b) | Guard::Eq(a, b) => vec![a, b],
                Guard::Even(a) | Guard::Val(a) => vec![a],
            };
            let tys = ops.iter().map(|v| env.value(v, line)).collect::<Result<Vec<_>, _>>()?;
            let ok = match guard {
                Guard::Lt(..) | Guard::Eq(..) => tys[0].1 == tys[1].1,
                Guard::Even(_) => tys[0].1 == Base::Nat,
                Guard::Val(_) => tys[0].1 == Base::Bool,
            };
            if !ok {
                return terr("if", line, "ill-typed guard");
            }
            let gm = tys.iter().fold(Mode::C, |m, t| m.join(t.0));
            if gm == Mode::Q {
                let mut w = Vec::new();
                written(then, &mut w);
                written(els, &mut w);
                let mut read = BTreeSet::new();
                for v in &ops {
                    value_vars(v, &mut read);
                }
                if let Some(x) = w.iter().find(|l| read.contains(l.var.as_str())) {
                    return terr("if", line, format!("branch writes guard variable {}", x.var));
                }
            }
            let inner = ctx.join(gm);
            then.iter().chain(els).try_for_each(|s| check_stmt(env, s, inner))
        }
        StmtKind::InPlace { f, .. } => terr("call", line, format!("{f} is not an in-place function defined earlier")),
    }
}

/// Lvalues written by a block, syntactically (nested blocks included).
pub(crate) fn written<'a>(body: &'a [Stmt], out: &mut Vec<&'a LValue>) {
    for s in body {
        match &s.kind {
            StmtKind::Assign(d, _) | StmtKind::Update(d, ..) | StmtKind::Rotl(d, _) | StmtKind::Inv(d) => out.push(d),
            StmtKind::For { body, .. } => written(body, out),
            StmtKind::If { then, els, .. } => {
                written(then, out);
                written(els, out);
            }
            StmtKind::InPlace { lhs, .. } => out.extend(lhs),
        }
    }
}

pub(crate) fn value_vars<'a>(v: &'a Value, out: &mut BTreeSet<&'a str>) {
    if let Value::L(l) = v {
        out.insert(&l.var);
        if let Some(i) = &l.index {
            value_vars(i, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InvError {
    #[error("line {line}: inv({target}) has no definite predecessor")]
    NoPredecessor { line: usize, target: String },
    #[error("line {line}: {var} is written at line {at} between inv({target}) and its predecessor")]
    InterveningWrite { line: usize, target: String, var: String, at: usize },
    #[error("line {line}: more inv({target}) than assignments to undo")]
    CountMismatch { line: usize, target: String },
}

enum Entry<'a> {
    Assign { dest: &'a LValue, reads: BTreeSet<&'a str>, line: usize },
    Compound { writes: BTreeSet<&'a str>, line: usize },
}

impl Entry<'_> {
    fn writes(&self, v: &str) -> bool {
        match self {
            Entry::Assign { dest, .. } => dest.var == v,
            Entry::Compound { writes, .. } => writes.contains(v),
        }
    }

    fn line(&self) -> usize {
        match self {
            Entry::Assign { line, .. } | Entry::Compound { line, .. } => *line,
        }
    }
}

/// Every `inv` must undo one definite, unobstructed earlier assignment in
/// its own block.
pub fn check_inv(prog: &Program) -> Result<(), InvError> {
    let globals: Vec<&str> = prog.globals.iter().map(|g| g.name.as_str()).collect();
    for f in &prog.funcs {
        check_block(&f.body, &globals)?;
    }
    Ok(())
}

fn check_block<'a>(body: &'a [Stmt], globals: &[&'a str]) -> Result<(), InvError> {
    let mut stack: Vec<Entry<'a>> = Vec::new();
    // locations whose assignments have already been consumed by an inv
    let mut consumed: Vec<&LValue> = Vec::new();
    for s in body {
        match &s.kind {
            StmtKind::Assign(d, rhs) => {
                let mut reads = BTreeSet::new();
                if let Some(i) = &d.index {
                    value_vars(i, &mut reads);
                }
                match rhs {
                    Rhs::Val(a) | Rhs::Fact(a) | Rhs::Cast(_, a) | Rhs::Even(a) => value_vars(a, &mut reads),
                    Rhs::Bin(_, a, b) | Rhs::Pow(a, b) => {
                        value_vars(a, &mut reads);
                        value_vars(b, &mut reads);
                    }
                    Rhs::Call(_, args) => {
                        args.iter().for_each(|a| value_vars(a, &mut reads));
                        // the callee may read any global
                        reads.extend(globals.iter().copied());
                    }
                }
                stack.push(Entry::Assign { dest: d, reads, line: s.line });
            }
            StmtKind::Update(d, _, v) | StmtKind::Rotl(d, v) => {
                let mut reads = BTreeSet::new();
                value_vars(v, &mut reads);
                if let Some(i) = &d.index {
                    value_vars(i, &mut reads);
                }
                stack.push(Entry::Assign { dest: d, reads, line: s.line });
            }
            StmtKind::Inv(z) => {
                let mut found = None;
                for (k, e) in stack.iter().enumerate().rev() {
                    match e {
                        Entry::Assign { dest, .. } if same_loc(dest, z) => {
                            found = Some(k);
                            break;
                        }
                        Entry::Compound { .. } if e.writes(&z.var) => {
                            return Err(InvError::NoPredecessor { line: s.line, target: z.to_string() })
                        }
                        _ => {}
                    }
                }
                let Some(k) = found else {
                    return Err(if consumed.iter().any(|c| same_loc(c, z)) {
                        InvError::CountMismatch { line: s.line, target: z.to_string() }
                    } else {
                        InvError::NoPredecessor { line: s.line, target: z.to_string() }
                    });
                };
                let Entry::Assign { reads, dest, .. } = stack.remove(k) else { unreachable!() };
                for e in &stack[k..] {
                    if let Some(v) = reads.iter().find(|v| e.writes(v)) {
                        return Err(InvError::InterveningWrite {
                            line: s.line,
                            target: z.to_string(),
                            var: v.to_string(),
                            at: e.line(),
                        });
                    }
                }
                consumed.push(dest);
            }
            StmtKind::For { var, body, .. } => {
                check_block(body, globals)?;
                let mut w = Vec::new();
                written(body, &mut w);
                let mut writes: BTreeSet<&str> = w.iter().map(|l| l.var.as_str()).collect();
                writes.insert(var);
                stack.push(Entry::Compound { writes, line: s.line });
            }
            StmtKind::If { then, els, .. } => {
                check_block(then, globals)?;
                check_block(els, globals)?;
                let mut w = Vec::new();
                written(then, &mut w);
                written(els, &mut w);
                stack.push(Entry::Compound { writes: w.iter().map(|l| l.var.as_str()).collect(), line: s.line });
            }
            StmtKind::InPlace { lhs, .. } => {
                stack.push(Entry::Compound { writes: lhs.iter().map(|l| l.var.as_str()).collect(), line: s.line });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn tc(src: &str) -> Result<TypeSummary, TypeError> {
        typecheck_program(&parse(src).unwrap())
    }

    #[test]
    fn aliasing_q_destination_is_rejected() {
        let e = tc("Q nat z; Q nat y; void main() { z = z * y; }").unwrap_err();
        assert_eq!(e.rule, "binop_q");
        assert!(tc("Q nat z; Q nat y; Q nat w; void main() { w = z * y; }").is_ok());
    }

    #[test]
    fn c_assignment_under_q_guard_is_rejected() {
        let e = tc("Q nat x; C nat c; void main() { if (x < 3) { c = 1; } }").unwrap_err();
        assert_eq!(e.rule, "binop_c");
        assert!(tc("C nat x; C nat c; void main() { if (x < 3) { c = 1; } }").is_ok());
    }

    #[test]
    fn misc_rules() {
        assert_eq!(tc("Q nat x; C nat c; void main() { c = x + 1; }").unwrap_err().rule, "binop_c");
        assert_eq!(tc("C nat c; void main() { inv(c); }").unwrap_err().rule, "inv");
        assert_eq!(tc("Q nat n; void main() { for (C nat i = 0; i < n; i++) { } }").unwrap_err().rule, "for");
        assert_eq!(tc("Q nat x; void main() { x = 0.5; }").unwrap_err().rule, "assign");
        assert_eq!(tc("Q nat x; void main() { x = g(); }").unwrap_err().rule, "call");
        assert_eq!(tc("Q nat x; Q nat y; void main() { if (x < 1) { x += 1; } }").unwrap_err().rule, "if");
        assert_eq!(tc("Q nat x; void main() { C nat x; }").unwrap_err().rule, "scope");
        assert_eq!(tc("Q nat x; void main() { x[0] += 1; }").unwrap_err().rule, "index");
        assert_eq!(tc("nat f(Q nat a) { return a; } void main() { }").unwrap_err().rule, "fun");
        let s = tc("Q nat x; nat f(C nat k) { Q nat t; t = x + k; return t; } void main() { Q nat r; r = f(3); }").unwrap();
        assert_eq!(s.sig("f").unwrap().ret.unwrap().mode, Mode::Q);
    }

    fn inv(body: &str) -> Result<(), InvError> {
        let p = parse(&format!("Q nat x; Q nat y; Q nat z; Q nat a; void main() {{ {body} }}")).unwrap();
        typecheck_program(&p).unwrap();
        check_inv(&p)
    }

    #[test]
    fn inv_discipline() {
        assert!(matches!(inv("a = x * y; inv(z);"), Err(InvError::NoPredecessor { .. })));
        assert!(matches!(
            inv("if (x < y) { a = x * y; } else { z = x * y; } inv(z);"),
            Err(InvError::NoPredecessor { .. })
        ));
        assert!(matches!(inv("z = x * y; x += 1; inv(z);"), Err(InvError::InterveningWrite { .. })));
        assert!(matches!(inv("z = x * y; inv(z); inv(z);"), Err(InvError::CountMismatch { .. })));
        assert!(inv("z += x; z = x * y; inv(z); inv(z);").is_ok());
        assert!(inv("z = x * y; a = x + y; inv(z); inv(a);").is_ok());
    }
}
