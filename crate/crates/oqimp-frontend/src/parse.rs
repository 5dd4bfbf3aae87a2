//! Lexer, recursive-descent parser and in-place function expansion.

use std::collections::HashMap;

use crate::ast::*;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError { line, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u128),
    Dec(u128, u32),
    Sym(&'static str),
    Eof,
}

const SYMS: &[&str] = &[
    "<<<=", "+=", "-=", "^=", "++", "--", "==", "!=", "<=", ">=", "<", ">", "=", "+", "-", "*", "/", "%", "^", "!", "(",
    ")", "{", "}", "[", "]", ",", ";",
];

/// Decimal literals keep at most this many fractional digits.
const MAX_SCALE: u32 = 18;

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line) = (0, 1);
    while i < b.len() {
        let c = b[i];
        if c == b'\n' {
            line += 1;
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if src[i..].starts_with("//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if src[i..].starts_with("/*") {
            let start = line;
            i += 2;
            loop {
                if i + 1 >= b.len() {
                    return err(start, "unterminated comment");
                }
                if b[i] == b'*' && b[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                if b[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
                if &src[s..i] != "0" {
                    return err(line, "fixedp literals must lie in [0, 1)");
                }
                i += 1;
                let f = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let scale = (i - f) as u32;
                if scale > MAX_SCALE {
                    return err(line, format!("at most {MAX_SCALE} fractional digits"));
                }
                out.push((Tok::Dec(src[f..i].parse().unwrap(), scale), line));
            } else {
                let n = src[s..i].parse().map_err(|_| SyntaxError { line, msg: "integer literal too large".into() })?;
                out.push((Tok::Int(n), line));
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[s..i].to_string()), line));
        } else if let Some(sym) = SYMS.iter().find(|s| src[i..].starts_with(**s)) {
            out.push((Tok::Sym(sym), line));
            i += sym.len();
        } else {
            return err(line, format!("unexpected character {:?}", src[i..].chars().next().unwrap()));
        }
    }
    out.push((Tok::Eof, line));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "C", "Q", "nat", "fixedp", "bool", "void", "for", "if", "else", "return", "inv", "true", "false", "pow", "even",
];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

/// Declarations collected while parsing a function body.
struct Scope {
    locals: Vec<Decl>,
}

impl Scope {
    fn declare(&mut self, d: Decl) -> Result<(), SyntaxError> {
        match self.locals.iter().find(|e| e.name == d.name) {
            Some(e) if e.ty == d.ty => Ok(()),
            Some(e) => err(d.line, format!("{} redeclared with a different type (first at line {})", d.name, e.line)),
            None => {
                self.locals.push(d);
                Ok(())
            }
        }
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn line(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            err(self.line(), format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Dec(..) => "a decimal literal".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => err(self.line(), format!("expected identifier, found {}", self.describe())),
        }
    }

    fn nat_lit(&mut self) -> Result<usize, SyntaxError> {
        match self.bump() {
            Tok::Int(n) if n >= 1 && n <= usize::MAX as u128 => Ok(n as usize),
            _ => err(self.line(), "expected a positive array length"),
        }
    }

    fn base(&mut self) -> Option<Base> {
        let b = match self.peek() {
            Tok::Ident(s) if s == "nat" => Base::Nat,
            Tok::Ident(s) if s == "fixedp" => Base::Fixedp,
            Tok::Ident(s) if s == "bool" => Base::Bool,
            _ => return None,
        };
        self.bump();
        Some(b)
    }

    fn mode(&mut self) -> Option<Mode> {
        let m = match self.peek() {
            Tok::Ident(s) if s == "C" => Mode::C,
            Tok::Ident(s) if s == "Q" => Mode::Q,
            _ => return None,
        };
        self.bump();
        Some(m)
    }

    fn array_len(&mut self) -> Result<Option<usize>, SyntaxError> {
        if self.eat_sym("[") {
            let n = self.nat_lit()?;
            self.expect("]")?;
            Ok(Some(n))
        } else {
            Ok(None)
        }
    }

    /// `mode base [N]`
    fn ty(&mut self) -> Result<Ty, SyntaxError> {
        let line = self.line();
        let mode = self.mode().ok_or_else(|| SyntaxError { line, msg: "expected mode C or Q".into() })?;
        let base = self.base().ok_or_else(|| SyntaxError { line, msg: "expected nat, fixedp or bool".into() })?;
        Ok(Ty { mode, base, len: self.array_len()? })
    }

    fn starts_decl(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "C" || s == "Q")
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut prog = Program::default();
        while *self.peek() != Tok::Eof {
            let line = self.line();
            if self.is_kw("void") {
                self.bump();
                let name = self.ident()?;
                prog.funcs.push(self.fundef(name, None, line)?);
                continue;
            }
            let mode = self.mode();
            let base = self.base().ok_or_else(|| SyntaxError { line, msg: "expected a declaration or function".into() })?;
            let len = self.array_len()?;
            let name = self.ident()?;
            if self.is_sym("(") {
                prog.funcs.push(self.fundef(name, Some((mode, base, len)), line)?);
            } else {
                let mode = mode.ok_or_else(|| SyntaxError { line, msg: "global declarations need a mode".into() })?;
                if !prog.funcs.is_empty() {
                    return err(line, "globals must precede function definitions");
                }
                if prog.globals.iter().any(|g| g.name == name) {
                    return err(line, format!("global {name} declared twice"));
                }
                self.expect(";")?;
                prog.globals.push(Decl { name, ty: Ty { mode, base, len }, line });
            }
        }
        if prog.funcs.is_empty() {
            return err(self.line(), "a program needs at least one function");
        }
        Ok(prog)
    }

    fn fundef(&mut self, name: String, ret: Option<(Option<Mode>, Base, Option<usize>)>, line: usize) -> Result<FunDef, SyntaxError> {
        self.expect("(")?;
        let mut params: Vec<Decl> = Vec::new();
        if !self.is_sym(")") {
            loop {
                let pl = self.line();
                let ty = self.ty()?;
                let pname = self.ident()?;
                if params.iter().any(|p| p.name == pname) {
                    return err(pl, format!("parameter {pname} repeated"));
                }
                params.push(Decl { name: pname, ty, line: pl });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        self.expect("{")?;
        let mut scope = Scope { locals: Vec::new() };
        let mut body = Vec::new();
        let mut ret_val = None;
        while !self.is_sym("}") {
            if self.is_kw("return") {
                self.bump();
                ret_val = Some(if self.eat_sym("[") {
                    let mut vs = vec![self.value()?];
                    while self.eat_sym(",") {
                        vs.push(self.value()?);
                    }
                    self.expect("]")?;
                    RetVal::Tuple(vs)
                } else {
                    RetVal::Single(self.value()?)
                });
                self.eat_sym(";");
                while self.eat_sym(";") {}
                if !self.is_sym("}") {
                    return err(self.line(), "return must be the last statement");
                }
                break;
            }
            self.stmt(&mut scope, &mut body)?;
        }
        self.expect("}")?;
        if params.iter().any(|p| scope.locals.iter().any(|l| l.name == p.name)) {
            return err(line, format!("{name}: a local shadows a parameter"));
        }
        match (&ret, &ret_val) {
            (None, Some(_)) => return err(line, format!("void function {name} returns a value")),
            (Some(_), None) => return err(line, format!("function {name} must end with return")),
            _ => {}
        }
        Ok(FunDef { name, ret, params, locals: scope.locals, body, ret_val, line })
    }

    fn block(&mut self, scope: &mut Scope) -> Result<Vec<Stmt>, SyntaxError> {
        let mut out = Vec::new();
        if self.eat_sym("{") {
            while !self.eat_sym("}") {
                if *self.peek() == Tok::Eof {
                    return err(self.line(), "unclosed block");
                }
                self.stmt(scope, &mut out)?;
            }
        } else {
            self.stmt(scope, &mut out)?;
        }
        Ok(out)
    }

    fn stmt(&mut self, scope: &mut Scope, out: &mut Vec<Stmt>) -> Result<(), SyntaxError> {
        let line = self.line();
        if self.eat_sym(";") {
            return Ok(());
        }
        if self.starts_decl() {
            let ty = self.ty()?;
            loop {
                let dl = self.line();
                let name = self.ident()?;
                scope.declare(Decl { name: name.clone(), ty, line: dl })?;
                if self.eat_sym("=") {
                    let rhs = self.rhs()?;
                    out.push(Stmt { kind: StmtKind::Assign(LValue::var(&name), rhs), line: dl });
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            return self.expect(";");
        }
        if self.is_kw("inv") {
            self.bump();
            self.expect("(")?;
            let l = self.lvalue()?;
            self.expect(")")?;
            self.expect(";")?;
            out.push(Stmt { kind: StmtKind::Inv(l), line });
            return Ok(());
        }
        if self.is_kw("for") {
            return self.for_stmt(scope, out);
        }
        if self.is_kw("if") {
            self.bump();
            self.expect("(")?;
            let guard = self.guard()?;
            self.expect(")")?;
            let then = self.block(scope)?;
            let els = if self.is_kw("else") {
                self.bump();
                self.block(scope)?
            } else {
                Vec::new()
            };
            out.push(Stmt { kind: StmtKind::If { guard, then, els }, line });
            return Ok(());
        }
        if self.eat_sym("[") {
            let mut lhs = vec![self.lvalue()?];
            while self.eat_sym(",") {
                lhs.push(self.lvalue()?);
            }
            self.expect("]")?;
            self.expect("=")?;
            let f = self.ident()?;
            let args = self.args()?;
            self.expect(";")?;
            out.push(Stmt { kind: StmtKind::InPlace { lhs, f, args }, line });
            return Ok(());
        }
        if matches!(self.peek_at(1), Tok::Sym("(")) {
            let f = self.ident()?;
            let args = self.args()?;
            self.expect(";")?;
            out.push(Stmt { kind: StmtKind::InPlace { lhs: Vec::new(), f, args }, line });
            return Ok(());
        }
        let l = self.lvalue()?;
        let kind = match self.bump() {
            Tok::Sym("=") => StmtKind::Assign(l, self.rhs()?),
            Tok::Sym("+=") => StmtKind::Update(l, UpOp::Add, self.value()?),
            Tok::Sym("-=") => StmtKind::Update(l, UpOp::Sub, self.value()?),
            Tok::Sym("^=") => StmtKind::Update(l, UpOp::Xor, self.value()?),
            Tok::Sym("<<<=") => StmtKind::Rotl(l, self.value()?),
            _ => return err(line, "expected an assignment operator"),
        };
        self.expect(";")?;
        out.push(Stmt { kind, line });
        Ok(())
    }

    fn for_stmt(&mut self, scope: &mut Scope, out: &mut Vec<Stmt>) -> Result<(), SyntaxError> {
        let line = self.line();
        self.bump();
        self.expect("(")?;
        let var = if self.starts_decl() {
            let ty = self.ty()?;
            let name = self.ident()?;
            scope.declare(Decl { name: name.clone(), ty, line })?;
            name
        } else {
            self.ident()?
        };
        self.expect("=")?;
        let init = self.value()?;
        self.expect(";")?;
        if self.ident()? != var {
            return err(line, "loop condition must test the iterator");
        }
        let rel = match self.bump() {
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym(">") => Rel::Gt,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym("!=") => Rel::Ne,
            _ => return err(line, "expected a comparison in the loop condition"),
        };
        let bound = self.value()?;
        self.expect(";")?;
        if self.ident()? != var {
            return err(line, "loop step must update the iterator");
        }
        let step = match self.bump() {
            Tok::Sym("++") => Step::Inc(Value::Lit(Lit::Int(1))),
            Tok::Sym("--") => Step::Dec(Value::Lit(Lit::Int(1))),
            Tok::Sym("+=") => Step::Inc(self.value()?),
            Tok::Sym("-=") => Step::Dec(self.value()?),
            _ => return err(line, "expected ++, --, += or -= in the loop step"),
        };
        self.expect(")")?;
        let body = self.block(scope)?;
        out.push(Stmt { kind: StmtKind::For { var, init, rel, bound, step, body }, line });
        Ok(())
    }

    fn args(&mut self) -> Result<Vec<Value>, SyntaxError> {
        self.expect("(")?;
        let mut v = Vec::new();
        if !self.is_sym(")") {
            v.push(self.value()?);
            while self.eat_sym(",") {
                v.push(self.value()?);
            }
        }
        self.expect(")")?;
        Ok(v)
    }

    fn lvalue(&mut self) -> Result<LValue, SyntaxError> {
        let var = self.ident()?;
        let index = if self.eat_sym("[") {
            let i = self.value()?;
            self.expect("]")?;
            Some(Box::new(i))
        } else {
            None
        };
        Ok(LValue { var, index })
    }

    fn value(&mut self) -> Result<Value, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Value::Lit(Lit::Int(n)))
            }
            Tok::Dec(digits, scale) => {
                self.bump();
                Ok(Value::Lit(Lit::Dec { digits, scale }))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Value::Lit(Lit::Bool(s == "true")))
            }
            _ => Ok(Value::L(self.lvalue()?)),
        }
    }

    fn unary_call(&mut self) -> Result<Value, SyntaxError> {
        self.bump();
        self.expect("(")?;
        let v = self.value()?;
        self.expect(")")?;
        Ok(v)
    }

    fn rhs(&mut self) -> Result<Rhs, SyntaxError> {
        let line = self.line();
        if let (Tok::Ident(name), Tok::Sym("(")) = (self.peek().clone(), self.peek_at(1).clone()) {
            return match name.as_str() {
                "pow" => {
                    self.bump();
                    self.expect("(")?;
                    let a = self.value()?;
                    self.expect(",")?;
                    let k = self.value()?;
                    self.expect(")")?;
                    Ok(Rhs::Pow(a, k))
                }
                "even" => Ok(Rhs::Even(self.unary_call()?)),
                "nat" => Ok(Rhs::Cast(Base::Nat, self.unary_call()?)),
                "fixedp" => Ok(Rhs::Cast(Base::Fixedp, self.unary_call()?)),
                "bool" => Ok(Rhs::Cast(Base::Bool, self.unary_call()?)),
                _ if KEYWORDS.contains(&name.as_str()) => err(line, format!("`{name}` cannot be called")),
                _ => {
                    let f = self.ident()?;
                    Ok(Rhs::Call(f, self.args()?))
                }
            };
        }
        let a = self.value()?;
        let op = match self.peek() {
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("/") => BinOp::Div,
            Tok::Sym("%") => BinOp::Mod,
            Tok::Sym("^") => BinOp::Xor,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym(">") => {
                self.bump();
                let b = self.value()?;
                return Ok(Rhs::Bin(BinOp::Lt, b, a));
            }
            Tok::Sym("!") => {
                self.bump();
                return Ok(Rhs::Fact(a));
            }
            _ => return Ok(Rhs::Val(a)),
        };
        self.bump();
        let b = self.value()?;
        Ok(Rhs::Bin(op, a, b))
    }

    fn guard(&mut self) -> Result<Guard, SyntaxError> {
        if self.is_kw("even") && matches!(self.peek_at(1), Tok::Sym("(")) {
            return Ok(Guard::Even(self.unary_call()?));
        }
        let a = self.value()?;
        let g = match self.peek() {
            Tok::Sym("<") => {
                self.bump();
                Guard::Lt(a, self.value()?)
            }
            Tok::Sym(">") => {
                self.bump();
                let b = self.value()?;
                Guard::Lt(b, a)
            }
            Tok::Sym("==") => {
                self.bump();
                Guard::Eq(a, self.value()?)
            }
            _ => Guard::Val(a),
        };
        Ok(g)
    }
}

/// Parse source text into the raw syntax tree. In-place functions are kept
/// as written; see [`expand`].
pub fn parse(src: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    p.program()
}

/// Inline every call of an in-place function (one with Q parameters that
/// returns them as a tuple) by substituting arguments for parameters, and
/// drop those definitions from the program.
pub fn expand(prog: &Program) -> Result<Program, SyntaxError> {
    let mut inplace: HashMap<String, FunDef> = HashMap::new();
    let mut funcs = Vec::new();
    for f in &prog.funcs {
        let body = expand_block(&f.body, &inplace)?;
        let g = FunDef { body, ..f.clone() };
        if g.is_in_place() {
            check_in_place(&g)?;
            inplace.insert(g.name.clone(), g);
        } else {
            funcs.push(g);
        }
    }
    if funcs.is_empty() {
        return err(prog.funcs.last().map_or(1, |f| f.line), "the last function cannot be an in-place function");
    }
    if prog.funcs.last().map(|f| &f.name) != funcs.last().map(|f| &f.name) {
        return err(prog.funcs.last().unwrap().line, "the main function cannot take Q parameters");
    }
    Ok(Program { globals: prog.globals.clone(), funcs })
}

fn check_in_place(f: &FunDef) -> Result<(), SyntaxError> {
    if !f.locals.is_empty() {
        return err(f.line, format!("in-place function {} cannot declare locals", f.name));
    }
    let qs: Vec<Value> = f
        .params
        .iter()
        .filter(|p| p.ty.mode == Mode::Q)
        .map(|p| Value::L(LValue::var(&p.name)))
        .collect();
    if f.params.iter().any(|p| p.ty.len.is_some()) {
        return err(f.line, format!("in-place function {} takes scalar parameters only", f.name));
    }
    let ok = match &f.ret_val {
        None => true,
        Some(RetVal::Tuple(vs)) => *vs == qs,
        Some(RetVal::Single(v)) => qs.len() == 1 && *v == qs[0],
    };
    if !ok {
        return err(f.line, format!("in-place function {} must return its Q parameters in order", f.name));
    }
    Ok(())
}

fn expand_block(body: &[Stmt], inplace: &HashMap<String, FunDef>) -> Result<Vec<Stmt>, SyntaxError> {
    let mut out = Vec::new();
    for s in body {
        let kind = match &s.kind {
            StmtKind::InPlace { lhs, f, args } => {
                let g = inplace.get(f).ok_or_else(|| SyntaxError {
                    line: s.line,
                    msg: format!("{f} is not an in-place function defined earlier"),
                })?;
                if args.len() != g.params.len() {
                    return err(s.line, format!("{f} takes {} arguments", g.params.len()));
                }
                let mut sub: HashMap<&str, &Value> = HashMap::new();
                let mut qargs = Vec::new();
                for (p, a) in g.params.iter().zip(args) {
                    if p.ty.mode == Mode::Q {
                        match a {
                            Value::L(l) => qargs.push(l.clone()),
                            _ => return err(s.line, format!("argument for Q parameter {} must be a location", p.name)),
                        }
                    }
                    sub.insert(p.name.as_str(), a);
                }
                if !lhs.is_empty() && *lhs != qargs {
                    return err(s.line, format!("the results of {f} must be assigned back to its arguments"));
                }
                for (i, a) in qargs.iter().enumerate() {
                    if qargs[..i].contains(a) {
                        return err(s.line, format!("{a} passed twice to {f}"));
                    }
                }
                for t in &g.body {
                    out.push(Stmt { kind: subst_stmt(&t.kind, &sub, s.line)?, line: s.line });
                }
                continue;
            }
            StmtKind::For { var, init, rel, bound, step, body } => StmtKind::For {
                var: var.clone(),
                init: init.clone(),
                rel: *rel,
                bound: bound.clone(),
                step: step.clone(),
                body: expand_block(body, inplace)?,
            },
            StmtKind::If { guard, then, els } => StmtKind::If {
                guard: guard.clone(),
                then: expand_block(then, inplace)?,
                els: expand_block(els, inplace)?,
            },
            k => k.clone(),
        };
        out.push(Stmt { kind, line: s.line });
    }
    Ok(out)
}

fn subst_lv(l: &LValue, sub: &HashMap<&str, &Value>, line: usize) -> Result<LValue, SyntaxError> {
    match sub.get(l.var.as_str()) {
        None => Ok(LValue {
            var: l.var.clone(),
            index: l.index.as_ref().map(|i| subst_val(i, sub, line)).transpose()?.map(Box::new),
        }),
        Some(_) if l.index.is_some() => err(line, format!("parameter {} is not an array", l.var)),
        Some(Value::L(a)) => Ok(a.clone()),
        Some(Value::Lit(_)) => err(line, format!("parameter {} is bound to a literal and cannot be written", l.var)),
    }
}

fn subst_val(v: &Value, sub: &HashMap<&str, &Value>, line: usize) -> Result<Value, SyntaxError> {
    match v {
        Value::Lit(_) => Ok(v.clone()),
        Value::L(l) => match sub.get(l.var.as_str()) {
            Some(a) if l.index.is_none() => Ok((*a).clone()),
            _ => Ok(Value::L(subst_lv(l, sub, line)?)),
        },
    }
}

fn subst_stmt(k: &StmtKind, sub: &HashMap<&str, &Value>, line: usize) -> Result<StmtKind, SyntaxError> {
    let v = |x: &Value| subst_val(x, sub, line);
    let l = |x: &LValue| subst_lv(x, sub, line);
    let vs = |xs: &[Value]| xs.iter().map(v).collect::<Result<Vec<_>, _>>();
    let blk = |b: &[Stmt]| {
        b.iter()
            .map(|s| Ok(Stmt { kind: subst_stmt(&s.kind, sub, line)?, line }))
            .collect::<Result<Vec<_>, SyntaxError>>()
    };
    Ok(match k {
        StmtKind::Assign(d, r) => StmtKind::Assign(
            l(d)?,
            match r {
                Rhs::Val(a) => Rhs::Val(v(a)?),
                Rhs::Bin(op, a, b) => Rhs::Bin(*op, v(a)?, v(b)?),
                Rhs::Pow(a, b) => Rhs::Pow(v(a)?, v(b)?),
                Rhs::Fact(a) => Rhs::Fact(v(a)?),
                Rhs::Cast(t, a) => Rhs::Cast(*t, v(a)?),
                Rhs::Even(a) => Rhs::Even(v(a)?),
                Rhs::Call(f, args) => Rhs::Call(f.clone(), vs(args)?),
            },
        ),
        StmtKind::Update(d, op, a) => StmtKind::Update(l(d)?, *op, v(a)?),
        StmtKind::Rotl(d, a) => StmtKind::Rotl(l(d)?, v(a)?),
        StmtKind::Inv(d) => StmtKind::Inv(l(d)?),
        StmtKind::For { var, .. } => return err(line, format!("in-place functions cannot loop (iterator {var})")),
        StmtKind::If { guard, then, els } => StmtKind::If {
            guard: match guard {
                Guard::Lt(a, b) => Guard::Lt(v(a)?, v(b)?),
                Guard::Eq(a, b) => Guard::Eq(v(a)?, v(b)?),
                Guard::Even(a) => Guard::Even(v(a)?),
                Guard::Val(a) => Guard::Val(v(a)?),
            },
            then: blk(then)?,
            els: blk(els)?,
        },
        StmtKind::InPlace { .. } => unreachable!("nested in-place calls are expanded first"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_main() {
        let p = parse("void main() { }").unwrap();
        assert_eq!(p.funcs.len(), 1);
        assert!(p.funcs[0].body.is_empty());
    }

    #[test]
    fn pow_is_a_call_node() {
        let p = parse("Q fixedp y; Q fixedp x; void main() { x = pow(y, 3); }").unwrap();
        let s = &p.funcs[0].body[0];
        assert!(matches!(&s.kind, StmtKind::Assign(_, Rhs::Pow(_, Value::Lit(Lit::Int(3))))));
    }

    #[test]
    fn literals_and_comments() {
        let p = parse("C fixedp a; /* block\n comment */ void main() { a = 0.25; // tail\n }").unwrap();
        assert_eq!(p.funcs[0].body[0].line, 2);
        assert!(matches!(p.funcs[0].body[0].kind, StmtKind::Assign(_, Rhs::Val(Value::Lit(Lit::Dec { digits: 25, scale: 2 })))));
    }

    #[test]
    fn syntax_errors_have_lines() {
        let e = parse("void main() {\n x = ;\n}").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse("void main() { x = 1.5; }").is_err());
        assert!(parse("C nat x;").is_err());
        assert!(parse("void main() { return 1; }").is_err());
    }

    #[test]
    fn locals_are_hoisted() {
        let p = parse("nat f() { C nat a = 1; for (C nat i = 0; i < 3; i++) { C nat b; b = i; } return a; }").unwrap();
        let names: Vec<_> = p.funcs[0].locals.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["a", "i", "b"]);
    }

    #[test]
    fn in_place_expansion() {
        let src = "Q nat a; Q nat b;
            Q nat[2] sw(Q nat x, Q nat y) { x ^= y; y ^= x; x ^= y; return [x, y]; }
            void main() { [a, b] = sw(a, b); }";
        let raw = parse(src).unwrap();
        assert_eq!(raw.funcs.len(), 2);
        let p = expand(&raw).unwrap();
        assert_eq!(p.funcs.len(), 1);
        assert_eq!(p.funcs[0].body.len(), 3);
        assert_eq!(p.funcs[0].body[1].kind, StmtKind::Update(LValue::var("b"), UpOp::Xor, Value::L(LValue::var("a"))));
        let bad = "Q nat a; Q nat b;
            Q nat[2] sw(Q nat x, Q nat y) { x ^= y; return [x, y]; }
            void main() { [b, a] = sw(a, b); }";
        assert!(expand(&parse(bad).unwrap()).is_err());
    }
}
