use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    C,
    Q,
}

impl Mode {
    pub fn join(self, o: Mode) -> Mode {
        self.max(o)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Nat,
    Fixedp,
    Bool,
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Nat => "nat",
            Base::Fixedp => "fixedp",
            Base::Bool => "bool",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ty {
    pub mode: Mode,
    pub base: Base,
    /// Array length.
    pub len: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub ty: Ty,
    pub line: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lit {
    Int(u128),
    /// `digits / 10^scale`, a fixedp literal in [0, 1).
    Dec { digits: u128, scale: u32 },
    Bool(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Lit(Lit),
    L(LValue),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LValue {
    pub var: String,
    pub index: Option<Box<Value>>,
}

impl LValue {
    pub fn var(name: &str) -> LValue {
        LValue { var: name.to_string(), index: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Xor,
    Lt,
    Eq,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Xor => "^",
            BinOp::Lt => "<",
            BinOp::Eq => "==",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpOp {
    Add,
    Sub,
    Xor,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rhs {
    Val(Value),
    Bin(BinOp, Value, Value),
    Pow(Value, Value),
    Fact(Value),
    Cast(Base, Value),
    Even(Value),
    Call(String, Vec<Value>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    Lt(Value, Value),
    Eq(Value, Value),
    Even(Value),
    Val(Value),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Inc(Value),
    Dec(Value),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign(LValue, Rhs),
    Update(LValue, UpOp, Value),
    /// `l <<<= k`
    Rotl(LValue, Value),
    Inv(LValue),
    For {
        var: String,
        init: Value,
        rel: Rel,
        bound: Value,
        step: Step,
        body: Vec<Stmt>,
    },
    If {
        guard: Guard,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
    },
    /// `[l1, …] = f(a1, …);` or `f(a1, …);` for in-place functions.
    InPlace {
        lhs: Vec<LValue>,
        f: String,
        args: Vec<Value>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RetVal {
    Single(Value),
    Tuple(Vec<Value>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunDef {
    pub name: String,
    /// None for `void`. Mode is optional in the source; a missing mode
    /// takes the mode of the returned value.
    pub ret: Option<(Option<Mode>, Base, Option<usize>)>,
    pub params: Vec<Decl>,
    pub locals: Vec<Decl>,
    pub body: Vec<Stmt>,
    pub ret_val: Option<RetVal>,
    pub line: usize,
}

impl FunDef {
    /// Takes Q parameters and hands them back as a tuple, so calls are
    /// expanded in place instead of copy-and-uncompute.
    pub fn is_in_place(&self) -> bool {
        self.params.iter().any(|p| p.ty.mode == Mode::Q)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub globals: Vec<Decl>,
    pub funcs: Vec<FunDef>,
}

impl Program {
    pub fn main(&self) -> Option<&FunDef> {
        self.funcs.last()
    }

    pub fn func(&self, name: &str) -> Option<&FunDef> {
        self.funcs.iter().find(|f| f.name == name)
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.index {
            None => f.write_str(&self.var),
            Some(i) => write!(f, "{}[{}]", self.var, i),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::L(l) => write!(f, "{l}"),
            Value::Lit(Lit::Int(n)) => write!(f, "{n}"),
            Value::Lit(Lit::Bool(b)) => write!(f, "{b}"),
            Value::Lit(Lit::Dec { digits, scale }) => write!(f, "0.{:0>width$}", digits, width = *scale as usize),
        }
    }
}
