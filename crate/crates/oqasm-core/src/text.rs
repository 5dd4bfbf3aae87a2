//! Textual format.
//!
//! ```text
//! var a[4];
//! var b[4];
//! Rev a;
//! QFT 4 b;
//! CU a[3] (SR 2 b);
//! CU a[2] (
//!   SR 1 b;
//!   X a[0]
//! );
//! QFTInv 4 b
//! ```
//!
//! Declarations are optional and must precede instructions. `//` and `#`
//! start line comments. A trailing `;` is accepted.

use std::fmt::Write;

use crate::syntax::{Instr, Position, SizeEnv};
use crate::var::Var;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

pub fn print_instr(prog: &Instr) -> String {
    let mut out = String::new();
    print_block(prog, 0, &mut out);
    out
}

/// Declarations followed by the body (if any).
pub fn print_program(sizes: &SizeEnv, prog: Option<&Instr>) -> String {
    let mut out = String::new();
    for (v, s) in sizes {
        writeln!(out, "var {v}[{s}];").unwrap();
    }
    if let Some(p) = prog {
        out.push_str(&print_instr(p));
        out.push('\n');
    }
    out
}

fn print_block(prog: &Instr, indent: usize, out: &mut String) {
    let leaves: Vec<&Instr> = prog.leaves().collect();
    for (k, l) in leaves.iter().enumerate() {
        if k > 0 {
            out.push_str(";\n");
        }
        for _ in 0..indent {
            out.push_str("  ");
        }
        print_leaf(l, indent, out);
    }
}

fn print_leaf(l: &Instr, indent: usize, out: &mut String) {
    match l {
        Instr::Skip(p) => write!(out, "ID {p}").unwrap(),
        Instr::X(p) => write!(out, "X {p}").unwrap(),
        Instr::SR(m, x) => write!(out, "SR {m} {x}").unwrap(),
        Instr::SRInv(m, x) => write!(out, "SRInv {m} {x}").unwrap(),
        Instr::QFT(n, x) => write!(out, "QFT {n} {x}").unwrap(),
        Instr::QFTInv(n, x) => write!(out, "QFTInv {n} {x}").unwrap(),
        Instr::Lshift(x) => write!(out, "Lshift {x}").unwrap(),
        Instr::Rshift(x) => write!(out, "Rshift {x}").unwrap(),
        Instr::Rev(x) => write!(out, "Rev {x}").unwrap(),
        Instr::CU(p, b) => {
            if b.leaf_count() == 1 {
                write!(out, "CU {p} (").unwrap();
                let mut inner = String::new();
                print_block(b, 0, &mut inner);
                out.push_str(&inner);
                out.push(')');
            } else {
                writeln!(out, "CU {p} (").unwrap();
                print_block(b, indent + 1, out);
                out.push('\n');
                for _ in 0..indent {
                    out.push_str("  ");
                }
                out.push(')');
            }
        }
        Instr::Seq(..) => unreachable!(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let body = match (line.find("//"), line.find('#')) {
            (Some(a), Some(b)) => &line[..a.min(b)],
            (Some(a), None) | (None, Some(a)) => &line[..a],
            (None, None) => line,
        };
        let chars: Vec<char> = body.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let st = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[st..i].iter().collect();
                let n = s.parse().map_err(|_| ParseError {
                    line: line_no,
                    msg: format!("number too large: {s}"),
                })?;
                toks.push((Tok::Num(n), line_no));
            } else if c.is_alphabetic() || c == '_' {
                let st = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[st..i].iter().collect()), line_no));
            } else if "[]();".contains(c) {
                toks.push((Tok::Sym(c), line_no));
                i += 1;
            } else {
                return Err(ParseError {
                    line: line_no,
                    msg: format!("unexpected character {c:?}"),
                });
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|t| t.1)
            .unwrap_or(1)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.line(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.0.clone());
        self.at += 1;
        t
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Sym(d)) if d == c => Ok(()),
            other => {
                self.at -= 1;
                self.fail(format!("expected '{c}', found {other:?}"))
            }
        }
    }

    fn num(&mut self) -> Result<usize, ParseError> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(n),
            other => {
                self.at -= 1;
                self.fail(format!("expected number, found {other:?}"))
            }
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => {
                self.at -= 1;
                self.fail(format!("expected identifier, found {other:?}"))
            }
        }
    }

    fn pos(&mut self) -> Result<Position, ParseError> {
        let v = self.ident()?;
        self.sym('[')?;
        let n = self.num()?;
        self.sym(']')?;
        Ok(Position::new(Var::new(&v), n))
    }

    fn block(&mut self, closer: Option<char>) -> Result<Vec<Instr>, ParseError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None if closer.is_none() => break,
                Some(Tok::Sym(c)) if Some(*c) == closer => break,
                None => return self.fail("unexpected end of input"),
                _ => {}
            }
            items.push(self.atom()?);
            match self.peek() {
                Some(Tok::Sym(';')) => {
                    self.at += 1;
                }
                _ => match self.peek() {
                    None if closer.is_none() => break,
                    Some(Tok::Sym(c)) if Some(*c) == closer => break,
                    _ => return self.fail("expected ';'"),
                },
            }
        }
        Ok(items)
    }

    fn atom(&mut self) -> Result<Instr, ParseError> {
        let op = self.ident()?;
        let i = match op.as_str() {
            "ID" | "Skip" | "SKIP" => Instr::Skip(self.pos()?),
            "X" => Instr::X(self.pos()?),
            "SR" | "SRInv" | "QFT" | "QFTInv" => {
                let n = self.num()?;
                let x = Var::new(&self.ident()?);
                match op.as_str() {
                    "SR" => Instr::SR(n, x),
                    "SRInv" => Instr::SRInv(n, x),
                    "QFT" => Instr::QFT(n, x),
                    _ => Instr::QFTInv(n, x),
                }
            }
            "Lshift" => Instr::Lshift(Var::new(&self.ident()?)),
            "Rshift" => Instr::Rshift(Var::new(&self.ident()?)),
            "Rev" => Instr::Rev(Var::new(&self.ident()?)),
            "CU" => {
                let p = self.pos()?;
                self.sym('(')?;
                let body = self.block(Some(')'))?;
                self.sym(')')?;
                match Instr::seq(body) {
                    Some(b) => Instr::cu(p, b),
                    None => return self.fail("empty CU body"),
                }
            }
            other => {
                self.at -= 1;
                return self.fail(format!("unknown instruction {other}"));
            }
        };
        Ok(i)
    }
}

/// Parse a single instruction sequence (no declarations).
pub fn parse_instr(text: &str) -> Result<Instr, ParseError> {
    let (_, p) = parse_program(text)?;
    p.ok_or(ParseError {
        line: 1,
        msg: "empty program".into(),
    })
}

/// Parse optional `var x[n];` declarations followed by instructions.
pub fn parse_program(text: &str) -> Result<(SizeEnv, Option<Instr>), ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let mut sizes = SizeEnv::new();
    while let Some(Tok::Ident(s)) = p.peek() {
        if s != "var" {
            break;
        }
        p.at += 1;
        let name = p.ident()?;
        p.sym('[')?;
        let n = p.num()?;
        p.sym(']')?;
        p.sym(';')?;
        if n == 0 {
            return p.fail(format!("variable {name} has size 0"));
        }
        if sizes.insert(Var::new(&name), n).is_some() {
            return p.fail(format!("duplicate declaration of {name}"));
        }
    }
    let items = p.block(None)?;
    Ok((sizes, Instr::seq(items)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_nested() {
        let src = "Rev a;\nQFT 4 b;\nCU a[3] (SR 2 b);\nCU a[2] (\n  SR 1 b;\n  CU c[0] (X d[1])\n);\nQFTInv 4 b";
        let p = parse_instr(src).unwrap();
        assert_eq!(print_instr(&p), src);
        assert_eq!(parse_instr(&print_instr(&p)).unwrap(), p);
    }

    #[test]
    fn declarations_and_comments() {
        let src = "// adder\nvar a[2];\nvar b[2];\nX a[0]; # flip\nID b[1];\n";
        let (s, p) = parse_program(src).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[&Var::new("b")], 2);
        assert_eq!(p.unwrap().leaf_count(), 2);
        let printed = print_program(&s, parse_program(src).unwrap().1.as_ref());
        assert!(printed.starts_with("var a[2];\nvar b[2];\n"));
    }

    #[test]
    fn errors_have_lines() {
        let e = parse_instr("X a[0];\nFOO b").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_instr("CU a[0] ()").is_err());
        assert!(parse_instr("X a[0] X a[1]").is_err());
    }
}
