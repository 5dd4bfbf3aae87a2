//! Random well-typed oracle-assembly programs.
//!
//! Programs start from an all-Nor environment. Control bodies are generated
//! as balanced blocks (every QFT closed, every shift undone) that avoid the
//! control's variable, which makes them type-preserving and shift-neutral.

use oqasm_core::{Basis, Instr, Position, SizeEnv, Var};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_vars: usize,
    pub max_size: usize,
    pub max_qubits: usize,
    /// Top-level instructions.
    pub max_len: usize,
    /// Nesting of control blocks.
    pub max_depth: usize,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig { max_vars: 3, max_size: 4, max_qubits: 10, max_len: 8, max_depth: 2 }
    }
}

const NAMES: [&str; 4] = ["g0", "g1", "g2", "g3"];

struct G<'r, R: Rng> {
    rng: &'r mut R,
    vars: Vec<(Var, usize)>,
    env: Vec<Basis>,
}

impl<R: Rng> G<'_, R> {
    fn pick(&mut self, ok: impl Fn(usize, Basis) -> bool) -> Option<usize> {
        let c: Vec<usize> = (0..self.vars.len()).filter(|&i| ok(i, self.env[i])).collect();
        c.choose(self.rng).copied()
    }

    fn pos(&mut self, i: usize) -> Position {
        let (v, s) = self.vars[i];
        Position::new(v, self.rng.gen_range(0..s))
    }

    /// Type- and shift-preserving block that never touches `avoid`.
    fn block(&mut self, avoid: usize, depth: usize, len: usize) -> Vec<Instr> {
        let mut out = Vec::new();
        for _ in 0..len {
            match self.rng.gen_range(0..6) {
                0 => {
                    if let Some(i) = self.pick(|i, b| i != avoid && b == Basis::Nor) {
                        out.push(Instr::X(self.pos(i)));
                    }
                }
                1 => {
                    if let Some(i) = self.pick(|i, b| i != avoid && matches!(b, Basis::Phi(_))) {
                        let Basis::Phi(n) = self.env[i] else { unreachable!() };
                        let m = self.rng.gen_range(0..n);
                        let v = self.vars[i].0;
                        out.push(if self.rng.gen() { Instr::SR(m, v) } else { Instr::SRInv(m, v) });
                    }
                }
                2 => {
                    if let Some(i) = self.pick(|i, b| i != avoid && b == Basis::Nor) {
                        let (v, s) = self.vars[i];
                        let n = self.rng.gen_range(1..=s);
                        self.env[i] = Basis::Phi(n);
                        out.push(Instr::QFT(n, v));
                        let inner_len = self.rng.gen_range(1..=3);
                        out.extend(self.block(avoid, depth, inner_len));
                        out.push(Instr::QFTInv(n, v));
                        self.env[i] = Basis::Nor;
                    }
                }
                3 => {
                    if let Some(i) = self.pick(|i, b| i != avoid && b == Basis::Nor) {
                        let v = self.vars[i].0;
                        let (open, close) = match self.rng.gen_range(0..3) {
                            0 => (Instr::Lshift(v), Instr::Rshift(v)),
                            1 => (Instr::Rshift(v), Instr::Lshift(v)),
                            _ => (Instr::Rev(v), Instr::Rev(v)),
                        };
                        out.push(open);
                        let inner_len = self.rng.gen_range(1..=2);
                        out.extend(self.block(avoid, depth, inner_len));
                        out.push(close);
                    }
                }
                4 if depth > 0 => {
                    if let Some(i) = self.pick(|i, b| i != avoid && b == Basis::Nor) {
                        let p = self.pos(i);
                        let inner_len = self.rng.gen_range(1..=3);
                        let body = self.block_excluding(i, avoid, depth - 1, inner_len);
                        if let Some(b) = Instr::seq(body) {
                            out.push(Instr::cu(p, b));
                        }
                    }
                }
                _ => {
                    if let Some(i) = self.pick(|i, _| i != avoid) {
                        out.push(Instr::Skip(self.pos(i)));
                    }
                }
            }
        }
        out
    }

    /// A block avoiding both `a` and `b`: `b` is taken out of the pool meanwhile.
    fn block_excluding(&mut self, a: usize, b: usize, depth: usize, len: usize) -> Vec<Instr> {
        if b >= self.vars.len() || a == b {
            return self.block(a, depth, len);
        }
        let hv = self.vars.remove(b);
        let he = self.env.remove(b);
        let a2 = if a > b { a - 1 } else { a };
        let out = self.block(a2, depth, len);
        self.vars.insert(b, hv);
        self.env.insert(b, he);
        out
    }
}

/// A random well-typed program (from all-Nor) and its declarations.
pub fn gen_program(rng: &mut impl Rng, cfg: &GenConfig) -> (SizeEnv, Instr) {
    let nvars = rng.gen_range(1..=cfg.max_vars.min(NAMES.len()));
    let mut sizes = SizeEnv::new();
    let mut budget = cfg.max_qubits;
    for name in NAMES.iter().take(nvars) {
        if budget == 0 {
            break;
        }
        let s = rng.gen_range(1..=cfg.max_size.min(budget));
        budget -= s;
        sizes.insert(Var::new(name), s);
    }
    let vars: Vec<(Var, usize)> = sizes.iter().map(|(v, s)| (*v, *s)).collect();
    let env = vec![Basis::Nor; vars.len()];
    let mut g = G { rng, vars, env };
    let len = g.rng.gen_range(1..=cfg.max_len);
    let none = usize::MAX;
    let mut out = Vec::new();
    for _ in 0..len {
        match g.rng.gen_range(0..5) {
            // unbalanced basis changes at the top level
            0 => {
                if let Some(i) = g.pick(|_, b| b == Basis::Nor) {
                    let (v, s) = g.vars[i];
                    let n = g.rng.gen_range(1..=s);
                    g.env[i] = Basis::Phi(n);
                    out.push(Instr::QFT(n, v));
                }
            }
            1 => {
                if let Some(i) = g.pick(|_, b| matches!(b, Basis::Phi(_))) {
                    let Basis::Phi(n) = g.env[i] else { unreachable!() };
                    g.env[i] = Basis::Nor;
                    out.push(Instr::QFTInv(n, g.vars[i].0));
                }
            }
            2 => {
                if let Some(i) = g.pick(|_, b| b == Basis::Nor) {
                    let v = g.vars[i].0;
                    out.push(match g.rng.gen_range(0..3) {
                        0 => Instr::Lshift(v),
                        1 => Instr::Rshift(v),
                        _ => Instr::Rev(v),
                    });
                }
            }
            3 => {
                if let Some(i) = g.pick(|_, b| b == Basis::Nor) {
                    let p = g.pos(i);
                    let l = g.rng.gen_range(1..=3);
                    let body = g.block(i, cfg.max_depth.saturating_sub(1), l);
                    if let Some(b) = Instr::seq(body) {
                        out.push(Instr::cu(p, b));
                    }
                }
            }
            _ => {
                let l = g.rng.gen_range(1..=2);
                out.extend(g.block(none, cfg.max_depth, l));
            }
        }
    }
    if out.is_empty() {
        out.push(Instr::Skip(Position::new(g.vars[0].0, 0)));
    }
    (sizes, Instr::seq(out).expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use oqasm_core::{neutral, nor_env, typecheck};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_typecheck() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let (s, p) = gen_program(&mut rng, &GenConfig::default());
            assert!(s.values().sum::<usize>() <= 10);
            typecheck(&s, &nor_env(&s), &p).unwrap_or_else(|e| panic!("{e}: {}", oqasm_core::print_instr(&p)));
            let _ = neutral(&s, &p);
        }
    }
}
