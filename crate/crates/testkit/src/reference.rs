//! Classical reference implementations used as test oracles.

/// ChaCha quarter round on words a, b, c, d.
pub fn quarter_round(mut a: u32, mut b: u32, mut c: u32, mut d: u32) -> [u32; 4] {
    a = a.wrapping_add(b);
    d = (d ^ a).rotate_left(16);
    c = c.wrapping_add(d);
    b = (b ^ c).rotate_left(12);
    a = a.wrapping_add(b);
    d = (d ^ a).rotate_left(8);
    c = c.wrapping_add(d);
    b = (b ^ c).rotate_left(7);
    [a, b, c, d]
}

fn qr_at(s: &mut [u32; 16], i: usize, j: usize, k: usize, l: usize) {
    let [a, b, c, d] = quarter_round(s[i], s[j], s[k], s[l]);
    s[i] = a;
    s[j] = b;
    s[k] = c;
    s[l] = d;
}

/// Column rounds then diagonal rounds.
pub fn double_round(s: &mut [u32; 16]) {
    qr_at(s, 0, 4, 8, 12);
    qr_at(s, 1, 5, 9, 13);
    qr_at(s, 2, 6, 10, 14);
    qr_at(s, 3, 7, 11, 15);
    qr_at(s, 0, 5, 10, 15);
    qr_at(s, 1, 6, 11, 12);
    qr_at(s, 2, 7, 8, 13);
    qr_at(s, 3, 4, 9, 14);
}

/// The ChaCha20 block function: input plus twenty rounds of it.
pub fn chacha20_block(input: &[u32; 16]) -> [u32; 16] {
    let mut s = *input;
    for _ in 0..10 {
        double_round(&mut s);
    }
    let mut out = [0u32; 16];
    for k in 0..16 {
        out[k] = s[k].wrapping_add(input[k]);
    }
    out
}

/// sz-bit fixed-point words with an explicit modulus, written out
/// separately from the front end's arithmetic.
#[derive(Clone, Copy, Debug)]
pub struct Fixed {
    pub sz: u32,
}

impl Fixed {
    fn m(&self) -> u128 {
        (1u128 << self.sz) - 1
    }

    /// floor(a·b / 2^(sz−1)) on unsigned words.
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((((a as u128) * (b as u128)) >> (self.sz - 1)) & self.m()) as u64
    }

    pub fn scale(&self, a: u64, k: u128) -> u64 {
        (((a as u128) * (k & self.m())) & self.m()) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) & self.m()) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        ((a as u128).wrapping_sub(b as u128) & self.m()) as u64
    }

    pub fn to_f64(&self, v: u64) -> f64 {
        let s = if v >> (self.sz - 1) & 1 == 1 { v as i128 - (1i128 << self.sz) } else { v as i128 };
        s as f64 / (1u128 << (self.sz - 1)) as f64
    }

    pub fn from_f64(&self, x: f64) -> u64 {
        let v = (x * (1u128 << (self.sz - 1)) as f64).floor() as i128;
        (v as u128 & self.m()) as u64
    }
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

/// 8·(x/8 − 8²/3!·(x/8)³ + …) with `terms` correction terms, evaluated step
/// by step in sz-bit fixed point: powers by repeated truncating products,
/// then ×8^(2k), then ÷(2k+1)!, accumulated with wrap-around.
pub fn sine_fixed(x8: u64, terms: u32, sz: u32) -> u64 {
    let f = Fixed { sz };
    let mut acc = x8;
    for k in 1..=terms as u128 {
        let mut p = x8;
        for _ in 0..2 * k {
            p = f.mul(p, x8);
        }
        let scaled = f.scale(p, 8u128.pow(2 * k as u32));
        let term = scaled / ((factorial(2 * k + 1) & f.m()) as u64);
        acc = if k % 2 == 0 { f.add(acc, term) } else { f.sub(acc, term) };
    }
    f.scale(acc, 8)
}

/// Number of arithmetic steps in [`sine_fixed`].
pub fn sine_steps(terms: u32) -> u32 {
    (1..=terms).map(|k| 2 * k + 3).sum::<u32>() + 1
}

/// The same truncated series in floating point.
pub fn sine_series(x: f64, terms: u32) -> f64 {
    (0..=terms as i32).map(|k| (-1f64).powi(k) * x.powi(2 * k + 1) / factorial(2 * k as u128 + 1) as f64).sum()
}
