//! Arithmetic over GF(2^m) built on log/antilog tables.
//!
//! A field symbol is a `u8` in `[0, q)` whose bits, LSB first, are the
//! coefficients of a polynomial over GF(2). Addition is bitwise XOR;
//! multiplication reduces the polynomial product by a fixed primitive
//! polynomial and is served from exp/log tables built once per field.

use crate::{Error, Result};

/// Primitive polynomial for GF(2^m), indexed by `m - 1`. Bit k is the
/// coefficient of x^k; the generator alpha = x (value 2) is primitive for
/// each of these.
const PRIM_POLYS: [u16; 8] = [
    0b11,          // x + 1
    0b111,         // x^2 + x + 1
    0b1011,        // x^3 + x + 1
    0b10011,       // x^4 + x + 1
    0b100101,      // x^5 + x^2 + 1
    0b1000011,     // x^6 + x + 1
    0b10001001,    // x^7 + x^3 + 1
    0b100011101,   // x^8 + x^4 + x^3 + x^2 + 1
];

/// Exp/log multiplication tables for one field GF(q), q = 2^m.
///
/// Immutable after construction and freely shareable across threads.
#[derive(Debug, Clone)]
pub struct GfTables {
    q: usize,
    m: u32,
    prim_poly: u16,
    /// exp[k] = alpha^k, length q - 1.
    exp: Vec<u8>,
    /// log[x] for x != 0; log[0] is never read.
    log: Vec<u8>,
}

impl GfTables {
    /// Builds the tables for GF(q). `q` must be a power of two in 2..=256.
    pub fn new(q: usize) -> Result<Self> {
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(Error::UnsupportedField(q));
        }
        let m = q.trailing_zeros();
        let prim_poly = PRIM_POLYS[(m - 1) as usize];
        let mut exp = vec![0u8; q - 1];
        let mut log = vec![0u8; q];
        let mut x: u16 = 1;
        for (k, e) in exp.iter_mut().enumerate() {
            *e = x as u8;
            log[x as usize] = k as u8;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= prim_poly;
            }
        }
        // The generator must cycle through every nonzero element.
        let mut seen = vec![false; q];
        for &e in &exp {
            assert!(
                e != 0 && !seen[e as usize],
                "primitive polynomial table is wrong for q={q}"
            );
            seen[e as usize] = true;
        }
        Ok(GfTables {
            q,
            m,
            prim_poly,
            exp,
            log,
        })
    }

    /// Field size q.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Extension degree m = log2(q); also the number of bits per symbol.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Reduction polynomial bits.
    pub fn prim_poly(&self) -> u16 {
        self.prim_poly
    }

    /// Field addition (characteristic 2): bitwise XOR. Its own inverse.
    #[inline]
    pub fn add(&self, x: u8, y: u8) -> u8 {
        debug_assert!((x as usize) < self.q && (y as usize) < self.q);
        x ^ y
    }

    /// Field multiplication via the log/antilog tables.
    #[inline]
    pub fn mul(&self, x: u8, y: u8) -> u8 {
        debug_assert!((x as usize) < self.q && (y as usize) < self.q);
        if x == 0 || y == 0 {
            return 0;
        }
        let s = self.log[x as usize] as usize + self.log[y as usize] as usize;
        self.exp[s % (self.q - 1)]
    }

    /// Multiplicative inverse; errors on zero.
    #[inline]
    pub fn inv(&self, x: u8) -> Result<u8> {
        debug_assert!((x as usize) < self.q);
        if x == 0 {
            return Err(Error::ZeroInverse);
        }
        let l = self.log[x as usize] as usize;
        Ok(self.exp[(self.q - 1 - l) % (self.q - 1)])
    }
}

/// Expands a symbol into its m coefficient bits, LSB first.
pub fn symbol_to_bits(x: u8, m: u32) -> Vec<u8> {
    debug_assert!((x as u32) < (1 << m));
    (0..m).map(|k| (x >> k) & 1).collect()
}

/// Rebuilds a symbol from LSB-first bits; inverse of [`symbol_to_bits`].
pub fn bits_to_symbol(bits: &[u8]) -> u8 {
    debug_assert!(bits.len() <= 8);
    bits.iter()
        .enumerate()
        .fold(0u8, |acc, (k, &b)| acc | ((b & 1) << k))
}

/// Concatenates the LSB-first bit expansions of a symbol vector.
pub fn symbols_to_bits(syms: &[u8], m: u32) -> Vec<u8> {
    let mut bits = Vec::with_capacity(syms.len() * m as usize);
    for &s in syms {
        for k in 0..m {
            bits.push((s >> k) & 1);
        }
    }
    bits
}

/// Packs a bit vector back into symbols of m bits each.
pub fn bits_to_symbols(bits: &[u8], m: u32) -> Vec<u8> {
    debug_assert_eq!(bits.len() % m as usize, 0);
    bits.chunks(m as usize).map(bits_to_symbol).collect()
}
