//! Arithmetic in the prime field F_p.

use crate::{Error, Result};

/// Largest prime the engine accepts.
pub const MAX_PRIME: u32 = 97;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Checks that `p` is an admissible prime for the engine.
pub fn check_prime(p: u32) -> Result<()> {
    if !is_prime(p) || p <= 3 {
        return Err(Error::InvalidPrime(p));
    }
    if p > MAX_PRIME {
        return Err(Error::PrimeTooLarge(p, MAX_PRIME));
    }
    Ok(())
}

/// Division and remainder by a fixed odd modulus via one multiplication,
/// exact for 32-bit dividends.
#[derive(Clone, Copy, Debug)]
pub struct FastMod {
    d: u64,
    m: u64,
}

impl FastMod {
    pub fn new(d: u32) -> Self {
        Self { d: d as u64, m: u64::MAX / d as u64 + 1 }
    }

    #[inline]
    pub fn reduce(self, a: u32) -> u32 {
        ((self.m.wrapping_mul(a as u64) as u128 * self.d as u128) >> 64) as u32
    }

    #[inline]
    pub fn quotient(self, a: u32) -> u32 {
        ((self.m as u128 * a as u128) >> 64) as u32
    }
}

fn mult_order(x: u32, p: u32) -> u32 {
    let mut acc = x % p;
    let mut k = 1;
    while acc != 1 {
        acc = acc * x % p;
        k += 1;
    }
    k
}

/// Smallest positive integer generating the multiplicative group of F_p.
pub fn find_primitive_root(p: u32) -> Result<u32> {
    check_prime(p)?;
    Ok((2..p).find(|&x| mult_order(x, p) == p - 1).expect("F_p^* is cyclic"))
}

/// Index of the image of `x -> x^a` in F_p^*, i.e. `gcd(a, p - 1)`.
pub fn power_residue_index(a: u64, p: u32) -> u64 {
    gcd(a, (p - 1) as u64)
}

/// The prime field together with a fixed primitive root and log tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
    w: u32,
    inv: Vec<u32>,
    log: Vec<i64>,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        let w = find_primitive_root(p)?;
        let mut log = vec![-1i64; p as usize];
        let mut acc = 1u32;
        for k in 0..(p - 1) {
            log[acc as usize] = k as i64;
            acc = acc * w % p;
        }
        let mut inv = vec![0u32; p as usize];
        for x in 1..p {
            inv[x as usize] = (1..p).find(|&y| x * y % p == 1).unwrap();
        }
        Ok(Self { p, w, inv, log })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// The chosen primitive root.
    #[inline]
    pub fn generator(&self) -> u32 {
        self.w
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.p - b) % self.p
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        (self.p - a) % self.p
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        a * b % self.p
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a % self.p != 0, "zero has no inverse in F_{}", self.p);
        self.inv[(a % self.p) as usize]
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        acc
    }

    /// Discrete logarithm to base `w`; `-1` for zero.
    pub fn exp_map(&self, x: u32) -> i64 {
        self.log[(x % self.p) as usize]
    }

    /// `w^k` for a possibly negative exponent.
    pub fn w_pow(&self, k: i64) -> u32 {
        self.pow(self.w, k.rem_euclid((self.p - 1) as i64) as u64)
    }

    /// Nonzero squares, `w^a` with `a` even.
    pub fn is_square(&self, x: u32) -> bool {
        let l = self.exp_map(x);
        l >= 0 && l % 2 == 0
    }
}
