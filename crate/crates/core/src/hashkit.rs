//! Seeded k-wise independent hashing over a prime field.
//!
//! A [`KWiseHash`] of degree `k` is the random polynomial
//! `c_0 + c_1 x + ... + c_{k-1} x^{k-1}` over GF(p), reduced into `[0, range)`.
//! Distinct inputs map to uniform, k-wise independent field values; the
//! final `mod range` adds a bias of at most `1/p` per output value.

use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// The Mersenne prime 2^61 - 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWiseHash {
    coefficients: Vec<u64>,
    prime: u64,
    range: u64,
    domain: u64,
    seed: u64,
}

impl KWiseHash {
    /// Hash of independence degree `degree_k` on `[0, domain_size)` into
    /// `[0, range_m)`, with coefficients derived from `seed`.
    ///
    /// The field is GF(2^61 - 1) whenever the domain fits, otherwise the
    /// smallest prime not below `domain_size`.
    pub fn new(degree_k: usize, domain_size: u64, range_m: u64, seed: u64) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::param("hash domain size must be at least 1"));
        }
        let prime = if domain_size <= MERSENNE_61 {
            MERSENNE_61
        } else {
            next_prime(domain_size)
                .ok_or_else(|| Error::param("no 64-bit prime at or above the hash domain"))?
        };
        let mut h = Self::with_prime(degree_k, prime, range_m, seed)?;
        h.domain = domain_size;
        Ok(h)
    }

    /// Like [`KWiseHash::new`] but over an explicit prime field; the domain is
    /// all of `[0, prime)`.
    pub fn with_prime(degree_k: usize, prime: u64, range_m: u64, seed: u64) -> Result<Self> {
        if degree_k == 0 {
            return Err(Error::param("hash independence degree must be at least 1"));
        }
        if !is_prime(prime) {
            return Err(Error::param(format!("{prime} is not prime")));
        }
        let mut rng = CounterRng::new(seed);
        let coefficients = (0..degree_k).map(|_| rng.below(prime)).collect();
        Self::build(coefficients, prime, range_m, seed)
    }

    /// Hash with explicitly chosen coefficients (lowest degree first). Used to
    /// enumerate the full coefficient space of small fields.
    pub fn from_coefficients(coefficients: Vec<u64>, prime: u64, range_m: u64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::param("hash independence degree must be at least 1"));
        }
        if !is_prime(prime) {
            return Err(Error::param(format!("{prime} is not prime")));
        }
        if let Some(c) = coefficients.iter().find(|&&c| c >= prime) {
            return Err(Error::param(format!(
                "coefficient {c} not reduced mod {prime}"
            )));
        }
        Self::build(coefficients, prime, range_m, 0)
    }

    fn build(coefficients: Vec<u64>, prime: u64, range_m: u64, seed: u64) -> Result<Self> {
        if range_m == 0 {
            return Err(Error::param("hash range must be at least 1"));
        }
        Ok(KWiseHash {
            coefficients,
            prime,
            range: range_m,
            domain: prime,
            seed,
        })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// The polynomial value in GF(p), before range reduction.
    ///
    /// Panics if `x` is outside the domain.
    #[inline]
    pub fn eval_field(&self, x: u64) -> u64 {
        assert!(
            x < self.domain,
            "hash input {x} outside domain {}",
            self.domain
        );
        let p = self.prime;
        let mut iter = self.coefficients.iter().rev();
        let mut acc = *iter.next().unwrap();
        if p == MERSENNE_61 {
            for &c in iter {
                acc = add_mod_m61(mul_mod_m61(acc, x), c);
            }
        } else {
            for &c in iter {
                acc = ((acc as u128 * x as u128 + c as u128) % p as u128) as u64;
            }
        }
        acc
    }

    /// Hash value in `[0, range)`.
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.eval_field(x) % self.range
    }

    /// +1 when `eval(x)` is even, -1 otherwise.
    #[inline]
    pub fn eval_sign(&self, x: u64) -> f64 {
        if self.eval(x) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[inline]
fn mul_mod_m61(a: u64, b: u64) -> u64 {
    let z = a as u128 * b as u128;
    let r = (z as u64 & MERSENNE_61) + (z >> 61) as u64;
    let r = if r >= MERSENNE_61 { r - MERSENNE_61 } else { r };
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

#[inline]
fn add_mod_m61(a: u64, b: u64) -> u64 {
    let r = a + b;
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let m128 = m as u128;
    let mut b = base as u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `>= n`, if one fits in 64 bits.
pub fn next_prime(n: u64) -> Option<u64> {
    let mut c = n.max(2);
    loop {
        if is_prime(c) {
            return Some(c);
        }
        c = c.checked_add(1)?;
    }
}
