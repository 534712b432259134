//! Multi-modular number-theoretic transforms over word-size primes
//! `c 2^k + 1 < 2^62`, with Garner reconstruction into `Z / p^e`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;

use crate::field::is_prime_u64;
use crate::mp::{biguint_to_limbs, MontCtx};

/// Largest supported transform length, `2^MAX_LOG`.
pub const MAX_LOG: u32 = 26;

/// A single NTT prime with Montgomery arithmetic (`R = 2^64`).
#[derive(Clone, Debug)]
pub struct NttPrime {
    pub q: u64,
    /// `-q^{-1} mod 2^64`.
    qneg_inv: u64,
    /// `R^2 mod q`.
    r2: u64,
    /// Powers `w^i R mod q` of a primitive `2^log_len`-th root, `i < len/2`.
    fwd: Vec<u64>,
    inv: Vec<u64>,
    log_len: u32,
}

fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    a %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * a as u128) % q as u128) as u64;
        }
        a = ((a as u128 * a as u128) % q as u128) as u64;
        e >>= 1;
    }
    acc
}

impl NttPrime {
    fn new(q: u64, log_len: u32) -> Self {
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(q.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % q as u128) as u64;
        let r2 = ((r as u128 * r as u128) % q as u128) as u64;
        let mut odd = q - 1;
        while odd % 2 == 0 {
            odd /= 2;
        }
        let mut factors = Vec::new();
        let mut m = odd;
        let mut d = 3;
        while d * d <= m {
            if m % d == 0 {
                factors.push(d);
                while m % d == 0 {
                    m /= d;
                }
            }
            d += 2;
        }
        if m > 1 {
            factors.push(m);
        }
        factors.push(2);
        let g = (2..)
            .find(|&g| factors.iter().all(|&f| pow_mod(g, (q - 1) / f, q) != 1))
            .unwrap();
        let w = pow_mod(g, (q - 1) >> log_len, q);
        let winv = pow_mod(w, q - 2, q);
        let half = 1usize << (log_len - 1);
        let mut fwd = Vec::with_capacity(half);
        let mut bwd = Vec::with_capacity(half);
        let (mut a, mut b) = (1u64, 1u64);
        for _ in 0..half {
            fwd.push(((a as u128 * r as u128) % q as u128) as u64);
            bwd.push(((b as u128 * r as u128) % q as u128) as u64);
            a = ((a as u128 * w as u128) % q as u128) as u64;
            b = ((b as u128 * winv as u128) % q as u128) as u64;
        }
        NttPrime { q, qneg_inv: inv.wrapping_neg(), r2, fwd, inv: bwd, log_len }
    }

    /// `a b R^{-1} mod q`.
    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        let m = (t as u64).wrapping_mul(self.qneg_inv);
        let u = ((t + m as u128 * self.q as u128) >> 64) as u64;
        if u >= self.q {
            u - self.q
        } else {
            u
        }
    }

    #[inline(always)]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    /// `x R mod q`.
    pub fn to_mont(&self, x: u64) -> u64 {
        self.mul(x % self.q, self.r2)
    }

    /// Residue of a limb vector modulo `q`.
    pub fn reduce_limbs(&self, x: &[u64]) -> u64 {
        let mut acc = 0u64;
        for &w in x.iter().rev() {
            // mul(acc, R^2) = acc 2^64 mod q
            acc = self.add(self.mul(acc, self.r2), w % self.q);
        }
        acc
    }

    fn transform(&self, a: &mut [u64], table: &[u64]) {
        let n = a.len();
        debug_assert!(n.is_power_of_two() && n.trailing_zeros() <= self.log_len);
        let bits = n.trailing_zeros();
        if bits == 0 {
            return;
        }
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                a.swap(i, j);
            }
        }
        let full = 1usize << self.log_len;
        let mut h = 1;
        while h < n {
            let step = full / (2 * h);
            for start in (0..n).step_by(2 * h) {
                for j in 0..h {
                    let w = table[j * step];
                    let u = a[start + j];
                    let v = self.mul(a[start + j + h], w);
                    a[start + j] = self.add(u, v);
                    a[start + j + h] = self.sub(u, v);
                }
            }
            h *= 2;
        }
    }

    pub fn forward(&self, a: &mut [u64]) {
        self.transform(a, &self.fwd);
    }

    /// Inverse transform; also divides by `len` and by the `R` lost in one
    /// pointwise Montgomery product.
    pub fn inverse_scaled(&self, a: &mut [u64]) {
        self.transform(a, &self.inv);
        let n = a.len() as u64;
        let ninv = pow_mod(n, self.q - 2, self.q);
        // entries are n ab / R; scale by R / n
        let c = self.mul(self.to_mont(ninv), self.r2);
        for x in a.iter_mut() {
            *x = self.mul(*x, c);
        }
    }

    /// Pointwise `a <- a b R^{-1}`.
    pub fn pointwise(&self, a: &mut [u64], b: &[u64]) {
        for (x, y) in a.iter_mut().zip(b) {
            *x = self.mul(*x, *y);
        }
    }
}

/// A set of NTT primes with Garner constants.
#[derive(Clone, Debug)]
pub struct NttEngine {
    primes: Vec<NttPrime>,
    /// `garner[i][j] = q_j^{-1} R mod q_i` for `j < i`.
    garner: Vec<Vec<u64>>,
    log_len: u32,
}

impl NttEngine {
    /// Enough primes to represent values below `2^bits`, transforms up to
    /// length `2^log_len`.
    pub fn new(bits: u64, log_len: u32) -> Self {
        let log_len = log_len.clamp(1, MAX_LOG);
        let count = (bits / 61 + 1) as usize;
        let mut primes = Vec::with_capacity(count);
        let mut c: u64 = ((1u64 << 62) - 1) >> MAX_LOG;
        while primes.len() < count {
            let q = (c << MAX_LOG) + 1;
            if is_prime_u64(q) {
                primes.push(NttPrime::new(q, log_len));
            }
            c -= 1;
        }
        let garner = (0..count)
            .map(|i| {
                (0..i)
                    .map(|j| {
                        let pi = &primes[i];
                        let inv = pow_mod(primes[j].q % pi.q, pi.q - 2, pi.q);
                        pi.to_mont(inv)
                    })
                    .collect()
            })
            .collect();
        NttEngine { primes, garner, log_len }
    }

    pub fn primes(&self) -> &[NttPrime] {
        &self.primes
    }

    pub fn max_log_len(&self) -> u32 {
        self.log_len
    }

    /// Number of primes needed for nonnegative values below `2^bits`.
    pub fn primes_for_bits(&self, bits: u64) -> usize {
        let k = (bits / 61 + 1) as usize;
        assert!(k <= self.primes.len(), "NTT engine built for too few bits");
        k
    }

    /// Garner mixed-radix digits of the value with the given residues.
    pub fn garner_digits(&self, residues: &[u64], out: &mut [u64]) {
        let k = residues.len();
        for i in 0..k {
            let pi = &self.primes[i];
            let mut t = residues[i];
            for j in 0..i {
                t = pi.mul(pi.sub(t, out[j] % pi.q), self.garner[i][j]);
            }
            out[i] = t;
        }
    }
}

/// Constants for mapping Garner digits into `Z / m`.
#[derive(Clone, Debug)]
pub struct CrtToMod {
    /// `(q_0 ... q_{i-1}) R mod m`, limb form.
    radix: Vec<Vec<u64>>,
    l: usize,
}

impl CrtToMod {
    pub fn new(engine: &NttEngine, k: usize, ctx: &MontCtx) -> Self {
        let m = ctx.modulus();
        let l = ctx.limbs();
        // The accumulator stays below k 2^62 m < R m.
        assert!(l >= 2 || k < 4, "CRT accumulator would overflow");
        let r = BigUint::one() << (64 * l);
        let mut prod = BigUint::one();
        let mut radix = Vec::with_capacity(k);
        for i in 0..k {
            radix.push(biguint_to_limbs(&((&prod * &r) % m), l));
            prod *= engine.primes[i].q;
        }
        CrtToMod { radix, l }
    }

    /// Maps digits to the residue modulo `m`. `scratch` has length `2l + 1`.
    pub fn apply(&self, ctx: &MontCtx, digits: &[u64], scratch: &mut [u64], out: &mut [u64]) {
        let l = self.l;
        scratch.iter_mut().for_each(|w| *w = 0);
        for (d, rad) in digits.iter().zip(&self.radix) {
            if *d == 0 {
                continue;
            }
            let d = *d as u128;
            let mut c: u128 = 0;
            for j in 0..l {
                let s = scratch[j] as u128 + d * rad[j] as u128 + c;
                scratch[j] = s as u64;
                c = s >> 64;
            }
            let mut k = l;
            while c != 0 {
                let s = scratch[k] as u128 + c;
                scratch[k] = s as u64;
                c = s >> 64;
                k += 1;
            }
        }
        ctx.redc(scratch, out);
    }
}

/// Cyclic convolution of length `len` of the rows `a` and `b` modulo one
/// prime; the result is left in `fa`.
pub fn convolve_prime(p: &NttPrime, fa: &mut [u64], fb: &mut [u64]) {
    p.forward(fa);
    p.forward(fb);
    p.pointwise(fa, fb);
    p.inverse_scaled(fa);
}

/// Plain product of two integer sequences (values below each prime)
/// modulo each engine prime, for testing.
pub fn convolve_all(engine: &NttEngine, k: usize, a: &[u64], b: &[u64]) -> Vec<Vec<u64>> {
    let len = (a.len() + b.len()).next_power_of_two();
    engine.primes[..k]
        .iter()
        .map(|p| {
            let mut fa = vec![0u64; len];
            let mut fb = vec![0u64; len];
            for (x, y) in fa.iter_mut().zip(a) {
                *x = y % p.q;
            }
            for (x, y) in fb.iter_mut().zip(b) {
                *x = y % p.q;
            }
            convolve_prime(p, &mut fa, &mut fb);
            fa
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_convolution() {
        let e = NttEngine::new(120, 10);
        let r = convolve_all(&e, 1, &[1, 2, 3], &[4, 5]);
        assert_eq!(&r[0][..5], &[4, 13, 22, 15, 0]);
    }

    #[test]
    fn garner_roundtrip() {
        let e = NttEngine::new(200, 4);
        let x = BigUint::from(3u32).pow(110);
        let k = e.primes_for_bits(x.bits());
        let res: Vec<u64> = e.primes()[..k].iter().map(|p| (&x % p.q).iter_u64_digits().next().unwrap_or(0)).collect();
        let mut digits = vec![0u64; k];
        e.garner_digits(&res, &mut digits);
        let m = BigUint::from(5u32).pow(50);
        let ctx = MontCtx::new(&m);
        let crt = CrtToMod::new(&e, k, &ctx);
        let mut scratch = vec![0u64; 2 * ctx.limbs() + 1];
        let mut out = ctx.zero();
        crt.apply(&ctx, &digits, &mut scratch, &mut out);
        assert_eq!(ctx.to_big(&out), &x % &m);
    }
}
