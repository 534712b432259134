use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::field::{Field, Gf};

/// An element of `Z_q / p^e` as `n` coefficients in `T`, each in `[0, p^e)`.
/// The precision `e` is carried by the caller.
pub type ZqInt = Vec<BigUint>;

/// Context for `Z_q = Z_p[T]/(M)`, `M` the lift of the `F_q` modulus with
/// coefficients in `{0..p-1}`. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Zq {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    fq: Gf,
    p: u64,
    n: usize,
    /// Lifted modulus, monic, low degree first.
    m: Vec<u64>,
    cap: u32,
    /// `p^k` for `k <= cap`.
    pows: Vec<BigUint>,
    /// `sigma(T)^i` for `i < n`, modulo `p^cap`.
    sigma_t: Vec<ZqInt>,
}

impl Zq {
    /// Context over `fq` with relative precision cap `cap >= 1`.
    pub fn new(fq: &Gf, cap: u32) -> Self {
        let p = fq.characteristic();
        let n = fq.degree();
        let cap = cap.max(1);
        let mut pows = Vec::with_capacity(cap as usize + 1);
        let mut acc = BigUint::one();
        for _ in 0..=cap {
            pows.push(acc.clone());
            acc *= p;
        }
        let mut inner = Inner {
            fq: fq.clone(),
            p,
            n,
            m: fq.modulus().to_vec(),
            cap,
            pows,
            sigma_t: Vec::new(),
        };
        inner.sigma_t = (0..n)
            .map(|i| {
                let mut e = vec![BigUint::zero(); n];
                e[i] = BigUint::one();
                e
            })
            .collect();
        let mut zq = Zq { inner: Arc::new(inner) };
        if n > 1 {
            let st = zq.sigma_generator();
            let mut powers = Vec::with_capacity(n);
            let mut cur = zq.int_one();
            for _ in 0..n {
                powers.push(cur.clone());
                cur = zq.int_mul(&cur, &st, cap);
            }
            Arc::get_mut(&mut zq.inner).unwrap().sigma_t = powers;
        }
        zq
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }
    pub fn degree(&self) -> usize {
        self.inner.n
    }
    pub fn cap(&self) -> u32 {
        self.inner.cap
    }
    pub fn fq(&self) -> &Gf {
        &self.inner.fq
    }
    /// `q = p^n`.
    pub fn q(&self) -> u128 {
        self.inner.fq.order()
    }

    /// `p^k`; panics beyond the cap.
    pub fn pow_p(&self, k: u32) -> &BigUint {
        &self.inner.pows[k as usize]
    }

    pub fn int_zero(&self) -> ZqInt {
        vec![BigUint::zero(); self.inner.n]
    }

    pub fn int_one(&self) -> ZqInt {
        let mut e = self.int_zero();
        e[0] = BigUint::one();
        e
    }

    pub fn int_from_u64(&self, v: u64) -> ZqInt {
        let mut e = self.int_zero();
        e[0] = BigUint::from(v);
        e
    }

    pub fn int_is_zero(&self, a: &ZqInt) -> bool {
        a.iter().all(Zero::is_zero)
    }

    pub fn int_reduce(&self, a: &mut ZqInt, e: u32) {
        let pe = self.pow_p(e);
        for c in a.iter_mut() {
            if &*c >= pe {
                *c %= pe;
            }
        }
    }

    pub fn int_add(&self, a: &ZqInt, b: &ZqInt, e: u32) -> ZqInt {
        let pe = self.pow_p(e);
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let s = x + y;
                if &s >= pe {
                    s % pe
                } else {
                    s
                }
            })
            .collect()
    }

    pub fn int_sub(&self, a: &ZqInt, b: &ZqInt, e: u32) -> ZqInt {
        let pe = self.pow_p(e);
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let x = x % pe;
                let y = y % pe;
                if x >= y {
                    x - y
                } else {
                    x + pe - y
                }
            })
            .collect()
    }

    pub fn int_neg(&self, a: &ZqInt, e: u32) -> ZqInt {
        self.int_sub(&self.int_zero(), a, e)
    }

    pub fn int_mul_u64(&self, a: &ZqInt, s: u64, e: u32) -> ZqInt {
        let pe = self.pow_p(e);
        a.iter().map(|x| (x * s) % pe).collect()
    }

    pub fn int_mul(&self, a: &ZqInt, b: &ZqInt, e: u32) -> ZqInt {
        let n = self.inner.n;
        let pe = self.pow_p(e);
        if n == 1 {
            return vec![(&a[0] * &b[0]) % pe];
        }
        let mut prod = vec![BigUint::zero(); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        self.reduce_mod_m(prod, e)
    }

    /// Reduces a polynomial in `T` of degree `< 2n - 1` modulo `M` and `p^e`.
    pub fn reduce_mod_m(&self, mut prod: Vec<BigUint>, e: u32) -> ZqInt {
        let n = self.inner.n;
        let pe = self.pow_p(e);
        // T^n = -(m_0 + ... + m_{n-1} T^{n-1}); work with pe - m_j to stay unsigned.
        for i in (n..prod.len()).rev() {
            let c = core::mem::take(&mut prod[i]) % pe;
            if c.is_zero() {
                continue;
            }
            for j in 0..n {
                let mj = self.inner.m[j];
                if mj != 0 {
                    prod[i - n + j] += &c * (pe - mj);
                }
            }
        }
        prod.truncate(n);
        for c in prod.iter_mut() {
            *c %= pe;
        }
        prod
    }

    /// Exact `p`-adic valuation of an integral element, `None` for zero.
    pub fn int_valuation(&self, a: &ZqInt) -> Option<u32> {
        a.iter().filter(|c| !c.is_zero()).map(|c| self.big_valuation(c)).min()
    }

    pub(crate) fn big_valuation(&self, c: &BigUint) -> u32 {
        let p = self.inner.p;
        let mut v = 0;
        let mut t = c.clone();
        while !t.is_zero() && (&t % p).is_zero() {
            t /= p;
            v += 1;
        }
        v
    }

    pub fn int_div_p_pow(&self, a: &ZqInt, k: u32) -> ZqInt {
        let pk = self.pow_p(k);
        a.iter().map(|c| c / pk).collect()
    }

    pub fn int_mul_p_pow(&self, a: &ZqInt, k: u32) -> ZqInt {
        if k <= self.inner.cap {
            let pk = self.pow_p(k);
            a.iter().map(|c| c * pk).collect()
        } else {
            let pk = BigUint::from(self.inner.p).pow(k);
            a.iter().map(|c| c * &pk).collect()
        }
    }

    /// Reduction modulo `p`, as an element of `F_q`.
    pub fn int_to_fq(&self, a: &ZqInt) -> Vec<u64> {
        let p = self.inner.p;
        let digits: Vec<u64> = a
            .iter()
            .map(|c| (c % p).iter_u64_digits().next().unwrap_or(0))
            .collect();
        self.inner.fq.from_coeffs(&digits)
    }

    /// The lift of an `F_q` element with coefficients in `{0..p-1}`.
    pub fn canonical_lift(&self, a: &[u64]) -> ZqInt {
        let mut e = self.int_zero();
        for (c, v) in e.iter_mut().zip(a) {
            *c = BigUint::from(*v);
        }
        e
    }

    /// Inverse of a unit modulo `p^e`, `None` if `a` is divisible by `p`.
    pub fn int_inv(&self, a: &ZqInt, e: u32) -> Option<ZqInt> {
        let fq = &self.inner.fq;
        let abar = self.int_to_fq(a);
        let binv = fq.inv(&abar)?;
        let mut b = self.canonical_lift(&binv);
        let mut prec = 1u32;
        let two = self.int_from_u64(2);
        while prec < e {
            prec = (2 * prec).min(e);
            let ab = self.int_mul(a, &b, prec);
            let t = self.int_sub(&two, &ab, prec);
            b = self.int_mul(&b, &t, prec);
        }
        self.int_reduce(&mut b, e);
        Some(b)
    }

    pub fn int_pow(&self, a: &ZqInt, mut k: u128, e: u32) -> ZqInt {
        let mut base = a.clone();
        let mut acc = self.int_one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.int_mul(&acc, &base, e);
            }
            k >>= 1;
            if k > 0 {
                base = self.int_mul(&base, &base, e);
            }
        }
        self.int_reduce(&mut acc, e);
        acc
    }

    /// Frobenius automorphism `sigma`, applied modulo `p^e`.
    pub fn int_sigma(&self, a: &ZqInt, e: u32) -> ZqInt {
        if self.inner.n == 1 {
            let mut b = a.clone();
            self.int_reduce(&mut b, e);
            return b;
        }
        let pe = self.pow_p(e);
        let mut acc = vec![BigUint::zero(); self.inner.n];
        for (c, st) in a.iter().zip(&self.inner.sigma_t) {
            if c.is_zero() {
                continue;
            }
            for (o, s) in acc.iter_mut().zip(st) {
                *o += c * s;
            }
        }
        for c in acc.iter_mut() {
            *c %= pe;
        }
        acc
    }

    /// The root of `M` congruent to `T^p`, by Newton iteration.
    fn sigma_generator(&self) -> ZqInt {
        let n = self.inner.n;
        let cap = self.inner.cap;
        let mut t = self.int_zero();
        t[1.min(n - 1)] = BigUint::one();
        let mut z = self.int_pow(&t, self.inner.p as u128, cap);
        let eval = |z: &ZqInt, deriv: bool| {
            let mut acc = self.int_zero();
            let m = &self.inner.m;
            let top = m.len() - 1;
            for k in (0..=top).rev() {
                let coeff = if deriv {
                    if k == 0 {
                        continue;
                    }
                    m[k] * k as u64
                } else {
                    m[k]
                };
                acc = self.int_mul(&acc, z, cap);
                acc = self.int_add(&acc, &self.int_from_u64(coeff), cap);
            }
            acc
        };
        let mut prec = 1u32;
        loop {
            prec = (2 * prec).min(cap);
            let mz = eval(&z, false);
            let dz = eval(&z, true);
            let inv = self.int_inv(&dz, prec).expect("M is separable mod p");
            let step = self.int_mul(&mz, &inv, prec);
            z = self.int_sub(&z, &step, prec);
            if prec == cap {
                break;
            }
        }
        z
    }

    /// Teichmuller lift of an `F_q` element modulo `p^e`: the root of
    /// `X^q - X` reducing to `a`.
    pub fn int_teichmuller(&self, a: &[u64], e: u32) -> ZqInt {
        let q = self.q();
        let mut z = self.canonical_lift(a);
        if self.int_is_zero(&z) {
            return z;
        }
        let mut prec = 1u32;
        while prec < e {
            prec = (2 * prec).min(e);
            let zq1 = self.int_pow(&z, q - 1, prec);
            let zq = self.int_mul(&zq1, &z, prec);
            let fz = self.int_sub(&zq, &z, prec);
            // f'(z) = q z^(q-1) - 1
            let qz = self.int_mul(&zq1, &self.int_from_u128(q, prec), prec);
            let dz = self.int_sub(&qz, &self.int_one(), prec);
            let inv = self.int_inv(&dz, prec).expect("derivative is a unit");
            z = self.int_sub(&z, &self.int_mul(&fz, &inv, prec), prec);
        }
        self.int_reduce(&mut z, e);
        z
    }

    pub fn int_from_u128(&self, v: u128, e: u32) -> ZqInt {
        let mut x = self.int_zero();
        x[0] = BigUint::from(v) % self.pow_p(e);
        x
    }
}
