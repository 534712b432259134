//! Fixed-width multiprecision arithmetic modulo an odd modulus `m`
//! (here `p^e`), with Montgomery multiplication.
//!
//! Residues are little-endian limb slices of length [`MontCtx::limbs`],
//! fully reduced into `[0, m)`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Clone, Debug)]
pub struct MontCtx {
    m: Vec<u64>,
    l: usize,
    /// `-m^{-1} mod 2^64`.
    minv: u64,
    /// `R^2 mod m`, `R = 2^(64 l)`.
    r2: Vec<u64>,
    big: BigUint,
}

pub fn biguint_to_limbs(x: &BigUint, l: usize) -> Vec<u64> {
    let mut out: Vec<u64> = x.iter_u64_digits().collect();
    assert!(out.len() <= l, "value does not fit in {l} limbs");
    out.resize(l, 0);
    out
}

pub fn limbs_to_biguint(x: &[u64]) -> BigUint {
    let mut digits = Vec::with_capacity(2 * x.len());
    for &w in x {
        digits.push(w as u32);
        digits.push((w >> 32) as u32);
    }
    BigUint::new(digits)
}

impl MontCtx {
    /// Context for odd `m > 1`, using the smallest limb count that holds it.
    pub fn new(m: &BigUint) -> Self {
        let l = (m.bits() as usize).div_ceil(64).max(1);
        Self::with_limbs(m, l)
    }

    pub fn with_limbs(m: &BigUint, l: usize) -> Self {
        assert!(m.bit(0), "modulus must be odd");
        let limbs = biguint_to_limbs(m, l);
        // Newton iteration for m^{-1} mod 2^64.
        let m0 = limbs[0];
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(m0.wrapping_mul(inv)));
        }
        let r2 = (BigUint::one() << (128 * l)) % m;
        MontCtx { m: limbs, l, minv: inv.wrapping_neg(), r2: biguint_to_limbs(&r2, l), big: m.clone() }
    }

    pub fn limbs(&self) -> usize {
        self.l
    }

    pub fn modulus(&self) -> &BigUint {
        &self.big
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.l]
    }

    pub fn from_big(&self, x: &BigUint) -> Vec<u64> {
        if x < &self.big {
            biguint_to_limbs(x, self.l)
        } else {
            biguint_to_limbs(&(x % &self.big), self.l)
        }
    }

    pub fn to_big(&self, x: &[u64]) -> BigUint {
        limbs_to_biguint(x)
    }

    /// `x R mod m`, the Montgomery form used for multiplicative constants.
    pub fn to_mont(&self, x: &BigUint) -> Vec<u64> {
        let xr = self.from_big(x);
        let mut out = self.zero();
        self.mont_mul(&xr, &self.r2, &mut out);
        out
    }

    /// `x R mod m` for a reduced limb vector.
    pub fn to_mont_limbs(&self, x: &[u64], out: &mut [u64]) {
        self.mont_mul(x, &self.r2, out);
    }

    #[inline]
    fn geq_m(&self, t: &[u64]) -> bool {
        for i in (0..self.l).rev() {
            if t[i] != self.m[i] {
                return t[i] > self.m[i];
            }
        }
        true
    }

    #[inline]
    fn sub_m_in_place(&self, t: &mut [u64]) {
        let mut borrow = 0u64;
        for i in 0..self.l {
            let (d1, b1) = t[i].overflowing_sub(self.m[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            t[i] = d2;
            borrow = (b1 | b2) as u64;
        }
    }

    pub fn is_zero(x: &[u64]) -> bool {
        x.iter().all(|&w| w == 0)
    }

    /// `out = a + b mod m`.
    #[inline]
    pub fn add(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let mut carry = 0u64;
        for i in 0..self.l {
            let (s1, c1) = a[i].overflowing_add(b[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            out[i] = s2;
            carry = (c1 | c2) as u64;
        }
        if carry != 0 || self.geq_m(out) {
            self.sub_m_in_place(out);
        }
    }

    #[inline]
    pub fn add_assign(&self, acc: &mut [u64], b: &[u64]) {
        let mut carry = 0u64;
        for i in 0..self.l {
            let (s1, c1) = acc[i].overflowing_add(b[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            acc[i] = s2;
            carry = (c1 | c2) as u64;
        }
        if carry != 0 || self.geq_m(acc) {
            self.sub_m_in_place(acc);
        }
    }

    /// `out = a - b mod m`.
    #[inline]
    pub fn sub(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let mut borrow = 0u64;
        for i in 0..self.l {
            let (d1, b1) = a[i].overflowing_sub(b[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            out[i] = d2;
            borrow = (b1 | b2) as u64;
        }
        if borrow != 0 {
            let mut carry = 0u64;
            for i in 0..self.l {
                let (s1, c1) = out[i].overflowing_add(self.m[i]);
                let (s2, c2) = s1.overflowing_add(carry);
                out[i] = s2;
                carry = (c1 | c2) as u64;
            }
        }
    }

    #[inline]
    pub fn sub_assign(&self, acc: &mut [u64], b: &[u64]) {
        let a: Vec<u64> = acc.to_vec();
        self.sub(&a, b, acc);
    }

    pub fn neg(&self, a: &[u64], out: &mut [u64]) {
        let z = self.zero();
        self.sub(&z, a, out);
    }

    /// `out = a b R^{-1} mod m` (CIOS). `out` must not alias the inputs.
    pub fn mont_mul(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let l = self.l;
        let mut t = [0u64; 66];
        let t = if l + 2 <= 66 { &mut t[..l + 2] } else { unreachable!("modulus too large") };
        for i in 0..l {
            let bi = b[i] as u128;
            let mut c: u128 = 0;
            for j in 0..l {
                let s = t[j] as u128 + (a[j] as u128) * bi + c;
                t[j] = s as u64;
                c = s >> 64;
            }
            let s = t[l] as u128 + c;
            t[l] = s as u64;
            t[l + 1] = (s >> 64) as u64;
            let u = t[0].wrapping_mul(self.minv) as u128;
            let s = t[0] as u128 + u * self.m[0] as u128;
            let mut c = s >> 64;
            for j in 1..l {
                let s = t[j] as u128 + u * self.m[j] as u128 + c;
                t[j - 1] = s as u64;
                c = s >> 64;
            }
            let s = t[l] as u128 + c;
            t[l - 1] = s as u64;
            t[l] = t[l + 1] + (s >> 64) as u64;
        }
        out[..l].copy_from_slice(&t[..l]);
        if t[l] != 0 || self.geq_m(out) {
            self.sub_m_in_place(out);
        }
    }

    /// `out = a c mod m` for `cmont = to_mont(c)`.
    #[inline]
    pub fn mul_const(&self, a: &[u64], cmont: &[u64], out: &mut [u64]) {
        self.mont_mul(a, cmont, out);
    }

    /// `acc += a c mod m` for `cmont = to_mont(c)`.
    #[inline]
    pub fn fma_const(&self, acc: &mut [u64], a: &[u64], cmont: &[u64]) {
        let mut t = [0u64; 64];
        let t = &mut t[..self.l];
        self.mont_mul(a, cmont, t);
        self.add_assign(acc, t);
    }

    /// Montgomery reduction of a wide value `t < m R` (length `2l + 1`,
    /// clobbered): returns `t R^{-1} mod m` in `out`.
    pub fn redc(&self, t: &mut [u64], out: &mut [u64]) {
        let l = self.l;
        debug_assert!(t.len() > 2 * l);
        for i in 0..l {
            let u = t[i].wrapping_mul(self.minv) as u128;
            let mut c: u128 = 0;
            for j in 0..l {
                let s = t[i + j] as u128 + u * self.m[j] as u128 + c;
                t[i + j] = s as u64;
                c = s >> 64;
            }
            let mut k = i + l;
            while c != 0 && k < t.len() {
                let s = t[k] as u128 + c;
                t[k] = s as u64;
                c = s >> 64;
                k += 1;
            }
        }
        out[..l].copy_from_slice(&t[l..2 * l]);
        if t[2 * l] != 0 || self.geq_m(out) {
            self.sub_m_in_place(out);
        }
    }

    /// Reduces an arbitrary limb vector modulo `m` (slow path).
    pub fn reduce_slice(&self, x: &[u64]) -> Vec<u64> {
        let b = limbs_to_biguint(x);
        if b.is_zero() {
            return self.zero();
        }
        self.from_big(&b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mont_mul_matches_bigint() {
        let m = BigUint::from(7u32).pow(60);
        let ctx = MontCtx::new(&m);
        let a = BigUint::from(123456789u64).pow(5) % &m;
        let b = BigUint::from(987654321u64).pow(4) % &m;
        let mut out = ctx.zero();
        ctx.mul_const(&ctx.from_big(&a), &ctx.to_mont(&b), &mut out);
        assert_eq!(ctx.to_big(&out), (&a * &b) % &m);
    }

    #[test]
    fn add_sub_wrap() {
        let m = BigUint::from(3u32).pow(45);
        let ctx = MontCtx::new(&m);
        let a = &m - BigUint::from(5u32);
        let b = BigUint::from(9u32);
        let mut s = ctx.zero();
        ctx.add(&ctx.from_big(&a), &ctx.from_big(&b), &mut s);
        assert_eq!(ctx.to_big(&s), BigUint::from(4u32));
        let mut d = ctx.zero();
        ctx.sub(&ctx.from_big(&b), &ctx.from_big(&a), &mut d);
        assert_eq!(ctx.to_big(&d), BigUint::from(14u32));
    }

    #[test]
    fn redc_of_wide_product() {
        let m = BigUint::from(11u32).pow(40);
        let ctx = MontCtx::new(&m);
        let l = ctx.limbs();
        let x = BigUint::from(5u32).pow(70) % &m;
        let y = BigUint::from(13u32).pow(50) % &m;
        let prod = &x * &y;
        let mut t = biguint_to_limbs(&prod, 2 * l + 1);
        let mut out = ctx.zero();
        ctx.redc(&mut t, &mut out);
        let r = BigUint::one() << (64 * l);
        assert_eq!((ctx.to_big(&out) * r) % &m, prod % &m);
    }
}
