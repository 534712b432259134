//! Elements of `Q_q` with capped relative precision.

use num_bigint::BigUint;

use super::zq::{Zq, ZqInt};
use crate::{Error, Result};

/// Absolute precision recorded for an exact zero.
pub const EXACT: i64 = i64::MAX / 4;

/// `p^val * unit`, with `unit` a `p`-adic unit known modulo `p^rel`.
///
/// A zero value has `rel == 0` and records in `val` the absolute
/// precision to which it is known to vanish (`EXACT` for a true zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZqScaled {
    val: i64,
    rel: u32,
    unit: ZqInt,
}

impl ZqScaled {
    pub fn is_zero(&self) -> bool {
        self.rel == 0
    }

    pub fn is_exact_zero(&self) -> bool {
        self.rel == 0 && self.val >= EXACT
    }

    /// Valuation of a nonzero value; for a zero, the precision to which
    /// it vanishes.
    pub fn valuation(&self) -> i64 {
        self.val
    }

    /// The value is known modulo `p^abs_prec`.
    pub fn abs_prec(&self) -> i64 {
        if self.rel == 0 {
            self.val
        } else {
            self.val + self.rel as i64
        }
    }

    pub fn rel_prec(&self) -> u32 {
        self.rel
    }

    pub fn unit(&self) -> &ZqInt {
        &self.unit
    }
}

impl Zq {
    pub fn zero(&self) -> ZqScaled {
        self.zero_to(EXACT)
    }

    /// A zero known modulo `p^abs`.
    pub fn zero_to(&self, abs: i64) -> ZqScaled {
        ZqScaled { val: abs.min(EXACT), rel: 0, unit: alloc::vec::Vec::new() }
    }

    pub fn one(&self) -> ZqScaled {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> ZqScaled {
        if v == 0 {
            return self.zero();
        }
        let p = self.p() as i64;
        let mut m = v.unsigned_abs() as i64;
        let mut val = 0;
        while m % p == 0 {
            m /= p;
            val += 1;
        }
        let cap = self.cap();
        let mut unit = self.int_from_u64(m as u64);
        self.int_reduce(&mut unit, cap);
        if v < 0 {
            unit = self.int_neg(&unit, cap);
        }
        ZqScaled { val, rel: cap, unit }
    }

    pub fn from_rational(&self, num: i64, den: i64) -> Result<ZqScaled> {
        let d = self.from_i64(den);
        self.div(&self.from_i64(num), &d)
    }

    /// An integral element known modulo `p^abs`.
    pub fn from_int_abs(&self, a: &ZqInt, abs: u32) -> ZqScaled {
        let abs = abs.min(self.cap());
        let mut a = a.clone();
        self.int_reduce(&mut a, abs);
        match self.int_valuation(&a) {
            None => self.zero_to(abs as i64),
            Some(t) => {
                let rel = abs - t;
                let mut unit = self.int_div_p_pow(&a, t);
                self.int_reduce(&mut unit, rel);
                ZqScaled { val: t as i64, rel, unit }
            }
        }
    }

    /// An integral element taken to full precision.
    pub fn from_int(&self, a: &ZqInt) -> ZqScaled {
        self.from_int_abs(a, self.cap())
    }

    /// `p^val * s` where `s` is known modulo `p^prec`; renormalises.
    fn normalize(&self, val: i64, s: ZqInt, prec: u32) -> ZqScaled {
        match self.int_valuation(&s) {
            None => self.zero_to(val + prec as i64),
            Some(t) if t >= prec => self.zero_to(val + prec as i64),
            Some(t) => {
                let rel = prec - t;
                let unit = if t == 0 { s } else { self.int_div_p_pow(&s, t) };
                ZqScaled { val: val + t as i64, rel, unit }
            }
        }
    }

    /// Forgets digits beyond absolute precision `abs`.
    pub fn truncate_abs(&self, a: &ZqScaled, abs: i64) -> ZqScaled {
        if a.abs_prec() <= abs {
            return a.clone();
        }
        if a.is_zero() || abs <= a.val {
            return self.zero_to(abs);
        }
        let rel = (abs - a.val) as u32;
        let mut unit = a.unit.clone();
        self.int_reduce(&mut unit, rel);
        ZqScaled { val: a.val, rel, unit }
    }

    pub fn add(&self, a: &ZqScaled, b: &ZqScaled) -> ZqScaled {
        let abs = a.abs_prec().min(b.abs_prec());
        match (a.is_zero(), b.is_zero()) {
            (true, true) => self.zero_to(abs),
            (true, false) => self.truncate_abs(b, abs),
            (false, true) => self.truncate_abs(a, abs),
            (false, false) => {
                let v = a.val.min(b.val);
                if v >= abs {
                    return self.zero_to(abs);
                }
                let prec = (abs - v) as u32;
                let shifted = |x: &ZqScaled| -> Option<ZqInt> {
                    let d = (x.val - v) as u32;
                    if d >= prec {
                        None
                    } else if d == 0 {
                        Some(x.unit.clone())
                    } else {
                        Some(self.int_mul_p_pow(&x.unit, d))
                    }
                };
                let s = match (shifted(a), shifted(b)) {
                    (Some(x), Some(y)) => self.int_add(&x, &y, prec),
                    (Some(x), None) | (None, Some(x)) => {
                        let mut x = x;
                        self.int_reduce(&mut x, prec);
                        x
                    }
                    (None, None) => return self.zero_to(abs),
                };
                self.normalize(v, s, prec)
            }
        }
    }

    pub fn neg(&self, a: &ZqScaled) -> ZqScaled {
        if a.is_zero() {
            return a.clone();
        }
        ZqScaled { val: a.val, rel: a.rel, unit: self.int_neg(&a.unit, a.rel) }
    }

    pub fn sub(&self, a: &ZqScaled, b: &ZqScaled) -> ZqScaled {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &ZqScaled, b: &ZqScaled) -> ZqScaled {
        if a.is_exact_zero() || b.is_exact_zero() {
            return self.zero();
        }
        if a.is_zero() || b.is_zero() {
            return self.zero_to(a.val + b.val);
        }
        let rel = a.rel.min(b.rel);
        ZqScaled { val: a.val + b.val, rel, unit: self.int_mul(&a.unit, &b.unit, rel) }
    }

    pub fn mul_i64(&self, a: &ZqScaled, k: i64) -> ZqScaled {
        self.mul(a, &self.from_i64(k))
    }

    /// Multiplication by `p^k`, `k` possibly negative.
    pub fn shift(&self, a: &ZqScaled, k: i64) -> ZqScaled {
        if a.is_exact_zero() {
            return a.clone();
        }
        ZqScaled { val: a.val + k, rel: a.rel, unit: a.unit.clone() }
    }

    pub fn inv(&self, a: &ZqScaled) -> Result<ZqScaled> {
        if a.is_zero() {
            return Err(Error::PrecisionExhausted(alloc::format!(
                "inverting a value known only to vanish mod p^{}",
                a.val
            )));
        }
        let unit = self.int_inv(&a.unit, a.rel).ok_or_else(|| Error::Internal("non-unit in unit part".into()))?;
        Ok(ZqScaled { val: -a.val, rel: a.rel, unit })
    }

    pub fn div(&self, a: &ZqScaled, b: &ZqScaled) -> Result<ZqScaled> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn sigma(&self, a: &ZqScaled) -> ZqScaled {
        if a.is_zero() {
            return a.clone();
        }
        ZqScaled { val: a.val, rel: a.rel, unit: self.int_sigma(&a.unit, a.rel) }
    }

    /// `sigma^k`.
    pub fn sigma_pow(&self, a: &ZqScaled, k: usize) -> ZqScaled {
        let k = k % self.degree();
        let mut x = a.clone();
        for _ in 0..k {
            x = self.sigma(&x);
        }
        x
    }

    /// Teichmuller lift of an `F_q` element, to the full precision cap.
    pub fn teichmuller(&self, a: &[u64]) -> ZqScaled {
        if a.iter().all(|&c| c == 0) {
            return self.zero();
        }
        let z = self.int_teichmuller(a, self.cap());
        self.from_int(&z)
    }

    /// `a` modulo `p^e` as an integral element; fails on negative valuation.
    pub fn to_int(&self, a: &ZqScaled, e: u32) -> Result<ZqInt> {
        if a.is_zero() {
            return Ok(self.int_zero());
        }
        if a.val < 0 {
            return Err(Error::PrecisionInsufficient(alloc::format!(
                "expected an integral value, found valuation {}",
                a.val
            )));
        }
        let v = a.val as u32;
        if v >= e {
            return Ok(self.int_zero());
        }
        let mut u = a.unit.clone();
        self.int_reduce(&mut u, e - v);
        Ok(self.int_mul_p_pow(&u, v))
    }

    /// Reduction modulo `p` of a value of nonnegative valuation.
    pub fn to_fq(&self, a: &ZqScaled) -> Result<alloc::vec::Vec<u64>> {
        Ok(self.int_to_fq(&self.to_int(a, 1)?))
    }

    /// Whether `a` and `b` agree to the precision both carry.
    pub fn equal_at_prec(&self, a: &ZqScaled, b: &ZqScaled) -> bool {
        self.sub(a, b).is_zero()
    }

    /// Builds `p^val * unit` from raw parts (the unit is renormalised).
    pub fn from_parts(&self, val: i64, unit: ZqInt, rel: u32) -> ZqScaled {
        let rel = rel.min(self.cap());
        let mut unit = unit;
        self.int_reduce(&mut unit, rel);
        self.normalize(val, unit, rel)
    }

    /// The integer `v` as an element of `Z_q` with the given big value.
    pub fn from_biguint(&self, v: &BigUint) -> ZqScaled {
        let mut e = self.int_zero();
        e[0] = v.clone();
        self.from_int(&e)
    }
}
