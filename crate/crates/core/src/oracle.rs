//! Point counts by enumeration, independent of the cohomological engine.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::curve::CurveInput;
use crate::field::{prime_factors, Field, Gf};
use crate::{Error, Result};

/// Largest field size enumerated.
pub const MAX_FIELD_SIZE: u64 = 1 << 23;

const ZERO: u32 = u32::MAX;

/// `F_Q` in logarithmic representation with a Zech table: an element is
/// `log_g a`, or [`ZERO`].
#[derive(Clone, Debug)]
pub struct TableField {
    p: u64,
    order: u64,
    log: Vec<u32>,
    exp: Vec<u32>,
    zech: Vec<u32>,
}

impl TableField {
    pub fn new(f: &Gf) -> Result<Self> {
        let order = f.order() as u64;
        if order > MAX_FIELD_SIZE {
            return Err(Error::Validation(format!("field of size {order} exceeds the enumeration budget")));
        }
        let p = f.characteristic();
        let m = order - 1;
        let factors = prime_factors(m as u128);
        let gen = (1..order)
            .map(|c| f.decode(c))
            .find(|e| factors.iter().all(|&r| !f.is_one(&f.pow(e, m as u128 / r))))
            .expect("multiplicative group is cyclic");
        let mut log = vec![ZERO; order as usize];
        let mut exp = vec![0u32; m as usize];
        let mut cur = f.one();
        for k in 0..m {
            let code = f.encode(&cur);
            exp[k as usize] = code as u32;
            log[code as usize] = k as u32;
            cur = f.mul(&cur, &gen);
        }
        let zech = exp
            .iter()
            .map(|&v| {
                let v = v as u64;
                let w = if v % p == p - 1 { v - (p - 1) } else { v + 1 };
                if w == 0 {
                    ZERO
                } else {
                    log[w as usize]
                }
            })
            .collect();
        Ok(TableField { p, order, log, exp, zech })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    fn m(&self) -> u64 {
        self.order - 1
    }

    /// From the base-`p` code of [`Gf::encode`].
    pub fn from_code(&self, code: u64) -> u32 {
        if code == 0 {
            ZERO
        } else {
            self.log[code as usize]
        }
    }

    pub fn to_code(&self, a: u32) -> u64 {
        if a == ZERO {
            0
        } else {
            self.exp[a as usize] as u64
        }
    }

    pub fn zero(&self) -> u32 {
        ZERO
    }

    /// All elements, zero first.
    pub fn elements(&self) -> impl Iterator<Item = u32> {
        core::iter::once(ZERO).chain(0..self.m() as u32)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == ZERO || b == ZERO {
            return ZERO;
        }
        ((a as u64 + b as u64) % self.m()) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if a == ZERO {
            return b;
        }
        if b == ZERO {
            return a;
        }
        let d = ((b as u64 + self.m() - a as u64) % self.m()) as usize;
        let z = self.zech[d];
        if z == ZERO {
            ZERO
        } else {
            ((a as u64 + z as u64) % self.m()) as u32
        }
    }

    pub fn neg(&self, a: u32) -> u32 {
        if a == ZERO {
            ZERO
        } else {
            ((a as u64 + self.m() / 2) % self.m()) as u32
        }
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    /// Quadratic character.
    pub fn chi(&self, a: u32) -> i64 {
        if a == ZERO {
            0
        } else if a % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// A square root of a square.
    pub fn sqrt(&self, a: u32) -> u32 {
        debug_assert!(self.chi(a) >= 0);
        if a == ZERO {
            ZERO
        } else {
            a / 2
        }
    }

    pub fn small(&self, v: u64) -> u32 {
        self.from_code(v % self.p)
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != ZERO);
        ((self.m() - a as u64) % self.m()) as u32
    }

    /// Horner evaluation, coefficients low degree first.
    pub fn eval(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// `#{y : y^2 = a}`.
    fn sqrt_count(&self, a: u32) -> u64 {
        (1 + self.chi(a)) as u64
    }

    /// `#{y : y^4 + s y^2 + t = 0}`.
    pub fn biquadratic_roots(&self, s: u32, t: u32) -> u64 {
        let half = self.inv(self.small(2));
        let disc = self.sub(self.mul(s, s), self.mul(self.small(4), t));
        let ms = self.neg(s);
        match self.chi(disc) {
            0 => self.sqrt_count(self.mul(ms, half)),
            1 => {
                let r = self.sqrt(disc);
                self.sqrt_count(self.mul(self.add(ms, r), half)) + self.sqrt_count(self.mul(self.sub(ms, r), half))
            }
            _ => 0,
        }
    }

    /// `#{w : w^2 + s w + t = 0}`.
    pub fn quadratic_roots(&self, s: u32, t: u32) -> u64 {
        let disc = self.sub(self.mul(s, s), self.mul(self.small(4), t));
        (1 + self.chi(disc)) as u64
    }
}

/// The curve's coefficients in the table field of `F_(q^r)`.
struct Embedded {
    tf: TableField,
    g: Vec<u32>,
    h: Vec<u32>,
}

fn embed(c: &CurveInput, r: usize) -> Result<Embedded> {
    if r == 0 {
        return Err(Error::Validation("extension degree must be positive".into()));
    }
    let q = c.q();
    if q.checked_pow(r as u32).is_none_or(|v| v > MAX_FIELD_SIZE as u128) {
        return Err(Error::Validation(format!("F_(q^{r}) exceeds the enumeration budget")));
    }
    let (big, emb) = c.fq.extension(r);
    let tf = TableField::new(&big)?;
    let map = |a: &Vec<u64>| tf.from_code(big.encode(&emb.apply(&big, a)));
    let g = c.g.iter().map(map).collect();
    let h = c.h.iter().map(map).collect();
    Ok(Embedded { tf, g, h })
}

/// Projective points of `Y^4 + G(X, Z) Y^2 + H(X, Z) = 0` over `F_(q^r)`.
pub fn count_c(c: &CurveInput, r: usize) -> Result<u64> {
    let e = embed(c, r)?;
    let tf = &e.tf;
    let affine: u64 = tf.elements().map(|x| tf.biquadratic_roots(tf.eval(&e.g, x), tf.eval(&e.h, x))).sum();
    Ok(affine + tf.biquadratic_roots(e.g[2], e.h[4]))
}

/// Points of the smooth model of `v^2 + g(u) v + h(u) = 0` over `F_(q^r)`.
pub fn count_e(c: &CurveInput, r: usize) -> Result<u64> {
    let e = embed(c, r)?;
    let tf = &e.tf;
    let affine: u64 = tf.elements().map(|u| tf.quadratic_roots(tf.eval(&e.g, u), tf.eval(&e.h, u))).sum();
    Ok(affine + tf.quadratic_roots(e.g[2], e.h[4]))
}

/// Counts by running over every class of `P^2(F_q)`; for small fields.
pub fn count_c_projective(c: &CurveInput) -> Result<u64> {
    let f = &c.fq;
    let q = f.order() as u64;
    if q > 11 {
        return Err(Error::Validation("projective enumeration is limited to q <= 11".into()));
    }
    let form = |x: &Vec<u64>, y: &Vec<u64>, z: &Vec<u64>| -> Vec<u64> {
        let pw = |a: &Vec<u64>, k: u32| f.pow(a, k as u128);
        let gg = (0..3).fold(f.zero(), |s, k| f.add(&s, &f.mul(&c.g[k], &f.mul(&pw(x, k as u32), &pw(z, 2 - k as u32)))));
        let hh = (0..5).fold(f.zero(), |s, k| f.add(&s, &f.mul(&c.h[k], &f.mul(&pw(x, k as u32), &pw(z, 4 - k as u32)))));
        let y2 = f.mul(y, y);
        f.add(&f.add(&f.mul(&y2, &y2), &f.mul(&gg, &y2)), &hh)
    };
    let mut n = 0;
    let (zero, one) = (f.zero(), f.one());
    for a in 0..q {
        for b in 0..q {
            if f.is_zero(&form(&f.decode(a), &f.decode(b), &one)) {
                n += 1;
            }
        }
        if f.is_zero(&form(&f.decode(a), &one, &zero)) {
            n += 1;
        }
    }
    if f.is_zero(&form(&one, &zero, &zero)) {
        n += 1;
    }
    Ok(n)
}

/// The Weil polynomial (low degree first) determined by
/// `#C(F_q), #C(F_(q^2)), #C(F_(q^3))` through the functional equation.
pub fn zeta_from_counts(counts: &[i128], q: i128) -> Result<Vec<i128>> {
    if counts.len() < 3 {
        return Err(Error::Validation("three counts are needed".into()));
    }
    let s: Vec<i128> = (0..3).map(|k| q.pow(k as u32 + 1) + 1 - counts[k]).collect();
    let e1 = s[0];
    let t2 = e1 * s[0] - s[1];
    let t3 = {
        if t2 % 2 != 0 {
            return Err(Error::Assumption("counts are not those of a genus-3 curve".into()));
        }
        let e2 = t2 / 2;
        e2 * s[0] - e1 * s[1] + s[2]
    };
    if t3 % 3 != 0 {
        return Err(Error::Assumption("counts are not those of a genus-3 curve".into()));
    }
    let (e2, e3) = (t2 / 2, t3 / 3);
    Ok(vec![q * q * q, -q * q * e1, q * e2, -e3, e2, -e1, 1])
}
