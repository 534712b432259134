//! Simple extensions `K = F[s]/(u(s))` of another [`Field`].

use alloc::vec::Vec;

use rand_core::RngCore;

use super::poly::{self, Poly};
use super::Field;

#[derive(Clone, Debug)]
pub struct Ext<F: Field> {
    base: F,
    /// Monic irreducible modulus over `base`.
    modulus: Poly<F>,
}

impl<F: Field> Ext<F> {
    /// `u` must be irreducible over `base`; it is made monic here.
    pub fn new(base: F, u: &Poly<F>) -> Self {
        let modulus = poly::monic(&base, u);
        assert!(modulus.len() >= 2, "extension modulus must have positive degree");
        Ext { base, modulus }
    }

    pub fn base(&self) -> &F {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    /// The class of `s`.
    pub fn generator(&self) -> Vec<F::Elem> {
        self.pad(poly::rem(&self.base, &poly::x(&self.base), &self.modulus))
    }

    pub fn embed(&self, a: &F::Elem) -> Vec<F::Elem> {
        self.pad(poly::constant(&self.base, a.clone()))
    }

    fn pad(&self, mut a: Poly<F>) -> Vec<F::Elem> {
        a.resize(self.degree(), self.base.zero());
        a
    }
}

impl<F: Field> Field for Ext<F> {
    type Elem = Vec<F::Elem>;

    fn zero(&self) -> Self::Elem {
        self.pad(Vec::new())
    }
    fn one(&self) -> Self::Elem {
        self.embed(&self.base.one())
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.iter().all(|c| self.base.is_zero(c))
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.iter().zip(b).map(|(x, y)| self.base.add(x, y)).collect()
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.iter().zip(b).map(|(x, y)| self.base.sub(x, y)).collect()
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.iter().map(|x| self.base.neg(x)).collect()
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let f = &self.base;
        let prod = poly::mul(f, &poly::trim(f, a.clone()), &poly::trim(f, b.clone()));
        self.pad(poly::rem(f, &prod, &self.modulus))
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if self.is_zero(a) {
            return None;
        }
        let f = &self.base;
        let (g, s, _) = poly::xgcd(f, &poly::trim(f, a.clone()), &self.modulus);
        debug_assert_eq!(g.len(), 1);
        Some(self.pad(poly::rem(f, &s, &self.modulus)))
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        self.embed(&self.base.from_i64(v))
    }
    fn characteristic(&self) -> u64 {
        self.base.characteristic()
    }
    fn order(&self) -> u128 {
        self.base
            .order()
            .checked_pow(self.degree() as u32)
            .expect("field order fits in u128")
    }
    fn random<R: RngCore>(&self, rng: &mut R) -> Self::Elem {
        (0..self.degree()).map(|_| self.base.random(rng)).collect()
    }
}
