//! `F_q = F_p[t]/(m(t))` in the polynomial basis.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

use super::{addm, is_prime_u64, mulm, poly, subm, Field};
use crate::Error;

/// Largest characteristic accepted; keeps products of residues in a `u64`.
pub const MAX_CHARACTERISTIC: u64 = 1 << 31;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf {
    p: u64,
    /// Monic modulus, low degree first, length `n + 1`.
    modulus: Vec<u64>,
}

/// Embedding of a field into one of its extensions, determined by the
/// image of the generator `t`.
#[derive(Clone, Debug)]
pub struct Embedding {
    /// Powers `theta^i`, `i < n`, of the image of `t`.
    powers: Vec<Vec<u64>>,
}

impl Embedding {
    pub fn apply(&self, big: &Gf, a: &[u64]) -> Vec<u64> {
        let mut out = big.zero();
        for (c, pw) in a.iter().zip(&self.powers) {
            if *c != 0 {
                out = big.add(&out, &big.scale_int(pw, *c));
            }
        }
        out
    }

    pub fn generator_image(&self) -> &[u64] {
        &self.powers[1.min(self.powers.len() - 1)]
    }
}

impl Gf {
    /// The field `F_q` with the given modulus, or the deterministic
    /// default modulus when `modulus` is `None`.
    pub fn new(p: u64, n: usize, modulus: Option<&[u64]>) -> Result<Self, Error> {
        if p == 2 {
            return Err(Error::Validation("characteristic 2 unsupported".into()));
        }
        if !is_prime_u64(p) || p >= MAX_CHARACTERISTIC {
            return Err(Error::Validation(alloc::format!("p = {p} is not an odd prime below 2^31")));
        }
        if n == 0 {
            return Err(Error::Validation("extension degree must be at least 1".into()));
        }
        match modulus {
            None => Ok(Self::search(p, n)),
            Some(m) => {
                if m.len() != n + 1 || m[n] % p != 1 {
                    return Err(Error::Validation(alloc::format!(
                        "modulus must be monic of degree {n}"
                    )));
                }
                let m: Vec<u64> = m.iter().map(|c| c % p).collect();
                let fp = Self::prime(p);
                if !poly::is_irreducible(&fp, &fp.lift_poly(&m)) {
                    return Err(Error::Validation("modulus is reducible".into()));
                }
                Ok(Gf { p, modulus: m })
            }
        }
    }

    /// The prime field, presented as `F_p[t]/(t)`.
    pub fn prime(p: u64) -> Self {
        Gf { p, modulus: vec![0, 1] }
    }

    /// Smallest monic irreducible of degree `n`, ordering candidates by
    /// the base-`p` integer `c_{n-1} ... c_0`.
    pub fn search(p: u64, n: usize) -> Self {
        let fp = Self::prime(p);
        let mut c = vec![0u64; n];
        loop {
            let mut m = c.clone();
            m.push(1);
            if poly::is_irreducible(&fp, &fp.lift_poly(&m)) {
                return Gf { p, modulus: m };
            }
            for d in c.iter_mut() {
                *d += 1;
                if *d < p {
                    break;
                }
                *d = 0;
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    fn lift_poly(&self, m: &[u64]) -> poly::Poly<Gf> {
        poly::trim(self, m.iter().map(|&c| self.from_u64(c)).collect())
    }

    pub fn from_u64(&self, v: u64) -> Vec<u64> {
        let mut e = vec![0; self.degree()];
        e[0] = v % self.p;
        self.reduce_vec(e)
    }

    /// Element from a coefficient vector in the generator `t`
    /// (entries may exceed `p`; shorter vectors are zero-padded).
    pub fn from_coeffs(&self, c: &[u64]) -> Vec<u64> {
        let mut e: Vec<u64> = c.iter().map(|x| x % self.p).collect();
        if e.len() < self.degree() {
            e.resize(self.degree(), 0);
        }
        self.reduce_vec(e)
    }

    /// Base-`p` integer code, `sum c_i p^i`.
    pub fn encode(&self, a: &[u64]) -> u64 {
        a.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn decode(&self, mut v: u64) -> Vec<u64> {
        let mut e = vec![0; self.degree()];
        for c in e.iter_mut() {
            *c = v % self.p;
            v /= self.p;
        }
        e
    }

    fn scale_int(&self, a: &[u64], c: u64) -> Vec<u64> {
        a.iter().map(|x| mulm(*x, c % self.p, self.p)).collect()
    }

    fn reduce_vec(&self, mut e: Vec<u64>) -> Vec<u64> {
        let n = self.degree();
        let p = self.p;
        for i in (n..e.len()).rev() {
            let c = e[i];
            if c != 0 {
                for j in 0..n {
                    let t = mulm(c, self.modulus[j], p);
                    e[i - n + j] = subm(e[i - n + j], t, p);
                }
            }
        }
        e.truncate(n);
        e
    }

    /// Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: &[u64]) -> Vec<u64> {
        self.pow(&a.to_vec(), self.p as u128)
    }

    /// `F_{q^r}` with its own deterministic modulus over `F_p`, and the
    /// embedding of `self` into it.
    pub fn extension(&self, r: usize) -> (Gf, Embedding) {
        let n = self.degree();
        let big = Self::search(self.p, n * r);
        let m = big.lift_poly(&self.modulus);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut rts = poly::roots(&big, &m, &mut rng);
        rts.sort_by_key(|e| big.encode(e));
        let theta = rts.into_iter().next().expect("extension contains the base field");
        let mut powers = Vec::with_capacity(n);
        let mut cur = big.one();
        for _ in 0..n {
            powers.push(cur.clone());
            cur = big.mul(&cur, &theta);
        }
        (big, Embedding { powers })
    }
}

impl Field for Gf {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![0; self.degree()]
    }
    fn one(&self) -> Vec<u64> {
        self.from_u64(1)
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&c| c == 0)
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| addm(*x, *y, self.p)).collect()
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| subm(*x, *y, self.p)).collect()
    }
    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|x| subm(0, *x, self.p)).collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let n = self.degree();
        if n == 1 {
            return vec![mulm(a[0], b[0], self.p)];
        }
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = addm(prod[i + j], mulm(*x, *y, self.p), self.p);
            }
        }
        self.reduce_vec(prod)
    }
    fn inv(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }
    fn from_i64(&self, v: i64) -> Vec<u64> {
        self.from_u64(v.rem_euclid(self.p as i64) as u64)
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
    fn order(&self) -> u128 {
        (self.p as u128)
            .checked_pow(self.degree() as u32)
            .expect("field order fits in u128")
    }
    fn random<R: RngCore>(&self, rng: &mut R) -> Vec<u64> {
        (0..self.degree()).map(|_| rng.next_u64() % self.p).collect()
    }
}
