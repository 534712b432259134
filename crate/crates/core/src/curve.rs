//! Input curves `y^4 + g(x) y^2 + h(x) = 0`: validation, case
//! classification, smoothness, Teichmuller lifting and the data at
//! infinity.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

use crate::field::poly::{self, Poly};
use crate::field::{Ext, Field, Gf};
use crate::padic::{PrecisionProfile, Zq, ZqScaled};
use crate::{Error, Result};

type Fq = Vec<u64>;

/// A curve over `F_q` given by `g = a0 + a1 x + a2 x^2` and
/// `h = b0 + ... + b4 x^4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveInput {
    pub fq: Gf,
    pub g: [Fq; 3],
    pub h: [Fq; 5],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseTag {
    /// `b4 = 0`, `a2 = 0`.
    Case1,
    /// `b4 = 0`, `a2 != 0`.
    Case2,
    /// `b4 != 0`, `a2^2 - 4 b4 = 0`.
    Case3,
    /// `b4 != 0`, `a2^2 - 4 b4 != 0`.
    Case4,
}

impl CaseTag {
    pub const ALL: [CaseTag; 4] = [CaseTag::Case1, CaseTag::Case2, CaseTag::Case3, CaseTag::Case4];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    /// Dimension of the cohomology of the affine part.
    pub fn basis_dim(self) -> usize {
        [6, 8, 7, 9][self as usize]
    }

    /// `(delta_C, delta_E)`.
    pub fn deltas(self) -> (usize, usize) {
        [(1, 1), (3, 2), (2, 1), (4, 2)][self as usize]
    }

    pub fn b4_zero(self) -> bool {
        matches!(self, CaseTag::Case1 | CaseTag::Case2)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.number())
    }
}

/// Why a curve was rejected as singular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SingularReport {
    /// A condition at infinity failed.
    Infinity { condition: String },
    /// `f` shares a factor with both partial derivatives over `F_q(x)`.
    NotReduced,
    /// A singular affine point: `x` is a root of `x_poly` (irreducible over
    /// `F_q`) and `y` a root of `y_poly` over `F_q[x]/(x_poly)`.
    Affine { x_poly: Vec<Fq>, y_poly: Vec<Vec<Fq>> },
}

impl fmt::Display for SingularReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularReport::Infinity { condition } => {
                write!(f, "the condition {condition} at infinity fails")
            }
            SingularReport::NotReduced => write!(f, "f is not squarefree"),
            SingularReport::Affine { x_poly, y_poly } => write!(
                f,
                "singular point with x a root of {x_poly:?} and y a root of {y_poly:?} (coefficients low degree first)"
            ),
        }
    }
}

impl CurveInput {
    pub fn new(fq: Gf, g: [Fq; 3], h: [Fq; 5]) -> Result<Self> {
        let n = fq.degree();
        let p = fq.characteristic();
        for c in g.iter().chain(h.iter()) {
            if c.len() != n || c.iter().any(|&d| d >= p) {
                return Err(Error::Validation(format!(
                    "coefficient {c:?} is not an element of F_{} (expected {n} residues below {p})",
                    fq.order()
                )));
            }
        }
        Ok(CurveInput { fq, g, h })
    }

    /// Shorthand for prime fields.
    pub fn over_prime(p: u64, g: [u64; 3], h: [u64; 5]) -> Result<Self> {
        let fq = Gf::new(p, 1, None)?;
        Self::new(fq, g.map(|c| vec![c % p]), h.map(|c| vec![c % p]))
    }

    pub fn q(&self) -> u128 {
        self.fq.order()
    }

    fn a(&self, i: usize) -> &Fq {
        &self.g[i]
    }
    fn b(&self, i: usize) -> &Fq {
        &self.h[i]
    }

    pub fn classify(&self) -> CaseTag {
        let f = &self.fq;
        if f.is_zero(self.b(4)) {
            if f.is_zero(self.a(2)) {
                CaseTag::Case1
            } else {
                CaseTag::Case2
            }
        } else if f.is_zero(&self.psi_discriminant()) {
            CaseTag::Case3
        } else {
            CaseTag::Case4
        }
    }

    /// `a2^2 - 4 b4`.
    fn psi_discriminant(&self) -> Fq {
        let f = &self.fq;
        f.sub(&f.mul(self.a(2), self.a(2)), &f.mul(&f.from_u64(4), self.b(4)))
    }

    /// `f` as a polynomial in `y` with coefficients in `F_q[x]`.
    fn f_bivariate(&self) -> Vec<Poly<Gf>> {
        let f = &self.fq;
        let g = poly::trim(f, self.g.to_vec());
        let h = poly::trim(f, self.h.to_vec());
        vec![h, vec![], g, vec![], vec![f.one()]]
    }

    /// Decides smoothness of the projective plane model.
    pub fn check_smoothness(&self) -> core::result::Result<(), SingularReport> {
        let f = &self.fq;
        match self.classify() {
            CaseTag::Case1 | CaseTag::Case2 if f.is_zero(self.b(3)) => {
                return Err(SingularReport::Infinity { condition: "b3 != 0".into() });
            }
            CaseTag::Case3 => {
                let t = f.sub(&f.mul(self.a(1), self.a(2)), &f.add(self.b(3), self.b(3)));
                if f.is_zero(&t) {
                    return Err(SingularReport::Infinity { condition: "a1 a2 - 2 b3 != 0".into() });
                }
            }
            _ => {}
        }
        let fb = self.f_bivariate();
        let fx: Vec<Poly<Gf>> = fb.iter().map(|c| poly::derivative(f, c)).collect();
        let fy: Vec<Poly<Gf>> = (1..fb.len())
            .map(|i| poly::scale(f, &fb[i], &f.from_u64(i as u64)))
            .collect();
        let trim_y = |mut v: Vec<Poly<Gf>>| {
            while v.last().is_some_and(|c| c.is_empty()) {
                v.pop();
            }
            v
        };
        let fx = trim_y(fx);
        let fy = trim_y(fy);
        let r2 = poly::resultant_y(f, &fb, &fy);
        let common = if fx.is_empty() {
            // f does not involve x: only f_y matters
            r2
        } else if fx.len() == 1 {
            // f_x = c(x) free of y
            poly::gcd(f, &fx[0], &r2)
        } else {
            let r1 = poly::resultant_y(f, &fb, &fx);
            poly::gcd(f, &r1, &r2)
        };
        if common.is_empty() {
            return Err(SingularReport::NotReduced);
        }
        if common.len() == 1 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x51);
        for u in poly::irreducible_factors(f, &common, &mut rng) {
            let k = Ext::new(f.clone(), &u);
            let x0 = k.generator();
            let at = |v: &[Poly<Gf>]| -> Poly<Ext<Gf>> {
                let coeffs = v
                    .iter()
                    .map(|c| {
                        let lifted: Poly<Ext<Gf>> = c.iter().map(|e| k.embed(e)).collect();
                        poly::eval(&k, &lifted, &x0)
                    })
                    .collect();
                poly::trim(&k, coeffs)
            };
            let mut gcd = poly::gcd(&k, &at(&fb), &at(&fy));
            if !fx.is_empty() {
                gcd = poly::gcd(&k, &gcd, &at(&fx));
            }
            if gcd.len() > 1 {
                return Err(SingularReport::Affine { x_poly: u, y_poly: gcd });
            }
        }
        Ok(())
    }

    /// Validates smoothness as a crate error.
    pub fn ensure_smooth(&self) -> Result<CaseTag> {
        self.check_smoothness().map_err(Error::Singular)?;
        Ok(self.classify())
    }

    pub fn infinity_data(&self) -> InfinityData {
        let f = &self.fq;
        let a2 = self.a(2).clone();
        let b4 = self.b(4).clone();
        let phi = poly::trim(f, vec![b4.clone(), f.zero(), a2.clone(), f.zero(), f.one()]);
        let psi = poly::trim(f, vec![b4, a2, f.one()]);
        let mut rng = ChaCha8Rng::seed_from_u64(0x1f);
        let orbit_sizes = |a: &Poly<Gf>, rng: &mut ChaCha8Rng| -> Vec<usize> {
            let mut v: Vec<usize> = poly::irreducible_factors(f, a, rng).iter().map(|u| u.len() - 1).collect();
            v.sort_unstable();
            v
        };
        let orbits_c = orbit_sizes(&phi, &mut rng);
        let orbits_e = orbit_sizes(&psi, &mut rng);
        let q = self.q() as i128;
        InfinityData {
            delta_c: orbits_c.iter().sum(),
            delta_e: orbits_e.iter().sum(),
            r_c: orbit_correction(&orbits_c, q),
            r_e: orbit_correction(&orbits_e, q),
            orbits_c,
            orbits_e,
            phi,
            psi,
        }
    }

    /// Lifts the coefficients by Teichmuller at precision `N5`.
    pub fn lift(&self, profile: &PrecisionProfile) -> Result<LiftedCurve> {
        let case = self.ensure_smooth()?;
        let zq = Zq::new(&self.fq, profile.n5);
        let a: [ZqScaled; 3] = core::array::from_fn(|i| zq.teichmuller(self.a(i)));
        let mut b: [ZqScaled; 5] = core::array::from_fn(|i| zq.teichmuller(self.b(i)));
        if case == CaseTag::Case3 {
            let four = zq.from_i64(4);
            b[4] = zq.div(&zq.mul(&a[2], &a[2]), &four)?;
        }
        Ok(LiftedCurve { input: self.clone(), zq, a, b, case, inf: self.infinity_data() })
    }

    /// Evaluates `f` at a point of `F_q`.
    pub fn eval(&self, x: &Fq, y: &Fq) -> Fq {
        let f = &self.fq;
        let g = poly::eval(f, &self.g.to_vec(), x);
        let h = poly::eval(f, &self.h.to_vec(), x);
        let y2 = f.mul(y, y);
        f.add(&f.mul(&y2, &f.add(&y2, &g)), &h)
    }

    /// A random smooth curve of the requested case.
    pub fn random<R: RngCore>(fq: &Gf, case: CaseTag, rng: &mut R) -> Self {
        let q = fq.order() as u64;
        let n = fq.degree();
        loop {
            let mut pick = |nonzero: bool| loop {
                let e = fq.decode(rng.next_u64() % q);
                if !nonzero || !fq.is_zero(&e) {
                    break e;
                }
            };
            let mut g: [Fq; 3] = core::array::from_fn(|_| pick(false));
            let mut h: [Fq; 5] = core::array::from_fn(|_| pick(false));
            let zero = vec![0u64; n];
            match case {
                CaseTag::Case1 => {
                    g[2] = zero.clone();
                    h[4] = zero;
                }
                CaseTag::Case2 => {
                    g[2] = pick(true);
                    h[4] = zero;
                }
                CaseTag::Case3 => {
                    g[2] = pick(true);
                    let a2 = &g[2];
                    h[4] = fq.div(&fq.mul(a2, a2), &fq.from_u64(4)).unwrap();
                }
                CaseTag::Case4 => {
                    h[4] = pick(true);
                }
            }
            let c = CurveInput { fq: fq.clone(), g, h };
            if c.classify() == case && c.check_smoothness().is_ok() {
                return c;
            }
        }
    }
}

/// `prod_O (X^|O| - q^|O|) / (X - q)`, integer coefficients, low degree
/// first.
pub fn orbit_correction(orbits: &[usize], q: i128) -> Vec<i128> {
    let mut acc = vec![1i128];
    for &s in orbits {
        let mut next = vec![0i128; acc.len() + s];
        let qs = q.pow(s as u32);
        for (i, c) in acc.iter().enumerate() {
            next[i + s] += c;
            next[i] -= c * qs;
        }
        acc = next;
    }
    // synthetic division by X - q
    let d = acc.len() - 1;
    let mut out = vec![0i128; d];
    let mut carry = 0i128;
    for i in (1..=d).rev() {
        carry = acc[i] + carry * q;
        out[i - 1] = carry;
    }
    debug_assert_eq!(acc[0] + carry * q, 0);
    out
}

/// Points at infinity of `C` and of the quotient `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfinityData {
    /// `w^4 + a2 w^2 + b4`.
    pub phi: Poly<Gf>,
    /// `w^2 + a2 w + b4`.
    pub psi: Poly<Gf>,
    pub delta_c: usize,
    pub delta_e: usize,
    /// Frobenius orbit sizes on the distinct roots, ascending.
    pub orbits_c: Vec<usize>,
    pub orbits_e: Vec<usize>,
    /// Orbit corrections, monic, low degree first.
    pub r_c: Vec<i128>,
    pub r_e: Vec<i128>,
}

/// The Teichmuller-lifted curve over `Z_q`.
#[derive(Clone, Debug)]
pub struct LiftedCurve {
    pub input: CurveInput,
    pub zq: Zq,
    pub a: [ZqScaled; 3],
    pub b: [ZqScaled; 5],
    pub case: CaseTag,
    pub inf: InfinityData,
}

impl LiftedCurve {
    pub fn p(&self) -> u64 {
        self.zq.p()
    }

    pub fn n(&self) -> usize {
        self.zq.degree()
    }

    /// `a2^2 - 4 b4`.
    pub fn psi_discriminant(&self) -> ZqScaled {
        let zq = &self.zq;
        zq.sub(&zq.mul(&self.a[2], &self.a[2]), &zq.mul_i64(&self.b[4], 4))
    }

    /// The same curve lifted into a context with another precision cap.
    pub fn with_cap(&self, cap: u32) -> Result<LiftedCurve> {
        let zq = Zq::new(&self.input.fq, cap);
        let a: [ZqScaled; 3] = core::array::from_fn(|i| zq.teichmuller(&self.input.g[i]));
        let mut b: [ZqScaled; 5] = core::array::from_fn(|i| zq.teichmuller(&self.input.h[i]));
        if self.case == CaseTag::Case3 {
            b[4] = zq.div(&zq.mul(&a[2], &a[2]), &zq.from_i64(4))?;
        }
        Ok(LiftedCurve { zq, a, b, ..self.clone() })
    }

    /// The curve with `sigma` applied to every coefficient.
    pub fn sigma(&self) -> LiftedCurve {
        let zq = &self.zq;
        LiftedCurve {
            a: self.a.clone().map(|c| zq.sigma(&c)),
            b: self.b.clone().map(|c| zq.sigma(&c)),
            ..self.clone()
        }
    }
}
