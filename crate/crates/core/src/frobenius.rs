//! The lift of Frobenius `x -> F(x)`, `y -> F(y)` on the truncated ring.
//!
//! With `alpha f_y + beta f_x = 1 (mod p, f)`, put `delta_x = beta^p`,
//! `delta_y = alpha^p` and solve `G(Z) = f^sigma(x^p + delta_x Z, y^p +
//! delta_y Z) = 0` by Newton iteration. Then `F(x) = x^p + delta_x Z0`,
//! `F(y) = y^p + delta_y Z0`, and `F` commutes with `y -> -y`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{AlgElem, AlgebraCtx, DifferentialForm, NttResources};
use crate::curve::{CurveInput, LiftedCurve};
use crate::field::{linalg, Field, Gf};
use crate::padic::ZqInt;
use crate::{Error, Result};

/// Bivariate polynomial over `F_q`: `(i, j) -> coefficient of x^j y^i`.
pub type BiPoly = BTreeMap<(usize, usize), Vec<u64>>;

/// Cofactors with `alpha f_y + beta f_x = 1` in `F_q[x, y]/(f)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BezoutPair {
    pub alpha: BiPoly,
    pub beta: BiPoly,
}

fn bi_add_term(f: &Gf, p: &mut BiPoly, key: (usize, usize), c: &Vec<u64>) {
    if f.is_zero(c) {
        return;
    }
    let e = p.entry(key).or_insert_with(|| f.zero());
    *e = f.add(e, c);
    if f.is_zero(e) {
        p.remove(&key);
    }
}

fn bi_mul(f: &Gf, a: &BiPoly, b: &BiPoly) -> BiPoly {
    let mut out = BiPoly::new();
    for (&(i1, j1), c1) in a {
        for (&(i2, j2), c2) in b {
            bi_add_term(f, &mut out, (i1 + i2, j1 + j2), &f.mul(c1, c2));
        }
    }
    out
}

fn bi_add(f: &Gf, a: &BiPoly, b: &BiPoly) -> BiPoly {
    let mut out = a.clone();
    for (&k, c) in b {
        bi_add_term(f, &mut out, k, c);
    }
    out
}

/// `f = y^4 + g y^2 + h` and its partial derivatives.
fn curve_polys(c: &CurveInput) -> (BiPoly, BiPoly, BiPoly) {
    let f = &c.fq;
    let mut fp = BiPoly::new();
    let mut fy = BiPoly::new();
    let mut fx = BiPoly::new();
    bi_add_term(f, &mut fp, (4, 0), &f.one());
    bi_add_term(f, &mut fy, (3, 0), &f.from_i64(4));
    for (m, a) in c.g.iter().enumerate() {
        bi_add_term(f, &mut fp, (2, m), a);
        bi_add_term(f, &mut fy, (1, m), &f.mul(a, &f.from_i64(2)));
        if m > 0 {
            bi_add_term(f, &mut fx, (2, m - 1), &f.mul(a, &f.from_i64(m as i64)));
        }
    }
    for (m, b) in c.h.iter().enumerate() {
        bi_add_term(f, &mut fp, (0, m), b);
        if m > 0 {
            bi_add_term(f, &mut fx, (0, m - 1), &f.mul(b, &f.from_i64(m as i64)));
        }
    }
    (fp, fy, fx)
}

/// Reduces to `deg_y <= 3` with `y^4 = -g y^2 - h`.
pub fn reduce_mod_curve(c: &CurveInput, a: &BiPoly) -> BiPoly {
    let f = &c.fq;
    let mut out = a.clone();
    while let Some((&(i, j), _)) = out.iter().rev().find(|(&(i, _), _)| i >= 4) {
        let v = out.remove(&(i, j)).unwrap();
        for (m, gm) in c.g.iter().enumerate() {
            bi_add_term(f, &mut out, (i - 2, j + m), &f.neg(&f.mul(&v, gm)));
        }
        for (m, hm) in c.h.iter().enumerate() {
            bi_add_term(f, &mut out, (i - 4, j + m), &f.neg(&f.mul(&v, hm)));
        }
    }
    out
}

fn monomials(deg: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for t in 0..=deg {
        for i in 0..=t {
            out.push((i, t - i));
        }
    }
    out
}

/// Total degree of a nonzero polynomial.
pub fn total_degree(a: &BiPoly) -> Option<usize> {
    a.keys().map(|&(i, j)| i + j).max()
}

/// Solves `g0 f + alpha f_y + beta f_x = 1` with `deg g0 <= 4`,
/// `deg alpha, deg beta <= 5`, then keeps the odd part of `alpha` and the
/// even part of `beta`.
pub fn solve_bezout(c: &CurveInput) -> Result<BezoutPair> {
    let f = &c.fq;
    let (fp, fy, fx) = curve_polys(c);
    let rows = monomials(8);
    let row_of: BTreeMap<(usize, usize), usize> = rows.iter().enumerate().map(|(r, &m)| (m, r)).collect();
    let m4 = monomials(4);
    let m5 = monomials(5);
    let cols = m4.len() + 2 * m5.len();
    let mut a = vec![vec![f.zero(); cols]; rows.len()];
    let mut col = 0;
    for (mons, mult) in [(&m4, &fp), (&m5, &fy), (&m5, &fx)] {
        for &(i, j) in mons.iter() {
            for (&(fi, fj), v) in mult {
                a[row_of[&(i + fi, j + fj)]][col] = v.clone();
            }
            col += 1;
        }
    }
    let mut rhs = vec![f.zero(); rows.len()];
    rhs[row_of[&(0, 0)]] = f.one();
    let sol = linalg::solve(f, &a, &rhs)
        .ok_or_else(|| Error::Assumption(format!("Bezout system infeasible over F_{}", f.order())))?;
    let mut alpha = BiPoly::new();
    let mut beta = BiPoly::new();
    for (k, &(i, j)) in m5.iter().enumerate() {
        if i % 2 == 1 {
            bi_add_term(f, &mut alpha, (i, j), &sol[m4.len() + k]);
        } else {
            bi_add_term(f, &mut beta, (i, j), &sol[m4.len() + m5.len() + k]);
        }
    }
    let pair = BezoutPair { alpha, beta };
    if !verify_bezout(c, &pair) {
        return Err(Error::Internal("Bezout cofactors fail the identity".into()));
    }
    Ok(pair)
}

/// Whether `alpha f_y + beta f_x - 1` vanishes in `F_q[x, y]/(f)`.
pub fn verify_bezout(c: &CurveInput, pair: &BezoutPair) -> bool {
    let f = &c.fq;
    let (_, fy, fx) = curve_polys(c);
    let mut s = bi_add(f, &bi_mul(f, &pair.alpha, &fy), &bi_mul(f, &pair.beta, &fx));
    bi_add_term(f, &mut s, (0, 0), &f.neg(&f.one()));
    reduce_mod_curve(c, &s).is_empty()
}

/// The lifted Frobenius on the truncated ring at precision `N4`.
#[derive(Clone, Debug)]
pub struct FrobeniusData {
    pub ctx: AlgebraCtx,
    pub delta_x: AlgElem,
    pub delta_y: AlgElem,
    pub z0: AlgElem,
    pub fx: AlgElem,
    pub fy: AlgElem,
    /// `Fx^k`, `k = 0..2`.
    pub fx_pows: Vec<AlgElem>,
    /// `Fy^l`, `l = 0..3`.
    pub fy_pows: Vec<AlgElem>,
    pub dfx: DifferentialForm,
    /// Newton steps performed.
    pub iterations: usize,
}

/// A polynomial over `F_q` with canonical lifts of its coefficients, as an
/// element of the truncated ring.
pub fn lift_bipoly(ctx: &AlgebraCtx, a: &BiPoly) -> AlgElem {
    let zq = ctx.zq();
    let y = ctx.monomial(1, 0, &zq.int_one());
    let y3 = ctx.monomial(3, 0, &zq.int_one());
    let y4 = ctx.mul(&y3, &y);
    let y5 = ctx.mul(&y4, &y);
    let mut out = ctx.zero();
    for (&(i, j), c) in a {
        let c = zq.canonical_lift(c);
        let term = match i {
            0..=3 => ctx.monomial(i, j, &c),
            4 => ctx.scale(&ctx.shift_x(&y4, j), &c),
            5 => ctx.scale(&ctx.shift_x(&y5, j), &c),
            _ => ctx.scale(&ctx.shift_x(&ctx.pow(&y, i as u64), j), &c),
        };
        ctx.add_assign(&mut out, &term);
    }
    out
}

/// `f^sigma` coefficients `(g, h)` at precision `e`.
fn sigma_coeffs(curve: &LiftedCurve, e: u32) -> Result<(Vec<ZqInt>, Vec<ZqInt>)> {
    let s = curve.sigma();
    let zq = &curve.zq;
    let g = s.a.iter().map(|c| zq.to_int(c, e)).collect::<Result<Vec<_>>>()?;
    let h = s.b.iter().map(|c| zq.to_int(c, e)).collect::<Result<Vec<_>>>()?;
    Ok((g, h))
}

fn derivative(zq: &crate::padic::Zq, c: &[ZqInt], e: u32) -> Vec<ZqInt> {
    c.iter().enumerate().skip(1).map(|(k, v)| zq.int_mul_u64(v, k as u64, e)).collect()
}

/// `G(Z)` and `G'(Z)`.
struct Residual<'a> {
    ctx: &'a AlgebraCtx,
    g: Vec<ZqInt>,
    h: Vec<ZqInt>,
    dg: Vec<ZqInt>,
    dh: Vec<ZqInt>,
    xp: AlgElem,
    yp: AlgElem,
    delta_x: AlgElem,
    delta_y: AlgElem,
}

impl Residual<'_> {
    fn images(&self, z: &AlgElem) -> (AlgElem, AlgElem) {
        let c = self.ctx;
        (c.add(&self.xp, &c.mul(&self.delta_x, z)), c.add(&self.yp, &c.mul(&self.delta_y, z)))
    }

    fn value(&self, z: &AlgElem) -> AlgElem {
        let c = self.ctx;
        let (fx, fy) = self.images(z);
        let fy2 = c.square(&fy);
        let gx = c.eval_poly(&self.g, &fx);
        let hx = c.eval_poly(&self.h, &fx);
        c.add(&c.add(&c.square(&fy2), &c.mul(&gx, &fy2)), &hx)
    }

    fn value_and_derivative(&self, z: &AlgElem) -> (AlgElem, AlgElem) {
        let c = self.ctx;
        let (fx, fy) = self.images(z);
        let fy2 = c.square(&fy);
        let fy3 = c.mul(&fy2, &fy);
        let gx = c.eval_poly(&self.g, &fx);
        let hx = c.eval_poly(&self.h, &fx);
        let dgx = c.eval_poly(&self.dg, &fx);
        let dhx = c.eval_poly(&self.dh, &fx);
        let val = c.add(&c.add(&c.square(&fy2), &c.mul(&gx, &fy2)), &hx);
        let gxp = c.add(&c.mul(&dgx, &fy2), &dhx);
        let gyp = c.add(&c.scale_u64(&fy3, 4), &c.scale_u64(&c.mul(&gx, &fy), 2));
        let der = c.add(&c.mul(&gxp, &self.delta_x), &c.mul(&gyp, &self.delta_y));
        (val, der)
    }
}

/// Precisions `ceil(n4 / 2^t)`, ascending, starting at 1.
pub fn newton_schedule(n4: u32) -> Vec<u32> {
    let mut out = vec![n4.max(1)];
    while *out.last().unwrap() > 1 {
        let e = *out.last().unwrap();
        out.push(e.div_ceil(2));
    }
    out.reverse();
    out
}

impl FrobeniusData {
    /// Runs Newton's iteration with precision doubling up to `p^n4`.
    pub fn build(curve: &LiftedCurve, bezout: &BezoutPair, n3: usize, n4: u32, ntt: NttResources) -> Result<Self> {
        let p = curve.p();
        if (p as usize) >= n3 {
            return Err(Error::Validation(format!("x-truncation {n3} below p = {p}")));
        }
        let curve = if curve.zq.cap() < n4 + 4 { curve.with_cap(n4 + 4)? } else { curve.clone() };
        let zq = &curve.zq;
        let top = AlgebraCtx::for_curve(&curve, n3, n4, ntt)?;
        let delta_x = top.pow(&lift_bipoly(&top, &bezout.beta), p);
        let delta_y = top.pow(&lift_bipoly(&top, &bezout.alpha), p);
        let xp = top.monomial(0, p as usize, &zq.int_one());
        let yp = top.pow(&top.monomial(1, 0, &zq.int_one()), p);
        let (g, h) = sigma_coeffs(&curve, n4)?;
        let (dg, dh) = (derivative(zq, &g, n4), derivative(zq, &h, n4));

        let schedule = newton_schedule(n4);
        let mut prev: Option<AlgebraCtx> = None;
        let mut z = top.zero();
        let mut w = top.one();
        let mut iterations = 0;
        for &e in &schedule {
            let ctx = if e == n4 { top.clone() } else { top.with_precision(e) };
            let from = prev.as_ref().unwrap_or(&top);
            z = from.convert(&z, &ctx);
            w = from.convert(&w, &ctx);
            let res = Residual {
                ctx: &ctx,
                g: g.clone(),
                h: h.clone(),
                dg: dg.clone(),
                dh: dh.clone(),
                xp: top.convert(&xp, &ctx),
                yp: top.convert(&yp, &ctx),
                delta_x: top.convert(&delta_x, &ctx),
                delta_y: top.convert(&delta_y, &ctx),
            };
            let gz = res.value(&z);
            z = ctx.sub(&z, &ctx.mul(&gz, &w));
            let (_, dgz) = res.value_and_derivative(&z);
            let two = ctx.scale_u64(&ctx.one(), 2);
            w = ctx.mul(&w, &ctx.sub(&two, &ctx.mul(&dgz, &w)));
            iterations += 1;
            prev = Some(ctx);
        }

        let res = Residual {
            ctx: &top,
            g,
            h,
            dg,
            dh,
            xp: xp.clone(),
            yp: yp.clone(),
            delta_x: delta_x.clone(),
            delta_y: delta_y.clone(),
        };
        if !top.is_zero(&res.value(&z)) {
            return Err(Error::Internal(format!("Newton iteration did not converge after {iterations} steps")));
        }
        let (fx, fy) = res.images(&z);
        let fx2 = top.square(&fx);
        let fy2 = top.square(&fy);
        let fy3 = top.mul(&fy2, &fy);
        let dfx = top.total_differential(&fx);
        Ok(FrobeniusData {
            delta_x,
            delta_y,
            z0: z,
            fx_pows: vec![top.one(), fx.clone(), fx2],
            fy_pows: vec![top.one(), fy.clone(), fy2, fy3],
            fx,
            fy,
            dfx,
            iterations,
            ctx: top,
        })
    }

    /// `F(x^k y^l dx) = Fx^k Fy^l dFx`, normalized to a `dx`-only form.
    pub fn frobenius_form(&self, k: usize, l: usize) -> DifferentialForm {
        let c = &self.ctx;
        let m = c.mul(&self.fx_pows[k], &self.fy_pows[l]);
        let w = DifferentialForm { a: c.mul(&m, &self.dfx.a), b: c.mul(&m, &self.dfx.b), denom: 1, normalized: false };
        c.normalize_to_dx(&w)
    }

    /// `G(Z0)` recomputed from the stored images.
    pub fn residual(&self, curve: &LiftedCurve) -> Result<AlgElem> {
        let c = &self.ctx;
        let (g, h) = sigma_coeffs(curve, c.prec())?;
        let fy2 = c.square(&self.fy);
        let gx = c.eval_poly(&g, &self.fx);
        let hx = c.eval_poly(&h, &self.fx);
        Ok(c.add(&c.add(&c.square(&fy2), &c.mul(&gx, &fy2)), &hx))
    }

    /// Monomials `(i, j)` of `Z0` with `ord_p < (i + j)/(16p)` or equal.
    pub fn z0_decay_violations(&self, p: u64) -> Vec<(usize, usize)> {
        decay_violations(&self.ctx, &self.z0, p, 0, 0)
    }

    /// Monomials of a normalized form whose coefficient `b_ij` (after the
    /// denominator) has `ord_p <= (i + j)/(16p) - 4`.
    pub fn form_decay_violations(&self, w: &DifferentialForm, p: u64) -> Vec<(usize, usize)> {
        let vd = valuation_u64(p, w.denom);
        decay_violations(&self.ctx, &w.a, p, vd, 4)
    }
}

/// Coefficients with `16 p (ord - shift + slack) <= i + j`; coefficients
/// that vanish at the working precision pass.
fn decay_violations(ctx: &AlgebraCtx, a: &AlgElem, p: u64, shift: u32, slack: u32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, j, c) in ctx.terms(a) {
        let Some(v) = ctx.zq().int_valuation(&c) else { continue };
        let lhs = 16 * p as i64 * (v as i64 - shift as i64 + slack as i64);
        if lhs <= (i + j) as i64 {
            out.push((i, j));
        }
    }
    out
}

fn valuation_u64(p: u64, mut m: u64) -> u32 {
    let mut v = 0;
    while m != 0 && m % p == 0 {
        m /= p;
        v += 1;
    }
    v
}
