//! The truncated coordinate ring `A = Z_q[x, y]/(f, x^N3, p^e)` with
//! `deg_y <= 3`, and differential forms on it.
//!
//! `x^N3 A` is an ideal of `A` (reducing `y^4` only raises `x`-degrees), so
//! truncated arithmetic is exact ring arithmetic in the quotient.
//!
//! Coefficients are residues mod `p^e` stored as fixed-width limbs: an
//! element is a flat array indexed by `(i, j, t, limb)` for the coefficient
//! of `x^j y^i`, component `T^t` of `Z_q = Z_p[T]/(M)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::curve::LiftedCurve;
use crate::mp::MontCtx;
use crate::ntt::{CrtToMod, NttEngine};
use crate::padic::{Zq, ZqInt};

/// An element of the truncated ring. Only meaningful together with the
/// [`AlgebraCtx`] that created it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgElem {
    data: Vec<u64>,
}

/// A `Z_q` constant in Montgomery form, per `T`-component.
#[derive(Clone, Debug)]
pub struct ConstMont {
    comps: Vec<Vec<u64>>,
}

/// Shared NTT resources for every precision of one run.
#[derive(Clone, Debug)]
pub struct NttResources {
    engine: Arc<NttEngine>,
}

impl NttResources {
    /// Enough primes and transform length for products at precision up to
    /// `max_prec` with `x`-truncation `n3`.
    pub fn new(zq: &Zq, n3: usize, max_prec: u32) -> Self {
        let n = zq.degree();
        let pbits = BigUint::from(zq.p()).pow(max_prec).bits();
        let terms = (4 * n * n3) as u64;
        let bits = 2 * pbits + (64 - terms.leading_zeros()) as u64 + 2;
        let len = 2 * n3 * (2 * n - 1);
        let log_len = usize::BITS - (len.max(2) - 1).leading_zeros();
        NttResources { engine: Arc::new(NttEngine::new(bits, log_len)) }
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraCtx {
    zq: Zq,
    n: usize,
    n3: usize,
    prec: u32,
    mont: MontCtx,
    l: usize,
    /// Negated curve coefficients `-g_k`, `-h_k`.
    neg_g: [ConstMont; 3],
    neg_h: [ConstMont; 5],
    g_int: [ZqInt; 3],
    h_int: [ZqInt; 5],
    /// Montgomery forms of `-m_i` for the reduction `T^n = -sum m_i T^i`.
    neg_m: Vec<Vec<u64>>,
    ntt: NttResources,
    /// Products with fewer than this many coefficient pairs use schoolbook.
    schoolbook_cutoff: usize,
}

impl AlgebraCtx {
    /// The ring for the curve `y^4 + g y^2 + h`, truncated at `x^n3` and
    /// `p^prec`. `g`, `h` are integral coefficient vectors.
    pub fn new(zq: &Zq, g: &[ZqInt; 3], h: &[ZqInt; 5], n3: usize, prec: u32, ntt: NttResources) -> Self {
        let n = zq.degree();
        let pe = BigUint::from(zq.p()).pow(prec);
        let mont = MontCtx::new(&pe);
        let l = mont.limbs();
        let neg = |c: &ZqInt| -> ConstMont {
            let mut c = c.clone();
            zq.int_reduce(&mut c, prec);
            let neg: ZqInt = c.iter().map(|x| if x.is_zero() { x.clone() } else { &pe - x }).collect();
            ConstMont { comps: neg.iter().map(|x| mont.to_mont(x)).collect() }
        };
        let neg_g = core::array::from_fn(|k| neg(&g[k]));
        let neg_h = core::array::from_fn(|k| neg(&h[k]));
        let modulus = zq.fq().modulus();
        let neg_m = (0..n)
            .map(|i| {
                let mi = BigUint::from(modulus[i]);
                let v = if mi.is_zero() { mi } else { &pe - mi };
                mont.to_mont(&v)
            })
            .collect();
        AlgebraCtx {
            zq: zq.clone(),
            n,
            n3,
            prec,
            mont,
            l,
            neg_g,
            neg_h,
            g_int: g.clone(),
            h_int: h.clone(),
            neg_m,
            ntt,
            schoolbook_cutoff: 4096,
        }
    }

    /// The ring of a lifted curve.
    pub fn for_curve(curve: &LiftedCurve, n3: usize, prec: u32, ntt: NttResources) -> crate::Result<Self> {
        let zq = &curve.zq;
        let g: [ZqInt; 3] = [zq.to_int(&curve.a[0], prec)?, zq.to_int(&curve.a[1], prec)?, zq.to_int(&curve.a[2], prec)?];
        let mut h: [ZqInt; 5] = core::array::from_fn(|_| zq.int_zero());
        for (k, c) in curve.b.iter().enumerate() {
            h[k] = zq.to_int(c, prec)?;
        }
        Ok(AlgebraCtx::new(zq, &g, &h, n3, prec, ntt))
    }

    /// The same ring at another `p`-adic precision.
    pub fn with_precision(&self, prec: u32) -> Self {
        AlgebraCtx::new(&self.zq, &self.g_int, &self.h_int, self.n3, prec, self.ntt.clone())
    }

    /// Forces the schoolbook path for all products (testing).
    pub fn set_schoolbook_cutoff(&mut self, cutoff: usize) {
        self.schoolbook_cutoff = cutoff;
    }

    pub fn zq(&self) -> &Zq {
        &self.zq
    }
    pub fn n3(&self) -> usize {
        self.n3
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn modulus(&self) -> &BigUint {
        self.mont.modulus()
    }

    #[inline]
    fn stride(&self) -> usize {
        self.n * self.l
    }

    #[inline]
    fn row_len(&self) -> usize {
        self.n3 * self.stride()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        (i * self.n3 + j) * self.stride()
    }

    pub fn zero(&self) -> AlgElem {
        AlgElem { data: vec![0; 4 * self.row_len()] }
    }

    pub fn one(&self) -> AlgElem {
        let mut e = self.zero();
        self.set(&mut e, 0, 0, &self.zq.int_one());
        e
    }

    /// `c x^j y^i`; zero if `j >= N3`.
    pub fn monomial(&self, i: usize, j: usize, c: &ZqInt) -> AlgElem {
        let mut e = self.zero();
        if j < self.n3 {
            self.set(&mut e, i, j, c);
        }
        e
    }

    pub fn is_zero(&self, e: &AlgElem) -> bool {
        e.data.iter().all(|&w| w == 0)
    }

    /// Coefficient of `x^j y^i` as an integral `Z_q` element mod `p^e`.
    pub fn get(&self, e: &AlgElem, i: usize, j: usize) -> ZqInt {
        let o = self.offset(i, j);
        (0..self.n)
            .map(|t| self.mont.to_big(&e.data[o + t * self.l..o + (t + 1) * self.l]))
            .collect()
    }

    pub fn set(&self, e: &mut AlgElem, i: usize, j: usize, c: &ZqInt) {
        let o = self.offset(i, j);
        for t in 0..self.n {
            let v = self.mont.from_big(&c[t]);
            e.data[o + t * self.l..o + (t + 1) * self.l].copy_from_slice(&v);
        }
    }

    /// Whether the coefficient of `x^j y^i` is zero.
    pub fn coeff_is_zero(&self, e: &AlgElem, i: usize, j: usize) -> bool {
        let o = self.offset(i, j);
        e.data[o..o + self.stride()].iter().all(|&w| w == 0)
    }

    /// `p`-adic valuation of a coefficient, `None` when zero mod `p^e`.
    pub fn coeff_valuation(&self, e: &AlgElem, i: usize, j: usize) -> Option<u32> {
        if self.coeff_is_zero(e, i, j) {
            return None;
        }
        self.zq.int_valuation(&self.get(e, i, j))
    }

    /// Highest `x`-degree present in row `i`, plus one.
    pub fn row_len_used(&self, e: &AlgElem, i: usize) -> usize {
        let s = self.stride();
        let row = &e.data[i * self.row_len()..(i + 1) * self.row_len()];
        (0..self.n3).rev().find(|&j| row[j * s..(j + 1) * s].iter().any(|&w| w != 0)).map_or(0, |j| j + 1)
    }

    pub fn add(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        let mut out = a.clone();
        self.add_assign(&mut out, b);
        out
    }

    pub fn add_assign(&self, a: &mut AlgElem, b: &AlgElem) {
        for (x, y) in a.data.chunks_exact_mut(self.l).zip(b.data.chunks_exact(self.l)) {
            if y.iter().any(|&w| w != 0) {
                self.mont.add_assign(x, y);
            }
        }
    }

    pub fn sub(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        let mut out = a.clone();
        for (x, y) in out.data.chunks_exact_mut(self.l).zip(b.data.chunks_exact(self.l)) {
            if y.iter().any(|&w| w != 0) {
                self.mont.sub_assign(x, y);
            }
        }
        out
    }

    pub fn neg(&self, a: &AlgElem) -> AlgElem {
        self.sub(&self.zero(), a)
    }

    pub fn const_mont(&self, c: &ZqInt) -> ConstMont {
        let mut c = c.clone();
        self.zq.int_reduce(&mut c, self.prec);
        ConstMont { comps: c.iter().map(|x| self.mont.to_mont(x)).collect() }
    }

    /// `acc += a * c` for one `Z_q` coefficient (slices of `n l` limbs).
    fn zq_fma(&self, acc: &mut [u64], a: &[u64], c: &ConstMont, tmp: &mut [u64]) {
        let l = self.l;
        if self.n == 1 {
            self.mont.fma_const(acc, a, &c.comps[0]);
            return;
        }
        let n = self.n;
        let prod = &mut tmp[..(2 * n - 1) * l];
        prod.iter_mut().for_each(|w| *w = 0);
        let mut t = vec![0u64; l];
        for s in 0..n {
            let ai = &a[s * l..(s + 1) * l];
            if ai.iter().all(|&w| w == 0) {
                continue;
            }
            for (u, cu) in c.comps.iter().enumerate() {
                if cu.iter().all(|&w| w == 0) {
                    continue;
                }
                self.mont.mont_mul(ai, cu, &mut t);
                self.mont.add_assign(&mut prod[(s + u) * l..(s + u + 1) * l], &t);
            }
        }
        self.reduce_t(prod);
        for s in 0..n {
            self.mont.add_assign(&mut acc[s * l..(s + 1) * l], &prod[s * l..(s + 1) * l]);
        }
    }

    /// Folds components `T^t`, `t >= n`, of a `(2n-1) l`-limb slice.
    fn reduce_t(&self, prod: &mut [u64]) {
        let n = self.n;
        let l = self.l;
        let mut t = vec![0u64; l];
        let top = prod.len() / l;
        for s in (n..top).rev() {
            let c: Vec<u64> = prod[s * l..(s + 1) * l].to_vec();
            if c.iter().all(|&w| w == 0) {
                continue;
            }
            for i in 0..n {
                if self.neg_m[i].iter().all(|&w| w == 0) {
                    continue;
                }
                self.mont.mont_mul(&c, &self.neg_m[i], &mut t);
                self.mont.add_assign(&mut prod[(s - n + i) * l..(s - n + i + 1) * l], &t);
            }
        }
    }

    /// `c * a` for a `Z_q` constant.
    pub fn scale(&self, a: &AlgElem, c: &ZqInt) -> AlgElem {
        let cm = self.const_mont(c);
        self.scale_mont(a, &cm)
    }

    pub fn scale_mont(&self, a: &AlgElem, cm: &ConstMont) -> AlgElem {
        let mut out = self.zero();
        let s = self.stride();
        let mut tmp = vec![0u64; (2 * self.n) * self.l];
        for (o, x) in out.data.chunks_exact_mut(s).zip(a.data.chunks_exact(s)) {
            if x.iter().all(|&w| w == 0) {
                continue;
            }
            self.zq_fma(o, x, cm, &mut tmp);
        }
        out
    }

    pub fn scale_u64(&self, a: &AlgElem, c: u64) -> AlgElem {
        self.scale(a, &self.zq.int_from_u64(c))
    }

    /// `x^k a`.
    pub fn shift_x(&self, a: &AlgElem, k: usize) -> AlgElem {
        let mut out = self.zero();
        let s = self.stride();
        for i in 0..4 {
            for j in 0..self.n3.saturating_sub(k) {
                let src = self.offset(i, j);
                let dst = self.offset(i, j + k);
                out.data[dst..dst + s].copy_from_slice(&a.data[src..src + s]);
            }
        }
        out
    }

    /// Zeroes every coefficient of `x`-degree `>= cut`.
    pub fn truncate_x(&self, a: &mut AlgElem, cut: usize) {
        for i in 0..4 {
            for j in cut.min(self.n3)..self.n3 {
                let o = self.offset(i, j);
                a.data[o..o + self.stride()].iter_mut().for_each(|w| *w = 0);
            }
        }
    }

    /// Product rows `P_0..P_6` (as a flat `7 x N3` array) reduced to
    /// `deg_y <= 3` in place.
    fn reduce_y(&self, mut rows: Vec<u64>) -> AlgElem {
        let rl = self.row_len();
        let s = self.stride();
        let mut tmp = vec![0u64; 2 * self.n * self.l];
        for deg in (4..7).rev() {
            let (low, high) = rows.split_at_mut(deg * rl);
            let src = &high[..rl];
            for j in 0..self.n3 {
                let c = &src[j * s..(j + 1) * s];
                if c.iter().all(|&w| w == 0) {
                    continue;
                }
                // y^deg = -g y^(deg-2) - h y^(deg-4)
                for (k, gk) in self.neg_g.iter().enumerate() {
                    if j + k < self.n3 {
                        let o = (deg - 2) * rl + (j + k) * s;
                        self.zq_fma(&mut low[o..o + s], c, gk, &mut tmp);
                    }
                }
                for (k, hk) in self.neg_h.iter().enumerate() {
                    if j + k < self.n3 {
                        let o = (deg - 4) * rl + (j + k) * s;
                        self.zq_fma(&mut low[o..o + s], c, hk, &mut tmp);
                    }
                }
            }
        }
        rows.truncate(4 * rl);
        AlgElem { data: rows }
    }

    pub fn mul(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        let la: [usize; 4] = core::array::from_fn(|i| self.row_len_used(a, i));
        let lb: [usize; 4] = core::array::from_fn(|i| self.row_len_used(b, i));
        let ma = *la.iter().max().unwrap();
        let mb = *lb.iter().max().unwrap();
        if ma == 0 || mb == 0 {
            return self.zero();
        }
        let pairs: usize = (0..4).map(|i| la[i]).sum::<usize>() * (0..4).map(|i| lb[i]).sum::<usize>();
        if pairs * self.n * self.n <= self.schoolbook_cutoff {
            self.mul_schoolbook(a, b)
        } else {
            self.mul_ntt(a, b, &la, &lb)
        }
    }

    pub fn square(&self, a: &AlgElem) -> AlgElem {
        self.mul(a, a)
    }

    /// Quadratic reference product.
    pub fn mul_schoolbook(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        let n = self.n;
        let l = self.l;
        let s = self.stride();
        let rl = self.row_len();
        let mut rows = vec![0u64; 7 * rl];
        let wide = 2 * n - 1;
        let mut acc = vec![0u64; wide * l];
        let mut t = vec![0u64; l];
        // b in Montgomery form, so that mont_mul yields plain products
        let mut bm = vec![0u64; b.data.len()];
        for (o, x) in bm.chunks_exact_mut(l).zip(b.data.chunks_exact(l)) {
            if x.iter().any(|&w| w != 0) {
                self.mont.to_mont_limbs(x, o);
            }
        }
        for i1 in 0..4 {
            for j1 in 0..self.n3 {
                let oa = self.offset(i1, j1);
                let ca = &a.data[oa..oa + s];
                if ca.iter().all(|&w| w == 0) {
                    continue;
                }
                for i2 in 0..4 {
                    for j2 in 0..self.n3 - j1 {
                        let ob = self.offset(i2, j2);
                        let cb = &bm[ob..ob + s];
                        if cb.iter().all(|&w| w == 0) {
                            continue;
                        }
                        acc.iter_mut().for_each(|w| *w = 0);
                        for u in 0..n {
                            for v in 0..n {
                                self.mont.mont_mul(&ca[u * l..(u + 1) * l], &cb[v * l..(v + 1) * l], &mut t);
                                self.mont.add_assign(&mut acc[(u + v) * l..(u + v + 1) * l], &t);
                            }
                        }
                        if n > 1 {
                            self.reduce_t(&mut acc);
                        }
                        let o = (i1 + i2) * rl + (j1 + j2) * s;
                        for u in 0..n {
                            self.mont.add_assign(&mut rows[o + u * l..o + (u + 1) * l], &acc[u * l..(u + 1) * l]);
                        }
                    }
                }
            }
        }
        self.reduce_y(rows)
    }

    fn mul_ntt(&self, a: &AlgElem, b: &AlgElem, la: &[usize; 4], lb: &[usize; 4]) -> AlgElem {
        let n = self.n;
        let l = self.l;
        let s = self.stride();
        let wide = 2 * n - 1;
        let ma = *la.iter().max().unwrap();
        let mb = *lb.iter().max().unwrap();
        let out_len = (ma + mb - 1).min(self.n3);
        let slots = (ma + mb - 1) * wide;
        let len = slots.next_power_of_two();
        let engine = &self.ntt.engine;
        let terms = (4 * n * ma.min(mb)) as u64;
        let bits = 2 * self.mont.modulus().bits() + (64 - terms.leading_zeros()) as u64 + 1;
        let k = engine.primes_for_bits(bits);
        let width = out_len * wide;
        // residues[prime][row s][slot]
        let mut residues = vec![0u64; k * 7 * width];
        let mut fa: [Vec<u64>; 4] = core::array::from_fn(|_| Vec::new());
        let mut fb: [Vec<u64>; 4] = core::array::from_fn(|_| Vec::new());
        let mut buf = vec![0u64; len];
        let load = |prime: &crate::ntt::NttPrime, e: &AlgElem, i: usize, used: usize, out: &mut Vec<u64>| {
            out.clear();
            out.resize(len, 0);
            for j in 0..used {
                let o = self.offset(i, j);
                for t in 0..n {
                    let c = &e.data[o + t * l..o + (t + 1) * l];
                    if c.iter().any(|&w| w != 0) {
                        out[j * wide + t] = prime.reduce_limbs(c);
                    }
                }
            }
            prime.forward(out);
        };
        for (pi, prime) in engine.primes()[..k].iter().enumerate() {
            for i in 0..4 {
                if la[i] > 0 {
                    load(prime, a, i, la[i], &mut fa[i]);
                }
                if lb[i] > 0 {
                    load(prime, b, i, lb[i], &mut fb[i]);
                }
            }
            for row in 0..7usize {
                let mut any = false;
                buf.iter_mut().for_each(|w| *w = 0);
                for i1 in 0..4 {
                    let i2 = match row.checked_sub(i1) {
                        Some(v) if v < 4 => v,
                        _ => continue,
                    };
                    if la[i1] == 0 || lb[i2] == 0 {
                        continue;
                    }
                    any = true;
                    for ((o, x), y) in buf.iter_mut().zip(&fa[i1]).zip(&fb[i2]) {
                        let pr = prime.mul(*x, *y);
                        let s = *o + pr;
                        *o = if s >= prime.q { s - prime.q } else { s };
                    }
                }
                if !any {
                    continue;
                }
                prime.inverse_scaled(&mut buf);
                let dst = &mut residues[(pi * 7 + row) * width..(pi * 7 + row + 1) * width];
                dst.copy_from_slice(&buf[..width]);
            }
        }
        let crt = CrtToMod::new(engine, k, &self.mont);
        let rl = self.row_len();
        let mut rows = vec![0u64; 7 * rl];
        let mut res = vec![0u64; k];
        let mut digits = vec![0u64; k];
        let mut scratch = vec![0u64; 2 * l + 1];
        let mut wide_buf = vec![0u64; wide * l];
        for row in 0..7 {
            for j in 0..out_len {
                for t in 0..wide {
                    let slot = j * wide + t;
                    let mut nz = false;
                    for pi in 0..k {
                        res[pi] = residues[(pi * 7 + row) * width + slot];
                        nz |= res[pi] != 0;
                    }
                    let dst = &mut wide_buf[t * l..(t + 1) * l];
                    if !nz {
                        dst.iter_mut().for_each(|w| *w = 0);
                        continue;
                    }
                    engine.garner_digits(&res, &mut digits);
                    crt.apply(&self.mont, &digits, &mut scratch, dst);
                }
                if n > 1 {
                    self.reduce_t(&mut wide_buf);
                }
                let o = row * rl + j * s;
                rows[o..o + s].copy_from_slice(&wide_buf[..s]);
            }
        }
        self.reduce_y(rows)
    }

    pub fn pow(&self, a: &AlgElem, mut k: u64) -> AlgElem {
        let mut base = a.clone();
        let mut acc = self.one();
        let mut first = true;
        while k > 0 {
            if k & 1 == 1 {
                acc = if first { base.clone() } else { self.mul(&acc, &base) };
                first = false;
            }
            k >>= 1;
            if k > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    /// `sum_k c_k a^k` by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[ZqInt], a: &AlgElem) -> AlgElem {
        let mut acc = self.zero();
        for (idx, c) in coeffs.iter().enumerate().rev() {
            if idx + 1 < coeffs.len() {
                acc = self.mul(&acc, a);
            }
            acc = self.add(&acc, &self.scale(&self.one(), c));
        }
        acc
    }

    /// `d/dx`; the coefficient at `x^(N3-1)` is unknown after truncation
    /// and is set to zero.
    pub fn dx(&self, a: &AlgElem) -> AlgElem {
        let mut out = self.zero();
        let s = self.stride();
        let mut tmp = vec![0u64; 2 * self.n * self.l];
        for j in 1..self.n3 {
            let cm = self.const_mont(&self.zq.int_from_u64(j as u64));
            for i in 0..4 {
                let src = self.offset(i, j);
                let c = &a.data[src..src + s];
                if c.iter().all(|&w| w == 0) {
                    continue;
                }
                let dst = self.offset(i, j - 1);
                self.zq_fma(&mut out.data[dst..dst + s], c, &cm, &mut tmp);
            }
        }
        out
    }

    /// `d/dy` on the canonical representative.
    pub fn dy(&self, a: &AlgElem) -> AlgElem {
        let mut out = self.zero();
        let s = self.stride();
        let mut tmp = vec![0u64; 2 * self.n * self.l];
        for i in 1..4 {
            let cm = self.const_mont(&self.zq.int_from_u64(i as u64));
            for j in 0..self.n3 {
                let src = self.offset(i, j);
                let c = &a.data[src..src + s];
                if c.iter().all(|&w| w == 0) {
                    continue;
                }
                let dst = self.offset(i - 1, j);
                self.zq_fma(&mut out.data[dst..dst + s], c, &cm, &mut tmp);
            }
        }
        out
    }

    /// Moves an element to another precision of the same ring (reducing or
    /// embedding residues).
    pub fn convert(&self, a: &AlgElem, target: &AlgebraCtx) -> AlgElem {
        let mut out = target.zero();
        for i in 0..4 {
            for j in 0..self.n3.min(target.n3) {
                if !self.coeff_is_zero(a, i, j) {
                    target.set(&mut out, i, j, &self.get(a, i, j));
                }
            }
        }
        out
    }

    /// Applies `sigma` to every coefficient.
    pub fn sigma(&self, a: &AlgElem) -> AlgElem {
        if self.n == 1 {
            return a.clone();
        }
        let mut out = self.zero();
        for i in 0..4 {
            for j in 0..self.n3 {
                if !self.coeff_is_zero(a, i, j) {
                    self.set(&mut out, i, j, &self.zq.int_sigma(&self.get(a, i, j), self.prec));
                }
            }
        }
        out
    }

    /// Whether only even (`odd == false`) or only odd `y`-degrees occur.
    pub fn has_parity(&self, a: &AlgElem, odd: bool) -> bool {
        let rl = self.row_len();
        (0..4)
            .filter(|i| (i % 2 == 1) != odd)
            .all(|i| a.data[i * rl..(i + 1) * rl].iter().all(|&w| w == 0))
    }

    /// Nonzero coefficients as `(i, j, coefficient)`.
    pub fn terms(&self, a: &AlgElem) -> Vec<(usize, usize, ZqInt)> {
        let mut out = Vec::new();
        for i in 0..4 {
            for j in 0..self.n3 {
                if !self.coeff_is_zero(a, i, j) {
                    out.push((i, j, self.get(a, i, j)));
                }
            }
        }
        out
    }

    /// Total differential `u_x dx + u_y dy`.
    pub fn total_differential(&self, u: &AlgElem) -> DifferentialForm {
        DifferentialForm { a: self.dx(u), b: self.dy(u), denom: 1, normalized: false }
    }

    /// Rewrites `A dx + B dy` as a cohomologous `dx`-only form using
    /// `(i+1) x^j y^i dy = d(x^j y^(i+1)) - j x^(j-1) y^(i+1) dx`. The
    /// division by `i + 1` is absorbed by scaling the whole form by 12
    /// and recording the denominator.
    pub fn normalize_to_dx(&self, w: &DifferentialForm) -> DifferentialForm {
        if w.normalized {
            return w.clone();
        }
        let s = self.stride();
        let rl = self.row_len();
        let mut rows = vec![0u64; 7 * rl];
        let mut tmp = vec![0u64; 2 * self.n * self.l];
        let twelve = self.const_mont(&self.zq.int_from_u64(12));
        for i in 0..4 {
            for j in 0..self.n3 {
                let src = self.offset(i, j);
                let c = &w.a.data[src..src + s];
                if c.iter().any(|&w| w != 0) {
                    self.zq_fma(&mut rows[src..src + s], c, &twelve, &mut tmp);
                }
            }
        }
        for i in 0..4 {
            for j in 1..self.n3 {
                let src = self.offset(i, j);
                let c = &w.b.data[src..src + s];
                if c.iter().all(|&w| w == 0) {
                    continue;
                }
                // -12 j / (i+1) is an integer
                let f = 12 * j as u64 / (i as u64 + 1);
                let neg = self.mont.modulus() - (BigUint::from(f) % self.mont.modulus());
                let cm = self.const_mont(&{
                    let mut z = self.zq.int_zero();
                    z[0] = neg % self.mont.modulus();
                    z
                });
                let o = (i + 1) * rl + (j - 1) * s;
                self.zq_fma(&mut rows[o..o + s], c, &cm, &mut tmp);
            }
        }
        let mut a = self.reduce_y(rows);
        // the top coefficient depends on truncated terms of B
        self.truncate_x(&mut a, self.n3 - 1);
        DifferentialForm { a, b: self.zero(), denom: 12 * w.denom, normalized: true }
    }
}

/// `(A dx + B dy) / denom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialForm {
    pub a: AlgElem,
    pub b: AlgElem,
    pub denom: u64,
    pub normalized: bool,
}

impl DifferentialForm {
    pub fn dx_only(ctx: &AlgebraCtx, a: AlgElem) -> Self {
        DifferentialForm { a, b: ctx.zero(), denom: 1, normalized: true }
    }
}
