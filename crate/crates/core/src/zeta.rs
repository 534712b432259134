//! Frobenius matrix, the `sigma`-twisted norm, and the Weil polynomial.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::algebra::NttResources;
use crate::curve::{CurveInput, LiftedCurve};
use crate::frobenius::{solve_bezout, BezoutPair, FrobeniusData};
use crate::padic::{Preset, PrecisionProfile, Zq, ZqScaled};
use crate::reduction::{denominator_bound, CohomologyBasis, Reducer};
use crate::{Error, Result};

pub type Matrix = Vec<Vec<ZqScaled>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Odd and even blocks handled separately.
    Split,
    /// The whole matrix at once; the blocks are cross-checked.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Mp,
    Mq,
}

/// Matrix of `F_p` (or `F_q`) on the basis; column `c` holds the
/// coordinates of the image of basis element `c`.
#[derive(Clone, Debug)]
pub struct FrobeniusMatrix {
    pub entries: Matrix,
    pub basis: CohomologyBasis,
    pub kind: MatrixKind,
}

impl FrobeniusMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn block(&self, idx: &[usize]) -> Matrix {
        idx.iter().map(|&r| idx.iter().map(|&c| self.entries[r][c].clone()).collect()).collect()
    }

    pub fn odd_block(&self) -> Matrix {
        self.block(&self.basis.odd_indices())
    }

    pub fn even_block(&self) -> Matrix {
        self.block(&self.basis.even_indices())
    }

    /// Entries `(row, col)` linking opposite parities that are not zero.
    pub fn coupling_violations(&self) -> Vec<(usize, usize)> {
        let b = &self.basis.elements;
        let mut out = Vec::new();
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                if (b[r].0 + b[c].0) % 2 == 1 && !self.entries[r][c].is_zero() {
                    out.push((r, c));
                }
            }
        }
        out
    }

    /// Smallest valuation of a nonzero entry.
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries.iter().flatten().filter(|e| !e.is_zero()).map(|e| e.valuation()).min()
    }
}

/// Reduces the pullbacks of the basis forms and fills `M_p`. In split
/// mode the odd and the even columns are reduced as separate batches.
pub fn assemble_mp(reducer: &Reducer, frob: &FrobeniusData, mode: Mode) -> Result<FrobeniusMatrix> {
    let basis = reducer.basis().clone();
    let d = basis.dim();
    let zq = reducer.zq();
    let batches: Vec<Vec<usize>> = match mode {
        Mode::Split => vec![basis.odd_indices(), basis.even_indices()],
        Mode::Full => vec![(0..d).collect()],
    };
    let mut entries = vec![vec![zq.zero(); d]; d];
    for batch in batches {
        let forms: Vec<_> = batch
            .iter()
            .map(|&c| {
                let (i, j) = basis.elements[c];
                frob.frobenius_form(j, i)
            })
            .collect();
        for (w, &c) in forms.iter().zip(&batch) {
            let bad = frob.form_decay_violations(w, zq.p());
            if !bad.is_empty() {
                return Err(Error::Assumption(format!(
                    "pullback of basis form {c} decays too slowly at {:?}",
                    &bad[..bad.len().min(4)]
                )));
            }
        }
        let refs: Vec<_> = forms.iter().collect();
        let red = reducer.reduce_forms(&frob.ctx, &refs)?;
        for (&c, r) in batch.iter().zip(red) {
            for (row, v) in r.coords.into_iter().enumerate() {
                entries[row][c] = v;
            }
        }
    }
    let m = FrobeniusMatrix { entries, basis, kind: MatrixKind::Mp };
    let bad = m.coupling_violations();
    if !bad.is_empty() {
        return Err(Error::Internal(format!("Frobenius matrix couples the tau-eigenspaces at {bad:?}")));
    }
    Ok(m)
}

pub fn mat_mul(zq: &Zq, a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![zq.zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = zq.zero();
            for (k, brow) in b.iter().enumerate() {
                if a[i][k].is_exact_zero() || brow[j].is_exact_zero() {
                    continue;
                }
                s = zq.add(&s, &zq.mul(&a[i][k], &brow[j]));
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn mat_sigma_pow(zq: &Zq, a: &Matrix, k: usize) -> Matrix {
    a.iter().map(|r| r.iter().map(|x| zq.sigma_pow(x, k)).collect()).collect()
}

/// `M sigma(M) ... sigma^(n-1)(M)` along the binary expansion of `n`,
/// with `N_(a+b) = N_a sigma^a(N_b)`.
pub fn twisted_norm(zq: &Zq, m: &Matrix, n: usize) -> Matrix {
    assert!(n >= 1);
    let mut acc = m.clone();
    let mut len = 1usize;
    for bit in (0..usize::BITS - 1 - n.leading_zeros()).rev() {
        acc = mat_mul(zq, &acc, &mat_sigma_pow(zq, &acc, len));
        len *= 2;
        if (n >> bit) & 1 == 1 {
            acc = mat_mul(zq, &acc, &mat_sigma_pow(zq, m, len));
            len += 1;
        }
    }
    debug_assert_eq!(len, n);
    acc
}

/// The same product taken factor by factor.
pub fn twisted_norm_direct(zq: &Zq, m: &Matrix, n: usize) -> Matrix {
    let mut acc = m.clone();
    for k in 1..n {
        acc = mat_mul(zq, &acc, &mat_sigma_pow(zq, m, k));
    }
    acc
}

/// `det(X - M)` by Berkowitz's division-free recurrence, low degree first.
pub fn charpoly(zq: &Zq, m: &Matrix) -> Vec<ZqScaled> {
    let n = m.len();
    // descending coefficients of the leading principal minors
    let mut v = vec![zq.one()];
    for r in 0..n {
        let mut t = Vec::with_capacity(r + 2);
        t.push(zq.one());
        t.push(zq.neg(&m[r][r]));
        // R A_r^k C for k = 0..r-1
        let mut col: Vec<ZqScaled> = (0..r).map(|i| m[i][r].clone()).collect();
        for _ in 0..r {
            let mut s = zq.zero();
            for (i, c) in col.iter().enumerate() {
                s = zq.add(&s, &zq.mul(&m[r][i], c));
            }
            t.push(zq.neg(&s));
            col = (0..r)
                .map(|i| (0..r).fold(zq.zero(), |s, k| zq.add(&s, &zq.mul(&m[i][k], &col[k]))))
                .collect();
        }
        let mut next = vec![zq.zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate().take(i + 1) {
                if i - j < t.len() {
                    *slot = zq.add(slot, &zq.mul(&t[i - j], vj));
                }
            }
        }
        v = next;
    }
    v.reverse();
    v
}

fn scaled_from_i128(zq: &Zq, v: i128) -> ZqScaled {
    let x = zq.from_biguint(&BigUint::from(v.unsigned_abs()));
    if v < 0 {
        zq.neg(&x)
    } else {
        x
    }
}

/// Product of polynomials, low degree first.
pub fn poly_mul(zq: &Zq, a: &[ZqScaled], b: &[ZqScaled]) -> Vec<ZqScaled> {
    let mut out = vec![zq.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = zq.add(&out[i + j], &zq.mul(x, y));
        }
    }
    out
}

/// Quotient by a monic integer polynomial; `None` if the remainder is not
/// zero at its precision.
pub fn poly_div_monic(zq: &Zq, a: &[ZqScaled], b: &[i128]) -> Option<Vec<ZqScaled>> {
    let db = b.len() - 1;
    if a.len() < b.len() {
        return None;
    }
    let mut r = a.to_vec();
    let mut q = vec![zq.zero(); a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].clone();
        for (i, bi) in b.iter().enumerate() {
            r[k + i] = zq.sub(&r[k + i], &zq.mul(&c, &scaled_from_i128(zq, *bi)));
        }
        q[k] = c;
    }
    if r[..db].iter().all(|c| c.is_zero()) {
        Some(q)
    } else {
        None
    }
}

/// Integer polynomial product, low degree first.
pub fn int_poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact quotient by a monic integer polynomial.
pub fn int_poly_div_monic(a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
    let db = b.len() - 1;
    if a.len() < b.len() {
        return None;
    }
    let mut r = a.to_vec();
    let mut q = vec![0i128; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db];
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= c * bi;
        }
        q[k] = c;
    }
    r[..db].iter().all(|&c| c == 0).then_some(q)
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = libm::sqrt(n as f64) as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// The integer `t` with `|t| <= bound` congruent to `c`, which must be a
/// `Z_p`-integer known to enough digits.
pub fn recover_integer(zq: &Zq, c: &ZqScaled, bound: u128, what: &str) -> Result<i128> {
    if c.is_exact_zero() {
        return Ok(0);
    }
    let abs = c.abs_prec();
    if abs < 0 || (!c.is_zero() && c.valuation() < 0) {
        return Err(Error::PrecisionInsufficient(format!("{what} is not integral at the working precision")));
    }
    let abs = abs.min(zq.cap() as i64) as u32;
    let modulus = BigUint::from(zq.p()).pow(abs);
    if modulus <= BigUint::from(bound) * 2u32 {
        return Err(Error::PrecisionInsufficient(format!(
            "{what} known modulo p^{abs}, which does not determine an integer of size {bound}"
        )));
    }
    let int = zq.to_int(c, abs)?;
    if int[1..].iter().any(|x| !x.is_zero()) {
        return Err(Error::PrecisionInsufficient(format!("{what} does not lie in Z_p")));
    }
    let mut t = BigInt::from_biguint(Sign::Plus, int[0].clone());
    let m = BigInt::from_biguint(Sign::Plus, modulus);
    if &t * 2 > m {
        t -= &m;
    }
    if t.abs() > BigInt::from(bound) {
        return Err(Error::PrecisionInsufficient(format!("{what} = {t} violates the Weil bound {bound}")));
    }
    Ok(t.to_i128().unwrap())
}

/// Everything read off `M_q`.
#[derive(Clone, Debug)]
pub struct WeilData {
    pub q: i128,
    /// Characteristic polynomials of the blocks, low degree first.
    pub charpoly_odd: Vec<ZqScaled>,
    pub charpoly_even: Vec<ZqScaled>,
    /// `X^2 - a X + q`, low degree first.
    pub p_e: Vec<i128>,
    /// The complementary quartic, low degree first.
    pub p_2: Vec<i128>,
    /// `P_2 R_C / R_E`.
    pub p_v: Vec<i128>,
    /// `P_E P_2`, low degree first.
    pub p: Vec<i128>,
}

impl WeilData {
    /// `a` in `P_E = X^2 - a X + q`.
    pub fn trace_e(&self) -> i128 {
        -self.p_e[1]
    }

    pub fn count(&self, r: usize) -> i128 {
        curve_counts(&self.p, self.q, r)[r - 1]
    }
}

/// Power sums `sum alpha^r`, `r = 1..rmax`, of the roots of a monic
/// polynomial (low degree first), by Newton's identities.
pub fn power_sums(poly: &[i128], rmax: usize) -> Vec<i128> {
    let d = poly.len() - 1;
    // e_k = (-1)^k c_(d-k)
    let e = |k: usize| -> i128 {
        if k > d {
            0
        } else if k % 2 == 0 {
            poly[d - k]
        } else {
            -poly[d - k]
        }
    };
    let mut s: Vec<i128> = Vec::with_capacity(rmax);
    for r in 1..=rmax {
        let mut v = if r % 2 == 1 { r as i128 * e(r) } else { -(r as i128) * e(r) };
        for i in 1..r {
            let term = e(i) * s[r - i - 1];
            v += if i % 2 == 1 { term } else { -term };
        }
        s.push(v);
    }
    s
}

/// `#C(F_(q^r)) = q^r + 1 - sum alpha^r` for `r = 1..rmax`.
pub fn curve_counts(p: &[i128], q: i128, rmax: usize) -> Vec<i128> {
    power_sums(p, rmax).iter().enumerate().map(|(k, s)| q.pow(k as u32 + 1) + 1 - s).collect()
}

/// Whether `X^d P(q/X) = q^(d/2) P(X)`, i.e. `p_k q^k = q^(d/2) p_(d-k)`.
pub fn functional_equation_holds(p: &[i128], q: i128) -> bool {
    let d = p.len() - 1;
    if d % 2 == 1 {
        return false;
    }
    let q = BigInt::from(q);
    (0..=d).all(|k| BigInt::from(p[k]) * q.pow(k as u32) == q.pow(d as u32 / 2) * BigInt::from(p[d - k]))
}

/// Reads `P_E`, `P_2` and `P` from `M_q`.
pub fn reconstruct(curve: &LiftedCurve, mq: &FrobeniusMatrix, mode: Mode) -> Result<WeilData> {
    let zq = &curve.zq;
    let q = curve.input.q() as i128;
    let inf = &curve.inf;
    let cp_odd = charpoly(zq, &mq.odd_block());
    let cp_even = charpoly(zq, &mq.even_block());
    if mode == Mode::Full {
        let cp = charpoly(zq, &mq.entries);
        let prod = poly_mul(zq, &cp_odd, &cp_even);
        if cp.iter().zip(&prod).any(|(a, b)| !zq.equal_at_prec(a, b)) {
            return Err(Error::Internal("characteristic polynomial is not the product of the blocks".into()));
        }
    }

    let pe = poly_div_monic(zq, &cp_even, &inf.r_e)
        .ok_or_else(|| Error::Assumption("orbit-correction mismatch on the even block".into()))?;
    if pe.len() != 3 {
        return Err(Error::Internal(format!("even block yields degree {}", pe.len() - 1)));
    }
    let a = -recover_integer(zq, &pe[1], isqrt(4 * q as u128), "coefficient of X in P_E")?;
    if !zq.equal_at_prec(&pe[0], &scaled_from_i128(zq, q)) {
        return Err(Error::PrecisionInsufficient("constant term of P_E differs from q".into()));
    }
    let p_e = vec![q, -a, 1];

    let num = poly_mul(zq, &cp_odd, &inf.r_e.iter().map(|&c| scaled_from_i128(zq, c)).collect::<Vec<_>>());
    let p2 = poly_div_monic(zq, &num, &inf.r_c)
        .ok_or_else(|| Error::Assumption("orbit-correction mismatch on the odd block".into()))?;
    if p2.len() != 5 {
        return Err(Error::Internal(format!("odd block yields degree {}", p2.len() - 1)));
    }
    let e1 = -recover_integer(zq, &p2[3], isqrt(16 * q as u128), "coefficient of X^3 in P_2")?;
    let e2 = recover_integer(zq, &p2[2], 6 * q as u128, "coefficient of X^2 in P_2")?;
    let p_2 = vec![q * q, -q * e1, e2, -e1, 1];
    for k in 0..2 {
        if !zq.equal_at_prec(&p2[k], &scaled_from_i128(zq, p_2[k])) {
            return Err(Error::PrecisionInsufficient(format!(
                "coefficient of X^{k} in P_2 contradicts the functional equation"
            )));
        }
    }
    let p = int_poly_mul(&p_e, &p_2);
    let p_v = int_poly_div_monic(&int_poly_mul(&p_2, &inf.r_c), &inf.r_e)
        .ok_or_else(|| Error::Assumption("orbit corrections do not divide".into()))?;
    if !functional_equation_holds(&p, q) {
        return Err(Error::Internal("P violates the functional equation".into()));
    }
    if p.iter().sum::<i128>() <= 0 {
        return Err(Error::Internal("P(1) is not positive".into()));
    }
    Ok(WeilData { q, charpoly_odd: cp_odd, charpoly_even: cp_even, p_e, p_2, p_v, p })
}

/// Pipeline stages, reported to the step callback when they finish.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Bezout = 1,
    Lift = 2,
    Reduce = 3,
    Norm = 4,
    Reconstruct = 5,
}

/// Intermediate results of one run.
#[derive(Clone, Debug)]
pub struct Computation {
    pub curve: LiftedCurve,
    pub profile: PrecisionProfile,
    pub mode: Mode,
    pub bezout: BezoutPair,
    /// Digits lost in the reduction: the measured value, and the bound
    /// used for the output precision.
    pub measured_loss: u32,
    pub loss: u32,
    pub mp: FrobeniusMatrix,
    pub mq: FrobeniusMatrix,
    pub weil: WeilData,
}

/// Runs the whole algorithm on one curve.
pub fn compute(
    input: &CurveInput,
    profile: &PrecisionProfile,
    mode: Mode,
    on_step: &mut dyn FnMut(Step),
) -> Result<Computation> {
    profile.validate().map_err(Error::Validation)?;
    let curve = input.lift(profile)?;
    let p = curve.p();
    let n = curve.n();
    let (n3, n4, n5) = (profile.n3 as usize, profile.n4, profile.n5);

    let bezout = solve_bezout(input)?;
    on_step(Step::Bezout);

    let ntt = NttResources::new(&curve.zq, n3, n4);
    let frob = FrobeniusData::build(&curve, &bezout, n3, n4, ntt)?;
    if !frob.ctx.has_parity(&frob.fx, false) || !frob.ctx.has_parity(&frob.fy, true) {
        return Err(Error::Internal("Frobenius lift does not commute with y -> -y".into()));
    }
    let bad = frob.z0_decay_violations(p);
    if !bad.is_empty() {
        return Err(Error::Assumption(format!("Z0 coefficients at {:?} decay too slowly", &bad[..bad.len().min(4)])));
    }
    on_step(Step::Lift);

    let mut reducer = Reducer::new(&curve, n4, n5 - n4, 0)?;
    let measured = reducer.measured_loss(n3)?;
    let loss = match profile.preset {
        Preset::Rigorous => {
            let bound = denominator_bound(p, profile.delta, n3);
            if measured > bound {
                return Err(Error::Assumption(format!("reduction denominator p^{measured} exceeds the bound p^{bound}")));
            }
            bound
        }
        _ => measured,
    };
    reducer.set_loss(loss);
    let mp = assemble_mp(&reducer, &frob, mode)?;
    on_step(Step::Reduce);

    let zq = reducer.zq().clone();
    let mq = match mode {
        Mode::Full => FrobeniusMatrix { entries: twisted_norm(&zq, &mp.entries, n), basis: mp.basis.clone(), kind: MatrixKind::Mq },
        Mode::Split => {
            let mut entries = vec![vec![zq.zero(); mp.dim()]; mp.dim()];
            for idx in [mp.basis.odd_indices(), mp.basis.even_indices()] {
                let blk = twisted_norm(&zq, &mp.block(&idx), n);
                for (a, &r) in idx.iter().enumerate() {
                    for (b, &c) in idx.iter().enumerate() {
                        entries[r][c] = blk[a][b].clone();
                    }
                }
            }
            FrobeniusMatrix { entries, basis: mp.basis.clone(), kind: MatrixKind::Mq }
        }
    };
    on_step(Step::Norm);

    let curve_hi = LiftedCurve { zq: zq.clone(), ..curve.clone() };
    let weil = reconstruct(&curve_hi, &mq, mode)?;
    on_step(Step::Reconstruct);
    Ok(Computation { curve, profile: profile.clone(), mode, bezout, measured_loss: measured, loss, mp, mq, weil })
}
