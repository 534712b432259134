//! Reduction of `dx`-only forms to coordinates on the de Rham basis.
//!
//! The relations come from `d(S_{l,k})`, `S_{l,k} = -x^k (4/(l+4) y^(l+4)
//! + 2/(l+2) g y^(l+2))`, rewritten to `y`-degree at most 3 with `f` and,
//! for `l = 3`, with the `l = 1` relations. Each relation eliminates one
//! pivot monomial `x^(k+o) y^l`, `o in {2, 3}` depending on the case.
//!
//! Elimination runs in fixed point: a value `v` is stored as the residue of
//! `v p^E` modulo `p^W`. Division by a pivot of valuation `t` is an exact
//! shift by `p^t`; if the stored residue is not divisible, the true
//! denominator exceeded the headroom `E` and the reduction fails.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::algebra::{AlgebraCtx, DifferentialForm};
use crate::curve::{CaseTag, LiftedCurve};
use crate::mp::MontCtx;
use crate::padic::{floor_log, Zq, ZqInt, ZqScaled};
use crate::{Error, Result};

/// The basis `x^j y^i dx` of `H^1_dR` of the affine curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyBasis {
    pub case: CaseTag,
    /// `(i, j)` for `x^j y^i dx`, ordered by `j` then `i`.
    pub elements: Vec<(usize, usize)>,
}

impl CohomologyBasis {
    pub fn for_case(case: CaseTag) -> Self {
        let mut elements = Vec::new();
        for j in 0..3 {
            for i in 1..4 {
                if j < pivot_offset(case, i) {
                    elements.push((i, j));
                }
            }
        }
        CohomologyBasis { case, elements }
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        self.elements.iter().position(|&e| e == (i, j))
    }

    /// Positions of the `tau`-odd elements (`i` odd).
    pub fn odd_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&t| self.elements[t].0 % 2 == 1).collect()
    }

    pub fn even_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&t| self.elements[t].0 % 2 == 0).collect()
    }
}

/// `o` such that the rule `(l, k)` eliminates `x^(k+o) y^l`.
pub fn pivot_offset(case: CaseTag, l: usize) -> usize {
    let top = match l {
        1 => !case.b4_zero(),
        _ => matches!(case, CaseTag::Case2 | CaseTag::Case4),
    };
    if top {
        3
    } else {
        2
    }
}

/// One term `c x^(k+offset) y^i` of a rule.
#[derive(Clone, Debug)]
pub struct RuleTerm {
    pub i: u8,
    pub offset: i64,
    pub coeff: ZqScaled,
}

/// A relation `sum c x^(k+offset) y^i dx = exact`, used to eliminate its
/// pivot.
#[derive(Clone, Debug)]
pub struct ReductionRule {
    pub l: u8,
    pub k: usize,
    /// All terms including the pivot, ascending in `(offset, i)`.
    pub terms: Vec<RuleTerm>,
    /// `(i, offset)` of the eliminated monomial.
    pub pivot: (u8, i64),
    /// The `(l, k)` of every `S_{l,k}` combined into this relation.
    pub sources: Vec<(u8, usize)>,
}

impl ReductionRule {
    pub fn coeff(&self, i: u8, offset: i64) -> Option<&ZqScaled> {
        self.terms.iter().find(|t| t.i == i && t.offset == offset).map(|t| &t.coeff)
    }

    pub fn pivot_coeff(&self) -> &ZqScaled {
        self.coeff(self.pivot.0, self.pivot.1).expect("pivot term present")
    }
}

/// Coefficients keyed by `(i, j)` with absolute exponent `j`.
type Relation = BTreeMap<(u8, i64), ZqScaled>;

/// Builds relations and rules for one lifted curve.
#[derive(Clone, Debug)]
pub struct RuleEngine {
    curve: LiftedCurve,
}

impl RuleEngine {
    pub fn new(curve: &LiftedCurve) -> Self {
        RuleEngine { curve: curve.clone() }
    }

    pub fn curve(&self) -> &LiftedCurve {
        &self.curve
    }

    pub fn zq(&self) -> &Zq {
        &self.curve.zq
    }

    pub fn case(&self) -> CaseTag {
        self.curve.case
    }

    fn push(&self, rel: &mut Relation, i: u8, j: i64, c: ZqScaled) {
        if c.is_exact_zero() {
            return;
        }
        let zq = self.zq();
        let e = rel.entry((i, j)).or_insert_with(|| zq.zero());
        *e = zq.add(e, &c);
    }

    /// `Gamma_{k,l,0,j} = (j + 1 + 4k/(l+4)) b_(j+1)`.
    pub fn gamma0(&self, l: usize, k: usize, j: i64) -> Result<ZqScaled> {
        let zq = self.zq();
        let (l, k) = (l as i64, k as i64);
        let r = zq.from_rational((l + 4) * (j + 1) + 4 * k, l + 4)?;
        Ok(zq.mul(&r, &self.curve.b[(j + 1) as usize]))
    }

    /// `Gamma_{k,l,2,j} = l/(l+2) (j + 1 + 2k/(l+4)) a_(j+1)`.
    pub fn gamma2(&self, l: usize, k: usize, j: i64) -> Result<ZqScaled> {
        let zq = self.zq();
        let (l, k) = (l as i64, k as i64);
        let r = zq.from_rational(l * ((l + 4) * (j + 1) + 2 * k), (l + 2) * (l + 4))?;
        Ok(zq.mul(&r, &self.curve.a[(j + 1) as usize]))
    }

    /// The relation of `d(S_{l,k})` with `y^4` and `y^5` rewritten through
    /// `f`; terms in `y^0` are exact and dropped.
    fn raw_relation(&self, l: usize, k: usize) -> Result<Relation> {
        let zq = self.zq();
        let mut rel = Relation::new();
        let kk = k as i64;
        for j in -1..=3 {
            self.push(&mut rel, l as u8, kk + j, self.gamma0(l, k, j)?);
        }
        for j in -1..=1 {
            let c = self.gamma2(l, k, j)?;
            if c.is_exact_zero() {
                continue;
            }
            if l == 1 {
                self.push(&mut rel, 3, kk + j, c);
                continue;
            }
            // y^(l+2) = -y^(l-2) (g y^2 + h)
            let nc = zq.neg(&c);
            for (m, a) in self.curve.a.iter().enumerate() {
                self.push(&mut rel, l as u8, kk + j + m as i64, zq.mul(&nc, a));
            }
            if l == 3 {
                for (m, b) in self.curve.b.iter().enumerate() {
                    self.push(&mut rel, 1, kk + j + m as i64, zq.mul(&nc, b));
                }
            }
        }
        self.drop_negative(&mut rel)?;
        Ok(rel)
    }

    fn drop_negative(&self, rel: &mut Relation) -> Result<()> {
        let neg: Vec<(u8, i64)> = rel.keys().filter(|key| key.1 < 0).copied().collect();
        for key in neg {
            if !rel[&key].is_zero() {
                return Err(Error::Internal(format!("nonzero coefficient at x^{} y^{}", key.1, key.0)));
            }
            rel.remove(&key);
        }
        Ok(())
    }

    /// Removes a term the case forces to vanish.
    fn drop_forced_zero(&self, rel: &mut Relation, key: (u8, i64)) -> Result<()> {
        if let Some(c) = rel.remove(&key) {
            if !c.is_zero() {
                return Err(Error::Internal(format!(
                    "{}: coefficient of x^{} y^{} should vanish",
                    self.case(),
                    key.1,
                    key.0
                )));
            }
        }
        Ok(())
    }

    /// `rel -= factor * other`.
    fn sub_scaled(&self, rel: &mut Relation, other: &Relation, factor: &ZqScaled) {
        let zq = self.zq();
        for (key, c) in other {
            let t = zq.neg(&zq.mul(factor, c));
            if t.is_exact_zero() {
                continue;
            }
            let e = rel.entry(*key).or_insert_with(|| zq.zero());
            *e = zq.add(e, &t);
        }
    }

    /// The `l = 3` relation with `y^1` terms above the case bound removed
    /// by `l = 1` relations, before any forced-zero term is dropped. With
    /// `clear_stray`, the `b4 != 0` branch also removes `x^(k+2) y` (for
    /// `k >= 1`).
    fn l3_relation(&self, k: usize, clear_stray: bool) -> Result<(Relation, Vec<(u8, usize)>)> {
        let mut rel = self.raw_relation(3, k)?;
        let mut sources = vec![(3u8, k)];
        let kk = k as i64;
        let o1 = pivot_offset(self.case(), 1) as i64;
        let mut targets: Vec<i64> = if o1 == 3 {
            vec![kk + 5, kk + 4, kk + 3]
        } else {
            self.drop_forced_zero(&mut rel, (1, kk + 5))?;
            vec![kk + 4, kk + 3, kk + 2]
        };
        if o1 == 3 && clear_stray && k >= 1 {
            targets.push(kk + 2);
        }
        for j in targets {
            let Some(c) = rel.get(&(1, j)).cloned() else { continue };
            let k1 = (j - o1) as usize;
            let r1 = self.rule_relation(1, k1)?;
            let piv = &r1[&(1, j)];
            let factor = self.zq().div(&c, piv)?;
            self.sub_scaled(&mut rel, &r1, &factor);
            rel.remove(&(1, j));
            sources.push((1, k1));
        }
        Ok((rel, sources))
    }

    fn rule_relation(&self, l: usize, k: usize) -> Result<Relation> {
        Ok(self.rule_relation_with_sources(l, k)?.0)
    }

    fn rule_relation_with_sources(&self, l: usize, k: usize) -> Result<(Relation, Vec<(u8, usize)>)> {
        let case = self.case();
        let top = (l as u8, k as i64 + 3);
        let (mut rel, sources) = match l {
            1 | 2 => (self.raw_relation(l, k)?, vec![(l as u8, k)]),
            3 => self.l3_relation(k, true)?,
            _ => return Err(Error::Internal(format!("no rules for y^{l}"))),
        };
        if pivot_offset(case, l) == 2 {
            self.drop_forced_zero(&mut rel, top)?;
        }
        Ok((rel, sources))
    }

    /// The relation of `d(S_{l,k})` with `y`-degrees at most 3, as a rule
    /// with the case pivot but without any further elimination.
    pub fn gamma_relation(&self, l: usize, k: usize) -> Result<ReductionRule> {
        let rel = self.raw_relation(l, k)?;
        Ok(self.to_rule(l, k, rel, vec![(l as u8, k)]))
    }

    /// The elimination rule for `x^(k+o) y^l`.
    pub fn rule(&self, l: usize, k: usize) -> Result<ReductionRule> {
        let (rel, sources) = self.rule_relation_with_sources(l, k)?;
        let rule = self.to_rule(l, k, rel, sources);
        let piv = rule.coeff(rule.pivot.0, rule.pivot.1);
        match piv {
            Some(c) if !c.is_zero() => {}
            _ => {
                return Err(Error::PrecisionExhausted(format!(
                    "pivot of rule (l = {l}, k = {k}) vanishes at working precision"
                )))
            }
        }
        // a term beside the pivot may only sit on a basis monomial
        let later = |t: &RuleTerm| {
            t.offset > rule.pivot.1
                || (t.offset == rule.pivot.1
                    && t.i != rule.pivot.0
                    && (t.i > rule.pivot.0 || (k as i64 + t.offset) as usize >= pivot_offset(self.case(), t.i as usize)))
        };
        if let Some(t) = rule.terms.iter().find(|t| later(t)) {
            return Err(Error::Internal(format!(
                "rule (l = {l}, k = {k}) has a term x^(k+{}) y^{} beyond its pivot",
                t.offset, t.i
            )));
        }
        Ok(rule)
    }

    fn to_rule(&self, l: usize, k: usize, rel: Relation, sources: Vec<(u8, usize)>) -> ReductionRule {
        let mut terms: Vec<RuleTerm> = rel
            .into_iter()
            .map(|((i, j), coeff)| RuleTerm { i, offset: j - k as i64, coeff })
            .collect();
        terms.sort_by_key(|t| (t.offset, t.i));
        ReductionRule {
            l: l as u8,
            k,
            terms,
            pivot: (l as u8, pivot_offset(self.case(), l) as i64),
            sources,
        }
    }
}

/// All rules for `k <= kmax`, `l = 1, 2, 3`.
#[derive(Clone, Debug)]
pub struct RuleTable {
    rules: [Vec<ReductionRule>; 3],
}

impl RuleTable {
    pub fn get(&self, l: usize, k: usize) -> Option<&ReductionRule> {
        self.rules.get(l.wrapping_sub(1))?.get(k)
    }

    pub fn kmax(&self) -> usize {
        self.rules[0].len().saturating_sub(1)
    }
}

pub fn derive_rules(curve: &LiftedCurve, kmax: usize) -> Result<RuleTable> {
    let eng = RuleEngine::new(curve);
    let mut rules: [Vec<ReductionRule>; 3] = Default::default();
    for (idx, table) in rules.iter_mut().enumerate() {
        for k in 0..=kmax {
            table.push(eng.rule(idx + 1, k)?);
        }
    }
    Ok(RuleTable { rules })
}

/// `floor(log_p(4k + 8)) + Delta + 1`, the bound on the denominator
/// exponent of the reduction of `x^k y^l dx`.
pub fn denominator_bound(p: u64, delta: u32, k: usize) -> u32 {
    floor_log(p, 4 * k as u64 + 8) + delta + 1
}

/// Residues of `Z_q / p^W` as `n` fixed-width limb vectors.
#[derive(Clone, Debug)]
struct FixedZq {
    zq: Zq,
    n: usize,
    l: usize,
    mont: MontCtx,
    neg_m: Vec<Vec<u64>>,
    /// Largest `p^s < 2^32` and `s`.
    chunk: (u64, u32),
}

impl FixedZq {
    fn new(zq: &Zq, w: u32) -> Self {
        let n = zq.degree();
        let pw = BigUint::from(zq.p()).pow(w);
        let mont = MontCtx::new(&pw);
        let modulus = zq.fq().modulus();
        let neg_m = (0..n)
            .map(|i| {
                let mi = BigUint::from(modulus[i]);
                mont.to_mont(&if mi.is_zero() { mi } else { &pw - mi })
            })
            .collect();
        let p = zq.p();
        let (mut d, mut s) = (p, 1u32);
        while d * p < 1 << 32 {
            d *= p;
            s += 1;
        }
        FixedZq { zq: zq.clone(), n, l: mont.limbs(), mont, neg_m, chunk: (d, s) }
    }

    fn stride(&self) -> usize {
        self.n * self.l
    }

    fn from_int(&self, a: &ZqInt, out: &mut [u64]) {
        for t in 0..self.n {
            out[t * self.l..(t + 1) * self.l].copy_from_slice(&self.mont.from_big(&a[t]));
        }
    }

    fn to_int(&self, x: &[u64]) -> ZqInt {
        (0..self.n).map(|t| self.mont.to_big(&x[t * self.l..(t + 1) * self.l])).collect()
    }

    fn constant(&self, a: &ZqInt) -> Vec<u64> {
        let mut out = vec![0u64; self.stride()];
        for t in 0..self.n {
            out[t * self.l..(t + 1) * self.l].copy_from_slice(&self.mont.to_mont(&a[t]));
        }
        out
    }

    /// `acc += a c`, `c` from [`FixedZq::constant`].
    fn fma(&self, acc: &mut [u64], a: &[u64], c: &[u64], tmp: &mut [u64]) {
        let (n, l) = (self.n, self.l);
        if n == 1 {
            self.mont.fma_const(acc, a, c);
            return;
        }
        let prod = &mut tmp[..(2 * n - 1) * l];
        prod.iter_mut().for_each(|w| *w = 0);
        let mut t = vec![0u64; l];
        for s in 0..n {
            let ai = &a[s * l..(s + 1) * l];
            if MontCtx::is_zero(ai) {
                continue;
            }
            for u in 0..n {
                let cu = &c[u * l..(u + 1) * l];
                if MontCtx::is_zero(cu) {
                    continue;
                }
                self.mont.mont_mul(ai, cu, &mut t);
                self.mont.add_assign(&mut prod[(s + u) * l..(s + u + 1) * l], &t);
            }
        }
        for s in (n..2 * n - 1).rev() {
            let c: Vec<u64> = prod[s * l..(s + 1) * l].to_vec();
            if MontCtx::is_zero(&c) {
                continue;
            }
            for i in 0..n {
                self.mont.mont_mul(&c, &self.neg_m[i], &mut t);
                self.mont.add_assign(&mut prod[(s - n + i) * l..(s - n + i + 1) * l], &t);
            }
        }
        for s in 0..n {
            self.mont.add_assign(&mut acc[s * l..(s + 1) * l], &prod[s * l..(s + 1) * l]);
        }
    }

    /// Divides every component by `p^v` in place; false if not exact.
    fn exact_div(&self, x: &mut [u64], v: u32) -> bool {
        let mut left = v;
        while left > 0 {
            let s = left.min(self.chunk.1);
            let d = if s == self.chunk.1 { self.chunk.0 } else { self.zq.p().pow(s) };
            for comp in x.chunks_exact_mut(self.l) {
                let mut rem: u128 = 0;
                for w in comp.iter().rev() {
                    let cur = (rem << 64) | *w as u128;
                    rem = cur % d as u128;
                }
                if rem != 0 {
                    return false;
                }
                let mut rem: u128 = 0;
                for w in comp.iter_mut().rev() {
                    let cur = (rem << 64) | *w as u128;
                    *w = (cur / d as u128) as u64;
                    rem = cur % d as u128;
                }
            }
            left -= s;
        }
        true
    }
}

/// A rule in fixed-point form: `x^P y^l = p^(-v) sum c_t x^(j_t) y^(i_t)`.
struct CompiledRule {
    v: u32,
    terms: Vec<(usize, usize, Vec<u64>)>,
}

/// Coordinates of one reduced form.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub coords: Vec<ZqScaled>,
}

/// Reduces forms of `x`-degree below a fixed bound.
#[derive(Clone, Debug)]
pub struct Reducer {
    engine: RuleEngine,
    fixed: FixedZq,
    basis: CohomologyBasis,
    prec_in: u32,
    headroom: u32,
    loss: u32,
}

impl Reducer {
    /// Inputs are integral forms known modulo `p^prec_in`; intermediate
    /// denominators up to `p^headroom` are allowed; outputs are reported
    /// to absolute precision `prec_in - loss`. Values are carried to
    /// absolute precision `prec_in + headroom`, so digits lost to pivot
    /// divisions stay above the input precision.
    pub fn new(curve: &LiftedCurve, prec_in: u32, headroom: u32, loss: u32) -> Result<Self> {
        let w = prec_in + 2 * headroom;
        let lifted = curve.with_cap(w + headroom + 8)?;
        let fixed = FixedZq::new(&lifted.zq, w);
        Ok(Reducer {
            basis: CohomologyBasis::for_case(curve.case),
            engine: RuleEngine::new(&lifted),
            fixed,
            prec_in,
            headroom,
            loss,
        })
    }

    pub fn zq(&self) -> &Zq {
        self.engine.zq()
    }

    /// Digits dropped from the output precision.
    pub fn set_loss(&mut self, loss: u32) {
        self.loss = loss;
    }

    pub fn loss(&self) -> u32 {
        self.loss
    }

    pub fn basis(&self) -> &CohomologyBasis {
        &self.basis
    }

    pub fn engine(&self) -> &RuleEngine {
        &self.engine
    }

    fn w(&self) -> u32 {
        self.prec_in + 2 * self.headroom
    }

    fn compile(&self, l: usize, k: usize) -> Result<CompiledRule> {
        let zq = self.zq();
        let rule = self.engine.rule(l, k)?;
        let w = self.w() as i64;
        let vmin = rule.terms.iter().filter(|t| !t.coeff.is_zero()).map(|t| t.coeff.valuation()).min().unwrap_or(0);
        let piv = rule.pivot_coeff();
        let v = (piv.valuation() - vmin) as u32;
        let unit = zq.from_int_abs(piv.unit(), piv.rel_prec());
        let kk = k as i64;
        let pj = kk + rule.pivot.1;
        let mut terms = Vec::with_capacity(rule.terms.len());
        for t in &rule.terms {
            let j = kk + t.offset;
            if t.i == rule.pivot.0 && j == pj {
                continue;
            }
            if t.coeff.is_exact_zero() {
                continue;
            }
            let c = zq.neg(&zq.div(&zq.shift(&t.coeff, -vmin), &unit)?);
            if c.abs_prec() < w {
                return Err(Error::PrecisionExhausted(format!(
                    "rule (l = {l}, k = {k}) known to {} digits, {} needed",
                    c.abs_prec(),
                    w
                )));
            }
            if c.is_zero() {
                continue;
            }
            terms.push((t.i as usize, j as usize, self.fixed.constant(&zq.to_int(&c, self.w())?)));
        }
        Ok(CompiledRule { v, terms })
    }

    /// Runs the elimination on fixed-point states with rows `y^1..y^3` of
    /// length `len`.
    fn run(&self, states: &mut [Vec<u64>], len: usize) -> Result<()> {
        let s = self.fixed.stride();
        let at = |i: usize, j: usize| ((i - 1) * len + j) * s;
        let mut x = vec![0u64; s];
        let mut tmp = vec![0u64; 2 * s];
        for jj in (0..len).rev() {
            for l in 1..4 {
                let o = pivot_offset(self.basis.case, l);
                if jj < o {
                    continue;
                }
                let pos = at(l, jj);
                if states.iter().all(|st| MontCtx::is_zero(&st[pos..pos + s])) {
                    continue;
                }
                let rule = self.compile(l, jj - o)?;
                for st in states.iter_mut() {
                    if MontCtx::is_zero(&st[pos..pos + s]) {
                        continue;
                    }
                    x.copy_from_slice(&st[pos..pos + s]);
                    st[pos..pos + s].iter_mut().for_each(|w| *w = 0);
                    if rule.v > 0 && !self.fixed.exact_div(&mut x, rule.v) {
                        return Err(Error::PrecisionExhausted(format!(
                            "denominator at x^{jj} y^{l} exceeds the headroom p^{}",
                            self.headroom
                        )));
                    }
                    for (i, j, c) in &rule.terms {
                        let q = at(*i, *j);
                        self.fixed.fma(&mut st[q..q + s], &x, c, &mut tmp);
                    }
                }
            }
        }
        Ok(())
    }

    fn read_out(&self, st: &[u64], len: usize, denom: u64) -> Result<Reduction> {
        let zq = self.zq();
        let s = self.fixed.stride();
        let e = self.headroom as i64;
        let d = zq.from_i64(denom as i64);
        let abs = self.prec_in as i64 - self.loss as i64;
        let mut coords = Vec::with_capacity(self.basis.dim());
        for &(i, j) in &self.basis.elements {
            let o = ((i - 1) * len + j) * s;
            let raw = self.fixed.to_int(&st[o..o + s]);
            let v = zq.shift(&zq.from_int_abs(&raw, self.w()), -e);
            coords.push(zq.truncate_abs(&zq.div(&v, &d)?, abs));
        }
        Ok(Reduction { coords })
    }

    /// Reduces `(sum c x^j y^i dx) / denom`; coefficients must be integral
    /// after multiplication by `p^headroom`. Terms with `i = 0` are exact
    /// and ignored.
    pub fn reduce_terms(&self, terms: &[(usize, usize, ZqScaled)], denom: u64) -> Result<Reduction> {
        let zq = self.zq();
        let s = self.fixed.stride();
        let len = terms.iter().map(|t| t.1 + 1).max().unwrap_or(0).max(3);
        let mut st = vec![0u64; 3 * len * s];
        for (i, j, c) in terms {
            if *i == 0 || c.is_exact_zero() {
                continue;
            }
            if *i > 3 {
                return Err(Error::Validation(format!("y-degree {i} is not reduced")));
            }
            let scaled = zq.shift(c, self.headroom as i64);
            let int = zq.to_int(&scaled, self.w())?;
            let mut tmp = vec![0u64; s];
            self.fixed.from_int(&int, &mut tmp);
            let o = ((i - 1) * len + j) * s;
            let cur = st[o..o + s].to_vec();
            for t in 0..self.fixed.n {
                let r = t * self.fixed.l..(t + 1) * self.fixed.l;
                self.fixed.mont.add(&cur[r.clone()], &tmp[r.clone()], &mut st[o + r.start..o + r.end]);
            }
        }
        self.run(core::slice::from_mut(&mut st), len)?;
        self.read_out(&st, len, denom)
    }

    /// Reduces several normalized forms of one algebra at once.
    pub fn reduce_forms(&self, ctx: &AlgebraCtx, forms: &[&DifferentialForm]) -> Result<Vec<Reduction>> {
        if forms.iter().any(|f| !f.normalized) {
            return Err(Error::Internal("reduce expects dx-only forms".into()));
        }
        let zq = self.zq();
        let s = self.fixed.stride();
        let len = ctx.n3().max(3);
        let shift = zq.pow_p(self.headroom).clone();
        let mut states: Vec<Vec<u64>> = Vec::with_capacity(forms.len());
        for f in forms {
            let mut st = vec![0u64; 3 * len * s];
            for i in 1..4 {
                for j in 0..ctx.n3() {
                    if ctx.coeff_is_zero(&f.a, i, j) {
                        continue;
                    }
                    let c: ZqInt = ctx.get(&f.a, i, j).into_iter().map(|x| x * &shift).collect();
                    let o = ((i - 1) * len + j) * s;
                    self.fixed.from_int(&c, &mut st[o..o + s]);
                }
            }
            states.push(st);
        }
        self.run(&mut states, len)?;
        states.iter().zip(forms).map(|(st, f)| self.read_out(st, len, f.denom)).collect()
    }

    /// The largest `-ord_p` over all coordinates of the reductions of
    /// `x^j y^i dx`, `1 <= i <= 3`, `j < len` (0 if all are integral).
    ///
    /// Coordinates are built from the bottom up: a pivot monomial's
    /// coordinates are the rule combination of the ones below it.
    pub fn measured_loss(&self, len: usize) -> Result<u32> {
        let zq = self.zq();
        let d = self.basis.dim();
        let s = self.fixed.stride();
        let at = |i: usize, j: usize| ((i - 1) * len + j) * d * s;
        let mut phi = vec![0u64; 3 * len * d * s];
        let mut one = zq.int_zero();
        one[0] = zq.pow_p(self.headroom).clone();
        for (b, &(i, j)) in self.basis.elements.iter().enumerate() {
            if j < len {
                let o = at(i, j) + b * s;
                self.fixed.from_int(&one, &mut phi[o..o + s]);
            }
        }
        let mut acc = vec![0u64; d * s];
        let mut tmp = vec![0u64; 2 * s];
        for jj in 0..len {
            for l in (1..4).rev() {
                let o = pivot_offset(self.basis.case, l);
                if jj < o {
                    continue;
                }
                let rule = self.compile(l, jj - o)?;
                acc.iter_mut().for_each(|w| *w = 0);
                for (i, j, c) in &rule.terms {
                    let src = at(*i, *j);
                    for b in 0..d {
                        let x = &phi[src + b * s..src + (b + 1) * s];
                        if !MontCtx::is_zero(x) {
                            let x = x.to_vec();
                            self.fixed.fma(&mut acc[b * s..(b + 1) * s], &x, c, &mut tmp);
                        }
                    }
                }
                for b in 0..d {
                    if rule.v > 0 && !self.fixed.exact_div(&mut acc[b * s..(b + 1) * s], rule.v) {
                        return Err(Error::PrecisionExhausted(format!(
                            "denominator at x^{jj} y^{l} exceeds the headroom p^{}",
                            self.headroom
                        )));
                    }
                }
                let dst = at(l, jj);
                phi[dst..dst + d * s].copy_from_slice(&acc);
            }
        }
        let mut min_val = self.headroom;
        for x in phi.chunks_exact(s) {
            if MontCtx::is_zero(x) {
                continue;
            }
            if let Some(v) = zq.int_valuation(&self.fixed.to_int(x)) {
                min_val = min_val.min(v);
            }
        }
        Ok(self.headroom - min_val)
    }
}

/// One closed-form comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedFormCheck {
    pub name: &'static str,
    pub k: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ClosedFormReport {
    pub checks: Vec<ClosedFormCheck>,
}

impl ClosedFormReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> Vec<&ClosedFormCheck> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }
}

/// Evaluates the printed matrix entries of the `l = 1, 2, 3` relations and
/// compares them with the derived rules.
pub fn validate_closed_forms(curve: &LiftedCurve, ks: core::ops::RangeInclusive<usize>) -> Result<ClosedFormReport> {
    let eng = RuleEngine::new(curve);
    let zq = eng.zq().clone();
    let a = &curve.a;
    let b = &curve.b;
    let int = |v: i64| zq.from_i64(v);
    let mul = |x: &ZqScaled, y: &ZqScaled| zq.mul(x, y);
    let add = |x: &ZqScaled, y: &ZqScaled| zq.add(x, y);
    let sub = |x: &ZqScaled, y: &ZqScaled| zq.sub(x, y);
    let sum = |xs: &[ZqScaled]| xs.iter().fold(zq.zero(), |acc, x| zq.add(&acc, x));
    let same = |rel: &Relation, expect: &Relation| -> bool {
        let keys: BTreeMap<(u8, i64), ()> = rel.keys().chain(expect.keys()).map(|k| (*k, ())).collect();
        keys.keys().all(|key| {
            let x = rel.get(key).cloned().unwrap_or_else(|| zq.zero());
            let y = expect.get(key).cloned().unwrap_or_else(|| zq.zero());
            zq.equal_at_prec(&x, &y)
        })
    };
    let mut report = ClosedFormReport::default();
    for k in ks {
        let kk = k as i64;
        let ki = int(kk);

        // l = 1: (1/15) rows (12k + 15m) b_m and (2k + 5m) a_m.
        let mut m1 = Relation::new();
        let c15 = zq.from_rational(1, 15)?;
        for m in 0..5 {
            let c = mul(&mul(&int(12 * kk + 15 * m as i64), &b[m]), &c15);
            if !c.is_exact_zero() {
                m1.insert((1, kk - 1 + m as i64), c);
            }
        }
        for m in 0..3 {
            let c = mul(&mul(&int(2 * kk + 5 * m as i64), &a[m]), &c15);
            if !c.is_exact_zero() {
                m1.insert((3, kk - 1 + m as i64), c);
            }
        }
        let mut raw1 = eng.raw_relation(1, k)?;
        raw1.retain(|_, c| !c.is_exact_zero());
        m1.retain(|key, _| key.1 >= 0);
        report.checks.push(ClosedFormCheck { name: "M1", k, ok: same(&raw1, &m1) });

        // l = 2: -(1/6) times the y^2 column.
        let c6 = zq.from_rational(-1, 6)?;
        let four = int(4);
        let two = int(2);
        let col2 = [
            mul(&ki, &sub(&mul(&a[0], &a[0]), &mul(&four, &b[0]))),
            mul(&int(2 * kk + 3), &sub(&mul(&a[0], &a[1]), &mul(&two, &b[1]))),
            mul(
                &int(kk + 3),
                &sub(&add(&mul(&a[1], &a[1]), &mul(&two, &mul(&a[0], &a[2]))), &mul(&four, &b[2])),
            ),
            mul(&int(2 * kk + 9), &sub(&mul(&a[1], &a[2]), &mul(&two, &b[3]))),
            mul(&int(kk + 6), &sub(&mul(&a[2], &a[2]), &mul(&four, &b[4]))),
        ];
        let mut m2 = Relation::new();
        for (m, c) in col2.iter().enumerate() {
            m2.insert((2, kk - 1 + m as i64), mul(c, &c6));
        }
        m2.retain(|key, c| key.1 >= 0 && !c.is_zero());
        let mut raw2 = eng.raw_relation(2, k)?;
        raw2.retain(|_, c| !c.is_zero());
        report.checks.push(ClosedFormCheck { name: "M2", k, ok: same(&raw2, &m2) });

        // l = 3 before elimination: -(1/35) times the y and y^3 columns.
        let c35 = zq.from_rational(-1, 35)?;
        let six_k = int(6 * kk);
        let ab = |i: usize, j: usize| mul(&a[i], &b[j]);
        let ycol = [
            mul(&six_k, &ab(0, 0)),
            add(&mul(&six_k, &add(&ab(1, 0), &ab(0, 1))), &mul(&int(21), &ab(1, 0))),
            add(
                &mul(&six_k, &sum(&[ab(2, 0), ab(1, 1), ab(0, 2)])),
                &add(&mul(&int(21), &ab(1, 1)), &mul(&int(42), &ab(2, 0))),
            ),
            add(
                &mul(&six_k, &sum(&[ab(2, 1), ab(1, 2), ab(0, 3)])),
                &add(&mul(&int(21), &ab(1, 2)), &mul(&int(42), &ab(2, 1))),
            ),
            add(
                &mul(&six_k, &sum(&[ab(2, 2), ab(1, 3), ab(0, 4)])),
                &add(&mul(&int(21), &ab(1, 3)), &mul(&int(42), &ab(2, 2))),
            ),
            add(&mul(&int(6 * kk + 21), &add(&ab(2, 3), &ab(1, 4))), &mul(&int(21), &ab(2, 3))),
            mul(&int(6 * kk + 42), &ab(2, 4)),
        ];
        let aa = |i: usize, j: usize| mul(&a[i], &a[j]);
        let y3col = [
            mul(&ki, &sub(&mul(&int(6), &aa(0, 0)), &mul(&int(20), &b[0]))),
            mul(&int(4 * kk + 7), &sub(&mul(&int(3), &aa(0, 1)), &mul(&int(5), &b[1]))),
            mul(
                &int(2 * kk + 7),
                &sub(&add(&mul(&int(3), &aa(1, 1)), &mul(&int(6), &aa(0, 2))), &mul(&int(10), &b[2])),
            ),
            mul(&int(4 * kk + 21), &sub(&mul(&int(3), &aa(1, 2)), &mul(&int(5), &b[3]))),
            mul(&int(2 * kk + 14), &sub(&mul(&int(3), &aa(2, 2)), &mul(&int(10), &b[4]))),
        ];
        let mut m31 = Relation::new();
        for (m, c) in ycol.iter().enumerate() {
            m31.insert((1, kk - 1 + m as i64), mul(c, &c35));
        }
        for (m, c) in y3col.iter().enumerate() {
            m31.insert((3, kk - 1 + m as i64), mul(c, &c35));
        }
        m31.retain(|key, c| key.1 >= 0 && !c.is_zero());
        let mut raw3 = eng.raw_relation(3, k)?;
        raw3.retain(|_, c| !c.is_zero());
        report.checks.push(ClosedFormCheck { name: "M3 before elimination", k, ok: same(&raw3, &m31) });

        // l = 3 after elimination: the scalar and the last two y^3 entries.
        let (rel3, _) = eng.l3_relation(k, true)?;
        let get = |j: i64| rel3.get(&(3, j)).cloned().unwrap_or_else(|| zq.zero());
        let (e45, e46) = (get(kk + 2), get(kk + 3));
        let kp = |c: i64| int(kk + c);
        if !curve.case.b4_zero() {
            let b4 = &b[4];
            let b4_2 = mul(b4, b4);
            let b4_3 = mul(&b4_2, b4);
            let k456 = mul(&mul(&kp(4), &kp(5)), &kp(6));
            let c = zq.neg(&zq.inv(&mul(&mul(&int(2688), &k456), &b4_3))?);
            let disc = sub(&mul(&a[2], &a[2]), &mul(&four, b4));
            let p46 = mul(&mul(&mul(&int(384), &k456), &kp(7)), &mul(&b4_3, &disc));
            let inner = sub(
                &sub(&mul(&int(8 * kk + 44), &mul(&mul(&a[1], &a[2]), b4)), &mul(&aa(2, 2), &b[3])),
                &mul(&int(16 * kk + 84), &mul(&b[3], b4)),
            );
            let p45 = mul(&mul(&int(96), &b4_2), &mul(&k456, &inner));
            report.checks.push(ClosedFormCheck { name: "M3 (4,6)", k, ok: zq.equal_at_prec(&e46, &mul(&c, &p46)) });
            report.checks.push(ClosedFormCheck { name: "M3 (4,5)", k, ok: zq.equal_at_prec(&e45, &mul(&c, &p45)) });
            if curve.case == CaseTag::Case3 {
                let p45c3 = mul(
                    &mul(&mul(&int(384), &b4_3), &mul(&k456, &int(2 * kk + 11))),
                    &sub(&mul(&a[1], &a[2]), &mul(&two, &b[3])),
                );
                report.checks.push(ClosedFormCheck {
                    name: "M3 (4,5) on a2^2 = 4 b4",
                    k,
                    ok: zq.equal_at_prec(&e45, &mul(&c, &p45c3)),
                });
            }
        } else {
            let b3 = &b[3];
            let b3_2 = mul(b3, b3);
            let f15 = int(4 * kk + 15);
            let f19 = int(4 * kk + 19);
            let f23 = int(4 * kk + 23);
            let c = zq.neg(&zq.inv(&mul(&mul(&mul(&int(7), &f15), &mul(&f19, &f23)), &b3_2))?);
            let p46 = mul(
                &mul(&mul(&int(2), &kp(7)), &mul(&int(2 * kk + 11), &mul(&f15, &f19))),
                &mul(&b3_2, &aa(2, 2)),
            );
            let k3 = kk * kk * kk;
            let k2 = kk * kk;
            let inner = sub(
                &sub(
                    &mul(&int(32 * k3 + 504 * k2 + 2648 * kk + 4641), &mul(&mul(&a[1], &a[2]), b3)),
                    &mul(&int(4 * k2 + 52 * kk + 168), &mul(&aa(2, 2), &b[2])),
                ),
                &mul(&int(64 * k3 + 1008 * k2 + 5276 * kk + 9177), &b3_2),
            );
            let p45 = mul(&mul(&f15, b3), &inner);
            report.checks.push(ClosedFormCheck { name: "M3 (4,6)", k, ok: zq.equal_at_prec(&e46, &mul(&c, &p46)) });
            report.checks.push(ClosedFormCheck { name: "M3 (4,5)", k, ok: zq.equal_at_prec(&e45, &mul(&c, &p45)) });
            if curve.case == CaseTag::Case1 {
                let p = zq.neg(&mul(&mul(&mul(&f15, &f19), &mul(&int(4 * kk + 21), &f23)), &mul(&b3_2, b3)));
                report.checks.push(ClosedFormCheck {
                    name: "M3 (4,5) on a2 = 0",
                    k,
                    ok: zq.equal_at_prec(&e45, &mul(&c, &p)),
                });
            }
        }
    }
    Ok(report)
}
