use std::collections::BTreeMap;

use num_bigint::BigUint;
use proptest::prelude::*;
use quartic_zeta_core::algebra::{AlgElem, AlgebraCtx, NttResources};
use quartic_zeta_core::field::{Field, Gf};
use quartic_zeta_core::padic::{PrecisionProfile, ZqInt};
use quartic_zeta_core::{CaseTag, CurveInput, LiftedCurve};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn curve(fq: &Gf, case: CaseTag, seed: u64) -> LiftedCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = CurveInput::random(fq, case, &mut rng);
    c.lift(&PrecisionProfile::custom(fq.characteristic(), fq.degree(), 64, 40, 320)).unwrap()
}

fn ctx(l: &LiftedCurve, n3: usize, prec: u32) -> AlgebraCtx {
    let ntt = NttResources::new(&l.zq, n3, prec);
    AlgebraCtx::for_curve(l, n3, prec, ntt).unwrap()
}

fn random_elem(c: &AlgebraCtx, rng: &mut ChaCha8Rng, density: u64, max_j: usize) -> AlgElem {
    random_elem_rows(c, rng, density, max_j, 4)
}

fn random_elem_rows(c: &AlgebraCtx, rng: &mut ChaCha8Rng, density: u64, max_j: usize, rows: usize) -> AlgElem {
    let zq = c.zq();
    let mut e = c.zero();
    for i in 0..rows {
        for j in 0..max_j.min(c.n3()) {
            if rng.next_u64() % 100 < density {
                let v: ZqInt = (0..zq.degree())
                    .map(|_| BigUint::from(rng.next_u64()) * BigUint::from(rng.next_u64()) % c.modulus())
                    .collect();
                c.set(&mut e, i, j, &v);
            }
        }
    }
    e
}

/// Independent product: dense bivariate multiply, then division by f and
/// truncation.
fn oracle_mul(c: &AlgebraCtx, l: &LiftedCurve, a: &AlgElem, b: &AlgElem) -> AlgElem {
    let zq = c.zq();
    let e = c.prec();
    let mut prod: BTreeMap<(usize, usize), ZqInt> = BTreeMap::new();
    for (i1, j1, x) in c.terms(a) {
        for (i2, j2, y) in c.terms(b) {
            let ent = prod.entry((i1 + i2, j1 + j2)).or_insert_with(|| zq.int_zero());
            *ent = zq.int_add(ent, &zq.int_mul(&x, &y, e), e);
        }
    }
    let g: Vec<ZqInt> = l.a.iter().map(|v| zq.to_int(v, e).unwrap()).collect();
    let h: Vec<ZqInt> = l.b.iter().map(|v| zq.to_int(v, e).unwrap()).collect();
    for deg in (4..7).rev() {
        let tops: Vec<((usize, usize), ZqInt)> =
            prod.iter().filter(|((i, _), _)| *i == deg).map(|(k, v)| (*k, v.clone())).collect();
        for ((_, j), v) in tops {
            prod.remove(&(deg, j));
            for (k, gk) in g.iter().enumerate() {
                let ent = prod.entry((deg - 2, j + k)).or_insert_with(|| zq.int_zero());
                *ent = zq.int_sub(ent, &zq.int_mul(&v, gk, e), e);
            }
            for (k, hk) in h.iter().enumerate() {
                let ent = prod.entry((deg - 4, j + k)).or_insert_with(|| zq.int_zero());
                *ent = zq.int_sub(ent, &zq.int_mul(&v, hk, e), e);
            }
        }
    }
    let mut out = c.zero();
    for ((i, j), v) in prod {
        if j < c.n3() {
            c.set(&mut out, i, j, &v);
        }
    }
    out
}

#[test]
fn y2_times_y2() {
    let l = curve(&Gf::prime(7), CaseTag::Case4, 1);
    let c = ctx(&l, 16, 10);
    let y2 = c.monomial(2, 0, &c.zq().int_one());
    let prod = c.mul(&y2, &y2);
    let zq = c.zq();
    for k in 0..5 {
        let hk = zq.to_int(&l.b[k], 10).unwrap();
        assert_eq!(c.get(&prod, 0, k), zq.int_neg(&hk, 10));
        if k < 3 {
            let gk = zq.to_int(&l.a[k], 10).unwrap();
            assert_eq!(c.get(&prod, 2, k), zq.int_neg(&gk, 10));
        }
    }
    assert_eq!(c.mul(&y2, &c.one()), y2);
}

#[test]
fn products_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (fq, prec) in [(Gf::prime(7), 25), (Gf::new(3, 2, None).unwrap(), 30), (Gf::new(5, 3, None).unwrap(), 12)] {
        for case in CaseTag::ALL {
            let l = curve(&fq, case, rng.next_u64());
            let c = ctx(&l, 40, prec);
            let a = random_elem(&c, &mut rng, 60, 40);
            let b = random_elem(&c, &mut rng, 60, 30);
            let want = oracle_mul(&c, &l, &a, &b);
            let mut school = c.clone();
            school.set_schoolbook_cutoff(usize::MAX);
            let mut fast = c.clone();
            fast.set_schoolbook_cutoff(0);
            assert_eq!(school.mul(&a, &b), want, "schoolbook, {case}");
            assert_eq!(fast.mul(&a, &b), want, "ntt, {case}");
        }
    }
}

#[test]
fn wide_precision_ntt_matches_schoolbook() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let l = curve(&Gf::prime(11), CaseTag::Case2, 2);
    let mut c = ctx(&l, 200, 300);
    let a = random_elem(&c, &mut rng, 90, 200);
    let b = random_elem(&c, &mut rng, 90, 200);
    c.set_schoolbook_cutoff(0);
    let fast = c.mul(&a, &b);
    c.set_schoolbook_cutoff(usize::MAX);
    assert_eq!(fast, c.mul(&a, &b));
}

#[test]
fn differentials() {
    let l = curve(&Gf::prime(7), CaseTag::Case1, 3);
    let c = ctx(&l, 10, 8);
    let zq = c.zq();
    let one = zq.int_one();
    let x = c.monomial(0, 1, &one);
    let dx = c.total_differential(&x);
    assert_eq!(dx.a, c.one());
    assert!(c.is_zero(&dx.b));
    let u = c.monomial(3, 2, &one);
    let du = c.total_differential(&u);
    assert_eq!(du.a, c.monomial(3, 1, &zq.int_from_u64(2)));
    assert_eq!(du.b, c.monomial(2, 2, &zq.int_from_u64(3)));
    let k = c.total_differential(&c.scale_u64(&c.one(), 5));
    assert!(c.is_zero(&k.a) && c.is_zero(&k.b));
}

#[test]
fn normalize_examples() {
    let l = curve(&Gf::prime(7), CaseTag::Case4, 3);
    let c = ctx(&l, 10, 8);
    let zq = c.zq();
    let one = zq.int_one();
    // x^2 y dy -> -x y^2 dx
    let w = quartic_zeta_core::algebra::DifferentialForm {
        a: c.zero(),
        b: c.monomial(1, 2, &one),
        denom: 1,
        normalized: false,
    };
    let n = c.normalize_to_dx(&w);
    assert_eq!(n.denom, 12);
    assert_eq!(n.a, c.monomial(2, 1, &zq.int_neg(&zq.int_from_u64(12), 8)));
    // y^3 dy has no dx part
    let w = quartic_zeta_core::algebra::DifferentialForm { a: c.zero(), b: c.monomial(3, 0, &one), denom: 1, normalized: false };
    assert!(c.is_zero(&c.normalize_to_dx(&w).a));
}

#[test]
fn sigma_on_unramified_extension() {
    let l = curve(&Gf::new(3, 2, None).unwrap(), CaseTag::Case4, 8);
    let c = ctx(&l, 8, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_elem(&c, &mut rng, 50, 8);
    assert_eq!(c.sigma(&c.sigma(&a)), a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn ring_laws_and_leibniz(seed in any::<u64>(), case in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = curve(&Gf::prime(5), CaseTag::ALL[case], seed);
        let c = ctx(&l, 24, 15);
        let (u, v, w) = (random_elem(&c, &mut rng, 40, 24), random_elem(&c, &mut rng, 40, 24), random_elem(&c, &mut rng, 40, 24));
        prop_assert_eq!(c.mul(&c.add(&u, &v), &w), c.add(&c.mul(&u, &w), &c.mul(&v, &w)));
        prop_assert_eq!(c.mul(&c.mul(&u, &v), &w), c.mul(&u, &c.mul(&v, &w)));
        // partials of canonical representatives obey Leibniz while no y^4
        // reduction intervenes
        let (u, v) = (random_elem_rows(&c, &mut rng, 40, 24, 2), random_elem_rows(&c, &mut rng, 40, 24, 2));
        let duv = c.total_differential(&c.mul(&u, &v));
        let du = c.total_differential(&u);
        let dv = c.total_differential(&v);
        let mut a = c.add(&c.mul(&u, &dv.a), &c.mul(&v, &du.a));
        let mut da = duv.a.clone();
        // the top x-coefficient of a derivative is lost to truncation
        c.truncate_x(&mut a, c.n3() - 1);
        c.truncate_x(&mut da, c.n3() - 1);
        prop_assert_eq!(da, a);
        prop_assert_eq!(duv.b, c.add(&c.mul(&u, &dv.b), &c.mul(&v, &du.b)));
    }
}

#[test]
fn precision_conversion_roundtrip() {
    let l = curve(&Gf::prime(7), CaseTag::Case3, 5);
    let c = ctx(&l, 20, 30);
    let lo = c.with_precision(10);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_elem(&c, &mut rng, 50, 20);
    let b = random_elem(&c, &mut rng, 50, 20);
    let down = c.convert(&c.mul(&a, &b), &lo);
    assert_eq!(down, lo.mul(&c.convert(&a, &lo), &c.convert(&b, &lo)));
}
