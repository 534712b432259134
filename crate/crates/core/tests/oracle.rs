use proptest::prelude::*;
use quartic_zeta_core::field::{Field, Gf};
use quartic_zeta_core::oracle::{count_c, count_c_projective, count_e, zeta_from_counts, TableField};
use quartic_zeta_core::{CaseTag, CurveInput};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_curve(fq: &Gf, case: CaseTag, seed: u64) -> CurveInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CurveInput::random(fq, case, &mut rng)
}

fn isqrt(n: i128) -> i128 {
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[test]
fn table_field_agrees_with_polynomial_arithmetic() {
    for (p, n) in [(3, 2), (7, 2), (5, 3), (11, 1)] {
        let f = Gf::new(p, n, None).unwrap();
        let t = TableField::new(&f).unwrap();
        let q = f.order() as u64;
        for a in 0..q {
            for b in 0..q {
                let (ea, eb) = (f.decode(a), f.decode(b));
                let (ta, tb) = (t.from_code(a), t.from_code(b));
                assert_eq!(t.to_code(t.add(ta, tb)), f.encode(&f.add(&ea, &eb)));
                assert_eq!(t.to_code(t.mul(ta, tb)), f.encode(&f.mul(&ea, &eb)));
                assert_eq!(t.to_code(t.sub(ta, tb)), f.encode(&f.sub(&ea, &eb)));
            }
            if a != 0 {
                let ta = t.from_code(a);
                assert_eq!(t.mul(ta, t.inv(ta)), t.from_code(1));
                let sq = t.mul(ta, ta);
                assert_eq!(t.chi(sq), 1);
                let r = t.sqrt(sq);
                assert_eq!(t.mul(r, r), sq);
            }
        }
        let squares = t.elements().filter(|&a| t.chi(a) == 1).count() as u64;
        assert_eq!(squares, (q - 1) / 2);
    }
}

#[test]
fn chart_counts_match_projective_enumeration() {
    for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1)] {
        let fq = Gf::new(p, n, None).unwrap();
        for case in CaseTag::ALL {
            for seed in 0..4 {
                let c = random_curve(&fq, case, seed);
                assert_eq!(count_c(&c, 1).unwrap(), count_c_projective(&c).unwrap(), "{case} over F_{}", fq.order());
            }
        }
    }
}

#[test]
fn extension_counts_match_the_base_count_of_the_extended_curve() {
    let fq = Gf::new(3, 1, None).unwrap();
    for case in CaseTag::ALL {
        let c = random_curve(&fq, case, 3);
        let (big, emb) = fq.extension(2);
        let lift = |a: &Vec<u64>| emb.apply(&big, a);
        let c2 = CurveInput::new(big.clone(), c.g.clone().map(|a| lift(&a)), c.h.clone().map(|a| lift(&a))).unwrap();
        assert_eq!(count_c(&c, 2).unwrap(), count_c(&c2, 1).unwrap());
        assert_eq!(count_c(&c, 2).unwrap(), count_c_projective(&c2).unwrap());
    }
}

#[test]
fn points_at_infinity() {
    // Case 1: a single point (0 : 1 : 0); Case 2: w^2 (w^2 + a2)
    let c1 = CurveInput::over_prime(7, [1, 2, 0], [3, 1, 0, 1, 0]).unwrap();
    let c2 = CurveInput::over_prime(7, [1, 2, 3], [3, 1, 0, 1, 0]).unwrap();
    let affine = |c: &CurveInput| {
        let f = &c.fq;
        let mut n = 0u64;
        for x in 0..7 {
            for y in 0..7 {
                if f.is_zero(&c.eval(&f.decode(x), &f.decode(y))) {
                    n += 1;
                }
            }
        }
        n
    };
    assert_eq!(count_c(&c1, 1).unwrap(), affine(&c1) + 1);
    // -3 = 4 is a square mod 7
    assert_eq!(count_c(&c2, 1).unwrap(), affine(&c2) + 3);
}

#[test]
fn quotient_counts_obey_hasse_and_the_quadratic_recurrence() {
    for (p, n) in [(7, 1), (11, 1), (13, 1), (3, 2), (7, 2)] {
        let fq = Gf::new(p, n, None).unwrap();
        let q = fq.order() as i128;
        for case in CaseTag::ALL {
            let c = random_curve(&fq, case, 9);
            let a = q + 1 - count_e(&c, 1).unwrap() as i128;
            assert!(a * a <= 4 * q, "{case} over F_{q}: a = {a}");
            if q * q <= 1 << 20 {
                let e2 = count_e(&c, 2).unwrap() as i128;
                assert_eq!(e2, q * q + 1 - (a * a - 2 * q));
            }
        }
    }
}

#[test]
fn curve_counts_respect_weil_bounds() {
    for (p, n) in [(7, 1), (11, 1), (3, 2)] {
        let fq = Gf::new(p, n, None).unwrap();
        let q = fq.order() as i128;
        for case in CaseTag::ALL {
            let c = random_curve(&fq, case, 1);
            for r in 1..=3u32 {
                let qr = q.pow(r);
                let nr = count_c(&c, r as usize).unwrap() as i128;
                let dev = (nr - qr - 1).abs();
                assert!(dev * dev <= 36 * qr, "r = {r}");
            }
            let counts: Vec<i128> = (1..=3).map(|r| count_c(&c, r).unwrap() as i128).collect();
            let pz = zeta_from_counts(&counts, q).unwrap();
            assert_eq!(pz[6], 1);
            assert_eq!(pz[0], q * q * q);
            assert!(pz[5].abs() <= 6 * isqrt(q) + 6);
        }
    }
}

#[test]
fn enumeration_budget_is_enforced() {
    let c = CurveInput::over_prime(7, [1, 2, 0], [3, 1, 0, 1, 0]).unwrap();
    assert!(count_c(&c, 9).is_err());
    assert!(count_c(&c, 0).is_err());
    assert!(zeta_from_counts(&[1, 2], 7).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projective_count_is_independent_of_the_chart(seed in any::<u64>(), case in 0usize..4, p in prop::sample::select(vec![3u64, 5, 7])) {
        let fq = Gf::new(p, 1, None).unwrap();
        let c = random_curve(&fq, CaseTag::ALL[case], seed);
        prop_assert_eq!(count_c(&c, 1).unwrap(), count_c_projective(&c).unwrap());
    }
}
