use proptest::prelude::*;
use quartic_zeta_core::field::{Field, Gf};
use quartic_zeta_core::oracle;
use quartic_zeta_core::padic::{PrecisionProfile, Zq, ZqScaled};
use quartic_zeta_core::zeta::{
    charpoly, compute, curve_counts, functional_equation_holds, int_poly_div_monic, int_poly_mul, power_sums,
    recover_integer, twisted_norm, twisted_norm_direct, Matrix, Mode,
};
use quartic_zeta_core::{CaseTag, CurveInput, Error};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(zq: &Zq, dim: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let fq = zq.fq().clone();
    let q = fq.order() as u64;
    (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let t = zq.teichmuller(&fq.decode(rng.next_u64() % q));
                    let s = zq.from_i64((rng.next_u64() % 1000) as i64 - 500);
                    zq.add(&t, &zq.mul(&s, &zq.from_i64(7)))
                })
                .collect()
        })
        .collect()
}

fn same(zq: &Zq, a: &Matrix, b: &Matrix) -> bool {
    a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(x, y)| zq.equal_at_prec(x, y)))
}

#[test]
fn binary_twisted_norm_matches_direct_product() {
    let fq = Gf::new(7, 3, None).unwrap();
    let zq = Zq::new(&fq, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in [2, 4, 5] {
        let m = random_matrix(&zq, dim, &mut rng);
        assert!(same(&zq, &twisted_norm(&zq, &m, 1), &m));
        for n in 2..=7 {
            assert!(same(&zq, &twisted_norm(&zq, &m, n), &twisted_norm_direct(&zq, &m, n)), "dim {dim}, n = {n}");
        }
    }
}

#[test]
fn twisted_norm_over_the_prime_field_is_a_power() {
    let zq = Zq::new(&Gf::new(5, 1, None).unwrap(), 20);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_matrix(&zq, 3, &mut rng);
    let mut pow = m.clone();
    for _ in 1..4 {
        pow = quartic_zeta_core::zeta::mat_mul(&zq, &pow, &m);
    }
    assert!(same(&zq, &twisted_norm(&zq, &m, 4), &pow));
}

/// `det(X - M)` of an integer matrix by Faddeev-LeVerrier, low degree first.
fn faddeev_leverrier(m: &[Vec<i128>]) -> Vec<i128> {
    let n = m.len();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut mk = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = M (M_(k-1) + c_(n-k+1) I)
        let mut prev = mk.clone();
        for (i, row) in prev.iter_mut().enumerate() {
            row[i] += c[n - k + 1];
        }
        mk = (0..n).map(|i| (0..n).map(|j| (0..n).map(|l| m[i][l] * prev[l][j]).sum()).collect()).collect();
        let tr: i128 = (0..n).map(|i| mk[i][i]).sum();
        c[n - k] = -tr / k as i128;
    }
    c
}

#[test]
fn charpoly_of_integer_matrices() {
    let zq = Zq::new(&Gf::new(7, 1, None).unwrap(), 40);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in 1..=6 {
        let ints: Vec<Vec<i128>> =
            (0..dim).map(|_| (0..dim).map(|_| (rng.next_u64() % 41) as i128 - 20).collect()).collect();
        let m: Matrix = ints.iter().map(|r| r.iter().map(|&v| zq.from_i64(v as i64)).collect()).collect();
        let want = faddeev_leverrier(&ints);
        let got = charpoly(&zq, &m);
        assert_eq!(got.len(), dim + 1);
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(recover_integer(&zq, g, 1 << 60, "coefficient").unwrap(), *w);
        }
    }
}

#[test]
fn charpoly_of_companion_matrix() {
    // companion matrix of X^3 - 2X^2 + 5X + 7
    let zq = Zq::new(&Gf::new(11, 1, None).unwrap(), 20);
    let i = |v: i64| zq.from_i64(v);
    let m: Matrix = vec![vec![i(0), i(0), i(-7)], vec![i(1), i(0), i(-5)], vec![i(0), i(1), i(2)]];
    let cp = charpoly(&zq, &m);
    let want = [7i64, 5, -2, 1];
    for (c, w) in cp.iter().zip(want) {
        assert!(zq.equal_at_prec(c, &i(w)));
    }
}

#[test]
fn recover_integer_needs_enough_digits() {
    let zq = Zq::new(&Gf::new(7, 1, None).unwrap(), 10);
    let x: ZqScaled = zq.truncate_abs(&zq.from_i64(-30), 2);
    assert_eq!(recover_integer(&zq, &x, 20, "t").unwrap(), 19);
    assert!(matches!(recover_integer(&zq, &x, 30, "t"), Err(Error::PrecisionInsufficient(_))));
    let y = zq.truncate_abs(&zq.from_i64(-30), 3);
    assert_eq!(recover_integer(&zq, &y, 30, "t").unwrap(), -30);
}

#[test]
fn counts_from_a_known_weil_polynomial() {
    // y^4 + (1 + 2x) y^2 + 3 + x + x^3 = 0 over F_7
    let p = [343, -98, 77, -32, 11, -2, 1];
    assert!(functional_equation_holds(&p, 7));
    assert_eq!(curve_counts(&p, 7, 3), vec![6, 68, 306]);
    let mut bad = p;
    bad[1] += 1;
    assert!(!functional_equation_holds(&bad, 7));
}

#[test]
fn integer_polynomial_division() {
    let a = [-7, 1];
    let b = [3, 0, 1];
    let ab = int_poly_mul(&a, &b);
    assert_eq!(int_poly_div_monic(&ab, &b), Some(a.to_vec()));
    let mut off = ab.clone();
    off[0] += 1;
    assert_eq!(int_poly_div_monic(&off, &b), None);
}

fn end_to_end(fq: &Gf, case: CaseTag, seed: u64, mode: Mode) -> (Vec<i128>, Vec<i128>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = CurveInput::random(fq, case, &mut rng);
    let prof = PrecisionProfile::fast(fq.characteristic(), fq.degree());
    let comp = compute(&c, &prof, mode, &mut |_| {}).unwrap();
    let counts: Vec<i128> = (1..=3).map(|r| oracle::count_c(&c, r).unwrap() as i128).collect();
    (comp.weil.p, oracle::zeta_from_counts(&counts, fq.order() as i128).unwrap())
}

#[test]
fn split_and_full_modes_agree_with_enumeration() {
    let fq = Gf::new(7, 1, None).unwrap();
    for case in [CaseTag::Case2, CaseTag::Case4] {
        let (split, want) = end_to_end(&fq, case, 77, Mode::Split);
        let (full, _) = end_to_end(&fq, case, 77, Mode::Full);
        assert_eq!(split, want);
        assert_eq!(full, want);
    }
}

#[test]
fn rejects_inconsistent_precisions() {
    let fq = Gf::new(7, 1, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let c = CurveInput::random(&fq, CaseTag::Case1, &mut rng);
    let prof = PrecisionProfile::custom(7, 1, 100, 10, 5);
    assert!(matches!(compute(&c, &prof, Mode::Split, &mut |_| {}), Err(Error::Validation(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_sums_of_integer_roots(roots in proptest::collection::vec(-30i128..30, 1..7)) {
        let poly = roots.iter().fold(vec![1i128], |acc, &r| int_poly_mul(&acc, &[-r, 1]));
        let s = power_sums(&poly, 5);
        for r in 1..=5u32 {
            prop_assert_eq!(s[r as usize - 1], roots.iter().map(|x| x.pow(r)).sum::<i128>());
        }
    }

    #[test]
    fn counts_round_trip_through_zeta_from_counts(q in prop::sample::select(vec![5i128, 7, 9, 11, 13, 49]), t in proptest::collection::vec(-1.0f64..1.0, 3)) {
        // a product of three elliptic-type factors X^2 - a X + q
        let bound = (4 * q) as f64;
        let p = t.iter().fold(vec![1i128], |acc, &s| {
            let a = (s * bound.sqrt()).trunc() as i128;
            int_poly_mul(&acc, &[q, -a, 1])
        });
        prop_assert!(functional_equation_holds(&p, q));
        let counts = curve_counts(&p, q, 3);
        prop_assert_eq!(oracle::zeta_from_counts(&counts, q).unwrap(), p);
    }
}
