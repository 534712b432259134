use proptest::prelude::*;
use quartic_zeta_core::field::{poly, Ext, Field, Gf};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn f49_with_t2_plus_1() {
    let f = Gf::new(7, 2, Some(&[1, 0, 1])).unwrap();
    let t = vec![0, 1];
    assert_eq!(f.frobenius(&t), vec![0, 6]);
    assert_eq!(f.mul(&t, &t), vec![6, 0]);
    assert_eq!(f.order(), 49);
}

#[test]
fn rejects_bad_fields() {
    assert!(Gf::new(2, 1, None).is_err());
    assert!(Gf::new(9, 1, None).is_err());
    // t^2 + 1 splits mod 5
    assert!(Gf::new(5, 2, Some(&[1, 0, 1])).is_err());
}

#[test]
fn default_modulus_is_smallest_irreducible() {
    // over F_7, t^2 + 1 is the first irreducible monic quadratic in base-7 order
    assert_eq!(Gf::new(7, 2, None).unwrap().modulus(), &[1, 0, 1]);
    assert_eq!(Gf::new(3, 2, None).unwrap().modulus(), &[1, 0, 1]);
}

#[test]
fn factorization_of_x_q_minus_x() {
    let f = Gf::new(5, 1, None).unwrap();
    let mut a = vec![f.zero(); 26];
    a[25] = f.one();
    a[1] = f.neg(&f.one());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let facs = poly::irreducible_factors(&f, &a, &mut rng);
    let count = |d| facs.iter().filter(|g| poly::degree::<Gf>(g) == Some(d)).count();
    assert_eq!((count(1), count(2)), (5, 10));
}

#[test]
fn resultant_detects_common_root() {
    let f = Gf::prime(11);
    let c = |v: u64| vec![f.from_u64(v)];
    // a(y) = y^2 - x, b(y) = y - 3 : Res = 9 - x
    let a = vec![vec![f.zero(), f.neg(&f.one())], vec![], c(1)];
    let b = vec![c(11 - 3), c(1)];
    let r = poly::resultant_y(&f, &a, &b);
    let r = poly::monic(&f, &r);
    assert_eq!(r, vec![f.from_u64(2), f.one()]);
}

#[test]
fn extension_embedding_is_a_homomorphism() {
    let f = Gf::new(3, 2, None).unwrap();
    let (big, emb) = f.extension(3);
    assert_eq!(big.order(), 729);
    for a in 0..9u64 {
        for b in 0..9u64 {
            let (x, y) = (f.decode(a), f.decode(b));
            let lhs = emb.apply(&big, &f.mul(&x, &y));
            let rhs = big.mul(&emb.apply(&big, &x), &emb.apply(&big, &y));
            assert_eq!(lhs, rhs);
            assert_eq!(emb.apply(&big, &f.add(&x, &y)), big.add(&emb.apply(&big, &x), &emb.apply(&big, &y)));
        }
    }
}

#[test]
fn ext_field_of_polynomial() {
    let f = Gf::prime(7);
    let u = vec![f.from_u64(3), f.zero(), f.one()]; // x^2 + 3, irreducible mod 7
    let k = Ext::new(f.clone(), &u);
    assert_eq!(k.order(), 49);
    let g = k.generator();
    assert_eq!(k.mul(&g, &g), k.embed(&f.from_u64(4)));
    let inv = k.inv(&g).unwrap();
    assert!(k.is_one(&k.mul(&inv, &g)));
}

proptest! {
    #[test]
    fn field_laws_f125(a in 0u64..125, b in 0u64..125, c in 0u64..125) {
        let f = Gf::new(5, 3, None).unwrap();
        let (a, b, c) = (f.decode(a), f.decode(b), f.decode(c));
        prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
        prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
        if !f.is_zero(&a) {
            prop_assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())));
        }
        prop_assert_eq!(f.pow(&a, 125), a.clone());
    }

    #[test]
    fn divrem_and_gcd(a in prop::collection::vec(0u64..13, 0..9), b in prop::collection::vec(0u64..13, 1..6)) {
        let f = Gf::prime(13);
        let a = poly::trim(&f, a.iter().map(|&v| f.from_u64(v)).collect());
        let b = poly::trim(&f, b.iter().map(|&v| f.from_u64(v)).collect());
        prop_assume!(!b.is_empty());
        let (q, r) = poly::divrem(&f, &a, &b);
        prop_assert_eq!(poly::add(&f, &poly::mul(&f, &q, &b), &r), a.clone());
        prop_assert!(r.is_empty() || poly::degree::<Gf>(&r) < poly::degree::<Gf>(&b));
        let (g, s, t) = poly::xgcd(&f, &a, &b);
        prop_assert_eq!(poly::add(&f, &poly::mul(&f, &s, &a), &poly::mul(&f, &t, &b)), g.clone());
        prop_assert!(poly::rem(&f, &a, &g).is_empty());
    }
}
