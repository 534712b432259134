//! Dense univariate polynomials over a [`Field`], stored low degree first.
//!
//! The zero polynomial is the empty vector; every function returns trimmed
//! results.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use super::Field;

pub type Poly<F> = Vec<<F as Field>::Elem>;

pub fn trim<F: Field>(f: &F, mut a: Poly<F>) -> Poly<F> {
    while let Some(last) = a.last() {
        if f.is_zero(last) {
            a.pop();
        } else {
            break;
        }
    }
    a
}

pub fn degree<F: Field>(a: &Poly<F>) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

pub fn constant<F: Field>(f: &F, c: F::Elem) -> Poly<F> {
    trim(f, vec![c])
}

pub fn x<F: Field>(f: &F) -> Poly<F> {
    vec![f.zero(), f.one()]
}

pub fn add<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n)
        .map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    trim(f, out)
}

pub fn sub<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n)
        .map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    trim(f, out)
}

pub fn neg<F: Field>(f: &F, a: &Poly<F>) -> Poly<F> {
    a.iter().map(|c| f.neg(c)).collect()
}

pub fn scale<F: Field>(f: &F, a: &Poly<F>, c: &F::Elem) -> Poly<F> {
    trim(f, a.iter().map(|x| f.mul(x, c)).collect())
}

pub fn mul<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if f.is_zero(ai) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(ai, bj);
            out[i + j] = f.add(&out[i + j], &t);
        }
    }
    trim(f, out)
}

/// Quotient and remainder; panics on division by the zero polynomial.
pub fn divrem<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> (Poly<F>, Poly<F>) {
    let db = degree::<F>(b).expect("division by zero polynomial");
    let lead_inv = f.inv(&b[db]).expect("nonzero leading coefficient");
    let mut r = a.clone();
    if r.len() <= db {
        return (Vec::new(), trim(f, r));
    }
    let mut q = vec![f.zero(); r.len() - db];
    for i in (db..r.len()).rev() {
        if f.is_zero(&r[i]) {
            continue;
        }
        let c = f.mul(&r[i], &lead_inv);
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(&c, bj);
            r[i - db + j] = f.sub(&r[i - db + j], &t);
        }
        q[i - db] = c;
    }
    r.truncate(db);
    (trim(f, q), trim(f, r))
}

pub fn rem<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
    divrem(f, a, b).1
}

pub fn monic<F: Field>(f: &F, a: &Poly<F>) -> Poly<F> {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let li = f.inv(l).expect("nonzero");
            scale(f, a, &li)
        }
    }
}

/// Monic greatest common divisor (zero if both inputs are zero).
pub fn gcd<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    monic(f, &a)
}

/// Returns `(g, s, t)` with `s*a + t*b = g` and `g` monic.
pub fn xgcd<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> (Poly<F>, Poly<F>, Poly<F>) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (constant(f, f.one()), Vec::new());
    let (mut t0, mut t1) = (Vec::new(), constant(f, f.one()));
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1);
        let s = sub(f, &s0, &mul(f, &q, &s1));
        let t = sub(f, &t0, &mul(f, &q, &t1));
        r0 = core::mem::replace(&mut r1, r);
        s0 = core::mem::replace(&mut s1, s);
        t0 = core::mem::replace(&mut t1, t);
    }
    if r0.is_empty() {
        return (r0, s0, t0);
    }
    let li = f.inv(r0.last().unwrap()).unwrap();
    (scale(f, &r0, &li), scale(f, &s0, &li), scale(f, &t0, &li))
}

pub fn mulmod<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>, m: &Poly<F>) -> Poly<F> {
    rem(f, &mul(f, a, b), m)
}

pub fn powmod<F: Field>(f: &F, a: &Poly<F>, mut e: u128, m: &Poly<F>) -> Poly<F> {
    let mut base = rem(f, a, m);
    let mut acc = rem(f, &constant(f, f.one()), m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(f, &acc, &base, m);
        }
        e >>= 1;
        if e > 0 {
            base = mulmod(f, &base, &base, m);
        }
    }
    acc
}

pub fn derivative<F: Field>(f: &F, a: &Poly<F>) -> Poly<F> {
    let out = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| f.mul(c, &f.from_i64(i as i64)))
        .collect();
    trim(f, out)
}

pub fn eval<F: Field>(f: &F, a: &Poly<F>, x: &F::Elem) -> F::Elem {
    let mut acc = f.zero();
    for c in a.iter().rev() {
        acc = f.add(&f.mul(&acc, x), c);
    }
    acc
}

/// Rabin's irreducibility test.
pub fn is_irreducible<F: Field>(f: &F, a: &Poly<F>) -> bool {
    let d = match degree::<F>(a) {
        None | Some(0) => return false,
        Some(d) => d,
    };
    if d == 1 {
        return true;
    }
    let a = monic(f, a);
    let q = f.order();
    let xp = x(f);
    let frob_iter = |k: usize| {
        let mut t = rem(f, &xp, &a);
        for _ in 0..k {
            t = powmod(f, &t, q, &a);
        }
        t
    };
    if frob_iter(d) != rem(f, &xp, &a) {
        return false;
    }
    for l in super::prime_factors(d as u128) {
        let t = frob_iter(d / l as usize);
        let g = gcd(f, &sub(f, &t, &xp), &a);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Distinct-degree factorisation of a monic squarefree polynomial:
/// pairs `(d, product of all irreducible factors of degree d)`.
pub fn ddf<F: Field>(f: &F, a: &Poly<F>) -> Vec<(usize, Poly<F>)> {
    let mut out = Vec::new();
    let mut rest = monic(f, a);
    let q = f.order();
    let xp = x(f);
    let mut h = rem(f, &xp, &rest);
    let mut d = 0;
    while degree::<F>(&rest).unwrap_or(0) >= 2 * (d + 1) {
        d += 1;
        h = powmod(f, &h, q, &rest);
        let g = gcd(f, &sub(f, &h, &xp), &rest);
        if g.len() > 1 {
            rest = divrem(f, &rest, &g).0;
            h = rem(f, &h, &rest);
            out.push((d, g));
        }
    }
    if let Some(dr) = degree::<F>(&rest) {
        if dr > 0 {
            out.push((dr, rest));
        }
    }
    out
}

/// Cantor-Zassenhaus equal-degree splitting of a monic product of
/// distinct irreducibles of degree `d` (odd characteristic).
pub fn edf<F: Field, R: RngCore>(f: &F, a: &Poly<F>, d: usize, rng: &mut R) -> Vec<Poly<F>> {
    let n = degree::<F>(a).unwrap_or(0);
    if n <= d {
        return vec![monic(f, a)];
    }
    let q = f.order();
    loop {
        let r: Poly<F> = trim(f, (0..n).map(|_| f.random(rng)).collect());
        if r.is_empty() {
            continue;
        }
        // r^((q^d - 1)/2) = (r^(1 + q + ... + q^(d-1)))^((q - 1)/2)
        let mut norm = r.clone();
        let mut fr = r.clone();
        for _ in 1..d {
            fr = powmod(f, &fr, q, a);
            norm = mulmod(f, &norm, &fr, a);
        }
        let b = powmod(f, &norm, (q - 1) / 2, a);
        let g = gcd(f, &sub(f, &b, &constant(f, f.one())), a);
        let dg = degree::<F>(&g).unwrap_or(0);
        if dg > 0 && dg < n {
            let h = divrem(f, a, &g).0;
            let mut out = edf(f, &g, d, rng);
            out.extend(edf(f, &monic(f, &h), d, rng));
            return out;
        }
    }
}

/// p-th root of a polynomial whose derivative vanishes.
fn pth_root<F: Field>(f: &F, a: &Poly<F>) -> Poly<F> {
    let p = f.characteristic() as usize;
    let e = f.order() / p as u128;
    let out = a.iter().step_by(p).map(|c| f.pow(c, e)).collect();
    trim(f, out)
}

/// Monic distinct irreducible factors of a nonzero polynomial, sorted by
/// degree.
pub fn irreducible_factors<F: Field, R: RngCore>(f: &F, a: &Poly<F>, rng: &mut R) -> Vec<Poly<F>> {
    let mut out: Vec<Poly<F>> = Vec::new();
    collect_factors(f, &monic(f, a), rng, &mut out);
    out.sort_by_key(|g| g.len());
    out
}

fn collect_factors<F: Field, R: RngCore>(f: &F, a: &Poly<F>, rng: &mut R, out: &mut Vec<Poly<F>>) {
    if degree::<F>(a).unwrap_or(0) == 0 {
        return;
    }
    let da = derivative(f, a);
    if da.is_empty() {
        collect_factors(f, &monic(f, &pth_root(f, a)), rng, out);
        return;
    }
    let h = gcd(f, a, &da);
    let sqfree = divrem(f, a, &h).0;
    for (d, part) in ddf(f, &sqfree) {
        for g in edf(f, &part, d, rng) {
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    collect_factors(f, &h, rng, out);
}

/// Distinct roots in the field.
pub fn roots<F: Field, R: RngCore>(f: &F, a: &Poly<F>, rng: &mut R) -> Vec<F::Elem> {
    irreducible_factors(f, a, rng)
        .into_iter()
        .filter(|g| g.len() == 2)
        .map(|g| f.neg(&g[0]))
        .collect()
}

/// Squarefree part: product of the distinct monic irreducible factors.
pub fn radical<F: Field, R: RngCore>(f: &F, a: &Poly<F>, rng: &mut R) -> Poly<F> {
    irreducible_factors(f, a, rng)
        .iter()
        .fold(constant(f, f.one()), |acc, g| mul(f, &acc, g))
}

/// Determinant of a square matrix over `F[x]` by fraction-free
/// (Bareiss) elimination.
pub fn det_poly_matrix<F: Field>(f: &F, mut m: Vec<Vec<Poly<F>>>) -> Poly<F> {
    let n = m.len();
    if n == 0 {
        return constant(f, f.one());
    }
    let mut sign_neg = false;
    let mut prev = constant(f, f.one());
    for k in 0..n - 1 {
        if m[k][k].is_empty() {
            match (k + 1..n).find(|&i| !m[i][k].is_empty()) {
                None => return Vec::new(),
                Some(i) => {
                    m.swap(k, i);
                    sign_neg = !sign_neg;
                }
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = sub(f, &mul(f, &m[k][k], &m[i][j]), &mul(f, &m[i][k], &m[k][j]));
                let (q, r) = divrem(f, &t, &prev);
                debug_assert!(r.is_empty());
                m[i][j] = q;
            }
            m[i][k] = Vec::new();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign_neg {
        neg(f, &d)
    } else {
        d
    }
}

/// Resultant of two polynomials in `y` whose coefficients lie in `F[x]`,
/// via the Sylvester determinant. Inputs are lists of coefficient
/// polynomials, low `y`-degree first, both with nonzero leading entry.
pub fn resultant_y<F: Field>(f: &F, a: &[Poly<F>], b: &[Poly<F>]) -> Poly<F> {
    let da = a.len() - 1;
    let db = b.len() - 1;
    let n = da + db;
    if n == 0 {
        return constant(f, f.one());
    }
    let mut m = vec![vec![Vec::new(); n]; n];
    for r in 0..db {
        for (i, c) in a.iter().enumerate() {
            m[r][r + da - i] = c.clone();
        }
    }
    for r in 0..da {
        for (i, c) in b.iter().enumerate() {
            m[db + r][r + db - i] = c.clone();
        }
    }
    det_poly_matrix(f, m)
}
