//! Dense linear algebra over a [`Field`].

use alloc::vec::Vec;

use super::Field;

/// One solution of `A x = b` (free variables set to zero), or `None` when
/// the system is inconsistent. `a` is row-major with `rows x cols` entries.
pub fn solve<F: Field>(f: &F, a: &[Vec<F::Elem>], b: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<F::Elem>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !f.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, pr);
        let inv = f.inv(&m[r][c]).unwrap();
        for v in m[r].iter_mut() {
            *v = f.mul(v, &inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || f.is_zero(&row[c]) {
                continue;
            }
            let t = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = f.sub(v, &f.mul(&t, pv));
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !f.is_zero(&row[cols])) {
        return None;
    }
    let mut x = alloc::vec![f.zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}
