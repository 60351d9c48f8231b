#![allow(dead_code)]

use proptest::prelude::*;
use quadrep::QuadraticForm;

/// A = 2(MᵀM + P) with small M and a positive diagonal P, which is always
/// positive definite.
pub fn form(k_min: usize, k_max: usize, h: i64) -> impl Strategy<Value = QuadraticForm> {
    (k_min..=k_max)
        .prop_flat_map(move |k| (prop::collection::vec(-h..=h, k * k), prop::collection::vec(1..=h, k)))
        .prop_map(|(m, p)| {
            let k = p.len();
            let rows: Vec<Vec<i64>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| {
                            let mtm: i64 = (0..k).map(|r| m[r * k + i] * m[r * k + j]).sum();
                            2 * (mtm + if i == j { p[i] } else { 0 })
                        })
                        .collect()
                })
                .collect();
            QuadraticForm::from_i64_rows(&rows).expect("positive definite by construction")
        })
}

/// Columns of a unimodular matrix: a product of shears col_j += c·col_i,
/// followed by one column swap and one sign change.
pub fn unimodular(k: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (prop::collection::vec((0..k, 0..k, prop::sample::select(vec![-1i64, 1])), 0..6), 0..k, 0..k, 0..k).prop_map(
        move |(shears, a, b, flip)| {
            let mut cols: Vec<Vec<i64>> = (0..k).map(|j| (0..k).map(|i| (i == j) as i64).collect()).collect();
            for (i, j, c) in shears {
                if i != j {
                    for r in 0..k {
                        cols[j][r] += c * cols[i][r];
                    }
                }
            }
            cols.swap(a, b);
            for x in cols[flip].iter_mut() {
                *x = -*x;
            }
            cols
        },
    )
}

/// Every x with |x_i| ≤ bound, by odometer.
pub fn box_points(k: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut x = vec![-bound; k];
    loop {
        out.push(x.clone());
        let mut i = 0;
        while i < k && x[i] == bound {
            x[i] = -bound;
            i += 1;
        }
        if i == k {
            return out;
        }
        x[i] += 1;
    }
}

/// A form together with a unimodular change of basis of the same size.
pub fn form_with_basis(k_min: usize, k_max: usize, h: i64) -> impl Strategy<Value = (QuadraticForm, Vec<Vec<i64>>)> {
    form(k_min, k_max, h).prop_flat_map(|f| {
        let k = f.dim();
        (Just(f), unimodular(k))
    })
}
