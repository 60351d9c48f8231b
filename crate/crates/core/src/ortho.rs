//! The lattice ℤ^d ∩ v^⊥ of integer vectors orthogonal to a given vector.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::gram::GramMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthoLattice {
    pub ambient_dim: usize,
    pub v: Vec<i64>,
    pub v_primitive: Vec<i64>,
    /// Rows of the Hermite normal form basis.
    pub basis: Vec<Vec<i64>>,
    #[serde(skip)]
    pub gram: GramMatrix,
    pub disc: BigInt,
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Row Hermite normal form: echelon, positive pivots, entries above each
/// pivot reduced into [0, pivot). Zero rows are dropped.
pub fn hermite_normal_form(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut top = 0;
    for c in 0..cols {
        if top == m.len() {
            break;
        }
        for r in (top + 1)..m.len() {
            if m[r][c] == 0 {
                continue;
            }
            let (a, b) = (m[top][c], m[r][c]);
            let (g, x, y) = ext_gcd(a, b);
            let (p, q) = (a / g, b / g);
            for j in 0..cols {
                let (s, t) = (m[top][j], m[r][j]);
                m[top][j] = x * s + y * t;
                m[r][j] = -q * s + p * t;
            }
        }
        if m[top][c] == 0 {
            continue;
        }
        if m[top][c] < 0 {
            for x in m[top].iter_mut() {
                *x = -*x;
            }
        }
        let piv = m[top][c];
        for r in 0..top {
            let f = Integer::div_floor(&m[r][c], &piv);
            if f != 0 {
                for j in 0..cols {
                    m[r][j] -= f * m[top][j];
                }
            }
        }
        top += 1;
    }
    m.truncate(top);
    m.into_iter().map(|r| r.into_iter().map(|x| i64::try_from(x).expect("HNF entry exceeds i64")).collect()).collect()
}

/// Basis of ℤ^d ∩ v^⊥ in Hermite normal form, with its Gram matrix under the
/// standard inner product. Panics if v = 0.
pub fn ortho_lattice(v: &[i64]) -> OrthoLattice {
    let d = v.len();
    assert!(v.iter().any(|&x| x != 0), "ortho_lattice needs a nonzero vector");
    let content = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    let v_primitive: Vec<i64> = v.iter().map(|&x| x / content).collect();

    // Column operations on the identity carrying v to (g, 0, …, 0).
    let mut r: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let mut cols: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i128).collect()).collect();
    for i in 1..d {
        if r[i] == 0 {
            continue;
        }
        if r[0] == 0 {
            r.swap(0, i);
            cols.swap(0, i);
            continue;
        }
        let (g, a, b) = ext_gcd(r[0], r[i]);
        let (p, q) = (r[0] / g, r[i] / g);
        let c0: Vec<i128> = (0..d).map(|j| a * cols[0][j] + b * cols[i][j]).collect();
        let ci: Vec<i128> = (0..d).map(|j| -q * cols[0][j] + p * cols[i][j]).collect();
        cols[0] = c0;
        cols[i] = ci;
        r[0] = g;
        r[i] = 0;
    }
    let kernel: Vec<Vec<i64>> = cols[1..]
        .iter()
        .map(|c| c.iter().map(|&x| i64::try_from(x).expect("kernel entry exceeds i64")).collect())
        .collect();
    let basis = hermite_normal_form(&kernel);
    let gram = GramMatrix::scaled_identity(d, 1).transform(&basis);
    let disc = gram.determinant();
    let norm: i64 = v_primitive.iter().map(|x| x * x).sum();
    assert_eq!(disc, BigInt::from(norm), "discriminant of v^⊥ must equal |v'|²");
    OrthoLattice { ambient_dim: d, v: v.to_vec(), v_primitive, basis, gram, disc }
}

impl OrthoLattice {
    /// Coefficient vector c (mod 2) with Σ c_i·basis_i ≡ target (mod 2), if any.
    pub fn solve_mod2(&self, target: &[i64]) -> Option<Vec<i64>> {
        let m = self.basis.len();
        let d = self.ambient_dim;
        // Augmented system over F₂: columns are basis vectors, one row per coordinate.
        let mut rows: Vec<Vec<u8>> = (0..d)
            .map(|j| {
                let mut row: Vec<u8> = self.basis.iter().map(|b| (b[j].rem_euclid(2)) as u8).collect();
                row.push(target[j].rem_euclid(2) as u8);
                row
            })
            .collect();
        let mut pivot_cols = Vec::new();
        let mut top = 0;
        for c in 0..m {
            let Some(p) = (top..d).find(|&r| rows[r][c] == 1) else { continue };
            rows.swap(top, p);
            for r in 0..d {
                if r != top && rows[r][c] == 1 {
                    for j in 0..=m {
                        rows[r][j] ^= rows[top][j];
                    }
                }
            }
            pivot_cols.push(c);
            top += 1;
        }
        if rows[top..].iter().any(|r| r[m] == 1) {
            return None;
        }
        let mut c = vec![0i64; m];
        for (r, &pc) in pivot_cols.iter().enumerate() {
            c[pc] = rows[r][m] as i64;
        }
        Some(c)
    }

    /// The vector Σ c_i·basis_i.
    pub fn embed(&self, c: &[i64]) -> Vec<i64> {
        let mut w = vec![0i64; self.ambient_dim];
        for (ci, b) in c.iter().zip(&self.basis) {
            for (wj, bj) in w.iter_mut().zip(b) {
                *wj += ci * bj;
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let l = ortho_lattice(&[2, 0, 0, 0, 0]);
        assert_eq!(l.disc, BigInt::from(1));
        assert_eq!(l.basis.len(), 4);
        assert!(l.basis.iter().all(|b| b[0] == 0));
        assert_eq!(ortho_lattice(&[1, 1, 0, 0, 0]).disc, BigInt::from(2));
        assert_eq!(ortho_lattice(&[1, 1, 1, 1, 0]).disc, BigInt::from(4));
    }

    #[test]
    fn scaling_invariance() {
        let a = ortho_lattice(&[1, -2, 3, 0, 5]);
        let b = ortho_lattice(&[-3, 6, -9, 0, -15]);
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.gram, b.gram);
        assert_eq!(a.disc, BigInt::from(39));
    }

    #[test]
    fn every_orthogonal_vector_is_an_integer_combination() {
        let v = [2i64, 3, -1, 4];
        let l = ortho_lattice(&v);
        for x0 in -3..=3i64 {
            for x1 in -3..=3i64 {
                for x2 in -3..=3i64 {
                    for x3 in -3..=3i64 {
                        let x = [x0, x1, x2, x3];
                        if x.iter().zip(&v).map(|(a, b)| a * b).sum::<i64>() != 0 {
                            continue;
                        }
                        let mut rows = l.basis.clone();
                        rows.push(x.to_vec());
                        assert_eq!(hermite_normal_form(&rows), l.basis);
                    }
                }
            }
        }
    }

    #[test]
    fn mod2_solver() {
        let l = ortho_lattice(&[1, 1, 0, 0, 0]);
        let c = l.solve_mod2(&[1, 1, 0, 1, 0]).unwrap();
        let w = l.embed(&c);
        assert!(w.iter().zip([1, 1, 0, 1, 0]).all(|(a, b)| (a - b) % 2 == 0));
        assert!(l.solve_mod2(&[1, 0, 0, 0, 0]).is_none());
    }
}
