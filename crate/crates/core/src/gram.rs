//! Symmetric integer matrices and the exact linear algebra the rest of the
//! crate needs (fraction-free determinants, adjugates, congruence transforms).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A symmetric integer matrix, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl GramMatrix {
    /// Builds a symmetric matrix from rows; checks squareness and symmetry only.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare { row: i, len: row.len(), expected: dim });
            }
            entries.extend(row);
        }
        let m = GramMatrix { dim, entries };
        for i in 0..dim {
            for j in (i + 1)..dim {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(m)
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![BigInt::zero(); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = BigInt::from(d);
        }
        GramMatrix { dim, entries }
    }

    pub fn scaled_identity(dim: usize, c: i64) -> Self {
        Self::diagonal(&vec![c; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.dim).map(|c| c.to_vec()).collect()
    }

    pub fn scaled(&self, c: i64) -> Self {
        let c = BigInt::from(c);
        GramMatrix { dim: self.dim, entries: self.entries.iter().map(|x| x * &c).collect() }
    }

    /// xᵀ G x.
    pub fn eval(&self, x: &[i64]) -> BigInt {
        assert_eq!(x.len(), self.dim);
        let mut acc = BigInt::zero();
        for i in 0..self.dim {
            if x[i] == 0 {
                continue;
            }
            let mut row = BigInt::zero();
            for j in 0..self.dim {
                if x[j] != 0 {
                    row += self.get(i, j) * x[j];
                }
            }
            acc += row * x[i];
        }
        acc
    }

    /// Uᵀ G U for an integer matrix U given by its columns.
    pub fn transform(&self, columns: &[Vec<i64>]) -> GramMatrix {
        let m = columns.len();
        let mut entries = Vec::with_capacity(m * m);
        for a in columns {
            for b in columns {
                let mut s = BigInt::zero();
                for i in 0..self.dim {
                    if a[i] == 0 {
                        continue;
                    }
                    for j in 0..self.dim {
                        if b[j] != 0 {
                            s += self.get(i, j) * (a[i] * b[j]);
                        }
                    }
                }
                entries.push(s);
            }
        }
        GramMatrix { dim: m, entries }
    }

    /// Leading principal minors Δ_1, …, Δ_k together with the fraction-free
    /// elimination rows: `rows[i][j]` (j ≥ i) is the entry of row i after i
    /// Bareiss steps, so that rows[i][i] = Δ_{i+1}.
    pub fn bareiss(&self) -> (Vec<BigInt>, Vec<Vec<BigInt>>) {
        let k = self.dim;
        let mut m: Vec<Vec<BigInt>> = self.rows();
        let mut rows = Vec::with_capacity(k);
        let mut minors = Vec::with_capacity(k);
        let mut prev = BigInt::one();
        for s in 0..k {
            minors.push(m[s][s].clone());
            rows.push(m[s].clone());
            if m[s][s].is_zero() {
                // singular leading block: remaining minors are not meaningful
                for _ in (s + 1)..k {
                    minors.push(BigInt::zero());
                    rows.push(vec![BigInt::zero(); k]);
                }
                break;
            }
            for i in (s + 1)..k {
                for j in (s + 1)..k {
                    let v = (&m[s][s] * &m[i][j] - &m[i][s] * &m[s][j]) / &prev;
                    m[i][j] = v;
                }
            }
            for i in (s + 1)..k {
                m[i][s] = BigInt::zero();
            }
            prev = m[s][s].clone();
        }
        (minors, rows)
    }

    pub fn leading_minors(&self) -> Vec<BigInt> {
        self.bareiss().0
    }

    pub fn determinant(&self) -> BigInt {
        if self.dim == 0 {
            return BigInt::one();
        }
        determinant_of(self.rows())
    }

    /// Adjugate matrix (classical adjoint), exact.
    pub fn adjugate(&self) -> Vec<Vec<BigInt>> {
        let k = self.dim;
        if k == 1 {
            return vec![vec![BigInt::one()]];
        }
        let mut adj = vec![vec![BigInt::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let minor: Vec<Vec<BigInt>> = (0..k)
                    .filter(|&r| r != j)
                    .map(|r| (0..k).filter(|&c| c != i).map(|c| self.get(r, c).clone()).collect())
                    .collect();
                let d = determinant_of(minor);
                adj[i][j] = if (i + j) % 2 == 0 { d } else { -d };
            }
        }
        adj
    }

    pub fn is_positive_definite(&self) -> std::result::Result<(), usize> {
        for (i, m) in self.leading_minors().iter().enumerate() {
            if !m.is_positive() {
                return Err(i + 1);
            }
        }
        Ok(())
    }
}

/// Determinant by fraction-free elimination with row pivoting.
pub fn determinant_of(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let k = m.len();
    if k == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for s in 0..k {
        if m[s][s].is_zero() {
            match (s + 1..k).find(|&r| !m[r][s].is_zero()) {
                Some(r) => {
                    m.swap(s, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in (s + 1)..k {
            for j in (s + 1)..k {
                m[i][j] = (&m[s][s] * &m[i][j] - &m[i][s] * &m[s][j]) / &prev;
            }
            m[i][s] = BigInt::zero();
        }
        prev = m[s][s].clone();
    }
    sign * &m[k - 1][k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[&[i64]]) -> GramMatrix {
        GramMatrix::from_i64_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn determinant_and_minors() {
        let a = g(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]);
        assert_eq!(a.determinant(), BigInt::from(4));
        assert_eq!(a.leading_minors(), vec![2.into(), 3.into(), 4.into()]);
        let b = g(&[&[0, 1], &[1, 0]]);
        assert_eq!(b.determinant(), BigInt::from(-1));
    }

    #[test]
    fn adjugate_times_matrix_is_det_identity() {
        let a = g(&[&[4, 2, -2, 0], &[2, 6, 1, 1], &[-2, 1, 8, 3], &[0, 1, 3, 10]]);
        let adj = a.adjugate();
        let d = a.determinant();
        for i in 0..4 {
            for j in 0..4 {
                let s: BigInt = (0..4).map(|l| &adj[i][l] * a.get(l, j)).sum();
                assert_eq!(s, if i == j { d.clone() } else { BigInt::zero() });
            }
        }
    }

    #[test]
    fn rejects_asymmetric() {
        assert_eq!(GramMatrix::from_i64_rows(&[vec![2, 1], vec![0, 2]]), Err(Error::NotSymmetric(0, 1)));
    }

    #[test]
    fn transform_and_eval() {
        let a = GramMatrix::scaled_identity(3, 2);
        let u = vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let t = a.transform(&u);
        assert_eq!(t.get(0, 0), &BigInt::from(4));
        assert_eq!(t.get(0, 1), &BigInt::from(2));
        assert_eq!(a.eval(&[1, -2, 3]), BigInt::from(28));
    }
}
