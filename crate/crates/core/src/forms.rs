//! Positive definite integral quadratic forms Q(x) = ½ xᵀAx with A even.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::enumeration::LatticeSearch;
use crate::error::{Error, Result};
use crate::gram::GramMatrix;

pub const DEFAULT_MINIMA_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    gram: GramMatrix,
    discriminant: BigInt,
    level: BigInt,
    primitive: bool,
}

impl QuadraticForm {
    /// Checks the matrix and caches its invariants. Primitivity is recorded,
    /// not required.
    pub fn validate(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let k = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::NotSquare { row: i, len: r.len(), expected: k });
            }
        }
        if k < 3 {
            return Err(Error::DimensionTooSmall(k));
        }
        let gram = GramMatrix::from_rows(rows)?;
        Self::from_gram(gram)
    }

    pub fn from_gram(gram: GramMatrix) -> Result<Self> {
        let k = gram.dim();
        if k < 3 {
            return Err(Error::DimensionTooSmall(k));
        }
        if let Some(i) = (0..k).find(|&i| gram.get(i, i).is_odd()) {
            return Err(Error::OddDiagonal(i));
        }
        gram.is_positive_definite().map_err(Error::NotPositiveDefinite)?;
        let discriminant = gram.determinant();
        let level = level_of(&gram, &discriminant);
        let primitive = content_of(&gram).is_one();
        Ok(QuadraticForm { gram, discriminant, level, primitive })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::validate(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    /// The form with Gram matrix c·I_k, i.e. Q(x) = (c/2)|x|².
    pub fn scaled_identity(k: usize, c: i64) -> Result<Self> {
        Self::from_gram(GramMatrix::scaled_identity(k, c))
    }

    pub fn diagonal(diag: &[i64]) -> Result<Self> {
        Self::from_gram(GramMatrix::diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    pub fn level(&self) -> &BigInt {
        &self.level
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn require_primitive(&self) -> Result<()> {
        if self.primitive {
            Ok(())
        } else {
            Err(Error::NotPrimitive(content_of(&self.gram).to_string()))
        }
    }

    /// Q(x).
    pub fn value(&self, x: &[i64]) -> BigInt {
        self.gram.eval(x) / 2
    }

    /// The form UᵀAU for U given by its columns (must be unimodular to keep
    /// the lattice; only positive definiteness is checked).
    pub fn change_basis(&self, columns: &[Vec<i64>]) -> Result<Self> {
        Self::from_gram(self.gram.transform(columns))
    }
}

/// Least N with N·A⁻¹ even integral, via A⁻¹ = adj(A)/D.
fn level_of(gram: &GramMatrix, d: &BigInt) -> BigInt {
    let adj = gram.adjugate();
    let k = gram.dim();
    let two_d: BigInt = d * BigInt::from(2);
    let mut n = BigInt::one();
    for i in 0..k {
        for j in 0..k {
            let need = if i == j { &two_d / two_d.gcd(&adj[i][i]) } else { d / d.gcd(&adj[i][j]) };
            n = n.lcm(&need);
        }
    }
    n
}

/// gcd of the coefficients of Q: off-diagonal A_ij and halved diagonal.
fn content_of(gram: &GramMatrix) -> BigInt {
    let k = gram.dim();
    let mut g = BigInt::zero();
    for i in 0..k {
        g = g.gcd(&(gram.get(i, i) / 2));
        for j in (i + 1)..k {
            g = g.gcd(gram.get(i, j));
        }
    }
    g
}

/// Level of an arbitrary form given by its Gram matrix (exposed for checks).
pub fn level(form: &QuadraticForm) -> BigInt {
    form.level.clone()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimaProfile {
    pub minima: Vec<u64>,
    pub witnesses: Vec<Vec<i64>>,
}

/// Incremental row echelon basis over ℚ.
struct Span {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Span {
    fn insert(&mut self, x: &[i64]) -> bool {
        let mut v: Vec<BigRational> = x.iter().map(|&c| BigRational::from_integer(c.into())).collect();
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone() / &row[*pivot];
                for (a, b) in v.iter_mut().zip(row) {
                    *a -= &f * b;
                }
            }
        }
        match v.iter().position(|c| !c.is_zero()) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

pub fn successive_minima(form: &QuadraticForm) -> Result<MinimaProfile> {
    successive_minima_with_budget(form, DEFAULT_MINIMA_BUDGET)
}

/// Exact successive minima. All vectors with xᵀAx ≤ b are enumerated, sorted
/// by value, and scanned greedily for independence. The bound starts at the
/// smallest diagonal entry of A and doubles; the largest diagonal entry
/// always suffices because the unit vectors are independent.
pub fn successive_minima_with_budget(form: &QuadraticForm, budget: u64) -> Result<MinimaProfile> {
    let k = form.dim();
    let diag: Vec<BigInt> = (0..k).map(|i| form.gram.get(i, i).clone()).collect();
    let cap = diag
        .iter()
        .max()
        .unwrap()
        .to_i64()
        .ok_or_else(|| Error::InvalidArgument("diagonal entry exceeds 64 bits".into()))?;
    let mut bound = diag.iter().min().unwrap().to_i64().unwrap();
    loop {
        let mut found = LatticeSearch::new(&form.gram).budget(budget).list_at_most(bound)?;
        found.retain(|(x, v)| *v > 0 && x.iter().find(|c| **c != 0).is_some_and(|c| *c > 0));
        found.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let mut span = Span { rows: Vec::with_capacity(k) };
        let mut profile = MinimaProfile { minima: Vec::new(), witnesses: Vec::new() };
        for (x, v) in found {
            if span.insert(&x) {
                profile.minima.push((v / 2) as u64);
                profile.witnesses.push(x);
                if profile.minima.len() == k {
                    return Ok(profile);
                }
            }
        }
        assert!(bound < cap, "unit vectors must be found at the largest diagonal entry");
        bound = (bound * 2).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_examples() {
        let f = QuadraticForm::scaled_identity(4, 2).unwrap();
        assert_eq!(f.discriminant(), &BigInt::from(16));
        let g = QuadraticForm::diagonal(&[2, 2, 2, 4]).unwrap();
        assert_eq!(g.discriminant(), &BigInt::from(32));
        assert_eq!(QuadraticForm::diagonal(&[1, 2, 2, 2]), Err(Error::OddDiagonal(0)));
        assert_eq!(
            QuadraticForm::from_i64_rows(&[vec![2, 3, 0], vec![3, 2, 0], vec![0, 0, 2]]),
            Err(Error::NotPositiveDefinite(2))
        );
        assert_eq!(
            QuadraticForm::from_i64_rows(&[vec![2, 1, 0], vec![0, 2, 0], vec![0, 0, 2]]),
            Err(Error::NotSymmetric(0, 1))
        );
        assert_eq!(QuadraticForm::diagonal(&[2, 2]), Err(Error::DimensionTooSmall(2)));
        assert!(!QuadraticForm::scaled_identity(4, 4).unwrap().is_primitive());
        assert!(f.is_primitive());
    }

    /// Level by brute force: least N ≤ 2D making N·A⁻¹ even integral.
    fn level_oracle(f: &QuadraticForm) -> BigInt {
        let adj = f.gram().adjugate();
        let d = f.discriminant().clone();
        let k = f.dim();
        let mut n = BigInt::one();
        loop {
            let ok = (0..k).all(|i| {
                (0..k).all(|j| {
                    let e = &n * &adj[i][j];
                    if i == j {
                        (e % (&d * BigInt::from(2))).is_zero()
                    } else {
                        (e % &d).is_zero()
                    }
                })
            });
            if ok {
                return n;
            }
            n += 1;
        }
    }

    #[test]
    fn level_examples() {
        assert_eq!(QuadraticForm::scaled_identity(4, 2).unwrap().level(), &BigInt::from(4));
        assert_eq!(QuadraticForm::scaled_identity(8, 2).unwrap().level(), &BigInt::from(4));
        let f = QuadraticForm::diagonal(&[2, 2, 2, 4]).unwrap();
        assert_eq!(f.level(), &BigInt::from(8));
        assert_eq!(level_oracle(&f), BigInt::from(8));
        let a4 = QuadraticForm::from_i64_rows(&[
            vec![2, -1, 0, 0],
            vec![-1, 2, -1, 0],
            vec![0, -1, 2, -1],
            vec![0, 0, -1, 2],
        ])
        .unwrap();
        assert_eq!(a4.level(), &BigInt::from(5));
        assert_eq!(level_oracle(&a4), BigInt::from(5));
    }

    #[test]
    fn minima_examples() {
        let f = QuadraticForm::scaled_identity(4, 2).unwrap();
        assert_eq!(successive_minima(&f).unwrap().minima, vec![1, 1, 1, 1]);
        let g = QuadraticForm::diagonal(&[2, 4, 10, 12]).unwrap();
        assert_eq!(successive_minima(&g).unwrap().minima, vec![1, 2, 5, 6]);
        let h = QuadraticForm::diagonal(&[6, 8, 14, 18]).unwrap();
        assert_eq!(successive_minima(&h).unwrap().minima[0], 3);
    }

    #[test]
    fn minima_of_skewed_basis() {
        // basis change of 2·diag(1,2,5,6) by a unimodular matrix
        let g = QuadraticForm::diagonal(&[2, 4, 10, 12]).unwrap();
        let u = vec![vec![1, 0, 0, 0], vec![3, 1, 0, 0], vec![-2, 4, 1, 0], vec![1, 1, -3, 1]];
        let h = g.change_basis(&u).unwrap();
        let p = successive_minima(&h).unwrap();
        assert_eq!(p.minima, vec![1, 2, 5, 6]);
        for (w, m) in p.witnesses.iter().zip(&p.minima) {
            assert_eq!(h.value(w), BigInt::from(*m));
        }
    }
}
