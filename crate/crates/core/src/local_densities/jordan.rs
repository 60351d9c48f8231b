//! Jordan splittings of an integral form over ℤ_p.
//!
//! Elimination runs over ℚ with denominators prime to p, so every step is an
//! exact ℤ_p-congruence. For odd p the form Q = ½xᵀAx is diagonalized as
//! Σ a_i p^{α_i} x_i². For p = 2 the Gram matrix A itself is split into
//! blocks 2^α·(a), 2^α·[[0,1],[1,0]] and 2^α·[[2,1],[1,2]], i.e. Q becomes a
//! sum of a·2^{α-1}x², 2^α·x₁x₂ and 2^α·(x₁²+x₁x₂+x₂²).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{mod_inverse, pow_u64, valuation};
use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::gram::GramMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JordanBlockOdd {
    pub exponent: u32,
    /// Unit a reduced mod p^precision.
    pub unit: BigInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Block2Kind {
    Hyperbolic,
    Elliptic,
    Square,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JordanBlock2 {
    pub kind: Block2Kind,
    pub exponent: u32,
    /// Present for square blocks only, reduced mod 2^precision.
    pub unit: Option<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum JordanBlock {
    Odd(JordanBlockOdd),
    Two(JordanBlock2),
}

/// A block with its unit kept as an exact p-adic unit rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ExactBlock {
    pub kind: Block2Kind,
    pub exponent: u32,
    pub unit: BigRational,
}

impl ExactBlock {
    /// Integer representative of the unit modulo p^e.
    pub fn unit_mod(&self, p: u64, e: u32) -> BigInt {
        reduce_unit(&self.unit, p, e)
    }
}

pub(crate) fn reduce_unit(q: &BigRational, p: u64, e: u32) -> BigInt {
    let m = pow_u64(p, e);
    let inv = mod_inverse(q.denom(), &m).expect("denominator must be a p-adic unit");
    (q.numer() * inv).mod_floor(&m)
}

fn rat_valuation(q: &BigRational, p: u64) -> i64 {
    if q.is_zero() {
        return i64::MAX;
    }
    valuation(q.numer(), p) as i64 - valuation(q.denom(), p) as i64
}

fn ppow(p: u64, e: i64) -> BigRational {
    let b = BigRational::from_integer(pow_u64(p, e.unsigned_abs() as u32));
    if e >= 0 {
        b
    } else {
        b.recip()
    }
}

type Mat = Vec<Vec<BigRational>>;

fn remove(m: &Mat, idx: &[usize]) -> Mat {
    let keep: Vec<usize> = (0..m.len()).filter(|i| !idx.contains(i)).collect();
    keep.iter().map(|&r| keep.iter().map(|&c| m[r][c].clone()).collect()).collect()
}

/// Schur complement after splitting off index i (1×1 pivot).
fn schur1(m: &Mat, i: usize) -> Mat {
    let a = &m[i][i];
    let mut out = m.clone();
    for r in 0..m.len() {
        for c in 0..m.len() {
            if r != i && c != i && !m[r][i].is_zero() && !m[i][c].is_zero() {
                out[r][c] = &m[r][c] - &m[r][i] * &m[i][c] / a;
            }
        }
    }
    remove(&out, &[i])
}

/// Schur complement after splitting off the 2×2 block on {i, j}.
fn schur2(m: &Mat, i: usize, j: usize) -> Mat {
    let (a, b, d) = (&m[i][i], &m[i][j], &m[j][j]);
    let det = a * d - b * b;
    // inverse of [[a, b], [b, d]] is [[d, -b], [-b, a]] / det
    let mut out = m.clone();
    for r in 0..m.len() {
        if r == i || r == j {
            continue;
        }
        for c in 0..m.len() {
            if c == i || c == j {
                continue;
            }
            let (ri, rj) = (&m[r][i], &m[r][j]);
            let (ic, jc) = (&m[i][c], &m[j][c]);
            let corr = (ri * (d * ic - b * jc) + rj * (a * jc - b * ic)) / &det;
            out[r][c] = &m[r][c] - corr;
        }
    }
    remove(&out, &[i, j])
}

fn min_entry(m: &Mat, p: u64) -> (i64, Option<usize>, (usize, usize)) {
    let mut best = i64::MAX;
    let mut off = (0, 0);
    for r in 0..m.len() {
        for c in r..m.len() {
            let v = rat_valuation(&m[r][c], p);
            if v < best {
                best = v;
                off = (r, c);
            }
        }
    }
    let diag = (0..m.len()).find(|&i| rat_valuation(&m[i][i], p) == best);
    (best, diag, off)
}

/// Exact Jordan splitting; exponents follow the conventions in the module docs.
pub(crate) fn jordan_exact(gram: &GramMatrix, p: u64) -> Vec<ExactBlock> {
    let half = if p == 2 { BigRational::one() } else { BigRational::new(1.into(), 2.into()) };
    let mut m: Mat = gram
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| BigRational::from_integer(x) * &half).collect())
        .collect();
    let mut out = Vec::new();
    while !m.is_empty() {
        let (nu, diag, (r0, c0)) = min_entry(&m, p);
        assert!(nu != i64::MAX, "degenerate form in Jordan splitting");
        assert!(nu >= 0, "non-integral entry in Jordan splitting");
        let scale = ppow(p, -nu);
        match diag {
            Some(i) => {
                out.push(ExactBlock { kind: Block2Kind::Square, exponent: nu as u32, unit: &m[i][i] * &scale });
                m = schur1(&m, i);
            }
            None if p != 2 => {
                // e_i ← e_i + e_j lifts the off-diagonal valuation to the diagonal
                let (i, j) = (r0, c0);
                let n = m.len();
                for c in 0..n {
                    let add = m[j][c].clone();
                    m[i][c] += add;
                }
                for r in 0..n {
                    let add = m[r][j].clone();
                    m[r][i] += add;
                }
            }
            None => {
                let (i, j) = (r0, c0);
                let det = (&m[i][i] * &m[j][j] - &m[i][j] * &m[i][j]) * &scale * &scale;
                let kind = match reduce_unit(&det, 2, 3).to_u64().unwrap() {
                    7 => Block2Kind::Hyperbolic,
                    3 => Block2Kind::Elliptic,
                    r => unreachable!("even 2-adic block with determinant {r} mod 8"),
                };
                out.push(ExactBlock { kind, exponent: nu as u32, unit: BigRational::one() });
                m = schur2(&m, i, j);
            }
        }
    }
    canonicalize(out, p)
}

/// Orders blocks by exponent; for p = 2, within a scale hyperbolic blocks
/// come first, pairs of elliptic blocks are rewritten as hyperbolic pairs,
/// and square blocks follow sorted by their unit mod 8.
fn canonicalize(mut blocks: Vec<ExactBlock>, p: u64) -> Vec<ExactBlock> {
    if p == 2 {
        let mut exps: Vec<u32> = blocks.iter().map(|b| b.exponent).collect();
        exps.sort();
        exps.dedup();
        for e in exps {
            let ell: Vec<usize> = (0..blocks.len())
                .filter(|&i| blocks[i].exponent == e && blocks[i].kind == Block2Kind::Elliptic)
                .collect();
            for pair in ell.chunks(2) {
                if pair.len() == 2 {
                    blocks[pair[0]].kind = Block2Kind::Hyperbolic;
                    blocks[pair[1]].kind = Block2Kind::Hyperbolic;
                }
            }
        }
        blocks.sort_by_key(|b| (b.exponent, b.kind, b.unit_mod(2, 3)));
    } else {
        blocks.sort_by_key(|b| b.exponent);
    }
    blocks
}

/// Jordan blocks of `form` over ℤ_p with units reduced mod p^precision.
pub fn jordan_decompose(form: &QuadraticForm, p: u64, precision: u32) -> Result<Vec<JordanBlock>> {
    let blocks = jordan_exact(form.gram(), p);
    if let Some(b) = blocks.iter().find(|b| b.exponent >= precision) {
        return Err(Error::PrecisionTooLow { p, valuation: b.exponent, precision });
    }
    Ok(blocks
        .into_iter()
        .map(|b| {
            if p == 2 {
                let unit = (b.kind == Block2Kind::Square).then(|| b.unit_mod(2, precision));
                JordanBlock::Two(JordanBlock2 { kind: b.kind, exponent: b.exponent, unit })
            } else {
                JordanBlock::Odd(JordanBlockOdd { exponent: b.exponent, unit: b.unit_mod(p, precision) })
            }
        })
        .collect())
}

/// Gram matrix of the orthogonal sum of blocks, with the same convention as
/// the input of the decomposition (odd p: entries 2·a·p^α on the diagonal).
pub fn block_gram(blocks: &[JordanBlock], p: u64) -> GramMatrix {
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let place = |block: Vec<Vec<BigInt>>, rows: &mut Vec<Vec<BigInt>>| {
        let off = rows.len();
        let size = block.len();
        for r in rows.iter_mut() {
            r.extend(std::iter::repeat_n(BigInt::zero(), size));
        }
        for br in block {
            let mut row = vec![BigInt::zero(); off];
            row.extend(br);
            rows.push(row);
        }
    };
    for b in blocks {
        match b {
            JordanBlock::Odd(o) => {
                place(vec![vec![&o.unit * pow_u64(p, o.exponent) * 2]], &mut rows);
            }
            JordanBlock::Two(t) => {
                let s = pow_u64(2, t.exponent);
                let blk = match t.kind {
                    Block2Kind::Square => vec![vec![t.unit.clone().unwrap() * &s]],
                    Block2Kind::Hyperbolic => vec![vec![BigInt::zero(), s.clone()], vec![s.clone(), BigInt::zero()]],
                    Block2Kind::Elliptic => vec![vec![&s * 2, s.clone()], vec![s.clone(), &s * 2]],
                };
                place(blk, &mut rows);
            }
        }
    }
    GramMatrix::from_rows(rows).expect("block sum is symmetric")
}

/// p-adic valuation of D read off from the blocks.
pub fn determinant_valuation(blocks: &[JordanBlock]) -> u32 {
    blocks
        .iter()
        .map(|b| match b {
            JordanBlock::Odd(o) => o.exponent,
            JordanBlock::Two(t) if t.kind == Block2Kind::Square => t.exponent,
            JordanBlock::Two(t) => 2 * t.exponent,
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_densities::counting::scan_distribution;

    fn exps(blocks: &[JordanBlock]) -> Vec<u32> {
        blocks
            .iter()
            .map(|b| match b {
                JordanBlock::Odd(o) => o.exponent,
                JordanBlock::Two(t) => t.exponent,
            })
            .collect()
    }

    #[test]
    fn examples() {
        let f = QuadraticForm::scaled_identity(4, 2).unwrap();
        let b = jordan_decompose(&f, 3, 8).unwrap();
        assert_eq!(b, vec![JordanBlock::Odd(JordanBlockOdd { exponent: 0, unit: 1.into() }); 4]);
        let g = QuadraticForm::diagonal(&[2, 6, 6, 18]).unwrap();
        assert_eq!(exps(&jordan_decompose(&g, 3, 8).unwrap()), vec![0, 1, 1, 2]);
        let b2 = jordan_decompose(&f, 2, 9).unwrap();
        assert_eq!(
            b2,
            vec![JordanBlock::Two(JordanBlock2 { kind: Block2Kind::Square, exponent: 1, unit: Some(1.into()) }); 4]
        );
        assert_eq!(jordan_decompose(&g, 3, 2), Err(Error::PrecisionTooLow { p: 3, valuation: 2, precision: 2 }));
    }

    #[test]
    fn even_blocks_at_two() {
        // D4 is even with determinant 4: no square blocks at p = 2
        let d4 = QuadraticForm::from_i64_rows(&[
            vec![2, -1, 0, 0],
            vec![-1, 2, -1, -1],
            vec![0, -1, 2, 0],
            vec![0, -1, 0, 2],
        ])
        .unwrap();
        let b = jordan_decompose(&d4, 2, 8).unwrap();
        assert_eq!(determinant_valuation(&b), 2);
        assert!(b.iter().all(|x| matches!(x, JordanBlock::Two(t) if t.kind != Block2Kind::Square)));
    }

    fn same_values_mod(form: &QuadraticForm, p: u64, t: u32) {
        let blocks = jordan_decompose(form, p, t + 6).unwrap();
        let a = scan_distribution(form.gram(), p, t);
        let b = scan_distribution(&block_gram(&blocks, p), p, t);
        assert_eq!(a, b, "p = {p}, t = {t}");
    }

    #[test]
    fn splitting_preserves_value_distribution() {
        let forms = [
            QuadraticForm::from_i64_rows(&[vec![4, 2, 1], vec![2, 6, 3], vec![1, 3, 10]]).unwrap(),
            QuadraticForm::from_i64_rows(&[vec![6, 3, 0, 3], vec![3, 12, 6, 0], vec![0, 6, 18, 9], vec![3, 0, 9, 24]])
                .unwrap(),
            QuadraticForm::from_i64_rows(&[vec![2, 1, 1], vec![1, 4, 2], vec![1, 2, 8]]).unwrap(),
        ];
        for f in &forms {
            for (p, t) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 2)] {
                same_values_mod(f, p, t);
            }
        }
    }

    #[test]
    fn determinant_matches_up_to_unit_square() {
        let f =
            QuadraticForm::from_i64_rows(&[vec![6, 3, 0, 3], vec![3, 12, 6, 0], vec![0, 6, 18, 9], vec![3, 0, 9, 24]])
                .unwrap();
        for p in [2u64, 3, 5, 7] {
            let blocks = jordan_decompose(&f, p, 20).unwrap();
            let g = block_gram(&blocks, p);
            let ratio = BigRational::new(g.determinant(), f.discriminant().clone());
            assert_eq!(rat_valuation(&ratio, p), 0);
            let m = if p == 2 { 8 } else { p };
            let r = reduce_unit(&ratio, p, if p == 2 { 3 } else { 1 }).to_u64().unwrap();
            let squares: Vec<u64> = (1..m).filter(|x| x % p != 0).map(|x| x * x % m).collect();
            assert!(squares.contains(&r), "p = {p}: ratio {r} is not a unit square");
        }
    }
}
