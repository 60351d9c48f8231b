//! Exact enumeration of lattice vectors in an ellipsoid.
//!
//! For a positive definite integer matrix G, fraction-free elimination gives
//!
//! ```text
//!     xᵀGx = Σ_i (Δ_i x_i + S_i)² / (Δ_i Δ_{i-1}),   S_i = Σ_{j>i} a_ij x_j,
//! ```
//!
//! with Δ_i the leading principal minors and a_ij integers. Scaling by the
//! lcm L of the denominators turns every pruning decision into an integer
//! comparison, so no vector on the boundary can be lost to rounding.
//! Coordinates are fixed from the last one down; the first coordinate of an
//! exact-target search is solved directly.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::gram::GramMatrix;

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;
const PROGRESS_INTERVAL: u64 = 10_000_000;
const FLUSH_EVERY: u64 = 1 << 12;

/// Which vectors a search visits, in units of xᵀGx.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Exact(i64),
    AtMost(i64),
}

/// Restricts every coordinate to a residue class: x_i ≡ residues[i] (mod modulus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    pub modulus: i64,
    pub residues: Vec<i64>,
}

trait Word: Clone + Ord + Integer + Signed + Roots + From<i64> + ToPrimitive + Send + Sync + std::fmt::Debug {
    fn from_big(b: &BigInt) -> Self;
}

impl Word for i128 {
    fn from_big(b: &BigInt) -> Self {
        b.to_i128().expect("value exceeds i128")
    }
}

impl Word for BigInt {
    fn from_big(b: &BigInt) -> Self {
        b.clone()
    }
}

struct Pruner<T> {
    k: usize,
    delta: Vec<T>,
    coef: Vec<Vec<T>>,
    weight: Vec<T>,
    scale: T,
}

struct BigPruner {
    delta: Vec<BigInt>,
    coef: Vec<Vec<BigInt>>,
    weight: Vec<BigInt>,
    scale: BigInt,
}

impl BigPruner {
    fn new(gram: &GramMatrix) -> Result<Self> {
        let (delta, rows) = gram.bareiss();
        if let Some(i) = delta.iter().position(|d| !d.is_positive()) {
            return Err(Error::NotPositiveDefinite(i + 1));
        }
        let k = gram.dim();
        let mut scale = BigInt::one();
        let mut denoms = Vec::with_capacity(k);
        for i in 0..k {
            let prev = if i == 0 { BigInt::one() } else { delta[i - 1].clone() };
            let d = &delta[i] * prev;
            scale = scale.lcm(&d);
            denoms.push(d);
        }
        let weight = denoms.iter().map(|d| &scale / d).collect();
        Ok(BigPruner { delta, coef: rows, weight, scale })
    }

    /// Rough magnitude check: can every intermediate of a search with this
    /// bound be held in an i128?
    fn fits_i128(&self, gram: &GramMatrix, bound: i64) -> bool {
        let bits = |b: &BigInt| b.bits() as f64;
        let budget_bits = bits(&self.scale) + (bound.max(1) as f64).log2();
        if budget_bits > 118.0 {
            return false;
        }
        let adj = gram.adjugate();
        let det = gram.determinant().to_f64().unwrap_or(f64::INFINITY);
        let k = gram.dim();
        let reach: Vec<f64> = (0..k)
            .map(|j| (bound.max(1) as f64 * adj[j][j].to_f64().unwrap_or(f64::INFINITY) / det).sqrt() * 2.0 + 2.0)
            .collect();
        for i in 0..k {
            let mut s = self.delta[i].to_f64().unwrap_or(f64::INFINITY).abs() * reach[i];
            for j in (i + 1)..k {
                s += self.coef[i][j].to_f64().unwrap_or(f64::INFINITY).abs() * reach[j];
            }
            if !(s.log2() < 100.0) {
                return false;
            }
        }
        true
    }

    fn lower<T: Word>(&self) -> Pruner<T> {
        Pruner {
            k: self.delta.len(),
            delta: self.delta.iter().map(T::from_big).collect(),
            coef: self.coef.iter().map(|r| r.iter().map(T::from_big).collect()).collect(),
            weight: self.weight.iter().map(T::from_big).collect(),
            scale: T::from_big(&self.scale),
        }
    }
}

struct Meter<'a> {
    local: u64,
    shared: &'a AtomicU64,
    abort: &'a AtomicBool,
    budget: u64,
}

impl Meter<'_> {
    #[inline]
    fn tick(&mut self) -> bool {
        self.local += 1;
        if self.local >= FLUSH_EVERY {
            self.flush()
        } else {
            true
        }
    }

    fn flush(&mut self) -> bool {
        let before = self.shared.fetch_add(self.local, Ordering::Relaxed);
        let after = before + self.local;
        self.local = 0;
        if before / PROGRESS_INTERVAL != after / PROGRESS_INTERVAL {
            log::info!("lattice search: {} nodes", after / PROGRESS_INTERVAL * PROGRESS_INTERVAL);
        }
        if after > self.budget {
            self.abort.store(true, Ordering::Relaxed);
        }
        !self.abort.load(Ordering::Relaxed)
    }
}

#[inline]
fn first_in_class(lo: i64, residue: i64, modulus: i64) -> i64 {
    lo + (residue - lo).rem_euclid(modulus)
}

impl<T: Word> Pruner<T> {
    fn shift(&self, level: usize, x: &[i64]) -> T {
        let mut s = T::zero();
        for j in (level + 1)..self.k {
            if x[j] != 0 {
                s = s + self.coef[level][j].clone() * T::from(x[j]);
            }
        }
        s
    }

    /// Integer range of x_level compatible with the remaining budget.
    fn range(&self, level: usize, budget: &T, shift: &T) -> Option<(i64, i64)> {
        if budget.is_negative() {
            return None;
        }
        let q = budget.clone() / self.weight[level].clone();
        let m = q.sqrt();
        let d = &self.delta[level];
        let lo = (-m.clone() - shift.clone()).div_ceil(d);
        let hi = (m - shift.clone()).div_floor(d);
        if lo > hi {
            return None;
        }
        Some((lo.to_i64()?, hi.to_i64()?))
    }

    #[allow(clippy::too_many_arguments)]
    fn descend<V: FnMut(&[i64], i64)>(
        &self,
        level: usize,
        budget: T,
        total: &T,
        x: &mut [i64],
        bound: Bound,
        cong: Option<&Congruence>,
        meter: &mut Meter,
        visit: &mut V,
    ) -> bool {
        let shift = self.shift(level, x);
        if level == 0 {
            if let Bound::Exact(target) = bound {
                let w = &self.weight[0];
                if !(budget.clone() % w.clone()).is_zero() {
                    return meter.tick();
                }
                let sq = budget / w.clone();
                let m = sq.sqrt();
                if m.clone() * m.clone() != sq {
                    return meter.tick();
                }
                let roots = if m.is_zero() { vec![m] } else { vec![-m.clone(), m] };
                for root in roots {
                    let num = root - shift.clone();
                    if (num.clone() % self.delta[0].clone()).is_zero() {
                        let x0 = (num / self.delta[0].clone()).to_i64().unwrap();
                        if cong.is_none_or(|c| (x0 - c.residues[0]).rem_euclid(c.modulus) == 0) {
                            x[0] = x0;
                            visit(x, target);
                        }
                    }
                }
                x[0] = 0;
                return meter.tick();
            }
        }
        let Some((lo, hi)) = self.range(level, &budget, &shift) else {
            return true;
        };
        let (start, step) = match cong {
            Some(c) => (first_in_class(lo, c.residues[level], c.modulus), c.modulus),
            None => (lo, 1),
        };
        let mut xi = start;
        while xi <= hi {
            let n = self.delta[level].clone() * T::from(xi) + shift.clone();
            let rest = budget.clone() - self.weight[level].clone() * n.clone() * n;
            x[level] = xi;
            if level == 0 {
                let value = (total.clone() - rest) / self.scale.clone();
                visit(x, value.to_i64().unwrap());
                if !meter.tick() {
                    return false;
                }
            } else {
                if !meter.tick() {
                    return false;
                }
                if !self.descend(level - 1, rest, total, x, bound, cong, meter, visit) {
                    return false;
                }
            }
            xi += step;
        }
        x[level] = 0;
        true
    }
}

/// A configured search over the lattice vectors of one Gram matrix.
pub struct LatticeSearch<'a> {
    gram: &'a GramMatrix,
    budget: u64,
    congruence: Option<Congruence>,
}

impl<'a> LatticeSearch<'a> {
    pub fn new(gram: &'a GramMatrix) -> Self {
        LatticeSearch { gram, budget: DEFAULT_NODE_BUDGET, congruence: None }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn congruence(mut self, congruence: Congruence) -> Self {
        assert_eq!(congruence.residues.len(), self.gram.dim());
        assert!(congruence.modulus >= 1);
        self.congruence = Some(congruence);
        self
    }

    /// Folds `visit` over every vector within `bound`. The last coordinate's
    /// range is split across worker threads; partial accumulators are merged
    /// in coordinate order, so the result does not depend on scheduling.
    pub fn fold<A, I, F, M>(&self, bound: Bound, init: I, visit: F, merge: M) -> Result<A>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[i64], i64) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let limit = match bound {
            Bound::Exact(t) | Bound::AtMost(t) => t,
        };
        if limit < 0 {
            return Ok(init());
        }
        let big = BigPruner::new(self.gram)?;
        if big.fits_i128(self.gram, limit) {
            self.run::<i128, _, _, _, _>(&big.lower(), bound, limit, init, visit, merge)
        } else {
            self.run::<BigInt, _, _, _, _>(&big.lower(), bound, limit, init, visit, merge)
        }
    }

    fn run<T, A, I, F, M>(&self, pruner: &Pruner<T>, bound: Bound, limit: i64, init: I, visit: F, merge: M) -> Result<A>
    where
        T: Word,
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[i64], i64) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let k = pruner.k;
        let total = pruner.scale.clone() * T::from(limit);
        let shared = AtomicU64::new(0);
        let abort = AtomicBool::new(false);
        let cong = self.congruence.as_ref();
        let new_meter = || Meter { local: 0, shared: &shared, abort: &abort, budget: self.budget };

        let top = k - 1;
        let direct = k == 1 && matches!(bound, Bound::Exact(_));
        let outer: Vec<i64> = if direct {
            Vec::new()
        } else {
            let zero = vec![0i64; k];
            match pruner.range(top, &total, &pruner.shift(top, &zero)) {
                None => return Ok(init()),
                Some((lo, hi)) => match cong {
                    Some(c) => {
                        let s = first_in_class(lo, c.residues[top], c.modulus);
                        (0..).map(|i| s + i * c.modulus).take_while(|&v| v <= hi).collect()
                    }
                    None => (lo..=hi).collect(),
                },
            }
        };

        if !direct && outer.is_empty() {
            return Ok(init());
        }
        let result = if direct {
            // one-dimensional exact search: solve directly
            let mut acc = init();
            let mut meter = new_meter();
            let mut x = vec![0i64; k];
            pruner.descend(0, total.clone(), &total, &mut x, bound, cong, &mut meter, &mut |v, val| {
                visit(&mut acc, v, val)
            });
            meter.flush();
            acc
        } else {
            let parts: Vec<A> = outer
                .par_iter()
                .map(|&xt| {
                    let mut acc = init();
                    if abort.load(Ordering::Relaxed) {
                        return acc;
                    }
                    let mut meter = new_meter();
                    let mut x = vec![0i64; k];
                    x[top] = xt;
                    let n = pruner.delta[top].clone() * T::from(xt);
                    let rest = total.clone() - pruner.weight[top].clone() * n.clone() * n;
                    if top == 0 {
                        let value = (total.clone() - rest) / pruner.scale.clone();
                        let value = value.to_i64().unwrap();
                        if matches!(bound, Bound::AtMost(_)) || value == limit {
                            visit(&mut acc, &x, value);
                        }
                    } else {
                        pruner.descend(top - 1, rest, &total, &mut x, bound, cong, &mut meter, &mut |v, val| {
                            visit(&mut acc, v, val)
                        });
                    }
                    meter.tick();
                    meter.flush();
                    acc
                })
                .collect();
            parts.into_iter().reduce(&merge).unwrap_or_else(&init)
        };
        let nodes = shared.load(Ordering::Relaxed);
        if abort.load(Ordering::Relaxed) || nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        Ok(result)
    }

    /// Number of vectors with xᵀGx equal to `target`.
    pub fn count_exact(&self, target: i64) -> Result<u64> {
        self.fold(Bound::Exact(target), || 0u64, |c, _, _| *c += 1, |a, b| a + b)
    }

    /// Vectors with xᵀGx equal to `target`, in lexicographic order.
    pub fn list_exact(&self, target: i64) -> Result<Vec<Vec<i64>>> {
        let mut out = self.fold(
            Bound::Exact(target),
            Vec::new,
            |acc: &mut Vec<Vec<i64>>, x, _| acc.push(x.to_vec()),
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        out.sort();
        Ok(out)
    }

    /// `hist[v]` = number of vectors with xᵀGx = v, for 0 ≤ v ≤ bound.
    pub fn histogram(&self, bound: i64) -> Result<Vec<u64>> {
        let len = (bound.max(-1) + 1) as usize;
        self.fold(
            Bound::AtMost(bound),
            || vec![0u64; len],
            |h, _, v| h[v as usize] += 1,
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
    }

    /// Vectors with xᵀGx ≤ bound, in lexicographic order, paired with their values.
    pub fn list_at_most(&self, bound: i64) -> Result<Vec<(Vec<i64>, i64)>> {
        let mut out = self.fold(
            Bound::AtMost(bound),
            Vec::new,
            |acc: &mut Vec<(Vec<i64>, i64)>, x, v| acc.push((x.to_vec(), v)),
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        out.sort();
        Ok(out)
    }
}

/// Representation count r(Q, n) together with the solutions when requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationCount {
    pub n: u64,
    pub count: u64,
    pub solutions: Option<Vec<Vec<i64>>>,
}

fn doubled_target(n: u64) -> Result<i64> {
    n.checked_mul(2)
        .and_then(|t| i64::try_from(t).ok())
        .ok_or_else(|| Error::InvalidArgument(format!("target {n} too large")))
}

/// r(Q, n): the number of integer vectors with Q(x) = n.
pub fn count_representations(form: &QuadraticForm, n: u64) -> Result<u64> {
    count_representations_with_budget(form, n, DEFAULT_NODE_BUDGET)
}

pub fn count_representations_with_budget(form: &QuadraticForm, n: u64, budget: u64) -> Result<u64> {
    LatticeSearch::new(form.gram()).budget(budget).count_exact(doubled_target(n)?)
}

/// All solutions of Q(x) = n in lexicographic order.
pub fn list_representations(form: &QuadraticForm, n: u64) -> Result<Vec<Vec<i64>>> {
    LatticeSearch::new(form.gram()).list_exact(doubled_target(n)?)
}

pub fn representation_count(form: &QuadraticForm, n: u64, materialize: bool) -> Result<RepresentationCount> {
    if materialize {
        let sols = list_representations(form, n)?;
        Ok(RepresentationCount { n, count: sols.len() as u64, solutions: Some(sols) })
    } else {
        Ok(RepresentationCount { n, count: count_representations(form, n)?, solutions: None })
    }
}

/// Index sets of the orthogonal components of a Gram matrix (connected
/// components of its off-diagonal support).
pub fn orthogonal_components(gram: &GramMatrix) -> Vec<Vec<usize>> {
    let k = gram.dim();
    let mut seen = vec![false; k];
    let mut out = Vec::new();
    for s in 0..k {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let r = comp[i];
            for c in 0..k {
                if !seen[c] && !gram.get(r, c).is_zero() {
                    seen[c] = true;
                    comp.push(c);
                }
            }
            i += 1;
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Counts of xᵀGx = v for even v ≤ 2x, indexed by v/2.
fn half_histogram(gram: &GramMatrix, x: u64, budget: u64) -> Result<Vec<u64>> {
    let hist = LatticeSearch::new(gram).budget(budget).histogram(doubled_target(x)?)?;
    Ok(hist.into_iter().step_by(2).collect())
}

/// r(Q, m) for every 0 ≤ m ≤ x. Each orthogonal component is enumerated
/// once over {Q ≤ x} and the component tables are convolved.
pub fn representation_table(form: &QuadraticForm, x: u64, budget: u64) -> Result<Vec<u64>> {
    let gram = form.gram();
    let len = x as usize + 1;
    let mut acc = vec![0u64; len];
    acc[0] = 1;
    for comp in orthogonal_components(gram) {
        let cols: Vec<Vec<i64>> = comp.iter().map(|&i| (0..gram.dim()).map(|j| (i == j) as i64).collect()).collect();
        let table = half_histogram(&gram.transform(&cols), x, budget)?;
        let mut next = vec![0u128; len];
        for (a, &ra) in acc.iter().enumerate() {
            if ra == 0 {
                continue;
            }
            for (b, &rb) in table.iter().enumerate().take(len - a) {
                next[a + b] += ra as u128 * rb as u128;
            }
        }
        acc = next
            .into_iter()
            .map(|v| {
                u64::try_from(v).map_err(|_| Error::InvalidArgument("representation count exceeds 64 bits".into()))
            })
            .collect::<Result<_>>()?;
    }
    Ok(acc)
}

/// (Σ_{n≤x} r(Q,n), Σ_{n≤x} r(Q,n)²).
pub fn cumulative_counts(form: &QuadraticForm, x: u64) -> Result<(BigInt, BigInt)> {
    let table = representation_table(form, x, DEFAULT_NODE_BUDGET)?;
    let first: BigInt = table.iter().map(|&r| BigInt::from(r)).sum();
    let second: BigInt = table.iter().map(|&r| BigInt::from(r) * r).sum();
    Ok((first, second))
}
