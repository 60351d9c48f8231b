//! Integer points on spheres |x|² = n in ℤ^d: cap counts μ, their mean,
//! and the table of ordered pairs by inner product.
//!
//! Every quantity here is invariant under the signed permutation group,
//! so most computations run over orbit representatives (nonincreasing,
//! nonnegative coordinates) weighted by orbit size.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::enumeration::{Congruence, LatticeSearch, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::ortho::ortho_lattice;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpherePointSet {
    pub d: usize,
    pub n: u64,
    /// Lexicographically sorted.
    pub points: Vec<Vec<i64>>,
}

impl SpherePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[i64]) -> i64 {
    dot(a, a)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("sphere dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn to_i64(n: u64) -> Result<i64> {
    i64::try_from(n).map_err(|_| Error::InvalidArgument(format!("{n} is too large")))
}

pub fn sphere_points(d: usize, n: u64) -> Result<SpherePointSet> {
    sphere_points_with_budget(d, n, DEFAULT_NODE_BUDGET)
}

pub fn sphere_points_with_budget(d: usize, n: u64, budget: u64) -> Result<SpherePointSet> {
    check_dim(d)?;
    let gram = GramMatrix::scaled_identity(d, 1);
    let points = LatticeSearch::new(&gram).budget(budget).list_exact(to_i64(n)?)?;
    Ok(SpherePointSet { d, n, points })
}

/// A point with nonincreasing nonnegative coordinates and the size of its
/// orbit under signed permutations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub rep: Vec<i64>,
    pub size: u64,
}

fn orbit_size(rep: &[i64]) -> u64 {
    let d = rep.len() as u64;
    let mut size: u64 = (1..=d).product();
    let mut i = 0;
    while i < rep.len() {
        let j = (i..rep.len()).find(|&j| rep[j] != rep[i]).unwrap_or(rep.len());
        size /= (1..=(j - i) as u64).product::<u64>();
        i = j;
    }
    size << rep.iter().filter(|&&x| x != 0).count()
}

/// Orbit representatives of E_d(n) in lexicographically decreasing order.
pub fn sphere_orbits(d: usize, n: u64) -> Result<Vec<Orbit>> {
    check_dim(d)?;
    fn go(rest: i64, max: i64, slots: usize, cur: &mut Vec<i64>, out: &mut Vec<Orbit>) {
        if slots == 0 {
            if rest == 0 {
                out.push(Orbit { size: orbit_size(cur), rep: cur.clone() });
            }
            return;
        }
        let hi = max.min(num_integer::Roots::sqrt(&rest));
        for x in (0..=hi).rev() {
            // the remaining slots hold at most x² each
            if x * x * (slots as i64) < rest {
                break;
            }
            cur.push(x);
            go(rest - x * x, x, slots - 1, cur, out);
            cur.pop();
        }
    }
    let n = to_i64(n)?;
    let mut out = Vec::new();
    go(n, i64::MAX, d, &mut Vec::with_capacity(d), &mut out);
    Ok(out)
}

/// |E_d(n)|.
pub fn sphere_count(d: usize, n: u64) -> Result<u64> {
    Ok(sphere_orbits(d, n)?.iter().map(|o| o.size).sum())
}

/// Nonzero vectors z with |z|² ≤ Y², the displacements a cap can contain.
fn displacements(d: usize, ysq: &BigRational) -> Result<Vec<(Vec<i64>, i64)>> {
    let bound = ysq.floor().to_integer().to_i64().unwrap_or(i64::MAX);
    if bound < 1 {
        return Ok(Vec::new());
    }
    let gram = GramMatrix::scaled_identity(d, 1);
    let mut z = LatticeSearch::new(&gram).list_at_most(bound)?;
    z.retain(|(_, v)| *v > 0);
    Ok(z)
}

/// μ(x) = #{y ∈ E(n) : 0 < |x−y|² ≤ Y²}, written as y = x + z with
/// 2⟨x,z⟩ + |z|² = 0.
fn mu_from(x: &[i64], disp: &[(Vec<i64>, i64)]) -> u64 {
    disp.iter().filter(|(z, v)| 2 * dot(x, z) + v == 0).count() as u64
}

pub fn mu(d: usize, n: u64, x: &[i64], ysq: &BigRational) -> Result<u64> {
    check_dim(d)?;
    if x.len() != d || norm(x) != to_i64(n)? {
        return Err(Error::PointNotOnSphere { n });
    }
    if ysq <= &BigRational::zero() {
        return Err(Error::InvalidArgument("Y² must be positive".into()));
    }
    Ok(mu_from(x, &displacements(d, ysq)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct CapStats {
    pub d: usize,
    pub n: u64,
    pub ysq: BigRational,
    pub threshold: f64,
    /// μ at each orbit representative; every point of the orbit shares it.
    pub mu: Vec<(Orbit, u64)>,
    pub total_points: u64,
    pub mean: BigRational,
    /// μ value → number of points.
    pub histogram: BTreeMap<u64, u64>,
    /// Fraction of points with μ > threshold.
    pub threshold_prob: BigRational,
}

impl CapStats {
    /// (point, μ) for every point of E(n), lexicographically sorted.
    pub fn per_point(&self) -> Vec<(Vec<i64>, u64)> {
        let mut out: Vec<(Vec<i64>, u64)> =
            self.mu.iter().flat_map(|(o, m)| orbit_points(&o.rep).into_iter().map(move |p| (p, *m))).collect();
        out.sort();
        out
    }
}

/// All signed permutations of a representative, without repetition.
pub fn orbit_points(rep: &[i64]) -> Vec<Vec<i64>> {
    let mut perm = rep.to_vec();
    perm.sort();
    let mut out = Vec::new();
    loop {
        let nz: Vec<usize> = (0..perm.len()).filter(|&i| perm[i] != 0).collect();
        for mask in 0u64..(1 << nz.len()) {
            let mut p = perm.clone();
            for (b, &i) in nz.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    p[i] = -p[i];
                }
            }
            out.push(p);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

fn next_permutation(a: &mut [i64]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else { return false };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

pub fn cap_stats(d: usize, n: u64, ysq: &BigRational, threshold: f64) -> Result<CapStats> {
    if n == 0 {
        return Err(Error::InvalidArgument("cap statistics need n ≥ 1".into()));
    }
    let orbits = sphere_orbits(d, n)?;
    let disp = displacements(d, ysq)?;
    let mu: Vec<(Orbit, u64)> = orbits
        .into_par_iter()
        .map(|o| {
            let m = mu_from(&o.rep, &disp);
            (o, m)
        })
        .collect();
    let total_points: u64 = mu.iter().map(|(o, _)| o.size).sum();
    let mut histogram = BTreeMap::new();
    let mut sum = BigInt::zero();
    let mut above = 0u64;
    for (o, m) in &mu {
        *histogram.entry(*m).or_insert(0) += o.size;
        sum += BigInt::from(o.size) * m;
        if *m as f64 > threshold {
            above += o.size;
        }
    }
    let denom = BigInt::from(total_points.max(1));
    Ok(CapStats {
        d,
        n,
        ysq: ysq.clone(),
        threshold,
        mu,
        total_points,
        mean: BigRational::new(sum, denom.clone()),
        histogram,
        threshold_prob: BigRational::new(above.into(), denom),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairTable {
    pub d: usize,
    pub n: u64,
    pub size: u64,
    /// t → A_d(n, t) for −n ≤ t ≤ n.
    pub table: BTreeMap<i64, u64>,
}

impl PairTable {
    fn empty(d: usize, n: u64, size: u64) -> Self {
        let n_i = n as i64;
        PairTable { d, n, size, table: (-n_i..=n_i).map(|t| (t, 0)).collect() }
    }

    pub fn get(&self, t: i64) -> u64 {
        self.table.get(&t).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.table.values().sum()
    }

    /// Violations of the structural identities, empty when all hold.
    pub fn invariant_failures(&self) -> Vec<String> {
        let n = self.n as i64;
        let e = self.size;
        let mut out = Vec::new();
        if self.total() != e * e - e {
            out.push(format!("Σ A = {} but |E|² − |E| = {}", self.total(), e * e - e));
        }
        if self.get(n) != 0 {
            out.push(format!("A(n) = {}", self.get(n)));
        }
        if self.n > 0 && self.get(-n) != e {
            out.push(format!("A(−n) = {} but |E| = {e}", self.get(-n)));
        }
        for (t, a) in &self.table {
            if a % 2 == 1 {
                out.push(format!("A({t}) = {a} is odd"));
            }
        }
        out
    }
}

/// Buckets ordered pairs (p, q) of distinct points by ⟨p,q⟩, with p running
/// over orbit representatives.
pub fn pair_table(d: usize, n: u64) -> Result<PairTable> {
    let points = sphere_points(d, n)?;
    let orbits = sphere_orbits(d, n)?;
    let mut table = PairTable::empty(d, n, points.len() as u64);
    let rows: Vec<Vec<(i64, u64)>> = orbits
        .par_iter()
        .map(|o| {
            let mut local: BTreeMap<i64, u64> = BTreeMap::new();
            for q in &points.points {
                if *q != o.rep {
                    *local.entry(dot(&o.rep, q)).or_insert(0) += o.size;
                }
            }
            local.into_iter().collect()
        })
        .collect();
    for row in rows {
        for (t, a) in row {
            *table.table.get_mut(&t).expect("inner product within [−n, n]") += a;
        }
    }
    Ok(table)
}

/// The same table from every ordered pair, without symmetry reduction.
pub fn pair_table_exhaustive(d: usize, n: u64) -> Result<PairTable> {
    let points = sphere_points(d, n)?;
    let mut table = PairTable::empty(d, n, points.len() as u64);
    for p in &points.points {
        for q in &points.points {
            if p != q {
                *table.table.get_mut(&dot(p, q)).unwrap() += 1;
            }
        }
    }
    Ok(table)
}

/// For a vector v: the coset {w ∈ ℤ^d ∩ v^⊥ : w ≡ v (mod 2)} as a search
/// over basis coefficients, or None when the coset is empty.
fn coset_search(v: &[i64]) -> Option<(GramMatrix, Congruence)> {
    let lattice = ortho_lattice(v);
    let residues = lattice.solve_mod2(v)?;
    Some((lattice.gram.clone(), Congruence { modulus: 2, residues }))
}

/// Σ over v ∈ E_d(2(n−t)) of #{w ∈ ℤ^d ∩ v^⊥ : |w|² = 2(n+t), w ≡ v (mod 2)}.
/// Each such (v, w) gives the pair p = (w+v)/2, q = (w−v)/2.
pub fn pair_count_via_ortho(d: usize, n: u64, t: i64) -> Result<u64> {
    let n_i = to_i64(n)?;
    if t < -n_i || t > n_i {
        return Err(Error::InvalidArgument(format!("t = {t} outside [−n, n]")));
    }
    // p = q is the only way to reach t = n, and pairs are of distinct points
    if t == n_i {
        return Ok(0);
    }
    let orbits = sphere_orbits(d, (2 * (n_i - t)) as u64)?;
    let target = 2 * (n_i + t);
    let counts: Vec<u64> = orbits
        .par_iter()
        .map(|o| match coset_search(&o.rep) {
            None => Ok(0),
            Some((gram, cong)) => Ok(o.size * LatticeSearch::new(&gram).congruence(cong).count_exact(target)?),
        })
        .collect::<Result<_>>()?;
    Ok(counts.iter().sum())
}

/// The full table for one n through the orthogonal lattices.
pub fn pair_table_via_ortho(d: usize, n: u64) -> Result<PairTable> {
    Ok(pair_tables_via_ortho(d, n)?.pop().expect("nonempty"))
}

/// Tables for n = 1..=max_n through the orthogonal lattices. Each orbit of
/// v is handled once: one histogram of its coset serves every (n, t) with
/// 2(n−t) = |v|².
pub fn pair_tables_via_ortho(d: usize, max_n: u64) -> Result<Vec<PairTable>> {
    check_dim(d)?;
    let max_i = to_i64(max_n)?;
    let norms: Vec<i64> = (1..=2 * max_i).map(|h| 2 * h).collect();
    let per_norm: Vec<Vec<(u64, Vec<u64>)>> = norms
        .par_iter()
        .map(|&m| {
            let bound = 4 * max_i - m;
            sphere_orbits(d, m as u64)?
                .par_iter()
                .map(|o| match coset_search(&o.rep) {
                    None => Ok((o.size, Vec::new())),
                    Some((gram, cong)) => Ok((o.size, LatticeSearch::new(&gram).congruence(cong).histogram(bound)?)),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for n in 1..=max_i {
        let size = sphere_count(d, n as u64)?;
        let mut table = PairTable::empty(d, n as u64, size);
        for (&m, hists) in norms.iter().zip(&per_norm) {
            if m > 4 * n {
                break;
            }
            let t = n - m / 2;
            let target = (4 * n - m) as usize;
            let a: u64 = hists.iter().map(|(w, h)| w * h.get(target).copied().unwrap_or(0)).sum();
            table.table.insert(t, a);
        }
        out.push(table);
    }
    Ok(out)
}

/// #{v ∈ E_d(m) : content(v) = ℓ} for each content ℓ that occurs.
pub fn content_distribution(d: usize, m: u64) -> Result<BTreeMap<u64, u64>> {
    let mut out = BTreeMap::new();
    for o in sphere_orbits(d, m)? {
        let g = o.rep.iter().fold(0i64, |g, &x| g.gcd(&x)) as u64;
        *out.entry(g).or_insert(0) += o.size;
    }
    Ok(out)
}

/// Both sides of ⟨μ⟩ = (1/|E|)·Σ_{n−Y²/2 ≤ t < n} A_d(n, t).
pub fn mean_mu_identity(d: usize, n: u64, ysq: &BigRational) -> Result<(BigRational, BigRational)> {
    let lhs = cap_stats(d, n, ysq, f64::INFINITY)?.mean;
    let table = pair_table(d, n)?;
    Ok((lhs, mean_from_pairs(&table, ysq)))
}

/// The right-hand side of the mean identity from a precomputed table.
pub fn mean_from_pairs(table: &PairTable, ysq: &BigRational) -> BigRational {
    let n = table.n as i64;
    let lower = BigRational::from_integer(n.into()) - ysq / BigRational::from_integer(2.into());
    let sum: u64 = table
        .table
        .iter()
        .filter(|(&t, _)| t < n && BigRational::from_integer(t.into()) >= lower)
        .map(|(_, a)| a)
        .sum();
    BigRational::new(sum.into(), table.size.max(1).into())
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    pub d: usize,
    pub n: u64,
    pub ysq: BigRational,
    pub threshold: f64,
    pub points: u64,
    pub mean: BigRational,
    pub probability: BigRational,
    pub exceeds_half: bool,
}

/// ℙ[μ > threshold] over E_d(n) and whether it exceeds 1/2. The threshold
/// defaults to ln n.
pub fn covering_check(d: usize, n: u64, ysq: &BigRational, threshold: Option<f64>) -> Result<CoveringReport> {
    let threshold = threshold.unwrap_or((n as f64).ln());
    let stats = cap_stats(d, n, ysq, threshold)?;
    let exceeds_half = stats.threshold_prob > BigRational::new(1.into(), 2.into());
    Ok(CoveringReport {
        d,
        n,
        ysq: ysq.clone(),
        threshold,
        points: stats.total_points,
        mean: stats.mean,
        probability: stats.threshold_prob,
        exceeds_half,
    })
}
