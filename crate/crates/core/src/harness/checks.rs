//! One function per acceptance criterion. Each returns a pass/fail outcome
//! and the tables behind it.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::family::{generate_family, FamilyMember, FamilySpec};
use crate::arith::{isqrt, primes_up_to};
use crate::eisenstein::{
    calibrate_normalization, cor42_ratio, lemma33_ratio, lemma41_ratio, theorem14_condition, theorem14_ratio,
    BoundPoint, BoundReport, EisensteinSplit, GcdWith,
};
use crate::enumeration::{count_representations_with_budget, representation_table};
use crate::error::Result;
use crate::forms::{successive_minima, QuadraticForm};
use crate::interval::Interval;
use crate::local_densities::formula::OddSplitting;
use crate::local_densities::gauss::{gauss_sum, gauss_sum_direct, ramanujan_sum, ramanujan_sum_direct};
use crate::local_densities::{DensityContext, LocalCounter};
use crate::sphere::{cap_stats, covering_check, mean_from_pairs, pair_table, pair_tables_via_ortho, PairTable};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    /// Identities and containments; a failure is an error.
    Exact,
    /// Asymptotic statements checked as finite-range reports.
    Report,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CheckRun {
    pub outcome: CheckOutcome,
    pub tables: Vec<Table>,
}

fn run(id: u8, name: &str, kind: CheckKind, passed: bool, detail: String, tables: Vec<Table>) -> CheckRun {
    CheckRun { outcome: CheckOutcome { id, name: name.into(), kind, passed, detail }, tables }
}

/// The parameter grid of a verification run.
#[derive(Clone, Debug, Serialize)]
pub struct Grid {
    pub family: FamilySpec,
    pub count_max_n: u64,
    pub local_max_n: u64,
    pub local_max_prime: u64,
    pub gauss_odd_max: u64,
    pub gauss_complex_max: u64,
    pub gauss_units_per_modulus: usize,
    pub ramanujan_max: u64,
    pub e8_max_n: u64,
    pub pair_grid: Vec<(usize, u64)>,
    pub mean_d: usize,
    pub mean_max_n: u64,
    pub covering_ns: Vec<u64>,
    pub trend_ns: Vec<u64>,
    pub theorem_max_n: u64,
    pub bound_max_n: u64,
    pub moment_xs: Vec<u64>,
    pub cutoff: u64,
    pub budget: u64,
    pub eps: BigRational,
}

pub fn acceptance_family(seed: u64, count: usize) -> FamilySpec {
    FamilySpec { seed, k_min: 4, k_max: 6, count, height: 5, max_discriminant: BigInt::from(10u64.pow(12)) }
}

impl Grid {
    pub fn full(seed: u64, cutoff: u64, budget: u64, eps: BigRational) -> Self {
        Grid {
            family: acceptance_family(seed, 20),
            count_max_n: 200,
            local_max_n: 50,
            local_max_prime: 13,
            gauss_odd_max: 999,
            gauss_complex_max: 500,
            gauss_units_per_modulus: 20,
            ramanujan_max: 10_000,
            e8_max_n: 200,
            pair_grid: vec![(5, 120), (6, 60)],
            mean_d: 5,
            mean_max_n: 120,
            covering_ns: vec![400, 900, 2500],
            trend_ns: vec![400, 900, 2500, 4900],
            theorem_max_n: 8192,
            bound_max_n: 200,
            moment_xs: (1..=20).map(|i| 100 * i).collect(),
            cutoff,
            budget,
            eps,
        }
    }

    /// A small grid with the same structure, for quick runs.
    pub fn reduced(seed: u64, cutoff: u64, budget: u64, eps: BigRational) -> Self {
        Grid {
            family: acceptance_family(seed, 4),
            count_max_n: 40,
            local_max_n: 12,
            local_max_prime: 7,
            gauss_odd_max: 99,
            gauss_complex_max: 60,
            gauss_units_per_modulus: 5,
            ramanujan_max: 500,
            e8_max_n: 30,
            pair_grid: vec![(5, 20), (6, 10)],
            mean_d: 5,
            mean_max_n: 20,
            covering_ns: vec![100, 400],
            trend_ns: vec![100, 400],
            theorem_max_n: 1024,
            bound_max_n: 40,
            moment_xs: vec![10, 20, 30, 40],
            cutoff,
            budget,
            eps,
        }
    }
}

pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn float(x: f64) -> String {
    format!("{x:.12e}")
}

/// Naive count: every x in the box |x_i| ≤ ⌊√(2n·(A⁻¹)_ii)⌋ + 1, bucketed
/// by Q(x), for all targets up to max_n at once.
pub fn box_oracle_table(form: &QuadraticForm, max_n: u64) -> Vec<u64> {
    let k = form.dim();
    let adj = form.gram().adjugate();
    let d = form.discriminant();
    let bounds: Vec<i64> = (0..k)
        .map(|i| {
            let q = (BigInt::from(2 * max_n) * &adj[i][i]).div_floor(d);
            isqrt(&q).to_i64().expect("box too large") + 1
        })
        .collect();
    let a: Vec<Vec<i64>> =
        form.gram().rows().iter().map(|r| r.iter().map(|x| x.to_i64().expect("entry exceeds i64")).collect()).collect();
    let mut table = vec![0u64; max_n as usize + 1];
    let mut x: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        let mut v: i128 = 0;
        for i in 0..k {
            let mut row: i128 = 0;
            for j in 0..k {
                row += a[i][j] as i128 * x[j] as i128;
            }
            v += row * x[i] as i128;
        }
        let q = v / 2;
        if q <= max_n as i128 {
            table[q as usize] += 1;
        }
        let mut i = 0;
        loop {
            if i == k {
                return table;
            }
            if x[i] < bounds[i] {
                x[i] += 1;
                break;
            }
            x[i] = -bounds[i];
            i += 1;
        }
    }
}

pub fn family(grid: &Grid) -> Result<Vec<FamilyMember>> {
    generate_family(&grid.family)
}

pub fn check_counts(grid: &Grid, family: &[FamilyMember]) -> Result<CheckRun> {
    let mut table = Table::new("counts", &["form_id", "k", "D", "n", "r_engine", "r_oracle"]);
    let per_form: Vec<Vec<(u64, u64, u64)>> = family
        .par_iter()
        .map(|m| {
            let oracle = box_oracle_table(&m.form, grid.count_max_n);
            (1..=grid.count_max_n)
                .map(|n| Ok((n, count_representations_with_budget(&m.form, n, grid.budget)?, oracle[n as usize])))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut mismatches = 0;
    for (m, rows) in family.iter().zip(per_form) {
        for (n, e, o) in rows {
            mismatches += (e != o) as usize;
            table.push(vec![
                m.id.clone(),
                m.form.dim().to_string(),
                m.form.discriminant().to_string(),
                n.to_string(),
                e.to_string(),
                o.to_string(),
            ]);
        }
    }
    let total = table.rows.len();
    Ok(run(
        1,
        "representation counts match box enumeration",
        CheckKind::Exact,
        mismatches == 0,
        format!("{} forms, {total} targets, {mismatches} mismatches", family.len()),
        vec![table],
    ))
}

pub fn check_local_densities(grid: &Grid, family: &[FamilyMember]) -> Result<CheckRun> {
    let primes = primes_up_to(grid.local_max_prime);
    let per_form: Vec<Vec<Vec<String>>> = family
        .par_iter()
        .map(|m| {
            let mut rows = Vec::new();
            for &p in &primes {
                let counter = LocalCounter::new(&m.form, p);
                let general = (p != 2).then(|| OddSplitting::of_form(&m.form, p)).transpose()?;
                let unramified =
                    (p != 2 && !(m.form.discriminant() % p).is_zero()).then(|| OddSplitting::unramified(&m.form, p));
                for n in 1..=grid.local_max_n {
                    let nb = BigInt::from(n);
                    let direct = counter.sigma(&nb);
                    let (formula, path) = match (&general, &unramified) {
                        (None, _) => (None, "direct"),
                        (Some(_), Some(u)) if n % p != 0 => (Some(u.sigma(&nb)), "unramified"),
                        (Some(g), _) => (Some(g.sigma(&nb)), "splitting"),
                    };
                    let agree = match (&direct, &formula) {
                        (Ok(d), Some(f)) => d == f,
                        (Ok(_), None) => true,
                        (Err(_), _) => false,
                    };
                    rows.push(vec![
                        m.id.clone(),
                        p.to_string(),
                        n.to_string(),
                        match &direct {
                            Ok(d) => rational_string(d),
                            Err(e) => format!("error: {e}"),
                        },
                        formula.as_ref().map(rational_string).unwrap_or_default(),
                        path.into(),
                        agree.to_string(),
                    ]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new("local_densities", &["form_id", "p", "n", "direct", "formula", "path", "agree"]);
    for rows in per_form {
        for r in rows {
            table.push(r);
        }
    }
    let failures = table.rows.iter().filter(|r| r[6] != "true").count();
    Ok(run(
        2,
        "local densities: closed form equals stabilized direct count",
        CheckKind::Exact,
        failures == 0,
        format!("{} comparisons, {failures} failures", table.rows.len()),
        vec![table],
    ))
}

pub const GAUSS_TOLERANCE: f64 = 1e-9;

fn ramanujan_targets(p: u64, t: u32) -> Vec<i64> {
    let mut ns: Vec<i64> = (0..=20).collect();
    for j in 0..=t + 1 {
        let pj = p.pow(j) as i64;
        for u in 1..=3 {
            ns.push(u * pj);
            ns.push(-u * pj);
        }
    }
    ns.sort();
    ns.dedup();
    ns
}

pub fn check_gauss(grid: &Grid) -> Result<CheckRun> {
    // |G(h, m)|² = m exactly for odd m and every unit h
    let odd: Vec<(u64, usize, usize, f64)> = (1..=grid.gauss_odd_max)
        .into_par_iter()
        .filter(|m| m % 2 == 1)
        .map(|m| {
            let mut checked = 0;
            let mut bad = 0;
            for h in (1..=m).filter(|h| h.gcd(&m) == 1) {
                let g = gauss_sum(h as i64, m).expect("unit");
                checked += 1;
                bad += (g.norm_squared() != Some(m as u128)) as usize;
            }
            let (re, im) = gauss_sum_direct(1, m);
            let literal = f64::from(re * re + im * im);
            (m, checked, bad, (literal - m as f64).abs() / m as f64)
        })
        .collect();
    let complex: Vec<(u64, usize, f64)> = (1..=grid.gauss_complex_max)
        .into_par_iter()
        .map(|m| {
            let units: Vec<u64> = (1..=m).filter(|h| h.gcd(&m) == 1).take(grid.gauss_units_per_modulus).collect();
            let mut worst = 0f64;
            for &h in &units {
                let g = gauss_sum(h as i64, m).expect("unit");
                let (re, im) = gauss_sum_direct(h as i64, m);
                let s = (m as f64).sqrt();
                let dr = f64::from(re - g.re as f64 * s).abs();
                let di = f64::from(im - g.im as f64 * s).abs();
                worst = worst.max(dr).max(di);
            }
            (m, units.len(), worst)
        })
        .collect();
    let prime_powers: Vec<(u64, u32)> = primes_up_to(grid.ramanujan_max)
        .into_iter()
        .flat_map(|p| (1..).map(move |t| (p, t)).take_while(|&(p, t)| p.pow(t) <= grid.ramanujan_max))
        .collect();
    let ramanujan: Vec<(u64, u32, usize, usize)> = prime_powers
        .par_iter()
        .map(|&(p, t)| {
            let q = p.pow(t);
            let ns = ramanujan_targets(p, t);
            let bad = ns
                .iter()
                .filter(|&&n| ramanujan_sum(&BigInt::from(n), p, t) != BigInt::from(ramanujan_sum_direct(n, q)))
                .count();
            (p, t, ns.len(), bad)
        })
        .collect();

    let mut t_odd = Table::new("gauss_norms", &["m", "units_checked", "norm_failures", "literal_relative_error"]);
    for (m, c, b, e) in &odd {
        t_odd.push(vec![m.to_string(), c.to_string(), b.to_string(), float(*e)]);
    }
    let mut t_cx = Table::new("gauss_complex", &["m", "units_checked", "max_abs_error"]);
    for (m, c, w) in &complex {
        t_cx.push(vec![m.to_string(), c.to_string(), float(*w)]);
    }
    let mut t_ram = Table::new("ramanujan", &["p", "t", "targets", "failures"]);
    for (p, t, c, b) in &ramanujan {
        t_ram.push(vec![p.to_string(), t.to_string(), c.to_string(), b.to_string()]);
    }
    let norm_bad: usize = odd.iter().map(|r| r.2).sum();
    let literal_bad = odd.iter().filter(|r| r.3 > GAUSS_TOLERANCE).count();
    let worst = complex.iter().map(|r| r.2).fold(0f64, f64::max);
    let ram_bad: usize = ramanujan.iter().map(|r| r.3).sum();
    let passed = norm_bad == 0 && literal_bad == 0 && worst <= GAUSS_TOLERANCE && ram_bad == 0;
    Ok(run(
        3,
        "Gauss and Ramanujan sums match literal summation",
        CheckKind::Exact,
        passed,
        format!(
            "norm failures {norm_bad}, literal norm failures {literal_bad}, max complex error {worst:.3e}, Ramanujan failures {ram_bad}"
        ),
        vec![t_odd, t_cx, t_ram],
    ))
}

pub const MAX_RELATIVE_CUSP: (i64, i64) = (1, 100);

fn split_row(id: &str, form: &QuadraticForm, s: &EisensteinSplit) -> Vec<String> {
    vec![
        id.into(),
        form.dim().to_string(),
        form.discriminant().to_string(),
        form.level().to_string(),
        s.n.to_string(),
        s.r.to_string(),
        float(s.rho.lo_f64()),
        float(s.rho.hi_f64()),
        float(s.tau.lo_f64()),
        float(s.tau.hi_f64()),
    ]
}

const SPLIT_HEADER: [&str; 10] = ["form_id", "k", "D", "N", "n", "r", "rho_lo", "rho_hi", "tau_lo", "tau_hi"];

pub fn check_calibration(grid: &Grid) -> Result<CheckRun> {
    let rep = calibrate_normalization(grid.e8_max_n, grid.cutoff)?;
    let form = QuadraticForm::scaled_identity(8, 2)?;
    let mut header = SPLIT_HEADER.to_vec();
    header.extend(["relative_cusp", "contains_r"]);
    let mut table = Table::new("calibration", &header);
    let limit = BigRational::new(MAX_RELATIVE_CUSP.0.into(), MAX_RELATIVE_CUSP.1.into());
    let mut worst = BigRational::zero();
    let mut missing = 0;
    for s in &rep.splits {
        let rel = s.relative_cusp().unwrap_or_else(BigRational::zero);
        let contains = s.rho.contains_int(s.r);
        missing += !contains as usize;
        let mut row = split_row("2I8", &form, s);
        row.push(float(rel.to_f64().unwrap()));
        row.push(contains.to_string());
        table.push(row);
        worst = worst.max(rel);
    }
    let mut cands = Table::new("normalizations", &["normalization", "max_relative_cusp", "chosen"]);
    for (norm, v) in &rep.candidates {
        cands.push(vec![format!("{norm:?}"), float(*v), (*norm == rep.chosen).to_string()]);
    }
    let passed = missing == 0 && worst <= limit;
    Ok(run(
        4,
        "calibrated main term for 2·I8",
        CheckKind::Exact,
        passed,
        format!(
            "chosen {:?}; {missing} of {} intervals miss r; max |τ|/r = {:.3e}",
            rep.chosen,
            rep.splits.len(),
            worst.to_f64().unwrap()
        ),
        vec![table, cands],
    ))
}

/// Pair tables on the grid, by both methods.
pub struct PairData {
    pub naive: BTreeMap<(usize, u64), PairTable>,
    pub ortho: BTreeMap<(usize, u64), PairTable>,
}

pub fn pair_data(grid: &Grid) -> Result<PairData> {
    let mut naive = BTreeMap::new();
    let mut ortho = BTreeMap::new();
    for &(d, max_n) in &grid.pair_grid {
        for (i, t) in pair_tables_via_ortho(d, max_n)?.into_iter().enumerate() {
            ortho.insert((d, i as u64 + 1), t);
        }
        let tables: Vec<PairTable> = (1..=max_n).into_par_iter().map(|n| pair_table(d, n)).collect::<Result<_>>()?;
        for t in tables {
            naive.insert((d, t.n), t);
        }
    }
    Ok(PairData { naive, ortho })
}

pub fn check_pair_methods(data: &PairData) -> CheckRun {
    let mut table = Table::new("pair_tables", &["d", "n", "t", "naive", "ortho"]);
    let mut mismatches = 0;
    for (key, a) in &data.naive {
        let b = &data.ortho[key];
        for (&t, &x) in &a.table {
            let y = b.get(t);
            mismatches += (x != y) as usize;
            table.push(vec![key.0.to_string(), key.1.to_string(), t.to_string(), x.to_string(), y.to_string()]);
        }
    }
    run(
        5,
        "pair table: orthogonal-lattice count equals direct count",
        CheckKind::Exact,
        mismatches == 0,
        format!("{} tables, {} entries, {mismatches} mismatches", data.naive.len(), table.rows.len()),
        vec![table],
    )
}

/// Smallest m with m^den ≥ n^num.
fn ceil_root_power(n: u64, num: u32, den: u32) -> u64 {
    let target = num_traits::pow(BigInt::from(n), num as usize);
    let f = floor_root_power(n, num, den);
    if num_traits::pow(BigInt::from(f), den as usize) == target {
        f
    } else {
        f + 1
    }
}

/// Largest m with m^den ≤ n^num.
pub fn floor_root_power(n: u64, num: u32, den: u32) -> u64 {
    num_traits::pow(BigInt::from(n), num as usize).nth_root(den).to_u64().unwrap()
}

pub fn mean_identity_y2(n: u64) -> Vec<u64> {
    let mut v = vec![1, 2, 3, 4, 8, 2 * ceil_root_power(n, 1, 4)];
    v.sort();
    v.dedup();
    v
}

pub fn check_mean_identity(grid: &Grid, data: &PairData) -> Result<CheckRun> {
    let d = grid.mean_d;
    let rows: Vec<Vec<(u64, BigRational, BigRational)>> = (1..=grid.mean_max_n)
        .into_par_iter()
        .map(|n| {
            let pairs = match data.naive.get(&(d, n)) {
                Some(t) => t.clone(),
                None => pair_table(d, n)?,
            };
            mean_identity_y2(n)
                .into_iter()
                .map(|y| {
                    let ysq = BigRational::from_integer(y.into());
                    Ok((y, cap_stats(d, n, &ysq, f64::INFINITY)?.mean, mean_from_pairs(&pairs, &ysq)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new("mean_identity", &["d", "n", "Y2", "mean_mu", "pair_sum_mean"]);
    let mut unequal = 0;
    for (n, rs) in (1..=grid.mean_max_n).zip(rows) {
        for (y, l, r) in rs {
            unequal += (l != r) as usize;
            table.push(vec![d.to_string(), n.to_string(), y.to_string(), rational_string(&l), rational_string(&r)]);
        }
    }
    Ok(run(
        6,
        "mean cap count equals pair-table sum",
        CheckKind::Exact,
        unequal == 0,
        format!("{} cases, {unequal} unequal", table.rows.len()),
        vec![table],
    ))
}

pub fn check_pair_invariants(data: &PairData) -> CheckRun {
    let mut table = Table::new("pair_invariants", &["method", "d", "n", "size", "total", "failures"]);
    let mut failures = 0;
    for (method, tables) in [("naive", &data.naive), ("ortho", &data.ortho)] {
        for ((d, n), t) in tables {
            let f = t.invariant_failures();
            failures += f.len();
            table.push(vec![
                method.into(),
                d.to_string(),
                n.to_string(),
                t.size.to_string(),
                t.total().to_string(),
                f.join("; "),
            ]);
        }
    }
    run(
        7,
        "pair table identities",
        CheckKind::Exact,
        failures == 0,
        format!("{} tables, {failures} violations", table.rows.len()),
        vec![table],
    )
}

/// Y² = ⌊n^{0.35}⌋, the cap size n^{1/8 + 0.05} squared and rounded down.
pub fn large_cap_y2(n: u64) -> u64 {
    floor_root_power(n, 7, 20)
}

/// Y² = ⌊n^{0.15}⌋, the cap size n^{1/8 − 0.05} squared and rounded down.
pub fn small_cap_y2(n: u64) -> u64 {
    floor_root_power(n, 3, 20)
}

pub fn check_covering(grid: &Grid) -> Result<CheckRun> {
    let reports = grid
        .covering_ns
        .par_iter()
        .map(|&n| covering_check(5, n, &BigRational::from_integer(large_cap_y2(n).into()), None))
        .collect::<Result<Vec<_>>>()?;
    let mut table =
        Table::new("covering", &["d", "n", "Y2", "threshold", "points", "mean_mu", "probability", "exceeds_half"]);
    for r in &reports {
        table.push(vec![
            r.d.to_string(),
            r.n.to_string(),
            rational_string(&r.ysq),
            float(r.threshold),
            r.points.to_string(),
            float(r.mean.to_f64().unwrap()),
            float(r.probability.to_f64().unwrap()),
            r.exceeds_half.to_string(),
        ]);
    }
    let all = reports.iter().all(|r| r.exceeds_half);
    let probs: Vec<String> =
        reports.iter().map(|r| format!("{}: {:.3}", r.n, r.probability.to_f64().unwrap())).collect();
    Ok(run(8, "large caps: P[μ > ln n] > 1/2", CheckKind::Report, all, probs.join(", "), vec![table]))
}

pub fn check_trend(grid: &Grid) -> Result<CheckRun> {
    let means = grid
        .trend_ns
        .par_iter()
        .map(|&n| Ok((n, cap_stats(5, n, &BigRational::from_integer(small_cap_y2(n).into()), f64::INFINITY)?.mean)))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("trend", &["d", "n", "Y2", "mean_mu"]);
    for (n, m) in &means {
        table.push(vec!["5".into(), n.to_string(), small_cap_y2(*n).to_string(), rational_string(m)]);
    }
    let first = &means[0].1;
    let max = means.iter().map(|(_, m)| m).max().unwrap();
    let passed = max <= first;
    let vals: Vec<String> = means.iter().map(|(n, m)| format!("{n}: {:.4}", m.to_f64().unwrap())).collect();
    Ok(run(9, "small caps: mean μ does not grow", CheckKind::Report, passed, vals.join(", "), vec![table]))
}

/// Root lattices of rank 4 with small discriminant: D₄, A₄, A₁⊕A₃, A₂⊕A₂.
pub fn curated_rank4() -> Vec<(String, QuadraticForm)> {
    let rows: [(&str, [[i64; 4]; 4]); 4] = [
        ("D4", [[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]]),
        ("A4", [[2, -1, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -1], [0, 0, -1, 2]]),
        ("A1+A3", [[2, 0, 0, 0], [0, 2, -1, 0], [0, -1, 2, -1], [0, 0, -1, 2]]),
        ("A2+A2", [[2, -1, 0, 0], [-1, 2, 0, 0], [0, 0, 2, -1], [0, 0, -1, 2]]),
    ];
    rows.iter()
        .map(|(id, m)| {
            let r: Vec<Vec<i64>> = m.iter().map(|row| row.to_vec()).collect();
            (id.to_string(), QuadraticForm::from_i64_rows(&r).expect("valid root lattice"))
        })
        .collect()
}

fn report_table(name: &str, report: &BoundReport, extra: &[&str], rows: Vec<Vec<String>>) -> Table {
    let mut header = SPLIT_HEADER.to_vec();
    header.extend(extra);
    header.push("condition_ok");
    let mut t = Table::new(name, &header);
    for (mut row, p) in rows.into_iter().zip(&report.points) {
        row.push(p.condition_ok.to_string());
        t.push(row);
    }
    t
}

fn stability_line(r: &BoundReport) -> String {
    let (lo, hi) = r.halves();
    let f = |x: Option<Interval>| x.map(|i| format!("{:.4e}", i.hi_f64())).unwrap_or_else(|| "none".into());
    format!("{}: lower {} upper {} stable {}", r.name, f(lo), f(hi), r.is_stable())
}

pub fn check_bounds(grid: &Grid, family: &[FamilyMember]) -> Result<CheckRun> {
    let eps = &grid.eps;
    let mut tables = Vec::new();
    let mut reports = Vec::new();

    // The main-term bound on rank-4 root lattices, where D ≤ n^{1/4} is reachable
    let curated = curated_rank4();
    let counted: Vec<Vec<(u64, u64)>> = curated
        .par_iter()
        .map(|(_, f)| {
            let table = representation_table(f, grid.theorem_max_n, grid.budget)?;
            Ok((1..=grid.theorem_max_n).map(|n| (n, table[n as usize])).collect())
        })
        .collect::<Result<_>>()?;
    let mut points_d = Vec::new();
    let mut points_n = Vec::new();
    let mut rows = Vec::new();
    for ((id, f), counts) in curated.iter().zip(&counted) {
        for &(n, r) in counts {
            let ok = theorem14_condition(f, n);
            let rd = theorem14_ratio(f, n, r, eps, GcdWith::Discriminant);
            let rn = theorem14_ratio(f, n, r, eps, GcdWith::Level);
            let mut row = vec![
                id.clone(),
                "4".into(),
                f.discriminant().to_string(),
                f.level().to_string(),
                n.to_string(),
                r.to_string(),
            ];
            row.extend(std::iter::repeat_n(String::new(), 4));
            row.push(float(rd.hi_f64()));
            row.push(float(rn.hi_f64()));
            rows.push(row);
            points_d.push(BoundPoint { form_id: id.clone(), n, ratio: rd, condition_ok: ok });
            points_n.push(BoundPoint { form_id: id.clone(), n, ratio: rn, condition_ok: ok });
        }
    }
    let th_d = BoundReport::new("theorem14_gcd_D", eps, points_d);
    let th_n = BoundReport::new("theorem14_gcd_N", eps, points_n);
    tables.push(report_table("bound_theorem14", &th_d, &["ratio_gcd_D", "ratio_gcd_N"], rows));

    // The remaining bounds over the generated family. The cusp-part bound
    // needs ρ, which is only defined when every prime of 2D is within the cutoff.
    struct FormData {
        table: Vec<u64>,
        splits: Option<Vec<EisensteinSplit>>,
        minima: Vec<u64>,
    }
    let x_max = grid.bound_max_n.max(grid.moment_xs.iter().copied().max().unwrap_or(0));
    let data: Vec<FormData> = family
        .par_iter()
        .map(|m| {
            let table = representation_table(&m.form, x_max, grid.budget)?;
            let splits = if largest_prime_factor(&(m.form.discriminant() * 2)) <= grid.cutoff {
                let ctx = DensityContext::new(&m.form);
                let s = (1..=grid.bound_max_n)
                    .map(|n| Ok(EisensteinSplit::new(n, table[n as usize], ctx.rho(n, grid.cutoff)?.rho)))
                    .collect::<Result<Vec<_>>>()?;
                Some(s)
            } else {
                None
            };
            Ok(FormData { table, splits, minima: successive_minima(&m.form)?.minima })
        })
        .collect::<Result<_>>()?;

    let mut p33 = Vec::new();
    let mut p33_half = Vec::new();
    let mut p41 = Vec::new();
    let mut rows33 = Vec::new();
    let mut rows41 = Vec::new();
    let mut skipped = Table::new("bound_lemma33_skipped", &["form_id", "D", "largest_prime_of_2D", "cutoff"]);
    for (m, fd) in family.iter().zip(&data) {
        let profile = crate::forms::MinimaProfile { minima: fd.minima.clone(), witnesses: Vec::new() };
        match &fd.splits {
            Some(splits) => {
                for s in splits {
                    let quarter = lemma33_ratio(&m.form, s, eps, 4);
                    let half = lemma33_ratio(&m.form, s, eps, 2);
                    let mut row = split_row(&m.id, &m.form, s);
                    row.push(float(quarter.hi_f64()));
                    row.push(float(half.hi_f64()));
                    rows33.push(row);
                    p33.push(BoundPoint { form_id: m.id.clone(), n: s.n, ratio: quarter, condition_ok: true });
                    p33_half.push(BoundPoint { form_id: m.id.clone(), n: s.n, ratio: half, condition_ok: true });
                }
            }
            None => skipped.push(vec![
                m.id.clone(),
                m.form.discriminant().to_string(),
                largest_prime_factor(&(m.form.discriminant() * 2)).to_string(),
                grid.cutoff.to_string(),
            ]),
        }
        for n in 1..=grid.bound_max_n {
            let r = fd.table[n as usize];
            let l41 = lemma41_ratio(&profile, n, r, eps);
            let mut row = vec![
                m.id.clone(),
                m.form.dim().to_string(),
                m.form.discriminant().to_string(),
                m.form.level().to_string(),
                n.to_string(),
                r.to_string(),
            ];
            row.push(fd.minima.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
            row.push(float(l41.hi_f64()));
            rows41.push(row);
            p41.push(BoundPoint { form_id: m.id.clone(), n, ratio: l41, condition_ok: true });
        }
    }
    let l33 = BoundReport::new("lemma33_gcd_quarter", eps, p33);
    let l33_half = BoundReport::new("lemma33_gcd_half", eps, p33_half);
    let l41 = BoundReport::new("lemma41", eps, p41);
    tables.push(report_table("bound_lemma33", &l33, &["ratio_gcd_quarter", "ratio_gcd_half"], rows33));
    tables.push(skipped);
    let mut t41 =
        Table::new("bound_lemma41", &["form_id", "k", "D", "N", "n", "r", "minima", "ratio_minima", "condition_ok"]);
    for (mut row, p) in rows41.into_iter().zip(&l41.points) {
        row.push(p.condition_ok.to_string());
        t41.push(row);
    }
    tables.push(t41);

    let mut p42 = Vec::new();
    let mut t42 =
        Table::new("bound_cor42", &["form_id", "k", "D", "N", "x", "second_moment", "ratio_moment", "condition_ok"]);
    for (m, fd) in family.iter().zip(&data) {
        for &x in &grid.moment_xs {
            let second: BigInt = fd.table[..=x as usize].iter().map(|&r| BigInt::from(r) * r).sum();
            let ratio = cor42_ratio(&m.form, x, &second, eps);
            t42.push(vec![
                m.id.clone(),
                m.form.dim().to_string(),
                m.form.discriminant().to_string(),
                m.form.level().to_string(),
                x.to_string(),
                second.to_string(),
                float(ratio.hi_f64()),
                "true".into(),
            ]);
            p42.push(BoundPoint { form_id: m.id.clone(), n: x, ratio, condition_ok: true });
        }
    }
    let c42 = BoundReport::new("cor42", eps, p42);
    tables.push(t42);

    let mut summary =
        Table::new("bound_summary", &["bound", "eps", "family_max", "lower_half_max", "upper_half_max", "stable"]);
    for r in [&th_d, &th_n, &l33, &l33_half, &l41, &c42] {
        let (lo, hi) = r.halves();
        let f = |x: Option<&Interval>| x.map(|i| float(i.hi_f64())).unwrap_or_default();
        summary.push(vec![
            r.name.clone(),
            r.eps.clone(),
            f(r.family_max.as_ref()),
            f(lo.as_ref()),
            f(hi.as_ref()),
            r.is_stable().to_string(),
        ]);
    }
    tables.insert(0, summary);
    reports.extend([th_d, l33, l41, c42]);
    let passed = reports.iter().all(|r| r.family_max.is_some() && r.is_stable());
    let detail = reports.iter().map(stability_line).collect::<Vec<_>>().join("; ");
    Ok(run(10, "bound ratios stay bounded across the n-range", CheckKind::Report, passed, detail, tables))
}

fn largest_prime_factor(n: &BigInt) -> u64 {
    crate::arith::prime_factors(&n.abs()).into_iter().max().unwrap_or(2)
}
