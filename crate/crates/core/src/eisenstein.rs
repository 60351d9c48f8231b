//! The decomposition r(Q, n) = ρ(n, Q) + τ(n, Q) and the bound ratios
//! that compare exact counts with the asymptotic upper bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::enumeration::{count_representations, cumulative_counts, representation_table, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};
use crate::forms::{MinimaProfile, QuadraticForm};
use crate::interval::Interval;
use crate::local_densities::{ArchimedeanNormalization, DensityContext};

#[derive(Clone, Debug, Serialize)]
pub struct EisensteinSplit {
    pub n: u64,
    pub r: u64,
    pub rho: Interval,
    pub tau: Interval,
}

impl EisensteinSplit {
    pub fn new(n: u64, r: u64, rho: Interval) -> Self {
        let tau = &Interval::from_int(r) - &rho;
        EisensteinSplit { n, r, rho, tau }
    }

    /// Upper end of |τ|/r, or None when r = 0.
    pub fn relative_cusp(&self) -> Option<BigRational> {
        (self.r > 0).then(|| self.tau.abs().hi() / BigRational::from_integer(self.r.into()))
    }
}

pub fn split(form: &QuadraticForm, n: u64, cutoff: u64) -> Result<EisensteinSplit> {
    let r = count_representations(form, n)?;
    let profile = DensityContext::new(form).rho(n, cutoff)?;
    Ok(EisensteinSplit::new(n, r, profile.rho))
}

/// Splits for n = 1..=max_n sharing one representation table and one
/// density context.
pub fn split_range(ctx: &DensityContext, max_n: u64, cutoff: u64) -> Result<Vec<EisensteinSplit>> {
    let table = representation_table(ctx.form(), max_n, DEFAULT_NODE_BUDGET)?;
    (1..=max_n).map(|n| Ok(EisensteinSplit::new(n, table[n as usize], ctx.rho(n, cutoff)?.rho))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationReport {
    pub max_n: u64,
    pub cutoff: u64,
    /// max_n |τ|/r for each candidate normalization.
    pub candidates: Vec<(ArchimedeanNormalization, f64)>,
    pub chosen: ArchimedeanNormalization,
    /// The splits under the chosen normalization.
    #[serde(skip)]
    pub splits: Vec<EisensteinSplit>,
}

/// Picks the σ_∞ normalization under which the cusp part of 2·I₈ (a form
/// whose theta series is a pure Eisenstein series) vanishes.
pub fn calibrate_normalization(max_n: u64, cutoff: u64) -> Result<CalibrationReport> {
    let form = QuadraticForm::scaled_identity(8, 2)?;
    let mut candidates = Vec::new();
    let mut all_splits = Vec::new();
    for norm in [ArchimedeanNormalization::ShellLimit, ArchimedeanNormalization::SphereVolume] {
        let ctx = DensityContext::with_normalization(&form, norm);
        let splits = split_range(&ctx, max_n, cutoff)?;
        let worst = splits.iter().filter_map(|s| s.relative_cusp()).max().unwrap_or_else(BigRational::zero);
        candidates.push((norm, worst.to_f64().unwrap_or(f64::INFINITY)));
        all_splits.push(splits);
    }
    let best = (0..candidates.len()).min_by(|&a, &b| candidates[a].1.total_cmp(&candidates[b].1)).unwrap();
    let chosen = candidates[best].0;
    let splits = all_splits.swap_remove(best);
    Ok(CalibrationReport { max_n, cutoff, candidates, chosen, splits })
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// n^ε for rational ε.
fn n_power_eps(n: u64, eps: &BigRational) -> Interval {
    let den = eps.denom().to_u32().expect("ε denominator too large");
    let num = eps.numer().to_i64().expect("ε numerator too large");
    Interval::int_power(n, num, den)
}

fn nonzero_ratio(num: &Interval, den: &Interval) -> Interval {
    if num.hi().is_zero() && num.lo().is_zero() {
        Interval::zero()
    } else {
        num.div(den).rounded()
    }
}

/// Parses a decimal like "0.1" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("not a rational number: {s}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = format!("{int}{frac}");
    let value: BigInt = digits.parse().map_err(|_| bad())?;
    Ok(BigRational::new(value, num_traits::pow(BigInt::from(10), frac.len())))
}

/// Theorem condition D ≤ n^{(k-3)/(2(k-2))}, checked as D^{2(k-2)} ≤ n^{k-3}.
pub fn theorem14_condition(form: &QuadraticForm, n: u64) -> bool {
    let k = form.dim();
    if k < 4 {
        return false;
    }
    num_traits::pow(form.discriminant().clone(), 2 * (k - 2)) <= num_traits::pow(BigInt::from(n), k - 3)
}

/// Which modulus enters the gcd factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GcdWith {
    Discriminant,
    Level,
}

/// r·√D / (n^{(k-2)/2}·gcd(·, n)^{1/2}·n^ε).
pub fn theorem14_ratio(form: &QuadraticForm, n: u64, r: u64, eps: &BigRational, gcd_with: GcdWith) -> Interval {
    let k = form.dim() as i64;
    let modulus = match gcd_with {
        GcdWith::Discriminant => form.discriminant(),
        GcdWith::Level => form.level(),
    };
    let g = modulus.gcd(&BigInt::from(n));
    let num = &Interval::from_int(r) * &Interval::sqrt_rational(&rat(form.discriminant().clone()));
    let den = &(&Interval::int_power(n, k - 2, 2) * &Interval::sqrt_rational(&rat(g))) * &n_power_eps(n, eps);
    nonzero_ratio(&num, &den)
}

/// |τ| / (D^{(k-3)/2}·n^{(k-1)/4}·gcd(n, D)^{e}·n^ε) with e = 1/4 or 1/2.
pub fn lemma33_ratio(
    form: &QuadraticForm,
    split: &EisensteinSplit,
    eps: &BigRational,
    gcd_exponent_den: u32,
) -> Interval {
    let k = form.dim() as i64;
    let n = split.n;
    let d = form.discriminant().clone();
    let g = d.gcd(&BigInt::from(n));
    let den = &(&(&Interval::rational_power(&rat(d), k - 3, 2) * &Interval::int_power(n, k - 1, 4))
        * &Interval::rational_power(&rat(g), 1, gcd_exponent_den))
        * &n_power_eps(n, eps);
    nonzero_ratio(&split.tau.abs(), &den)
}

/// r / (1 + Σ_{j=1}^{k-2} n^{j/2}/(μ₃⋯μ_{j+2})^{1/2}) / n^ε.
pub fn lemma41_ratio(minima: &MinimaProfile, n: u64, r: u64, eps: &BigRational) -> Interval {
    let k = minima.minima.len();
    let mut bound = Interval::one();
    let mut prod = BigInt::one();
    for j in 1..=k.saturating_sub(2) {
        prod *= minima.minima[j + 1];
        let term = Interval::sqrt_rational(&BigRational::new(num_traits::pow(BigInt::from(n), j), prod.clone()));
        bound = &bound + &term;
    }
    let den = &bound * &n_power_eps(n, eps);
    nonzero_ratio(&Interval::from_int(r), &den)
}

/// Σ_{n≤x} r(Q,n)² / (x^ε(x^{k-2} + x^{k-3/2}/D^{1/2} + x^{k-1}/D^{1-1/k})).
pub fn cor42_ratio(form: &QuadraticForm, x: u64, second_moment: &BigInt, eps: &BigRational) -> Interval {
    let k = form.dim();
    let d = rat(form.discriminant().clone());
    let xb = BigInt::from(x);
    let t1 = Interval::from_int(num_traits::pow(xb.clone(), k - 2));
    let t2 = Interval::sqrt_rational(&(rat(num_traits::pow(xb.clone(), 2 * k - 3)) / &d));
    let t3 = &Interval::from_int(num_traits::pow(xb, k - 1)) * &Interval::rational_power(&d, -(k as i64 - 1), k as u32);
    let den = &(&(&t1 + &t2) + &t3) * &n_power_eps(x, eps);
    nonzero_ratio(&Interval::from_int(second_moment.clone()), &den)
}

pub fn cor42_ratio_for(form: &QuadraticForm, x: u64, eps: &BigRational) -> Result<Interval> {
    let (_, second) = cumulative_counts(form, x)?;
    Ok(cor42_ratio(form, x, &second, eps))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundPoint {
    pub form_id: String,
    pub n: u64,
    pub ratio: Interval,
    pub condition_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub eps: String,
    pub points: Vec<BoundPoint>,
    /// Elementwise maximum over the points whose condition holds.
    pub family_max: Option<Interval>,
}

impl BoundReport {
    pub fn new(name: &str, eps: &BigRational, points: Vec<BoundPoint>) -> Self {
        let family_max = max_of(points.iter().filter(|p| p.condition_ok));
        BoundReport { name: name.into(), eps: eps.to_string(), points, family_max }
    }

    /// Maxima over the lower and upper halves of the n-range (split at the
    /// median of the distinct n values among included points).
    pub fn halves(&self) -> (Option<Interval>, Option<Interval>) {
        let mut ns: Vec<u64> = self.points.iter().filter(|p| p.condition_ok).map(|p| p.n).collect();
        ns.sort();
        ns.dedup();
        if ns.is_empty() {
            return (None, None);
        }
        let mid = ns[ns.len() / 2];
        let lower = max_of(self.points.iter().filter(|p| p.condition_ok && p.n < mid));
        let upper = max_of(self.points.iter().filter(|p| p.condition_ok && p.n >= mid));
        (lower, upper)
    }

    /// Upper-half maximum at most 1.1 times the lower-half maximum.
    pub fn is_stable(&self) -> bool {
        match self.halves() {
            (Some(lo), Some(hi)) => hi.hi() <= &(lo.hi() * BigRational::new(11.into(), 10.into())),
            _ => false,
        }
    }
}

fn max_of<'a>(points: impl Iterator<Item = &'a BoundPoint>) -> Option<Interval> {
    points.map(|p| p.ratio.clone()).reduce(|a, b| a.max(&b))
}
