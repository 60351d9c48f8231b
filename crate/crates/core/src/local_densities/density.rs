//! The archimedean density, the Euler product of local densities and the
//! main term ρ(n, Q) = n^{(k-2)/2} σ_∞ Π_p σ_p as a rigorous interval.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::counting::LocalCounter;
use super::formula::OddSplitting;
use crate::arith::{prime_factors, primes_up_to};
use crate::error::{Error, Result};
use crate::forms::QuadraticForm;
use crate::interval::Interval;

/// How σ_∞ is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ArchimedeanNormalization {
    /// lim_{ε→0} vol{x : 1 < Q(x) < 1+ε}/ε = π^{k/2} 2^{k/2} / (Γ(k/2) √D).
    ShellLimit,
    /// vol(S^{k-1}) / √D = 2π^{k/2} / (Γ(k/2) √D).
    SphereVolume,
}

/// π^{k/2}/Γ(k/2), using Γ(k/2) = (k/2−1)! for even k and
/// Γ(k/2) = (k−2)!!·√π / 2^{(k−1)/2} for odd k.
fn pi_power_over_gamma(k: u32) -> Interval {
    let pi = Interval::pi();
    if k.is_multiple_of(2) {
        let fact: BigInt = (1..k / 2).map(BigInt::from).product();
        pi.powi(k / 2).div(&Interval::from_int(fact))
    } else {
        let dfact: BigInt = (1..=k - 2).rev().step_by(2).map(BigInt::from).product();
        let two = BigInt::one() << ((k - 1) / 2) as usize;
        (&pi.powi((k - 1) / 2) * &Interval::from_int(two)).div(&Interval::from_int(dfact))
    }
}

pub fn sigma_infinity(form: &QuadraticForm) -> Interval {
    sigma_infinity_with(form, ArchimedeanNormalization::ShellLimit)
}

pub fn sigma_infinity_with(form: &QuadraticForm, norm: ArchimedeanNormalization) -> Interval {
    let k = form.dim() as u32;
    let d = form.discriminant().clone();
    let factor = match norm {
        ArchimedeanNormalization::ShellLimit => {
            Interval::sqrt_rational(&BigRational::new(BigInt::one() << k as usize, d))
        }
        ArchimedeanNormalization::SphereVolume => {
            Interval::from_int(2).div(&Interval::sqrt_rational(&BigRational::from_integer(d)))
        }
    };
    (&pi_power_over_gamma(k) * &factor).rounded()
}

/// Enclosure of Π_{p > cutoff} σ_p from |σ_p − 1| ≤ p^{-(k-1)/2} and
/// Σ_{m > c} m^{-(k-1)/2} ≤ 2c^{(3-k)/2}/(k−3).
pub fn tail_factor(k: usize, cutoff: u64) -> Result<Interval> {
    if k < 4 {
        return Err(Error::InvalidArgument("the tail bound needs k ≥ 4".into()));
    }
    let c = Interval::int_power(cutoff, 3 - k as i64, 2);
    let e = BigRational::from_integer(2.into()) * c.hi() / BigRational::from_integer((k - 3).into());
    let one = BigRational::one();
    let lo = if e < one { &one - &e } else { BigRational::zero() };
    // exp(E) ≤ (1/(1 − E/2^s))^{2^s}
    let mut s = 0u32;
    let limit = BigRational::new(1.into(), 1024.into());
    while &e / BigRational::from_integer(BigInt::one() << s as usize) > limit {
        s += 1;
    }
    let x = &e / BigRational::from_integer(BigInt::one() << s as usize);
    let mut hi = Interval::point((&one - &x).recip()).rounded();
    for _ in 0..s {
        hi = (&hi * &hi).rounded();
    }
    Ok(Interval::new(lo, hi.hi().clone()).round_outward(crate::interval::ROUNDING_BITS))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocalMethod {
    DirectCount,
    GaussSum,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityProfile {
    pub n: u64,
    pub sigma_infinity: Interval,
    /// σ_p for every prime up to the cutoff (which covers all p | 2nD).
    pub finite_densities: BTreeMap<u64, BigRational>,
    /// How σ_p was obtained at the primes dividing 2nD.
    pub methods: BTreeMap<u64, LocalMethod>,
    pub tail: Interval,
    pub rho: Interval,
}

/// Reusable state for density computations on one form: Jordan data and
/// local distributions are kept between targets.
pub struct DensityContext {
    form: QuadraticForm,
    norm: ArchimedeanNormalization,
    sigma_inf: Interval,
    counters: Mutex<HashMap<u64, Arc<LocalCounter>>>,
    splittings: Mutex<HashMap<u64, Arc<OddSplitting>>>,
}

impl DensityContext {
    pub fn new(form: &QuadraticForm) -> Self {
        Self::with_normalization(form, ArchimedeanNormalization::ShellLimit)
    }

    pub fn with_normalization(form: &QuadraticForm, norm: ArchimedeanNormalization) -> Self {
        DensityContext {
            form: form.clone(),
            norm,
            sigma_inf: sigma_infinity_with(form, norm),
            counters: Mutex::new(HashMap::new()),
            splittings: Mutex::new(HashMap::new()),
        }
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    pub fn sigma_infinity(&self) -> &Interval {
        &self.sigma_inf
    }

    fn counter(&self, p: u64) -> Arc<LocalCounter> {
        if let Some(c) = self.counters.lock().unwrap().get(&p) {
            return c.clone();
        }
        let c = Arc::new(LocalCounter::new(&self.form, p));
        self.counters.lock().unwrap().entry(p).or_insert(c).clone()
    }

    fn splitting(&self, p: u64) -> Arc<OddSplitting> {
        if let Some(s) = self.splittings.lock().unwrap().get(&p) {
            return s.clone();
        }
        let s = Arc::new(OddSplitting::of_form(&self.form, p).expect("odd prime"));
        self.splittings.lock().unwrap().entry(p).or_insert(s).clone()
    }

    /// σ_p by direct counting.
    pub fn sigma_direct(&self, n: &BigInt, p: u64) -> Result<BigRational> {
        self.counter(p).sigma(n)
    }

    /// σ_p for odd p by the closed-form local terms.
    pub fn sigma_formula(&self, n: &BigInt, p: u64) -> BigRational {
        self.splitting(p).sigma(n)
    }

    /// σ_p at a prime dividing 2nD: direct counting at p = 2 and whenever
    /// the counting modulus is small, the closed form otherwise.
    fn sigma_special(&self, n: &BigInt, p: u64) -> Result<(BigRational, LocalMethod)> {
        let counter = self.counter(p);
        if p == 2 || counter.feasible(counter.stabilization_level(n) + 2) {
            Ok((counter.sigma(n)?, LocalMethod::DirectCount))
        } else {
            Ok((self.sigma_formula(n, p), LocalMethod::GaussSum))
        }
    }

    pub fn rho(&self, n: u64, cutoff: u64) -> Result<DensityProfile> {
        let k = self.form.dim();
        if k < 4 {
            return Err(Error::InvalidArgument("ρ needs k ≥ 4".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("ρ needs n ≥ 1".into()));
        }
        let nb = BigInt::from(n);
        let special = prime_factors(&(&nb * self.form.discriminant() * 2));
        if let Some(&q) = special.iter().find(|&&q| q > cutoff) {
            return Err(Error::CutoffTooSmall { cutoff, prime: q });
        }
        let primes = primes_up_to(cutoff);
        let locals: Vec<(u64, BigRational, Option<LocalMethod>)> = primes
            .par_iter()
            .map(|&p| {
                if special.contains(&p) {
                    let (s, m) = self.sigma_special(&nb, p)?;
                    Ok((p, s, Some(m)))
                } else {
                    Ok((p, OddSplitting::unramified(&self.form, p).sigma(&nb), None))
                }
            })
            .collect::<Result<_>>()?;
        let (num, den) = fraction_product(&locals.iter().map(|l| &l.1).collect::<Vec<_>>());
        let product = Interval::enclose_fraction(&num, &den);
        let mut finite_densities = BTreeMap::new();
        let mut methods = BTreeMap::new();
        for (p, s, m) in locals {
            finite_densities.insert(p, s);
            if let Some(m) = m {
                methods.insert(p, m);
            }
        }
        let tail = tail_factor(k, cutoff)?;
        let scale = Interval::int_power(n, k as i64 - 2, 2);
        let rho = (&(&(&scale * &self.sigma_inf).rounded() * &product).rounded() * &tail).rounded();
        Ok(DensityProfile { n, sigma_infinity: self.sigma_inf.clone(), finite_densities, methods, tail, rho })
    }

    pub fn normalization(&self) -> ArchimedeanNormalization {
        self.norm
    }
}

/// Numerator and denominator of a product of rationals, multiplied as a
/// balanced tree and left unreduced.
fn fraction_product(values: &[&BigRational]) -> (BigInt, BigInt) {
    match values {
        [] => (BigInt::one(), BigInt::one()),
        [q] => (q.numer().clone(), q.denom().clone()),
        _ => {
            let (a, b) = values.split_at(values.len() / 2);
            let (na, da) = fraction_product(a);
            let (nb, db) = fraction_product(b);
            (na * nb, da * db)
        }
    }
}

pub fn rho(form: &QuadraticForm, n: u64, cutoff: u64) -> Result<DensityProfile> {
    DensityContext::new(form).rho(n, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_infinity_examples() {
        let pi = std::f64::consts::PI;
        let s4 = sigma_infinity(&QuadraticForm::scaled_identity(4, 2).unwrap());
        assert!(s4.lo_f64() <= pi * pi && pi * pi <= s4.hi_f64());
        assert!(s4.width() < BigRational::new(1.into(), BigInt::from(10).pow(40)));
        let s8 = sigma_infinity(&QuadraticForm::scaled_identity(8, 2).unwrap());
        let v = pi.powi(4) / 6.0;
        assert!((s8.mid_f64() - v).abs() < 1e-12 * v);
        let s5 = sigma_infinity(&QuadraticForm::scaled_identity(5, 2).unwrap());
        // vol{|x|² < 2r}: derivative in r at r = 1 equals (5/2)·(8π²/15)·2^{5/2}/2
        let v5 = 2.5 * (8.0 * pi * pi / 15.0) * 2f64.powf(2.5) / (32f64).sqrt();
        assert!((s5.mid_f64() - v5).abs() < 1e-12 * v5);
    }

    #[test]
    fn rho_examples() {
        let f8 = QuadraticForm::scaled_identity(8, 2).unwrap();
        assert!(rho(&f8, 1, 10_000).unwrap().rho.contains_int(16));
        let f4 = QuadraticForm::scaled_identity(4, 2).unwrap();
        let widths: Vec<BigRational> =
            [100, 1000, 10_000].iter().map(|&c| rho(&f4, 1, c).unwrap().rho.width()).collect();
        assert!(widths[0] > widths[1] && widths[1] > widths[2]);
        assert!(rho(&f4, 1, 10_000).unwrap().rho.contains_int(8));
        assert_eq!(rho(&f4, 53, 50).unwrap_err(), Error::CutoffTooSmall { cutoff: 50, prime: 53 });
    }

    #[test]
    fn tail_contains_one() {
        for k in 4..9 {
            let t = tail_factor(k, 1000).unwrap();
            assert!(t.contains_int(1));
        }
    }
}
