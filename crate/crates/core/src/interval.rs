//! Closed intervals with exact rational endpoints.
//!
//! Transcendental and irrational quantities (π, square roots, fractional
//! powers) are enclosed by rational bounds; products of many factors are
//! kept small by rounding endpoints outward onto a dyadic grid.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Bits kept after the binary point when endpoints are rounded outward.
pub const ROUNDING_BITS: u32 = 200;
/// Bits of accuracy used for root enclosures.
const ROOT_BITS: u32 = 160;

/// π to 60 decimal places; the enclosure below is ±1e-60.
const PI_DIGITS: &str = "3141592653589793238462643383279502884197169399375105820974944";

#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(q: BigRational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::point(rat(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_int(&self, n: impl Into<BigInt>) -> bool {
        self.contains(&rat(n))
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / rat(2)
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    pub fn mid_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    /// Range of |x| over the interval.
    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self.clone()
        } else {
            let hi = if -self.lo.clone() > self.hi { -self.lo.clone() } else { self.hi.clone() };
            Interval { lo: BigRational::zero(), hi }
        }
    }

    /// Elementwise maximum: the enclosure of max(x, y).
    pub fn max(&self, other: &Self) -> Self {
        Interval {
            lo: std::cmp::max(self.lo.clone(), other.lo.clone()),
            hi: std::cmp::max(self.hi.clone(), other.hi.clone()),
        }
    }

    /// Hull of two intervals.
    pub fn hull(&self, other: &Self) -> Self {
        Interval {
            lo: std::cmp::min(self.lo.clone(), other.lo.clone()),
            hi: std::cmp::max(self.hi.clone(), other.hi.clone()),
        }
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, other: &Self) -> Self {
        assert!(other.lo.is_positive() || other.hi.is_negative(), "division by an interval containing zero");
        let inv = Interval::new(other.hi.recip(), other.lo.recip());
        self * &inv
    }

    /// Snap endpoints outward onto the grid 2^-bits.
    pub fn round_outward(&self, bits: u32) -> Self {
        let scale = rat(pow2(bits));
        let lo = (&self.lo * &scale).floor() / &scale;
        let hi = (&self.hi * &scale).ceil() / &scale;
        Interval { lo, hi }
    }

    /// Outward-rounded enclosure of num/den (den > 0) without forming the
    /// reduced fraction.
    pub fn enclose_fraction(num: &BigInt, den: &BigInt) -> Self {
        assert!(den.is_positive());
        let scaled = num << ROUNDING_BITS as usize;
        let (q, r) = scaled.div_mod_floor(den);
        let scale = rat(pow2(ROUNDING_BITS));
        let lo = BigRational::from_integer(q.clone()) / &scale;
        let hi = if r.is_zero() { lo.clone() } else { BigRational::from_integer(q + 1) / &scale };
        Interval { lo, hi }
    }

    pub fn rounded(&self) -> Self {
        self.round_outward(ROUNDING_BITS)
    }

    pub fn pi() -> Self {
        let digits: BigInt = PI_DIGITS.parse().unwrap();
        let scale = num_traits::pow(BigInt::from(10), PI_DIGITS.len() - 1);
        let mid = BigRational::new(digits, scale.clone());
        let eps = BigRational::new(BigInt::one(), scale);
        Interval { lo: &mid - &eps, hi: mid + eps }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Interval::one();
        for _ in 0..e {
            acc = (&acc * self).rounded();
        }
        acc
    }

    /// Enclosure of q^(num/den) for a positive rational q.
    pub fn rational_power(q: &BigRational, num: i64, den: u32) -> Self {
        assert!(q.is_positive(), "rational_power needs a positive base");
        assert!(den >= 1);
        let g = num.unsigned_abs().gcd(&(den as u64));
        let (num, den) = (num / g as i64, den / g as u32);
        let base = num_traits::pow(q.clone(), num.unsigned_abs() as usize);
        let rooted = root_enclosure(&base, den);
        if num >= 0 {
            rooted
        } else {
            Interval::one().div(&rooted)
        }
    }

    pub fn int_power(n: impl Into<BigInt>, num: i64, den: u32) -> Self {
        Self::rational_power(&rat(n), num, den)
    }

    /// Enclosure of sqrt(q) for rational q >= 0.
    pub fn sqrt_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            return Interval::zero();
        }
        root_enclosure(q, 2)
    }
}

/// Enclosure of q^(1/d) for q > 0.
fn root_enclosure(q: &BigRational, d: u32) -> Interval {
    if d == 1 {
        return Interval::point(q.clone());
    }
    // (a/b)^(1/d) = (a b^(d-1))^(1/d) / b
    let a = q.numer().clone();
    let b = q.denom().clone();
    let radicand = (a * num_traits::pow(b.clone(), (d - 1) as usize)) << (ROOT_BITS * d) as usize;
    let r = radicand.nth_root(d);
    let exact = num_traits::pow(r.clone(), d as usize) == radicand;
    let scale = BigRational::from_integer(pow2(ROOT_BITS) * b);
    let lo = BigRational::from_integer(r.clone()) / &scale;
    let hi = if exact { lo.clone() } else { BigRational::from_integer(r + 1) / &scale };
    Interval { lo, hi }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl<'a> Add<&'a Interval> for &'a Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl<'a> Sub<&'a Interval> for &'a Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

impl<'a> Mul<&'a Interval> for &'a Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        if !self.lo.is_negative() && !rhs.lo.is_negative() {
            return Interval { lo: &self.lo * &rhs.lo, hi: &self.hi * &rhs.hi };
        }
        let c = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        &self + &rhs
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        &self - &rhs
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        &self * &rhs
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo_f64(), self.hi_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn pi_enclosure_is_tight_and_correct() {
        let pi = Interval::pi();
        assert!(pi.lo_f64() <= std::f64::consts::PI && std::f64::consts::PI <= pi.hi_f64());
        assert!(pi.width() < q(1, 1_000_000_000_000));
    }

    #[test]
    fn square_roots_enclose() {
        let s = Interval::sqrt_rational(&q(2, 1));
        let sq = &s * &s;
        assert!(sq.contains(&q(2, 1)));
        let exact = Interval::sqrt_rational(&q(9, 4));
        assert_eq!(exact, Interval::point(q(3, 2)));
    }

    #[test]
    fn fractional_powers() {
        let t = Interval::int_power(1024, 1, 10);
        assert_eq!(t, Interval::from_int(2));
        let u = Interval::int_power(3, -3, 2);
        let v = 3f64.powf(-1.5);
        assert!(u.lo_f64() <= v && v <= u.hi_f64());
        assert!(u.width() < q(1, 1_000_000_000_000_000));
    }

    #[test]
    fn arithmetic_and_abs() {
        let a = Interval::new(q(-1, 1), q(2, 1));
        let b = Interval::new(q(3, 1), q(4, 1));
        assert_eq!(&a * &b, Interval::new(q(-4, 1), q(8, 1)));
        assert_eq!(a.abs(), Interval::new(q(0, 1), q(2, 1)));
        assert_eq!((&b - &a), Interval::new(q(1, 1), q(5, 1)));
        let d = b.div(&Interval::new(q(1, 1), q(2, 1)));
        assert_eq!(d, Interval::new(q(3, 2), q(4, 1)));
        let r = Interval::point(q(1, 3)).round_outward(10);
        assert!(r.contains(&q(1, 3)) && r.width() <= q(1, 1024));
    }
}
