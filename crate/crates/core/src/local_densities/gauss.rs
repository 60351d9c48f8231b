//! Quadratic Gauss sums G(h, m) = Σ_{x mod m} e(hx²/m) and Ramanujan sums.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::arith::{jacobi_i64, phi_prime_power, pow_u64, valuation_u64};
use crate::error::{Error, Result};

/// (re + i·im)·√m when `exact`; otherwise only `approx` is meaningful.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussSumValue {
    pub re: i64,
    pub im: i64,
    pub m: u64,
    pub exact: bool,
    pub approx: (f64, f64),
}

impl GaussSumValue {
    fn exact(re: i64, im: i64, m: u64) -> Self {
        let s = (m as f64).sqrt();
        GaussSumValue { re, im, m, exact: true, approx: (re as f64 * s, im as f64 * s) }
    }

    /// |value|² as an exact integer, when the value is exact.
    pub fn norm_squared(&self) -> Option<u128> {
        self.exact.then(|| ((self.re * self.re + self.im * self.im) as u128) * self.m as u128)
    }
}

/// Gaussian integer product.
fn gmul(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// ε_m for odd m: 1 if m ≡ 1 (mod 4), i otherwise.
pub fn epsilon(m: u64) -> (i64, i64) {
    if m % 4 == 1 {
        (1, 0)
    } else {
        (0, 1)
    }
}

/// Coefficient c with G(h, m) = c·√m for odd m, gcd(h, m) = 1.
fn odd_coef(h: i64, m: u64) -> (i64, i64) {
    if m == 1 {
        return (1, 0);
    }
    let (a, b) = epsilon(m);
    let j = jacobi_i64(h, m) as i64;
    (a * j, b * j)
}

/// Coefficient c with G(h, 2^a) = c·√(2^a) for odd h.
fn dyadic_coef(h: i64, a: u32) -> (i64, i64) {
    match a {
        0 => (1, 0),
        1 => (0, 0),
        _ => {
            let ih = match h.rem_euclid(4) {
                1 => (0, 1),
                _ => (0, -1),
            };
            // (2/h) = 1 iff h ≡ ±1 (mod 8)
            let two_over_h = if matches!(h.rem_euclid(8), 1 | 7) { 1 } else { -1 };
            let s = if a % 2 == 1 { two_over_h } else { 1 };
            ((1 + ih.0) * s, ih.1 * s)
        }
    }
}

/// Closed-form Gauss sum. Odd m needs gcd(h, m) = 1; even m with a common
/// factor falls back to literal summation and is flagged inexact.
pub fn gauss_sum(h: i64, m: u64) -> Result<GaussSumValue> {
    assert!(m >= 1);
    let g = (h.unsigned_abs()).gcd(&m);
    if m == 1 {
        return Ok(GaussSumValue::exact(1, 0, 1));
    }
    if g != 1 {
        if m % 2 == 1 {
            return Err(Error::NotCoprime { h, m });
        }
        let (re, im) = gauss_sum_direct(h, m);
        return Ok(GaussSumValue { re: 0, im: 0, m, exact: false, approx: (re.hi(), im.hi()) });
    }
    let a = valuation_u64(m, 2);
    let s = 1u64 << a;
    let r = m / s;
    // G(h, rs) = G(hs, r)·G(hr, s) for coprime r, s.
    let hs = (h as i128 * s as i128).rem_euclid(r as i128) as i64;
    let hr = (h as i128 * r as i128).rem_euclid(4 * s as i128) as i64;
    let c = gmul(odd_coef(hs, r), dyadic_coef(hr, a));
    Ok(GaussSumValue::exact(c.0, c.1, m))
}

/// Literal Σ_{x mod m} e(hx²/m) in double-double precision, summed by residue class.
pub fn gauss_sum_direct(h: i64, m: u64) -> (TwoFloat, TwoFloat) {
    let mut buckets = vec![0u64; m as usize];
    let hm = h.rem_euclid(m as i64) as u128;
    for x in 0..m as u128 {
        buckets[((hm * x % m as u128) * x % m as u128) as usize] += 1;
    }
    let mut re = TwoFloat::from(0.0);
    let mut im = TwoFloat::from(0.0);
    let two_pi = twofloat::consts::PI * 2.0;
    for (r, &c) in buckets.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let angle = two_pi * (TwoFloat::from(r as f64) / TwoFloat::from(m as f64));
        let (s, co) = angle.sin_cos();
        re += co * c as f64;
        im += s * c as f64;
    }
    (re, im)
}

/// c_{p^t}(n) = Σ_{a mod p^t, p ∤ a} e(−an/p^t).
pub fn ramanujan_sum(n: &BigInt, p: u64, t: u32) -> BigInt {
    if t == 0 {
        return BigInt::from(1);
    }
    let beta = crate::arith::valuation(n, p);
    if beta >= t {
        phi_prime_power(p, t)
    } else if beta == t - 1 {
        -pow_u64(p, t - 1)
    } else {
        BigInt::from(0)
    }
}

/// Literal summation of the Ramanujan sum over units, rounded to an integer.
pub fn ramanujan_sum_direct(n: i64, q: u64) -> i64 {
    let mut acc = 0.0f64;
    let nm = n.rem_euclid(q as i64) as u64;
    for a in 1..q {
        if a.gcd(&q) == 1 {
            let r = (a as u128 * nm as u128 % q as u128) as f64;
            acc += (std::f64::consts::TAU * r / q as f64).cos();
        }
    }
    acc.round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(gauss_sum(1, 3).unwrap(), GaussSumValue::exact(0, 1, 3));
        assert_eq!(gauss_sum(2, 3).unwrap(), GaussSumValue::exact(0, -1, 3));
        assert_eq!(gauss_sum(5, 1).unwrap(), GaussSumValue::exact(1, 0, 1));
        // (1+i)·√4 = 2+2i
        assert_eq!(gauss_sum(1, 4).unwrap(), GaussSumValue::exact(1, 1, 4));
        assert_eq!(gauss_sum(3, 9), Err(Error::NotCoprime { h: 3, m: 9 }));
        let (re, im) = gauss_sum_direct(1, 2);
        assert!(re.hi().abs() < 1e-15 && im.hi().abs() < 1e-15);
        let (re, _) = gauss_sum_direct(1, 1);
        assert_eq!(re.hi(), 1.0);
    }

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan_sum(&3.into(), 3, 2), BigInt::from(-3));
        assert_eq!(ramanujan_sum(&9.into(), 3, 2), BigInt::from(6));
        assert_eq!(ramanujan_sum(&1.into(), 3, 2), BigInt::from(0));
        assert_eq!(ramanujan_sum_direct(3, 9), -3);
    }

    #[test]
    fn closed_form_matches_direct_for_small_moduli() {
        for m in 1..=64u64 {
            for h in -5..=12i64 {
                if let Ok(g) = gauss_sum(h, m) {
                    let (re, im) = gauss_sum_direct(h, m);
                    assert!((g.approx.0 - re.hi()).abs() < 1e-9, "G({h},{m})");
                    assert!((g.approx.1 - im.hi()).abs() < 1e-9, "G({h},{m})");
                }
            }
        }
    }
}
