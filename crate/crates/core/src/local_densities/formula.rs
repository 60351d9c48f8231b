//! S(p^t) for odd p through the diagonal splitting and Gauss sums.
//!
//! With Q ≅ Σ a_i p^{α_i} x_i² over ℤ_p and m_i = t − α_i,
//!
//! ```text
//! S(p^t) = p^{-tk} Σ_{a mod p^t}^* e(-an/p^t) Π_i Σ_{x mod p^t} e(a a_i p^{α_i} x²/p^t)
//!        = p^{-tk} p^{Σ min(α_i,t)} Π_{m_i>0} ε_{p^{m_i}} (a_i/p)^{m_i} p^{m_i/2}
//!          · Σ_a^* (a/p)^{Σ m_i} e(-an/p^t).
//! ```
//!
//! The last sum is a Ramanujan sum when Σ m_i is even and a twisted sum
//! supported on v_p(n) = t − 1 otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::gauss::ramanujan_sum;
use super::jordan::jordan_exact;
use crate::arith::{jacobi, pow_u64, valuation};
use crate::error::{Error, Result};
use crate::forms::QuadraticForm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalTerm {
    /// Unit-independent bound on |S(p^t)|.
    pub magnitude: BigRational,
    /// The exact value, when the unit symbols determine it.
    pub value: Option<BigRational>,
}

/// The data of a diagonal splitting that the formula needs: exponents and
/// the Legendre symbols of the units.
#[derive(Clone, Debug)]
pub struct OddSplitting {
    p: u64,
    exponents: Vec<u32>,
    symbols: Vec<i32>,
}

fn p_power(p: u64, e: i64) -> BigRational {
    let b = BigRational::from_integer(pow_u64(p, e.unsigned_abs() as u32));
    if e >= 0 {
        b
    } else {
        b.recip()
    }
}

impl OddSplitting {
    pub fn of_form(form: &QuadraticForm, p: u64) -> Result<Self> {
        if p == 2 {
            return Err(Error::InvalidArgument("the Gauss-sum formula needs an odd prime".into()));
        }
        let blocks = jordan_exact(form.gram(), p);
        Ok(OddSplitting {
            p,
            exponents: blocks.iter().map(|b| b.exponent).collect(),
            symbols: blocks.iter().map(|b| jacobi(&b.unit_mod(p, 1), p)).collect(),
        })
    }

    /// Splitting at a prime p ∤ 2D: all exponents vanish and only the symbol
    /// of det(A/2) = D/2^k matters.
    pub fn unramified(form: &QuadraticForm, p: u64) -> Self {
        let k = form.dim();
        let two = jacobi(&BigInt::from(2), p);
        let det = jacobi(form.discriminant(), p) * if k % 2 == 1 { two } else { 1 };
        let mut symbols = vec![1; k];
        symbols[0] = det;
        OddSplitting { p, exponents: vec![0; k], symbols }
    }

    pub fn term(&self, n: &BigInt, t: u32) -> LocalTerm {
        let p = self.p;
        let k = self.exponents.len() as i64;
        if t == 0 {
            return LocalTerm { magnitude: BigRational::one(), value: Some(BigRational::one()) };
        }
        let mut power: i64 = -(t as i64) * k;
        let mut sum_m: i64 = 0;
        let mut sign = 1i32;
        let mut i_power = 0u32;
        for (&a, &s) in self.exponents.iter().zip(&self.symbols) {
            power += a.min(t) as i64;
            if a < t {
                let m = (t - a) as i64;
                sum_m += m;
                if m % 2 == 1 {
                    sign *= s;
                    if p % 4 == 3 {
                        i_power += 1;
                    }
                }
            }
        }
        let (inner, extra) = if sum_m % 2 == 0 {
            (ramanujan_sum(n, p, t), sum_m / 2)
        } else {
            let beta = valuation(n, p);
            if beta != t - 1 {
                let zero = BigRational::zero();
                return LocalTerm { magnitude: zero.clone(), value: Some(zero) };
            }
            let reduced = n / pow_u64(p, t - 1);
            sign *= jacobi(&-reduced, p);
            if p % 4 == 3 {
                i_power += 1;
            }
            (pow_u64(p, t - 1), (sum_m + 1) / 2)
        };
        assert!(i_power.is_multiple_of(2), "S(p^t) must be real");
        if i_power % 4 == 2 {
            sign = -sign;
        }
        let scale = p_power(p, power + extra);
        let magnitude = &scale * BigRational::from_integer(inner.abs());
        let value = &scale * BigRational::from_integer(inner * sign);
        LocalTerm { magnitude, value: Some(value) }
    }

    /// σ_p = Σ_{t ≤ v_p(n)+1} S(p^t); the remaining terms vanish.
    pub fn sigma(&self, n: &BigInt) -> BigRational {
        assert!(!n.is_zero(), "σ_p needs n ≥ 1");
        let beta = valuation(n, self.p);
        (0..=beta + 1).map(|t| self.term(n, t).value.unwrap()).sum()
    }
}

/// S(p^t) for odd p.
pub fn s_pt_formula(form: &QuadraticForm, n: &BigInt, p: u64, t: u32) -> Result<LocalTerm> {
    Ok(OddSplitting::of_form(form, p)?.term(n, t))
}

/// σ_p for odd p from the closed-form local terms.
pub fn sigma_p_formula(form: &QuadraticForm, n: &BigInt, p: u64) -> Result<BigRational> {
    Ok(OddSplitting::of_form(form, p)?.sigma(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_densities::counting::LocalCounter;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn examples() {
        let f = QuadraticForm::scaled_identity(4, 2).unwrap();
        let s = s_pt_formula(&f, &1.into(), 3, 1).unwrap();
        assert_eq!(s.value, Some(q(-1, 9)));
        assert_eq!(s_pt_formula(&f, &1.into(), 3, 0).unwrap().value, Some(q(1, 1)));
        // β = 0 < t − 1 with Σm even
        assert_eq!(s_pt_formula(&f, &1.into(), 3, 3).unwrap().value, Some(q(0, 1)));
        assert_eq!(sigma_p_formula(&f, &1.into(), 3).unwrap(), q(8, 9));
    }

    #[test]
    fn formula_matches_direct_counts() {
        let forms = [
            QuadraticForm::scaled_identity(4, 2).unwrap(),
            QuadraticForm::scaled_identity(5, 2).unwrap(),
            QuadraticForm::from_i64_rows(&[vec![4, 2, 1], vec![2, 6, 3], vec![1, 3, 10]]).unwrap(),
            QuadraticForm::from_i64_rows(&[vec![6, 3, 0, 3], vec![3, 12, 6, 0], vec![0, 6, 18, 9], vec![3, 0, 9, 24]])
                .unwrap(),
        ];
        for f in &forms {
            for p in [3u64, 5, 7] {
                let counter = LocalCounter::new(f, p);
                let split = OddSplitting::of_form(f, p).unwrap();
                for n in 1..=30 {
                    let n = BigInt::from(n);
                    assert_eq!(split.sigma(&n), counter.sigma(&n).unwrap(), "p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn unramified_splitting_agrees() {
        let f = QuadraticForm::from_i64_rows(&[vec![4, 2, 1], vec![2, 6, 3], vec![1, 3, 10]]).unwrap();
        for p in [5u64, 7, 11, 13] {
            if (f.discriminant() % p).is_zero() {
                continue;
            }
            let a = OddSplitting::unramified(&f, p);
            let b = OddSplitting::of_form(&f, p).unwrap();
            for n in 1..20 {
                assert_eq!(a.sigma(&n.into()), b.sigma(&n.into()));
            }
        }
    }
}
