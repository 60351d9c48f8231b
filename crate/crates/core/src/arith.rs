//! Small integer helpers shared across modules: valuations, factoring,
//! Jacobi symbols and modular inverses.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// p-adic valuation of a nonzero integer. Returns `u32::MAX` for zero.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub fn valuation_u64(mut n: u64, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    primal::Primes::all().take_while(|&p| p as u64 <= bound).map(|p| p as u64).collect()
}

pub fn is_prime(n: u64) -> bool {
    primal::is_prime(n)
}

/// Distinct prime factors of |n| by trial division. Panics on zero.
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    assert!(!n.is_zero(), "prime_factors of zero");
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d: u64 = 2;
    loop {
        let dd = BigInt::from(d);
        if &dd * &dd > n {
            break;
        }
        if (&n % &dd).is_zero() {
            out.push(d);
            while (&n % &dd).is_zero() {
                n /= &dd;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push(n.to_u64().expect("prime cofactor exceeds 64 bits"));
    }
    out
}

pub fn prime_factors_u64(n: u64) -> Vec<u64> {
    prime_factors(&BigInt::from(n))
}

/// Jacobi symbol (a/m) for odd positive m.
pub fn jacobi(a: &BigInt, m: u64) -> i32 {
    assert!(m % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = a.mod_floor(&BigInt::from(m)).to_u64().unwrap();
    let mut m = m;
    let mut result = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if m % 8 == 3 || m % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

pub fn jacobi_i64(a: i64, m: u64) -> i32 {
    jacobi(&BigInt::from(a), m)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

pub fn pow_u64(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// Euler phi of p^t for prime p.
pub fn phi_prime_power(p: u64, t: u32) -> BigInt {
    if t == 0 {
        return BigInt::one();
    }
    pow_u64(p, t - 1) * BigInt::from(p - 1)
}

/// Largest integer whose square is at most `n` (n >= 0).
pub fn isqrt(n: &BigInt) -> BigInt {
    num_integer::Roots::sqrt(n)
}

pub fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = isqrt(n);
    &r * &r == *n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_euler_criterion_for_primes() {
        for &p in &[3u64, 5, 7, 11, 13, 101] {
            for a in 0..p {
                let euler = num_traits::pow(BigInt::from(a), ((p - 1) / 2) as usize) % BigInt::from(p);
                let expected = if a == 0 {
                    0
                } else if euler.is_one() {
                    1
                } else {
                    -1
                };
                assert_eq!(jacobi_i64(a as i64, p), expected, "({a}/{p})");
            }
        }
        assert_eq!(jacobi_i64(2, 15), 1);
        assert_eq!(jacobi_i64(7, 15), -1);
        assert_eq!(jacobi_i64(-1, 7), -1);
        assert_eq!(jacobi_i64(5, 15), 0);
    }

    #[test]
    fn factoring_and_valuations() {
        assert_eq!(prime_factors_u64(360), vec![2, 3, 5]);
        assert_eq!(prime_factors_u64(1), Vec::<u64>::new());
        assert_eq!(prime_factors_u64(10007), vec![10007]);
        assert_eq!(valuation(&BigInt::from(48), 2), 4);
        assert_eq!(valuation_u64(81, 3), 4);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn inverses() {
        let m = BigInt::from(27);
        let a = BigInt::from(5);
        let inv = mod_inverse(&a, &m).unwrap();
        assert_eq!((a * inv) % m, BigInt::one());
        assert!(mod_inverse(&BigInt::from(6), &BigInt::from(9)).is_none());
    }
}
