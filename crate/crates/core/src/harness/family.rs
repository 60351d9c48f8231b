//! Seeded generation of test families.
//!
//! The generator is SplitMix64 (Steele, Lea and Flood) seeded with the
//! family seed. Each draw `uniform(lo, hi)` is `lo + next_u64() % (hi - lo + 1)`.
//! A candidate uses, in order: k (when k_min < k_max), the k×k entries of M
//! row by row from [−H, H], then k diagonal entries of P from [0, H]. The
//! candidate Gram matrix is A = 2(MᵀM + P); it is kept when it is positive
//! definite, primitive and its discriminant is at most the bound.

use num_bigint::BigInt;
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::QuadraticForm;

pub const MAX_REJECTIONS: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    pub seed: u64,
    pub k_min: usize,
    pub k_max: usize,
    pub count: usize,
    /// Bound H on the entries of M and P.
    pub height: i64,
    pub max_discriminant: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMember {
    pub id: String,
    pub form: QuadraticForm,
}

struct Draw(SplitMix64);

impl Draw {
    fn uniform(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.0.next_u64() % span) as i64
    }
}

fn candidate(draw: &mut Draw, spec: &FamilySpec) -> Vec<Vec<i64>> {
    let k =
        if spec.k_min < spec.k_max { draw.uniform(spec.k_min as i64, spec.k_max as i64) as usize } else { spec.k_min };
    let h = spec.height;
    let m: Vec<Vec<i64>> = (0..k).map(|_| (0..k).map(|_| draw.uniform(-h, h)).collect()).collect();
    let p: Vec<i64> = (0..k).map(|_| draw.uniform(0, h)).collect();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mtm: i64 = (0..k).map(|r| m[r][i] * m[r][j]).sum();
                    2 * (mtm + if i == j { p[i] } else { 0 })
                })
                .collect()
        })
        .collect()
}

pub fn generate_family(spec: &FamilySpec) -> Result<Vec<FamilyMember>> {
    if spec.height < 1 {
        return Err(Error::InvalidArgument("height bound must be at least 1".into()));
    }
    if spec.k_min < 3 || spec.k_min > spec.k_max {
        return Err(Error::InvalidArgument(format!("bad dimension range {}..={}", spec.k_min, spec.k_max)));
    }
    let mut draw = Draw(SplitMix64::seed_from_u64(spec.seed));
    let mut out = Vec::with_capacity(spec.count);
    let mut rejections = 0u64;
    while out.len() < spec.count {
        let rows = candidate(&mut draw, spec);
        match QuadraticForm::from_i64_rows(&rows) {
            Ok(f) if f.is_primitive() && f.discriminant() <= &spec.max_discriminant => {
                out.push(FamilyMember { id: format!("s{}-{:02}", spec.seed, out.len()), form: f });
            }
            _ => {
                rejections += 1;
                if rejections >= MAX_REJECTIONS {
                    return Err(Error::GenerationExhausted(rejections));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64) -> FamilySpec {
        FamilySpec { seed, k_min: 4, k_max: 4, count: 3, height: 3, max_discriminant: BigInt::from(10).pow(9) }
    }

    #[test]
    fn deterministic_and_valid() {
        let a = generate_family(&spec(1)).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|m| m.form.is_primitive() && m.form.dim() == 4));
        assert_eq!(a, generate_family(&spec(1)).unwrap());
        assert_ne!(a, generate_family(&spec(2)).unwrap());
    }

    #[test]
    fn splitmix_reference_stream() {
        // first outputs for seed 0 of the reference implementation
        let mut g = SplitMix64::seed_from_u64(0);
        assert_eq!(g.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(g.next_u64(), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn exhaustion() {
        let s = FamilySpec { max_discriminant: BigInt::from(1), ..spec(1) };
        assert_eq!(generate_family(&s).unwrap_err(), Error::GenerationExhausted(MAX_REJECTIONS));
    }
}
