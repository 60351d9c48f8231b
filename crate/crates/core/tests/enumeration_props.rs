mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use quadrep::enumeration::{count_representations, cumulative_counts, list_representations, representation_table};
use quadrep::QuadraticForm;

/// Box bound that contains every x with Q(x) ≤ n: x_i² ≤ 2n·(A⁻¹)_ii.
fn box_bound(f: &QuadraticForm, n: u64) -> i64 {
    let adj = f.gram().adjugate();
    let d = f.discriminant();
    (0..f.dim())
        .map(|i| {
            let q = (BigInt::from(2 * n) * &adj[i][i] / d).to_f64().unwrap();
            q.sqrt().floor() as i64 + 1
        })
        .max()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn counts_match_box_enumeration(f in common::form(3, 4, 2), n in 0u64..30) {
        let bound = box_bound(&f, n);
        prop_assume!((2 * bound + 1).pow(f.dim() as u32) <= 200_000);
        let naive = common::box_points(f.dim(), bound).iter().filter(|x| f.value(x) == BigInt::from(n)).count() as u64;
        prop_assert_eq!(count_representations(&f, n).unwrap(), naive);
    }

    #[test]
    fn counts_survive_change_of_basis((f, cols) in common::form_with_basis(3, 5, 2), n in 0u64..40) {
        let g = f.change_basis(&cols).unwrap();
        prop_assert_eq!(count_representations(&g, n).unwrap(), count_representations(&f, n).unwrap());
    }

    #[test]
    fn cumulative_counts_bucket_the_ball(f in common::form(3, 4, 2), x in 0u64..25) {
        let bound = box_bound(&f, x);
        prop_assume!((2 * bound + 1).pow(f.dim() as u32) <= 200_000);
        let values: Vec<u64> = common::box_points(f.dim(), bound)
            .iter()
            .map(|p| f.value(p).to_u64().unwrap())
            .filter(|&v| v <= x)
            .collect();
        let (first, second) = cumulative_counts(&f, x).unwrap();
        prop_assert_eq!(first, BigInt::from(values.len()));
        let mut r = vec![0u64; x as usize + 1];
        for v in values {
            r[v as usize] += 1;
        }
        prop_assert_eq!(&representation_table(&f, x, u64::MAX).unwrap(), &r);
        prop_assert_eq!(second, r.iter().map(|&c| BigInt::from(c) * c).sum::<BigInt>());
    }

    #[test]
    fn sums_of_squares_are_permutation_closed(k in 3usize..6, n in 1u64..30) {
        let f = QuadraticForm::scaled_identity(k, 2).unwrap();
        let sols = list_representations(&f, n).unwrap();
        prop_assert_eq!(sols.len() as u64, count_representations(&f, n).unwrap());
        let set: BTreeSet<Vec<i64>> = sols.iter().cloned().collect();
        prop_assert_eq!(set.len(), sols.len());
        for s in &sols {
            let mut rotated = s.clone();
            rotated.rotate_left(1);
            prop_assert!(set.contains(&rotated));
            let mut swapped = s.clone();
            swapped.swap(0, 1);
            prop_assert!(set.contains(&swapped));
            let negated: Vec<i64> = s.iter().map(|x| -x).collect();
            prop_assert!(set.contains(&negated));
        }
    }
}
