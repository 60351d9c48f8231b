mod common;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use quadrep::forms::successive_minima;
use quadrep::ortho::ortho_lattice;
use quadrep::QuadraticForm;

/// Is c·adj(A)/D an even integral matrix?
fn scaled_inverse_even(form: &QuadraticForm, c: &BigInt) -> bool {
    let adj = form.gram().adjugate();
    let d = form.discriminant();
    let k = form.dim();
    (0..k).all(|i| {
        (0..k).all(|j| {
            let num = c * &adj[i][j];
            if !num.is_multiple_of(d) {
                return false;
            }
            i != j || (num / d).is_even()
        })
    })
}

fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        if (&n % &p).is_zero() {
            out.push(p.clone());
            while (&n % &p).is_zero() {
                n /= &p;
            }
        }
        p += 1;
    }
    if n > BigInt::from(1) {
        out.push(n);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_is_least_even_multiplier(f in common::form(3, 5, 3)) {
        let n = f.level();
        let d = f.discriminant();
        prop_assert!((d * BigInt::from(2)).is_multiple_of(n));
        prop_assert!(scaled_inverse_even(&f, n));
        for p in prime_factors(n) {
            prop_assert!(!scaled_inverse_even(&f, &(n / &p)));
        }
    }

    #[test]
    fn ortho_discriminant_is_primitive_norm(v in prop::collection::vec(-6i64..=6, 2..6), c in 1i64..5) {
        prop_assume!(v.iter().any(|&x| x != 0));
        let l = ortho_lattice(&v);
        let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
        let norm: i64 = v.iter().map(|x| (x / g) * (x / g)).sum();
        prop_assert_eq!(&l.disc, &BigInt::from(norm));
        prop_assert_eq!(l.gram.determinant(), BigInt::from(norm));
        for b in &l.basis {
            prop_assert_eq!(b.iter().zip(&v).map(|(a, b)| a * b).sum::<i64>(), 0);
        }
        let scaled: Vec<i64> = v.iter().map(|x| c * x).collect();
        let ls = ortho_lattice(&scaled);
        prop_assert_eq!(&ls.basis, &l.basis);
        prop_assert_eq!(ls.gram.rows(), l.gram.rows());
        prop_assert_eq!(&ls.disc, &l.disc);
    }

    #[test]
    fn minima_survive_change_of_basis((f, cols) in common::form_with_basis(3, 5, 2)) {
        let g = f.change_basis(&cols).unwrap();
        prop_assert_eq!(g.discriminant(), f.discriminant());
        prop_assert_eq!(successive_minima(&g).unwrap().minima, successive_minima(&f).unwrap().minima);
    }

    #[test]
    fn diagonal_minima_are_half_the_diagonal(mut diag in prop::collection::vec(1i64..20, 3..7)) {
        diag.sort();
        let a: Vec<i64> = diag.iter().map(|x| 2 * x).collect();
        let f = QuadraticForm::diagonal(&a).unwrap();
        let minima = successive_minima(&f).unwrap();
        prop_assert_eq!(minima.minima, diag.iter().map(|&x| x as u64).collect::<Vec<_>>());
        for w in &minima.witnesses {
            prop_assert!(f.value(w).is_positive());
        }
    }
}
