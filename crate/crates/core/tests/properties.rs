use iqlam_core::lambda::{self, Method};
use iqlam_core::numth::{self, kronecker};
use iqlam_core::quadforms::{self, FundamentalDiscriminant, QuadraticForm};
use iqlam_core::{lvalues, Budget, Error};
use proptest::prelude::*;

fn fundamental() -> impl Strategy<Value = FundamentalDiscriminant> {
    (3i64..20_000)
        .prop_filter_map("not fundamental", |n| FundamentalDiscriminant::new(-n).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_a_group_law(d in fundamental(), i in 0usize..64, j in 0usize..64, k in 0usize..64) {
        let g = quadforms::class_group(d).unwrap();
        let pick = |i: usize| g.forms[i % g.forms.len()];
        let (f1, f2, f3) = (pick(i), pick(j), pick(k));
        let ab = quadforms::compose(&f1, &f2).unwrap();
        prop_assert!(ab.is_reduced() && g.contains(&ab));
        prop_assert_eq!(ab, quadforms::compose(&f2, &f1).unwrap());
        let left = quadforms::compose(&ab, &f3).unwrap();
        let right = quadforms::compose(&f1, &quadforms::compose(&f2, &f3).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let id = QuadraticForm::principal(d);
        prop_assert_eq!(quadforms::compose(&f1, &f1.inverse()).unwrap(), id);
        let exponent = *g.invariant_factors.last().unwrap_or(&1);
        prop_assert_eq!(quadforms::power(&f1, exponent, d), id);
    }

    #[test]
    fn class_order_divides_exponent(d in fundamental(), pi in 0usize..12) {
        let p = numth::primes_up_to(40)[pi];
        prop_assume!(kronecker(d.value(), p as i64) == 1);
        let g = quadforms::class_group(d).unwrap();
        let s = quadforms::ideal_class_order(d, p).unwrap();
        prop_assert_eq!(g.invariant_factors.last().copied().unwrap_or(1) % s, 0);
        let f = quadforms::prime_form(d, p).unwrap();
        prop_assert_eq!(quadforms::power(&f, s, d), QuadraticForm::principal(d));
    }

    #[test]
    fn factorization_round_trips(n in 1i64..i64::MAX / 4, neg in any::<bool>()) {
        let n = if neg { -n } else { n };
        let f = numth::factorize(n).unwrap();
        prop_assert_eq!(f.value(), n as i128);
        prop_assert!(f.primes().all(numth::is_prime));
        let (d0, m) = numth::squarefree_decompose(n).unwrap();
        prop_assert_eq!(d0 as i128 * (m as i128).pow(2), n as i128);
        prop_assert!(numth::is_squarefree(d0.unsigned_abs()));
    }

    #[test]
    fn kronecker_is_multiplicative(a in -500i64..500, b in -500i64..500, n in 1i64..500) {
        prop_assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
        prop_assert_eq!(kronecker(a, n * 3), kronecker(a, n) * kronecker(a, 3));
    }

    #[test]
    fn radicand_maps_to_its_field(t in -5000i64..0) {
        match quadforms::fundamental_from_radicand(t) {
            Ok((d, m)) => {
                let (d0, _) = numth::squarefree_decompose(t).unwrap();
                prop_assert_eq!(d.radicand(), d0);
                prop_assert!(m >= 1);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn l_values_vanish_exactly_at_even_indices(d in fundamental(), n in 1u64..8) {
        // chi_D is odd
        let v = lvalues::l_value_neg(2 * n, d).unwrap();
        prop_assert!(num_traits::Zero::is_zero(&v));
        let v = lvalues::l_value_neg(2 * n - 1, d).unwrap();
        prop_assert!(!num_traits::Zero::is_zero(&v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_criteria_agree(d in fundamental(), pi in 1usize..6) {
        let p = numth::primes_up_to(20)[pi];
        prop_assume!(kronecker(d.value(), p as i64) == 1);
        let budget = Budget::default().with_generator_max_bits(2048);
        let lv = match lambda::lvalue_test_with(d, p, &budget) {
            Ok(v) => v,
            Err(Error::BudgetExceeded(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let ctx = lambda::split_context_with(d, p, &budget).unwrap();
        let h = quadforms::class_number(d, &budget).unwrap();
        match lambda::sands_test(&ctx, h) {
            Ok(s) => {
                prop_assert_eq!(s.value, lv.value);
                prop_assert_eq!(s.method, Method::Sands);
            }
            Err(Error::Inapplicable(_)) => prop_assert_eq!(ctx.s % p, 0),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        let combined = lambda::classify_lambda_with(d, p, &budget).unwrap();
        prop_assert_eq!(combined.value, lv.value);
    }
}
