use moment_core::fixtures::{random_polynomial, random_univariate};
use moment_core::growth::{roots_monotone, GrowthThresholds};
use moment_core::linalg::exact_rank;
use moment_core::mass::{atom_mass, MassOptions};
use moment_core::moments::from_atomic;
use moment_core::poly::parse_polynomial;
use moment_core::rational::{ratio, to_f64};
use moment_core::support::support_box;
use moment_core::{MomentSequence, Polynomial};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn poly(seed: u64, m: usize, deg: usize) -> Polynomial {
    random_polynomial(&mut rng(seed), m, deg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(s in any::<u64>(), m in 1usize..3) {
        let (a, b, c) = (poly(s, m, 3), poly(s ^ 1, m, 3), poly(s ^ 2, m, 2));
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(
            a.add(&b).unwrap().mul(&c).unwrap(),
            a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn pow2_is_repeated_squaring(s in any::<u64>(), d in 0u32..4) {
        let a = poly(s, 2, 2);
        let mut expect = a.clone();
        for _ in 0..d {
            expect = expect.mul(&expect).unwrap();
        }
        prop_assert_eq!(a.pow2(d, 256).unwrap(), expect);
    }

    #[test]
    fn evaluation_is_a_homomorphism(s in any::<u64>(), x in -20i64..20, y in -20i64..20) {
        let (a, b) = (poly(s, 2, 3), poly(s ^ 7, 2, 3));
        let pt = [ratio(x, 7), ratio(y, 5)];
        let ab = a.mul(&b).unwrap().eval(&pt).unwrap();
        prop_assert_eq!(ab, a.eval(&pt).unwrap() * b.eval(&pt).unwrap());
        let sum = a.add(&b).unwrap().eval(&pt).unwrap();
        prop_assert_eq!(sum, a.eval(&pt).unwrap() + b.eval(&pt).unwrap());
    }

    #[test]
    fn canonical_form_parses_back(s in any::<u64>(), m in 1usize..4) {
        let a = poly(s, m, 3);
        prop_assert_eq!(parse_polynomial(&a.to_string(), m).unwrap(), a);
    }

    #[test]
    fn functional_is_linear(s in any::<u64>(), k in -9i64..9) {
        let l = from_atomic(&random_univariate(&mut rng(s), 4), 12);
        let (a, b) = (poly(s ^ 3, 1, 6), poly(s ^ 4, 1, 6));
        let lambda = ratio(k, 4);
        let lhs = l.apply(&a.scale(&lambda).add(&b).unwrap()).unwrap();
        prop_assert_eq!(lhs, lambda * l.apply(&a).unwrap() + l.apply(&b).unwrap());
    }

    #[test]
    fn measures_satisfy_cbs_and_monotone_roots(s in any::<u64>()) {
        let l = from_atomic(&random_univariate(&mut rng(s), 5), 24);
        let (a, b) = (poly(s ^ 5, 1, 5), poly(s ^ 6, 1, 5));
        prop_assert!(l.cbs_check(&a, &b).unwrap());
        prop_assert!(roots_monotone(&l, &a).unwrap());
        prop_assert!(roots_monotone(&l, &Polynomial::var(1, 0)).unwrap());
    }

    #[test]
    fn moment_rank_counts_atoms(s in any::<u64>(), t in 0usize..7) {
        let mu = random_univariate(&mut rng(s), 5);
        let l = from_atomic(&mu, 14);
        prop_assert_eq!(exact_rank(&l.moment_matrix(t).unwrap()), mu.len().min(t + 1));
    }

    #[test]
    fn json_round_trip(s in any::<u64>()) {
        let l = from_atomic(&random_univariate(&mut rng(s), 5), 10);
        let back = MomentSequence::from_json_str(&l.to_json_string()).unwrap();
        prop_assert_eq!(back, l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_bounds_decrease_and_dominate(s in any::<u64>()) {
        let mu = random_univariate(&mut rng(s), 3);
        let l = from_atomic(&mu, 64);
        let opts = MassOptions::new(2, 16);
        for a in mu.atoms() {
            let est = atom_mass(&l, &a.point, &opts).unwrap();
            let w = to_f64(&a.weight);
            prop_assert!(est.bounds.windows(2).all(|p| p[1].1 <= p[0].1));
            prop_assert!(est.bounds.iter().all(|b| b.1 >= w - 1e-12));
        }
    }

    #[test]
    fn box_contains_atoms(s in any::<u64>()) {
        let mu = random_univariate(&mut rng(s), 5);
        let b = support_box(&from_atomic(&mu, 32), 0.05, &GrowthThresholds::default()).unwrap();
        for a in mu.atoms() {
            prop_assert!(b.contains(&[to_f64(&a.point[0])]));
        }
    }
}
