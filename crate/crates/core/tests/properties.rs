use proptest::prelude::*;
use qtl_core::cyclo::CycloField;
use qtl_core::expr;
use qtl_core::liealg::{self, DElement, DKey, WdElement};
use qtl_core::matrep;
use qtl_core::{CycloNum, ExpVec, FieldRef, TorusSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn num(f: &FieldRef, c: &[(i64, i64)]) -> CycloNum {
    let mut x = CycloNum::zero(f);
    for (j, (p, q)) in c.iter().enumerate() {
        let term = &CycloNum::root_of_unity(f, j as i64) * &CycloNum::from_ratio(f, *p, *q);
        x = &x + &term;
    }
    x
}

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-9i64..=9, 1i64..=5), 1..6)
}

fn exp(d: usize, r: i64) -> impl Strategy<Value = ExpVec> {
    prop::collection::vec(-r..=r, d).prop_map(ExpVec)
}

fn tori() -> impl Strategy<Value = TorusSpec> {
    prop_oneof![
        Just(TorusSpec::new(2, 1, vec![2], None).unwrap()),
        Just(TorusSpec::new(2, 1, vec![3], None).unwrap()),
        Just(TorusSpec::new(3, 1, vec![4], None).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(l in prop::sample::select(vec![3u32, 4, 5, 12]), a in coeffs(), b in coeffs(), c in coeffs()) {
        let f = CycloField::new(l).unwrap();
        let (a, b, c) = (num(&f, &a), num(&f, &b), num(&f, &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        if !a.is_zero() {
            prop_assert!((&a * &a.inverse().unwrap()).is_one());
        }
        prop_assert_eq!(CycloNum::parse_in(&f, &a.to_string()).unwrap(), a.clone());
        prop_assert!(CycloNum::root_of_unity(&f, l as i64).is_one());
    }

    #[test]
    fn decompose_splits_into_radical_and_class(t in tori(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = ExpVec((0..t.d()).map(|_| rand::Rng::gen_range(&mut rng, -20i64..=20)).collect());
        let (shift, class) = t.decompose(&m);
        prop_assert!(t.in_r(&shift));
        prop_assert_eq!(&shift + &class, m.clone());
        prop_assert_eq!(t.canonical_rep(&m), class.clone());
        prop_assert_eq!(t.canonical_rep(&class), class);
    }

    #[test]
    fn x_matrices_multiply_by_sigma(m in exp(2, 7), n in exp(2, 7), k in 2u32..=4) {
        let t = TorusSpec::new(2, 1, vec![k], None).unwrap();
        let lhs = matrep::x_power(&t, &m).mul(&matrep::x_power(&t, &n));
        let rhs = matrep::x_power(&t, &(&m + &n)).scale(&t.sigma_hat(&m, &n));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn d_bracket_is_antisymmetric_and_satisfies_jacobi(t in tori(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let one = CycloNum::one(t.field());
        let mut pick = || -> DElement { DElement::single(liealg::random_d_key(&t, &mut rng, 4), one.clone()) };
        let (a, b, c) = (pick(), pick(), pick());
        let ab = liealg::bracket_d(&t, &a, &b).unwrap();
        prop_assert_eq!(ab.neg(), liealg::bracket_d(&t, &b, &a).unwrap());
        let defect = liealg::jacobi_defect(&a, &b, &c, |x, y| liealg::bracket_d(&t, x, y).unwrap());
        prop_assert!(defect.is_zero(), "{:?}", defect);
    }

    #[test]
    fn witt_jacobi(d in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CycloField::new(1).unwrap();
        let one = CycloNum::one(&f);
        let mut pick = || WdElement::single(liealg::random_witt_key(d, &mut rng, 3), one.clone());
        let (a, b, c) = (pick(), pick(), pick());
        prop_assert!(liealg::jacobi_defect(&a, &b, &c, liealg::bracket_wd).is_zero());
    }

    #[test]
    fn d_elements_print_and_parse(t in tori(), seed in any::<u64>(), coeffs in prop::collection::vec((-9i64..=9, 1i64..=4), 1..5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = DElement::zero();
        for (p, q) in coeffs {
            let key: DKey = liealg::random_d_key(&t, &mut rng, 5);
            x.add_term(key, &CycloNum::from_ratio(t.field(), p, q));
        }
        let text = expr::format_element(&x);
        prop_assert_eq!(expr::parse_d(&t, &text).unwrap(), x);
    }
}
