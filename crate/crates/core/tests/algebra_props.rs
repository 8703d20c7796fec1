use proptest::prelude::*;
use whitney_core::algebra::{
    binomial, contract, flat, hodge, hodge_right, inner, sharp, wedge, KTensor, MetricSignature, Variance, VolumeElement,
};

fn metric(dim: usize) -> impl Strategy<Value = MetricSignature> {
    prop::collection::vec(prop::bool::ANY, dim)
        .prop_map(|negs| MetricSignature::new(&negs.iter().map(|&n| if n { -1 } else { 1 }).collect::<Vec<_>>()).unwrap())
}

fn tensor(dim: usize, grade: usize, variance: Variance) -> impl Strategy<Value = KTensor> {
    prop::collection::vec(-2.0f64..2.0, binomial(dim, grade))
        .prop_map(move |c| KTensor::from_coeffs(dim, grade, variance, c).unwrap())
}

/// `(metric, a, b)` with grades summing to at most the dimension.
fn pair() -> impl Strategy<Value = (MetricSignature, KTensor, KTensor)> {
    (1usize..=5)
        .prop_flat_map(|n| (Just(n), 0..=n))
        .prop_flat_map(|(n, j)| (Just(n), Just(j), 0..=n - j))
        .prop_flat_map(|(n, j, k)| (metric(n), tensor(n, j, Variance::Covector), tensor(n, k, Variance::Covector)))
}

fn same_grade() -> impl Strategy<Value = (MetricSignature, KTensor, KTensor)> {
    (1usize..=5)
        .prop_flat_map(|n| (Just(n), 0..=n))
        .prop_flat_map(|(n, k)| (metric(n), tensor(n, k, Variance::Covector), tensor(n, k, Variance::Covector)))
}

proptest! {
    #[test]
    fn wedge_is_graded_commutative((_g, a, b) in pair()) {
        let sign = if (a.grade() * b.grade()) % 2 == 0 { 1.0 } else { -1.0 };
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(sign);
        prop_assert!(ab.max_abs_diff(&ba).unwrap() < 1e-12);
    }

    #[test]
    fn wedge_is_associative(n in 3usize..=5, seed in prop::collection::vec(-1.0f64..1.0, 15)) {
        let a = KTensor::covector(&seed[0..n]).unwrap();
        let b = KTensor::covector(&seed[5..5 + n]).unwrap();
        let c = KTensor::covector(&seed[10..10 + n]).unwrap();
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        prop_assert!(wedge(&a, &a).unwrap().norm_inf() == 0.0);
    }

    #[test]
    fn flat_and_sharp_are_inverse((g, a, _b) in same_grade()) {
        let v = sharp(&a, &g).unwrap();
        prop_assert_eq!(v.variance(), Variance::Vector);
        prop_assert!(flat(&v, &g).unwrap().max_abs_diff(&a).unwrap() == 0.0);
    }

    #[test]
    fn hodge_defining_identity((g, u, w) in same_grade()) {
        let vol = VolumeElement::new(&g).unwrap();
        let lhs = wedge(&u, &hodge(&w, &g).unwrap()).unwrap();
        let rhs = vol.form.clone().scale(inner(&u, &w, &g).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        let right = wedge(&hodge_right(&w, &g).unwrap(), &u).unwrap();
        prop_assert!(right.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn double_hodge_is_a_sign((g, _u, w) in same_grade()) {
        let twice = hodge(&hodge(&w, &g).unwrap(), &g).unwrap();
        let expected = w.clone().scale(g.double_hodge_sign(w.grade()));
        prop_assert!(twice.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn inner_product_is_symmetric((g, u, w) in same_grade()) {
        let uw = inner(&u, &w, &g).unwrap();
        let wu = inner(&w, &u, &g).unwrap();
        prop_assert!((uw - wu).abs() < 1e-12);
    }

    #[test]
    fn contraction_is_an_antiderivation((g, a, b) in pair(), v in prop::collection::vec(-1.0f64..1.0, 5)) {
        prop_assume!(a.grade() >= 1 && b.grade() >= 1);
        let n = g.dim();
        let x = KTensor::vector(&v[..n]).unwrap();
        let lhs = contract(&x, &wedge(&a, &b).unwrap()).unwrap();
        let sign = if a.grade() % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = wedge(&contract(&x, &a).unwrap(), &b)
            .unwrap()
            .add(&wedge(&a, &contract(&x, &b).unwrap()).unwrap().scale(sign))
            .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }
}

#[test]
fn mismatched_operands_are_rejected() {
    let g = MetricSignature::euclidean(3).unwrap();
    let v = KTensor::vector(&[1.0, 0.0, 0.0]).unwrap();
    let w = KTensor::covector(&[1.0, 0.0, 0.0]).unwrap();
    assert!(wedge(&v, &w).is_err());
    assert!(inner(&v, &w, &g).is_err());
    assert!(contract(&v, &v).is_err());
    let top = KTensor::from_coeffs(3, 3, Variance::Covector, vec![1.0]).unwrap();
    assert!(wedge(&top, &w).is_err());
    assert!(hodge(&KTensor::covector(&[1.0, 2.0]).unwrap(), &g).is_err());
}
