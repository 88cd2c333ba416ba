use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabilizer_core::{sample_element, scalar, AlgebraSpec, Element64};

fn spec_for(choice: u8, dim: usize) -> AlgebraSpec {
    match choice % 3 {
        0 => AlgebraSpec::scalar(),
        1 => AlgebraSpec::matrix(dim).unwrap(),
        _ => AlgebraSpec::pointwise(dim).unwrap(),
    }
}

fn pair(spec: AlgebraSpec, seed: u64) -> (Element64, Element64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        sample_element(spec, (0.01, 100.0), &mut rng).unwrap(),
        sample_element(spec, (0.01, 100.0), &mut rng).unwrap(),
    )
}

/// Largest singular value of a 2×2 complex matrix from the eigenvalues of
/// `a*a`: `σ² = (‖a‖_F² + sqrt(‖a‖_F⁴ − 4|det a|²))/2`.
fn closed_form_norm_2x2(a: &Element64) -> f64 {
    let d = a.data();
    let frob: f64 = d.iter().map(|z| z.norm_sqr()).sum();
    let det = (d[0] * d[3] - d[1] * d[2]).norm_sqr();
    ((frob + (frob * frob - 4.0 * det).max(0.0).sqrt()) / 2.0).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn submultiplicative(choice in 0u8..3, dim in 1usize..5, seed in any::<u64>()) {
        let spec = spec_for(choice, dim);
        let (a, b) = pair(spec, seed);
        let ab = a.checked_mul(&b).unwrap().norm().unwrap();
        let bound = a.norm().unwrap() * b.norm().unwrap();
        prop_assert!(ab <= bound * (1.0 + 1e-9) + 1e-9, "{ab} > {bound}");
    }

    #[test]
    fn reference_cstar_identity(choice in 0u8..3, dim in 1usize..5, seed in any::<u64>()) {
        let (a, _) = pair(spec_for(choice, dim), seed);
        let lhs = a.conj_transpose().checked_mul(&a).unwrap().norm().unwrap();
        let n = a.norm().unwrap();
        prop_assert!((lhs - n * n).abs() <= 1e-9 * n * n);
    }

    #[test]
    fn conj_transpose_laws(choice in 0u8..3, dim in 1usize..5, seed in any::<u64>()) {
        let (a, b) = pair(spec_for(choice, dim), seed);
        prop_assert_eq!(a.conj_transpose().conj_transpose(), a.clone());
        let lhs = a.checked_mul(&b).unwrap().conj_transpose();
        let rhs = b.conj_transpose().checked_mul(&a.conj_transpose()).unwrap();
        let scale = a.max_abs() * b.max_abs() * 4.0;
        prop_assert!(lhs.checked_sub(&rhs).unwrap().max_abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn norm_is_absolutely_homogeneous(
        choice in 0u8..3, dim in 1usize..5, seed in any::<u64>(), re in -10.0f64..10.0, im in -10.0f64..10.0,
    ) {
        let (a, _) = pair(spec_for(choice, dim), seed);
        let lambda = scalar::<f64>(re, im);
        let lhs = a.scale(lambda).norm().unwrap();
        let rhs = lambda.norm() * a.norm().unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn power_iteration_matches_closed_form(seed in any::<u64>()) {
        let (a, _) = pair(AlgebraSpec::matrix(2).unwrap(), seed);
        let expected = closed_form_norm_2x2(&a);
        prop_assert!((a.norm().unwrap() - expected).abs() <= 1e-9 * expected);
    }
}

#[test]
fn closed_form_catches_rank_one_kernel_start() {
    let a = Element64::from_real(AlgebraSpec::matrix(2).unwrap(), &[1.0, -1.0, 1.0, -1.0]).unwrap();
    assert!((a.norm().unwrap() - closed_form_norm_2x2(&a)).abs() < 1e-12);
    assert!((a.norm().unwrap() - 2.0).abs() < 1e-12);
}
