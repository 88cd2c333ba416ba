use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabilizer_core::maps::Twist;
use stabilizer_core::{
    jensen_defect, sample_element, sample_unit, AlgebraSpec, ApproxMap64, CandidateMap, Element64,
    InvolutionKind, Perturbation, PerturbationKind, PerturbationSpec, Scalar,
};

fn twist() -> InvolutionKind<f64> {
    let s = Element64::from_parts(
        AlgebraSpec::matrix(2).unwrap(),
        &[2.0, 0.5, 0.5, 1.0],
        &[0.0, 0.3, -0.3, 0.0],
    )
    .unwrap();
    InvolutionKind::TwistedAdjoint(Twist::new(s).unwrap())
}

/// Every involution with an algebra it is defined on.
fn kinds() -> Vec<(AlgebraSpec, InvolutionKind<f64>)> {
    vec![
        (AlgebraSpec::matrix(3).unwrap(), InvolutionKind::Adjoint),
        (AlgebraSpec::scalar(), InvolutionKind::Adjoint),
        (AlgebraSpec::pointwise(3).unwrap(), InvolutionKind::Adjoint),
        (AlgebraSpec::matrix(2).unwrap(), twist()),
        (AlgebraSpec::scalar(), InvolutionKind::Conjugation),
        (
            AlgebraSpec::pointwise(4).unwrap(),
            InvolutionKind::Conjugation,
        ),
    ]
}

struct Sample {
    x: Element64,
    y: Element64,
    lambda: Scalar<f64>,
    mu: Scalar<f64>,
}

fn draw(spec: AlgebraSpec, seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = sample_element(spec, (0.1, 10.0), &mut rng).unwrap();
    let y = sample_element(spec, (0.1, 10.0), &mut rng).unwrap();
    let l = sample_element(AlgebraSpec::scalar(), (0.1, 10.0), &mut rng).unwrap();
    let m = sample_element(AlgebraSpec::scalar(), (0.1, 10.0), &mut rng).unwrap();
    Sample {
        x,
        y,
        lambda: l.data()[0],
        mu: m.data()[0],
    }
}

fn unit_lambda(seed: u64) -> Scalar<f64> {
    let angle = (seed % 10_000) as f64 / 10_000.0 * std::f64::consts::TAU;
    Scalar::from_polar(1.0, angle)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn involution_axioms(k in 0usize..6, seed in any::<u64>()) {
        let (spec, kind) = kinds().swap_remove(k);
        let s = draw(spec, seed);
        let f = |x: &Element64| kind.apply(x).unwrap();
        let scale = s.x.norm().unwrap().max(s.y.norm().unwrap()).max(1.0);

        let twice = f(&f(&s.x));
        prop_assert!(twice.checked_sub(&s.x).unwrap().norm().unwrap() <= 1e-12 * scale);

        let combo = s.x.scale(s.lambda).checked_add(&s.y.scale(s.mu)).unwrap();
        let lhs = f(&combo);
        let rhs = f(&s.x).scale(s.lambda.conj()).checked_add(&f(&s.y).scale(s.mu.conj())).unwrap();
        let weight = scale * (s.lambda.norm() + s.mu.norm());
        prop_assert!(lhs.checked_sub(&rhs).unwrap().norm().unwrap() <= 1e-10 * weight.max(1.0));

        let lhs = f(&s.x.checked_mul(&s.y).unwrap());
        let rhs = f(&s.y).checked_mul(&f(&s.x)).unwrap();
        prop_assert!(lhs.checked_sub(&rhs).unwrap().norm().unwrap() <= 1e-10 * (scale * scale).max(1.0));
    }

    #[test]
    fn exact_involutions_have_no_jensen_defect(k in 0usize..6, seed in any::<u64>()) {
        let (spec, kind) = kinds().swap_remove(k);
        let f = ApproxMap64::exact(spec, kind).unwrap();
        let s = draw(spec, seed);
        let d = jensen_defect(&f, unit_lambda(seed), &s.x, &s.y).unwrap().norm().unwrap();
        let scale = s.x.norm().unwrap().max(s.y.norm().unwrap()).max(1.0);
        prop_assert!(d <= 1e-12 * scale * 4.0, "{d}");
    }

    #[test]
    fn perturbation_stays_in_envelope(
        random in any::<bool>(), seed in any::<u64>(), theta in 0.0f64..1.0, r in 0.05f64..3.0,
    ) {
        let spec = AlgebraSpec::matrix(2).unwrap();
        let kind = if random { PerturbationKind::RandomDirectionRadial } else { PerturbationKind::FixedDirectionRadial };
        let p = Perturbation::from_spec(&PerturbationSpec { kind, theta_delta: theta, r, direction_seed: seed }, spec)
            .unwrap();
        let s = draw(spec, seed ^ 0x5eed);
        let envelope = theta * s.x.norm().unwrap().powf(r);
        prop_assert!(p.eval(&s.x).unwrap().norm().unwrap() <= envelope * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn jensen_budget(seed in any::<u64>(), theta in 0.01f64..1.0, r in 0.05f64..=1.0, random in any::<bool>()) {
        let spec = AlgebraSpec::matrix(2).unwrap();
        let kind = if random { PerturbationKind::RandomDirectionRadial } else { PerturbationKind::FixedDirectionRadial };
        let pspec = PerturbationSpec { kind, theta_delta: theta / 3.0, r, direction_seed: seed };
        let f = ApproxMap64::new(spec, InvolutionKind::Adjoint, Perturbation::from_spec(&pspec, spec).unwrap())
            .unwrap();
        let s = draw(spec, seed.rotate_left(7));
        let d = jensen_defect(&f, unit_lambda(seed), &s.x, &s.y).unwrap().norm().unwrap();
        let budget = theta * (s.x.norm().unwrap().powf(r) + s.y.norm().unwrap().powf(r));
        prop_assert!(d <= budget * (1.0 + 1e-9), "{d} > {budget}");
    }
}

#[test]
fn random_direction_is_a_function_of_the_quantized_point() {
    let spec = AlgebraSpec::matrix(2).unwrap();
    let pspec = PerturbationSpec {
        kind: PerturbationKind::RandomDirectionRadial,
        theta_delta: 0.1,
        r: 0.5,
        direction_seed: 11,
    };
    let p = Perturbation::<f64>::from_spec(&pspec, spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = sample_unit::<f64, _>(spec, &mut rng).unwrap();
    assert_eq!(p.eval(&x).unwrap(), p.eval(&x.clone()).unwrap());
    let nudged = x
        .checked_add(&Element64::from_real(spec, &[1e-12, 0.0, 0.0, 0.0]).unwrap())
        .unwrap();
    let (a, b) = (p.eval(&x).unwrap(), p.eval(&nudged).unwrap());
    // same direction, radial factor differs only at the 1e-12 level
    assert!(a.checked_sub(&b).unwrap().norm().unwrap() < 1e-11);
    let f = ApproxMap64::new(spec, InvolutionKind::Adjoint, p).unwrap();
    assert_eq!(
        f.eval(&Element64::zero(spec)).unwrap(),
        Element64::zero(spec)
    );
    let other = Perturbation::<f64>::from_spec(
        &PerturbationSpec {
            direction_seed: 12,
            ..pspec
        },
        spec,
    )
    .unwrap();
    assert_ne!(other.eval(&x).unwrap(), f.perturbation().eval(&x).unwrap());
}
