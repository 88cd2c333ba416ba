use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabilizer_core::maps::{antimul_defect, Twist};
use stabilizer_core::verifier::{Law, ScanOptions};
use stabilizer_core::{
    jensen_defect, sample_element, scan_hypotheses, select_direction, verify_cstar,
    verify_involution_laws, AlgebraSpec, ApproxMap64, CandidateMap, ControlFunction64, Element64,
    ExtReal, Hypothesis, InvolutionKind, LambdaSampler, Perturbation, StabilizerOptions,
};

fn probes(spec: AlgebraSpec, n: usize, seed: u64) -> Vec<Element64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| sample_element(spec, (0.1, 10.0), &mut rng).unwrap())
        .collect()
}

fn lambdas() -> LambdaSampler {
    LambdaSampler {
        n0: 3,
        arc: 4,
        circle: 4,
        reals: 3,
        complex: 3,
        seed: 17,
    }
}

fn perturbed() -> (ApproxMap64, ControlFunction64) {
    let spec = AlgebraSpec::matrix(2).unwrap();
    let u = Element64::from_parts(spec, &[0.3, -0.1, 0.7, 0.2], &[0.1, 0.5, 0.0, -0.4]).unwrap();
    let f = ApproxMap64::new(
        spec,
        InvolutionKind::Adjoint,
        Perturbation::fixed(0.1, 0.5, u).unwrap(),
    )
    .unwrap();
    (f, ControlFunction64::PowerSum { theta: 0.3, r: 0.5 })
}

#[test]
fn witnesses_reproduce_the_supremum_bit_for_bit() {
    let (f, phi) = perturbed();
    let dir = select_direction(&phi).unwrap();
    let ps = probes(f.spec(), 25, 3);
    let rep = scan_hypotheses(&f, &phi, &dir, &lambdas(), &ps, &ScanOptions::default()).unwrap();

    let jensen = rep.entry(Hypothesis::Jensen);
    let w = jensen.witness.as_ref().unwrap();
    let y = w.y.as_ref().unwrap();
    let d = jensen_defect(&f, w.lambda.unwrap(), &w.x, y)
        .unwrap()
        .norm()
        .unwrap();
    assert_eq!(ExtReal::ratio(d, phi.eval(&w.x, y).unwrap()), jensen.sup);
    assert_eq!(&ps[w.x_index], &w.x);

    let antimul = rep.entry(Hypothesis::Antimultiplicative);
    let w = antimul.witness.as_ref().unwrap();
    let y = w.y.as_ref().unwrap();
    let d = antimul_defect(&f, &w.x, y).unwrap().norm().unwrap();
    assert_eq!(ExtReal::ratio(d, phi.eval(&w.x, y).unwrap()), antimul.sup);
}

#[test]
fn enlarging_the_probe_set_never_lowers_a_supremum() {
    let (f, phi) = perturbed();
    let dir = select_direction(&phi).unwrap();
    let all = probes(f.spec(), 30, 9);
    let opts = ScanOptions::default();
    let small = scan_hypotheses(&f, &phi, &dir, &lambdas(), &all[..10], &opts).unwrap();
    let big = scan_hypotheses(&f, &phi, &dir, &lambdas(), &all, &opts).unwrap();
    for (a, b) in small.entries.iter().zip(&big.entries) {
        assert!(b.sup >= a.sup, "{:?}", a.name);
        assert!(b.samples_used > a.samples_used);
    }
}

#[test]
fn scans_are_reproducible_across_thread_counts() {
    let (f, phi) = perturbed();
    let dir = select_direction(&phi).unwrap();
    let ps = probes(f.spec(), 20, 4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                scan_hypotheses(&f, &phi, &dir, &lambdas(), &ps, &ScanOptions::default()).unwrap()
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn exact_involutions_pass_at_tight_tolerance() {
    let spec = AlgebraSpec::matrix(2).unwrap();
    let phi = ControlFunction64::PowerSum { theta: 0.3, r: 0.5 };
    let dir = select_direction(&phi).unwrap();
    let mut ps = probes(spec, 20, 5);
    ps.push(Element64::from_real(spec, &[0.0, 1.0, 0.0, 0.0]).unwrap());
    let opts = StabilizerOptions::default();
    let s = Element64::from_real(spec, &[1.0, 0.0, 0.0, 2.0]).unwrap();
    for kind in [
        InvolutionKind::Adjoint,
        InvolutionKind::TwistedAdjoint(Twist::new(s).unwrap()),
    ] {
        let twisted = matches!(kind, InvolutionKind::TwistedAdjoint(_));
        let f = ApproxMap64::exact(spec, kind).unwrap();
        let rep =
            scan_hypotheses(&f, &phi, &dir, &lambdas(), &ps, &ScanOptions::default()).unwrap();
        for h in [Hypothesis::Jensen, Hypothesis::Antimultiplicative] {
            assert!(rep.entry(h).sup <= ExtReal::Finite(1e-12), "{h:?}");
        }
        assert!(rep.entry(Hypothesis::Involutive).sup <= ExtReal::Finite(1e-12));
        let cstar = rep.entry(Hypothesis::CStar).sup;
        assert_eq!(cstar > ExtReal::Finite(1e-12), twisted);

        let laws = verify_involution_laws(&f, &dir, &lambdas(), &ps, &Default::default()).unwrap();
        assert!(laws.max_defect() <= 1e-12, "{}", laws.max_defect());
        assert_eq!(laws.unconverged_probes, 0);
        assert!(laws.entry(Law::Involutivity, None).is_some());

        let c = verify_cstar(&f, &dir, &ps, &opts, 1e-12).unwrap();
        assert_eq!(c.pass, !twisted);
        if twisted {
            assert!(c.max_ratio >= 0.5 - 1e-12);
            let only = verify_cstar(&f, &dir, &ps[ps.len() - 1..], &opts, 1e-12).unwrap();
            assert!((only.max_ratio - 0.5).abs() < 1e-12);
        }
    }
}
