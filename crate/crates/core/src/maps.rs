//! Candidate maps `f: E → E` and the defect functionals measured on them.
//!
//! A candidate is normally built as an exact reference involution plus a
//! radial perturbation `δ` with `‖δ(x)‖ ≤ θ_δ‖x‖^r` and `δ(0) = 0`. Arbitrary
//! maps can be wrapped with [`RawMap`].

use std::f64::consts::TAU;

use num_complex::Complex;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{sample_unit, AlgebraKind, AlgebraSpec, Element};
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Default quantization step applied before hashing `x` in
/// [`Perturbation::RandomDirection`].
pub const DIRECTION_QUANTUM: f64 = 1e-6;

/// A self-map of one algebra instance.
pub trait CandidateMap<T: Real>: Sync {
    fn spec(&self) -> AlgebraSpec;

    fn eval(&self, x: &Element<T>) -> Result<Element<T>>;
}

impl<T: Real, M: CandidateMap<T> + ?Sized> CandidateMap<T> for &M {
    fn spec(&self) -> AlgebraSpec {
        (**self).spec()
    }

    fn eval(&self, x: &Element<T>) -> Result<Element<T>> {
        (**self).eval(x)
    }
}

/// A user-supplied map. Construction checks `f(0) = 0`.
pub struct RawMap<F> {
    spec: AlgebraSpec,
    func: F,
}

impl<F> RawMap<F> {
    pub fn new<T>(spec: AlgebraSpec, func: F) -> Result<Self>
    where
        T: Real,
        F: Fn(&Element<T>) -> Result<Element<T>> + Sync,
    {
        let at_zero = func(&Element::zero(spec))?;
        if !at_zero.is_zero() {
            return Err(Error::NonZeroAtOrigin);
        }
        Ok(Self { spec, func })
    }
}

impl<T, F> CandidateMap<T> for RawMap<F>
where
    T: Real,
    F: Fn(&Element<T>) -> Result<Element<T>> + Sync,
{
    fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    fn eval(&self, x: &Element<T>) -> Result<Element<T>> {
        check_spec(self.spec, x)?;
        (self.func)(x)
    }
}

fn check_spec<T: Real>(spec: AlgebraSpec, x: &Element<T>) -> Result<()> {
    if x.spec() != spec {
        return Err(Error::SpecMismatch {
            left: spec,
            right: x.spec(),
        });
    }
    Ok(())
}

/// Hermitian invertible `s` defining the twisted adjoint `x ↦ s⁻¹x*s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Twist<T: Real> {
    s: Element<T>,
    s_inv: Element<T>,
}

impl<T: Real> Twist<T> {
    pub fn new(s: Element<T>) -> Result<Self> {
        if s.spec().kind() != AlgebraKind::Matrix {
            return Err(Error::InvalidTwist(format!(
                "twist must be a matrix, got {}",
                s.spec()
            )));
        }
        let asym = s.checked_sub(&s.conj_transpose())?.max_abs();
        if asym > T::lit(1e-12) * s.max_abs().max(T::one()) {
            return Err(Error::InvalidTwist(format!(
                "twist is not Hermitian (asymmetry {asym:e})"
            )));
        }
        let s_inv = s
            .inverse()
            .map_err(|_| Error::InvalidTwist("twist is singular".into()))?;
        // smallest singular value of s is 1/‖s⁻¹‖
        let sigma_min = s_inv.norm()?.recip();
        if !(sigma_min > T::lit(1e-8)) {
            return Err(Error::InvalidTwist(format!(
                "smallest singular value {sigma_min:e} <= 1e-8"
            )));
        }
        Ok(Self { s, s_inv })
    }

    pub fn element(&self) -> &Element<T> {
        &self.s
    }

    pub fn inverse(&self) -> &Element<T> {
        &self.s_inv
    }
}

/// Exact reference involutions.
#[derive(Debug, Clone, PartialEq)]
pub enum InvolutionKind<T: Real> {
    /// Conjugate transpose (entrywise conjugation on commutative instances).
    Adjoint,
    /// `x ↦ s⁻¹x*s`: an involution that breaks the C*-identity unless `s` is
    /// a multiple of a unitary.
    TwistedAdjoint(Twist<T>),
    /// Entrywise conjugation; only anti-multiplicative on commutative
    /// instances.
    Conjugation,
}

impl<T: Real> InvolutionKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Adjoint => "adjoint",
            Self::TwistedAdjoint(_) => "twisted_adjoint",
            Self::Conjugation => "conjugation",
        }
    }

    pub fn supports(&self, spec: AlgebraSpec) -> bool {
        match self {
            Self::Adjoint => true,
            Self::TwistedAdjoint(t) => t.s.spec() == spec,
            Self::Conjugation => spec.is_commutative(),
        }
    }

    pub fn apply(&self, x: &Element<T>) -> Result<Element<T>> {
        if !self.supports(x.spec()) {
            return Err(Error::KindSpecMismatch {
                kind: self.name(),
                spec: x.spec(),
            });
        }
        match self {
            Self::Adjoint => Ok(x.conj_transpose()),
            Self::TwistedAdjoint(t) => t.s_inv.checked_mul(&x.conj_transpose())?.checked_mul(&t.s),
            Self::Conjugation => Ok(x.conj_entries()),
        }
    }
}

impl<T: Real> CandidateMap<T> for (AlgebraSpec, InvolutionKind<T>) {
    fn spec(&self) -> AlgebraSpec {
        self.0
    }

    fn eval(&self, x: &Element<T>) -> Result<Element<T>> {
        check_spec(self.0, x)?;
        self.1.apply(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    FixedDirectionRadial,
    RandomDirectionRadial,
    None,
}

/// Descriptor of a radial perturbation before it is bound to an algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec<T> {
    pub kind: PerturbationKind,
    pub theta_delta: T,
    pub r: T,
    pub direction_seed: u64,
}

/// A radial perturbation `δ(x) = θ_δ‖x‖^r·u` bound to an algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation<T: Real> {
    None,
    /// `u` is a fixed unit element.
    FixedDirection {
        theta: T,
        r: T,
        direction: Element<T>,
    },
    /// `u = u(x)` is a unit element derived from a hash of the quantized
    /// entries of `x`; `sign` is ±1.
    RandomDirection {
        theta: T,
        r: T,
        seed: u64,
        sign: T,
    },
}

fn check_amplitude<T: Real>(theta: T, r: T) -> Result<()> {
    if !(theta >= T::zero() && theta.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "theta_delta must be finite and >= 0, got {theta}"
        )));
    }
    if !(r > T::zero() && r.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "perturbation exponent r must be > 0, got {r}"
        )));
    }
    Ok(())
}

impl<T: Real> Perturbation<T> {
    pub fn from_spec(spec: &PerturbationSpec<T>, algebra: AlgebraSpec) -> Result<Self> {
        match spec.kind {
            PerturbationKind::None => Ok(Self::None),
            PerturbationKind::FixedDirectionRadial => {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.direction_seed);
                let direction = sample_unit(algebra, &mut rng)?;
                Self::fixed(spec.theta_delta, spec.r, direction)
            }
            PerturbationKind::RandomDirectionRadial => {
                check_amplitude(spec.theta_delta, spec.r)?;
                Ok(Self::RandomDirection {
                    theta: spec.theta_delta,
                    r: spec.r,
                    seed: spec.direction_seed,
                    sign: T::one(),
                })
            }
        }
    }

    /// Fixed-direction perturbation along `direction`, which is normalized.
    pub fn fixed(theta: T, r: T, direction: Element<T>) -> Result<Self> {
        check_amplitude(theta, r)?;
        let norm = direction.norm()?;
        if norm.is_zero() {
            return Err(Error::InvalidElement(
                "perturbation direction is zero".into(),
            ));
        }
        Ok(Self::FixedDirection {
            theta,
            r,
            direction: direction.scale_real(norm.recip()),
        })
    }

    /// Envelope amplitude `θ_δ`.
    pub fn theta(&self) -> T {
        match self {
            Self::None => T::zero(),
            Self::FixedDirection { theta, .. } | Self::RandomDirection { theta, .. } => *theta,
        }
    }

    /// `-δ`.
    pub fn negated(&self) -> Self {
        match self {
            Self::None => Self::None,
            Self::FixedDirection {
                theta,
                r,
                direction,
            } => Self::FixedDirection {
                theta: *theta,
                r: *r,
                direction: direction.neg(),
            },
            Self::RandomDirection {
                theta,
                r,
                seed,
                sign,
            } => Self::RandomDirection {
                theta: *theta,
                r: *r,
                seed: *seed,
                sign: -*sign,
            },
        }
    }

    pub fn eval(&self, x: &Element<T>) -> Result<Element<T>> {
        if x.is_zero() {
            return Ok(Element::zero(x.spec()));
        }
        match self {
            Self::None => Ok(Element::zero(x.spec())),
            Self::FixedDirection {
                theta,
                r,
                direction,
            } => {
                if direction.spec() != x.spec() {
                    return Err(Error::SpecMismatch {
                        left: direction.spec(),
                        right: x.spec(),
                    });
                }
                let amp = *theta * x.norm()?.pow_nonneg(*r);
                Ok(direction.scale_real(amp))
            }
            Self::RandomDirection {
                theta,
                r,
                seed,
                sign,
            } => {
                let amp = *theta * x.norm()?.pow_nonneg(*r);
                let mut rng = ChaCha8Rng::seed_from_u64(direction_hash(*seed, x));
                let u = sample_unit(x.spec(), &mut rng)?;
                Ok(u.scale_real(amp * *sign))
            }
        }
    }
}

/// Stable hash of `seed` and the entries of `x` rounded to
/// [`DIRECTION_QUANTUM`], so `u(x)` is a function of `x` alone.
fn direction_hash<T: Real>(seed: u64, x: &Element<T>) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for z in x.data() {
        for part in [z.re, z.im] {
            let q = (part.as_f64() / DIRECTION_QUANTUM).round();
            // normalize -0.0 so it hashes like 0.0
            let q = if q == 0.0 { 0.0 } else { q };
            hasher.update(q.to_bits().to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

/// The candidate `f = reference involution + δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxMap<T: Real> {
    spec: AlgebraSpec,
    base: InvolutionKind<T>,
    perturbation: Perturbation<T>,
}

impl<T: Real> ApproxMap<T> {
    pub fn new(
        spec: AlgebraSpec,
        base: InvolutionKind<T>,
        perturbation: Perturbation<T>,
    ) -> Result<Self> {
        if !base.supports(spec) {
            return Err(Error::KindSpecMismatch {
                kind: base.name(),
                spec,
            });
        }
        if let Perturbation::FixedDirection { direction, .. } = &perturbation {
            if direction.spec() != spec {
                return Err(Error::SpecMismatch {
                    left: spec,
                    right: direction.spec(),
                });
            }
        }
        Ok(Self {
            spec,
            base,
            perturbation,
        })
    }

    /// Unperturbed reference involution.
    pub fn exact(spec: AlgebraSpec, base: InvolutionKind<T>) -> Result<Self> {
        Self::new(spec, base, Perturbation::None)
    }

    pub fn base(&self) -> &InvolutionKind<T> {
        &self.base
    }

    pub fn perturbation(&self) -> &Perturbation<T> {
        &self.perturbation
    }

    /// Same base involution with another perturbation.
    pub fn with_perturbation(&self, perturbation: Perturbation<T>) -> Result<Self> {
        Self::new(self.spec, self.base.clone(), perturbation)
    }
}

impl<T: Real> CandidateMap<T> for ApproxMap<T> {
    fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    fn eval(&self, x: &Element<T>) -> Result<Element<T>> {
        check_spec(self.spec, x)?;
        let base = self.base.apply(x)?;
        match self.perturbation {
            Perturbation::None => Ok(base),
            _ => base.checked_add(&self.perturbation.eval(x)?),
        }
    }
}

/// Jensen-type defect `D_λf(x,y) = 2λ̄f((x+y)/2) − f(λx) − f(λy)`.
pub fn jensen_defect<T, M>(
    f: &M,
    lambda: Scalar<T>,
    x: &Element<T>,
    y: &Element<T>,
) -> Result<Element<T>>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mid = x.checked_add(y)?.scale_real(half);
    let lead = f.eval(&mid)?.scale(lambda.conj() * two);
    lead.checked_sub(&f.eval(&x.scale(lambda))?)?
        .checked_sub(&f.eval(&y.scale(lambda))?)
}

/// Anti-multiplicativity defect `f(xy) − f(y)f(x)`.
pub fn antimul_defect<T, M>(f: &M, x: &Element<T>, y: &Element<T>) -> Result<Element<T>>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    let lhs = f.eval(&x.checked_mul(y)?)?;
    lhs.checked_sub(&f.eval(y)?.checked_mul(&f.eval(x)?)?)
}

/// C*-defect `| ‖x·f(x)‖ − ‖x‖² |` (element first, image second).
pub fn cstar_defect<T, M>(f: &M, x: &Element<T>) -> Result<T>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    let n = x.norm()?;
    Ok((x.checked_mul(&f.eval(x)?)?.norm()? - n * n).abs())
}

/// Reversed-order variant `| ‖f(x)·x‖ − ‖x‖² |`, reported for information.
pub fn cstar_defect_reversed<T, M>(f: &M, x: &Element<T>) -> Result<T>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    let n = x.norm()?;
    Ok((f.eval(x)?.checked_mul(x)?.norm()? - n * n).abs())
}

/// Groups of multipliers, in the order conjugate homogeneity is extended:
/// short arc, full circle, positive reals, all of ℂ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaStage {
    Arc,
    Circle,
    PositiveReals,
    Complex,
}

impl LambdaStage {
    pub const ALL: [LambdaStage; 4] = [Self::Arc, Self::Circle, Self::PositiveReals, Self::Complex];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Arc => "arc",
            Self::Circle => "circle",
            Self::PositiveReals => "positive_reals",
            Self::Complex => "complex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledLambda<T: Real> {
    pub stage: LambdaStage,
    pub value: Scalar<T>,
}

/// Deterministic sampler of multipliers `λ` for each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaSampler {
    pub n0: u32,
    pub arc: usize,
    pub circle: usize,
    pub reals: usize,
    pub complex: usize,
    pub seed: u64,
}

impl LambdaSampler {
    /// Arc samples are `e^{iθ}` with `θ ∈ [0, 1/n₀]`; the first one is
    /// always `λ = 1`. Positive reals and complex moduli are log-uniform on
    /// `[0.1, 10]`.
    pub fn sample<T: Real>(&self) -> Result<Vec<SampledLambda<T>>> {
        if self.n0 == 0 {
            return Err(Error::OutOfRange("lambda.n0 must be >= 1".into()));
        }
        if self.arc == 0 || self.circle == 0 || self.reals == 0 || self.complex == 0 {
            return Err(Error::OutOfRange(
                "every lambda stage needs at least one sample".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let arc_end = 1.0 / f64::from(self.n0);
        let (lo, hi) = (0.1f64.ln(), 10f64.ln());
        let mut out = Vec::with_capacity(self.arc + self.circle + self.reals + self.complex);
        let mut push = |stage, z: Complex<f64>| {
            out.push(SampledLambda {
                stage,
                value: Complex::new(T::lit(z.re), T::lit(z.im)),
            })
        };

        push(LambdaStage::Arc, Complex::one());
        for _ in 1..self.arc {
            push(
                LambdaStage::Arc,
                Complex::from_polar(1.0, rng.random_range(0.0..=arc_end)),
            );
        }
        for _ in 0..self.circle {
            push(
                LambdaStage::Circle,
                Complex::from_polar(1.0, rng.random_range(0.0..TAU)),
            );
        }
        for _ in 0..self.reals {
            let t: f64 = rng.random_range(lo..=hi);
            push(LambdaStage::PositiveReals, Complex::new(t.exp(), 0.0));
        }
        for _ in 0..self.complex {
            let t: f64 = rng.random_range(lo..=hi);
            push(
                LambdaStage::Complex,
                Complex::from_polar(t.exp(), rng.random_range(0.0..TAU)),
            );
        }
        Ok(out)
    }
}

/// Writes `α > 0` as the midpoint of two points of modulus `n > α`:
/// `α₁,₂ = α ± i√(n² − α²)`.
///
/// The imaginary unit is required for `|α₁| = |α₂| = n`; without it the two
/// points are real and off the circle.
pub fn circle_decomposition<T: Real>(alpha: T, radius: T) -> Result<(Scalar<T>, Scalar<T>)> {
    if !(alpha > T::zero() && alpha < radius) {
        return Err(Error::OutOfRange(format!(
            "need 0 < alpha < radius, got alpha={alpha}, radius={radius}"
        )));
    }
    let h = (radius * radius - alpha * alpha).sqrt();
    Ok((Complex::new(alpha, h), Complex::new(alpha, -h)))
}

/// Root `λ₁` on the arc `{e^{iθ}: 0 ≤ θ ≤ 1/n₀}` with `λ₁^m = λ` for a unit
/// `λ`. Returns `(λ₁, m)` with the smallest such `m`.
///
/// `m = n₀` is not enough in general: the arc spans angle `1/n₀`, so covering
/// an angle up to `2π` needs `m = ⌈n₀·arg λ⌉` steps.
pub fn arc_root<T: Real>(lambda: Scalar<T>, n0: u32) -> Result<(Scalar<T>, u32)> {
    if n0 == 0 {
        return Err(Error::OutOfRange("n0 must be >= 1".into()));
    }
    let mut angle = lambda.arg();
    if angle < T::zero() {
        angle += T::TAU();
    }
    let steps = (angle * T::lit(f64::from(n0))).ceil().max(T::one());
    let m = steps
        .to_u32()
        .ok_or_else(|| Error::OutOfRange("angle too large".into()))?;
    Ok((Complex::from_polar(T::one(), angle / steps), m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::scalar;

    fn is_unimodular(z: Scalar<f64>, tol: f64) -> bool {
        (z.norm() - 1.0).abs() <= tol
    }

    fn spec2() -> AlgebraSpec {
        AlgebraSpec::matrix(2).unwrap()
    }

    fn m2(re: [f64; 4]) -> Element<f64> {
        Element::from_real(spec2(), &re).unwrap()
    }

    fn sc(re: f64) -> Element<f64> {
        Element::scalar(scalar(re, 0.0)).unwrap()
    }

    /// f(z) = z̄ + 0.1|z|^{1/2} on ℂ.
    fn scalar_f() -> ApproxMap<f64> {
        let pert = Perturbation::fixed(0.1, 0.5, sc(1.0)).unwrap();
        ApproxMap::new(AlgebraSpec::scalar(), InvolutionKind::Conjugation, pert).unwrap()
    }

    fn twist_diag12() -> InvolutionKind<f64> {
        InvolutionKind::TwistedAdjoint(Twist::new(m2([1.0, 0.0, 0.0, 2.0])).unwrap())
    }

    #[test]
    fn eval_involution_examples() {
        let x = m2([0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            InvolutionKind::Adjoint.apply(&x).unwrap(),
            m2([0.0, 0.0, 1.0, 0.0])
        );
        let tw = twist_diag12().apply(&x).unwrap();
        assert!(tw.checked_sub(&m2([0.0, 0.0, 0.5, 0.0])).unwrap().max_abs() < 1e-15);
        assert!(matches!(
            InvolutionKind::Conjugation.apply(&x),
            Err(Error::KindSpecMismatch { .. })
        ));
        let wrong = Element::<f64>::zero(AlgebraSpec::matrix(3).unwrap());
        assert!(matches!(
            twist_diag12().apply(&wrong),
            Err(Error::KindSpecMismatch { .. })
        ));
    }

    #[test]
    fn twist_validation() {
        assert!(
            Twist::new(m2([1.0, 2.0, 0.0, 1.0])).is_err(),
            "not Hermitian"
        );
        assert!(Twist::new(m2([1.0, 1.0, 1.0, 1.0])).is_err(), "singular");
        assert!(
            Twist::new(m2([1.0, 0.0, 0.0, 1e-9])).is_err(),
            "nearly singular"
        );
        assert!(Twist::new(sc(2.0)).is_err(), "not a matrix");
    }

    #[test]
    fn perturbation_examples() {
        let x = sc(4.0);
        assert!(Perturbation::<f64>::None.eval(&x).unwrap().is_zero());
        let p = Perturbation::fixed(0.1, 0.5, sc(1.0)).unwrap();
        assert!((p.eval(&x).unwrap().data()[0].re - 0.2).abs() < 1e-15);
        let spec = PerturbationSpec {
            kind: PerturbationKind::RandomDirectionRadial,
            theta_delta: 0.1,
            r: 0.5,
            direction_seed: 9,
        };
        let rnd = Perturbation::from_spec(&spec, spec2()).unwrap();
        assert!(rnd.eval(&Element::zero(spec2())).unwrap().is_zero());
        assert!(p
            .eval(&Element::zero(AlgebraSpec::scalar()))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn random_direction_is_a_function_of_x() {
        let spec = PerturbationSpec {
            kind: PerturbationKind::RandomDirectionRadial,
            theta_delta: 0.1,
            r: 0.5,
            direction_seed: 1,
        };
        let p = Perturbation::from_spec(&spec, spec2()).unwrap();
        let x = m2([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.eval(&x).unwrap(), p.eval(&x.clone()).unwrap());
        assert_ne!(
            p.eval(&x).unwrap(),
            p.eval(&m2([1.0, 2.0, 3.0, 5.0])).unwrap()
        );
        let neg = p.negated().eval(&x).unwrap();
        assert_eq!(neg, p.eval(&x).unwrap().neg());
    }

    #[test]
    fn perturbation_rejects_bad_parameters() {
        assert!(Perturbation::fixed(-0.1, 0.5, sc(1.0)).is_err());
        assert!(Perturbation::fixed(0.1, 0.0, sc(1.0)).is_err());
        assert!(Perturbation::fixed(0.1, 0.5, sc(0.0)).is_err());
    }

    #[test]
    fn eval_f_examples() {
        let exact = ApproxMap::exact(spec2(), InvolutionKind::Adjoint).unwrap();
        let x = m2([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(exact.eval(&x).unwrap(), x.conj_transpose());
        assert!((scalar_f().eval(&sc(4.0)).unwrap().data()[0].re - 4.2).abs() < 1e-15);
        assert!(scalar_f().eval(&sc(0.0)).unwrap().is_zero());
        assert!(ApproxMap::exact(spec2(), InvolutionKind::<f64>::Conjugation).is_err());
    }

    #[test]
    fn raw_map_requires_zero_at_origin() {
        let ok = RawMap::new(AlgebraSpec::scalar(), |x: &Element<f64>| {
            Ok(x.conj_entries())
        });
        assert!(ok.is_ok());
        let bad = RawMap::new(AlgebraSpec::scalar(), |x: &Element<f64>| {
            x.checked_add(&Element::identity(x.spec()))
        });
        assert!(matches!(bad, Err(Error::NonZeroAtOrigin)));
    }

    #[test]
    fn jensen_defect_examples() {
        let exact = ApproxMap::exact(spec2(), InvolutionKind::Adjoint).unwrap();
        let x = m2([1.0, -2.0, 0.5, 3.0]);
        let y = m2([0.25, 1.0, -1.0, 2.0]);
        let lambda = Complex::from_polar(1.0, 0.7);
        assert!(jensen_defect(&exact, lambda, &x, &y).unwrap().max_abs() < 1e-12);

        let d = jensen_defect(&scalar_f(), scalar(1.0, 0.0), &sc(4.0), &sc(0.0)).unwrap();
        let expected = 0.2 * 2f64.sqrt() - 0.2;
        assert!((d.data()[0].re - expected).abs() < 1e-15);
        assert!((expected - 0.0828427).abs() < 1e-7);

        let same = jensen_defect(&scalar_f(), scalar(1.0, 0.0), &sc(3.0), &sc(3.0)).unwrap();
        assert!(same.is_zero());
    }

    #[test]
    fn antimul_defect_examples() {
        let exact = ApproxMap::exact(spec2(), InvolutionKind::Adjoint).unwrap();
        let x = m2([1.0, -2.0, 0.5, 3.0]);
        let y = m2([0.25, 1.0, -1.0, 2.0]);
        assert!(antimul_defect(&exact, &x, &y).unwrap().max_abs() < 1e-12);
        assert!(antimul_defect(&scalar_f(), &sc(2.0), &sc(0.0))
            .unwrap()
            .is_zero());
        let d = antimul_defect(&scalar_f(), &sc(2.0), &sc(2.0)).unwrap();
        let expected = 4.2 - (2.0 + 0.1 * 2f64.sqrt()).powi(2);
        assert!((d.data()[0].re - expected).abs() < 1e-14);
        assert!((expected + 0.3857).abs() < 1e-4);
    }

    #[test]
    fn cstar_defect_examples() {
        let adj = ApproxMap::exact(spec2(), InvolutionKind::Adjoint).unwrap();
        assert!(cstar_defect(&adj, &m2([1.0, -2.0, 0.5, 3.0])).unwrap() < 1e-9);
        let tw = ApproxMap::exact(spec2(), twist_diag12()).unwrap();
        let d = cstar_defect(&tw, &m2([0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert_eq!(cstar_defect(&tw, &Element::zero(spec2())).unwrap(), 0.0);
        // reversed order: I(x)·x = [[0,0],[0,0.5]] has the same norm here
        assert!(
            (cstar_defect_reversed(&tw, &m2([0.0, 1.0, 0.0, 0.0])).unwrap() - 0.5).abs() < 1e-12
        );
    }

    #[test]
    fn lambda_sampler_contracts() {
        let ls = LambdaSampler {
            n0: 3,
            arc: 5,
            circle: 6,
            reals: 4,
            complex: 4,
            seed: 17,
        };
        let lams: Vec<SampledLambda<f64>> = ls.sample().unwrap();
        assert_eq!(lams.len(), 19);
        assert_eq!(lams[0].value, Complex::new(1.0, 0.0));
        for l in &lams {
            match l.stage {
                LambdaStage::Arc => {
                    let a = l.value.arg();
                    assert!(
                        is_unimodular(l.value, 1e-12) && (-1e-15..=1.0 / 3.0 + 1e-15).contains(&a)
                    );
                }
                LambdaStage::Circle => assert!(is_unimodular(l.value, 1e-12)),
                LambdaStage::PositiveReals => {
                    assert!(l.value.re >= 0.1 && l.value.re <= 10.0 && l.value.im == 0.0)
                }
                LambdaStage::Complex => {
                    let m = l.value.norm();
                    assert!((0.1 - 1e-12..=10.0 + 1e-12).contains(&m));
                }
            }
        }
        assert_eq!(lams, ls.sample::<f64>().unwrap());
        assert!(LambdaSampler { arc: 0, ..ls }.sample::<f64>().is_err());
    }

    #[test]
    fn circle_decomposition_midpoint() {
        let (a1, a2) = circle_decomposition(0.7f64, 2.0).unwrap();
        assert!((a1.norm() - 2.0).abs() < 1e-15 && (a2.norm() - 2.0).abs() < 1e-15);
        assert!(((a1 + a2) / 2.0 - Complex::new(0.7, 0.0)).norm() < 1e-15);
        assert!(circle_decomposition(3.0f64, 2.0).is_err());
    }

    #[test]
    fn arc_root_reconstructs_circle_points() {
        for k in 0..50 {
            let lambda = Complex::from_polar(1.0f64, 0.13 * k as f64 - 3.0);
            let (root, m) = arc_root(lambda, 3).unwrap();
            assert!(root.arg() >= -1e-15 && root.arg() <= 1.0 / 3.0 + 1e-15);
            assert!((root.powu(m) - lambda).norm() < 1e-12);
        }
    }
}
