//! Generalized metric spaces and the fixed-point alternative for strict
//! contractions.
//!
//! For a strict contraction `T` with Lipschitz constant `L < 1` on a complete
//! generalized metric space, the orbit of any `x` either has every
//! consecutive distance infinite, or from some index `n₀` on the distances
//! are finite, the orbit converges to a fixed point `y*` that is unique in
//! `{y : d(Tⁿ⁰x, y) < ∞}`, and `d(y, y*) ≤ d(Ty, y)/(1 − L)` there.
//!
//! [`FunctionSpaceMetric`] is the finite-probe estimate of the weighted
//! sup-distance between maps `g, h: E → E` used to run this argument on the
//! space of candidate maps, and [`ScaledMap`] is the scaling operator
//! `g ↦ g(q·)/q` acting on it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::maps::CandidateMap;
use crate::scalar::Real;
use crate::stabilizer::ControlFunction;

/// Relative slack applied to every contraction inequality checked on floats.
pub const CONTRACTION_SLACK: f64 = 1e-9;

/// A value in `[0, ∞]` with an explicit infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> ExtReal<T> {
    pub fn zero() -> Self {
        Self::Finite(T::zero())
    }

    /// Checked constructor: rejects negatives and NaN, maps `+inf` to
    /// [`ExtReal::Infinite`].
    pub fn new(v: T) -> Option<Self> {
        if v.is_nan() || v < T::zero() {
            None
        } else if v.is_infinite() {
            Some(Self::Infinite)
        } else {
            Some(Self::Finite(v))
        }
    }

    /// `num / den` with `0/0 = 0` and `positive/0 = ∞`.
    pub fn ratio(num: T, den: T) -> Self {
        if den > T::zero() {
            Self::Finite(num / den)
        } else if num.is_zero() {
            Self::zero()
        } else {
            Self::Infinite
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// Whether the value lies in `[0, ∞]`.
    pub fn is_valid(&self) -> bool {
        match self {
            Self::Finite(v) => !v.is_nan() && *v >= T::zero() && v.is_finite(),
            Self::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::Infinite => None,
        }
    }

    /// Multiplication by a non-negative finite factor, with `0·∞ = 0`.
    pub fn scale(self, factor: T) -> Self {
        match self {
            Self::Finite(v) => Self::Finite(v * factor),
            Self::Infinite if factor.is_zero() => Self::zero(),
            Self::Infinite => Self::Infinite,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn as_f64(&self) -> ExtReal<f64> {
        match self {
            Self::Finite(v) => ExtReal::Finite(v.as_f64()),
            Self::Infinite => ExtReal::Infinite,
        }
    }
}

impl<T: Real> Add for ExtReal<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a + b),
            _ => Self::Infinite,
        }
    }
}

impl<T: Real> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b),
            (Self::Finite(_), Self::Infinite) => Some(Ordering::Less),
            (Self::Infinite, Self::Finite(_)) => Some(Ordering::Greater),
            (Self::Infinite, Self::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<T: Real> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

/// Finite values serialize as numbers, infinity as the string `"inf"`.
impl<T: Real> Serialize for ExtReal<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => serializer.serialize_f64(v.as_f64()),
            Self::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// A distance into `[0, ∞]`.
pub trait GeneralizedMetric<P, T> {
    fn distance(&self, a: &P, b: &P) -> ExtReal<T>;
}

impl<P, T, F> GeneralizedMetric<P, T> for F
where
    F: Fn(&P, &P) -> ExtReal<T>,
{
    fn distance(&self, a: &P, b: &P) -> ExtReal<T> {
        self(a, b)
    }
}

/// `|a − b|` on the reals.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbsoluteDifference;

impl<T: Real> GeneralizedMetric<T, T> for AbsoluteDifference {
    fn distance(&self, a: &T, b: &T) -> ExtReal<T> {
        ExtReal::Finite((*a - *b).abs())
    }
}

/// `0` on the diagonal, `∞` elsewhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiscreteMetric;

impl<P: PartialEq, T: Real> GeneralizedMetric<P, T> for DiscreteMetric {
    fn distance(&self, a: &P, b: &P) -> ExtReal<T> {
        if a == b {
            ExtReal::zero()
        } else {
            ExtReal::Infinite
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricAxiom {
    /// `d(x, y) = 0 ⇔ x = y`, including the codomain `[0, ∞]`.
    M1,
    /// Symmetry.
    M2,
    /// Triangle inequality.
    M3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricViolation<P> {
    pub axiom: MetricAxiom,
    pub triple_index: usize,
    pub points: Vec<P>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricCheck<P> {
    pub triples_checked: usize,
    pub violation: Option<MetricViolation<P>>,
}

impl<P> MetricCheck<P> {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks M1–M3 on every sampled triple and stops at the first
/// counterexample. `∞` is absorbing in the triangle inequality.
pub fn gmetric_check<P, T, D>(metric: &D, triples: &[(P, P, P)]) -> MetricCheck<P>
where
    P: PartialEq + Clone,
    T: Real,
    D: GeneralizedMetric<P, T> + ?Sized,
{
    let slack = T::one() + T::lit(1e-12);
    for (idx, (x, y, z)) in triples.iter().enumerate() {
        let fail = |axiom, points: &[&P], detail: String| MetricCheck {
            triples_checked: idx + 1,
            violation: Some(MetricViolation {
                axiom,
                triple_index: idx,
                points: points.iter().map(|p| (*p).clone()).collect(),
                detail,
            }),
        };

        for p in [x, y, z] {
            let d = metric.distance(p, p);
            if d != ExtReal::zero() {
                return fail(MetricAxiom::M1, &[p, p], format!("d(x, x) = {d}"));
            }
        }
        let pairs = [(x, y), (y, z), (x, z)];
        for (a, b) in pairs {
            let d = metric.distance(a, b);
            if !d.is_valid() {
                return fail(
                    MetricAxiom::M1,
                    &[a, b],
                    format!("d = {d} outside [0, inf]"),
                );
            }
            if d == ExtReal::zero() && a != b {
                return fail(MetricAxiom::M1, &[a, b], "d = 0 for distinct points".into());
            }
            let back = metric.distance(b, a);
            if d != back {
                return fail(
                    MetricAxiom::M2,
                    &[a, b],
                    format!("d(a, b) = {d}, d(b, a) = {back}"),
                );
            }
        }
        for (a, b, c) in [(x, y, z), (y, x, z), (x, z, y)] {
            let direct = metric.distance(a, c);
            let via = metric.distance(a, b) + metric.distance(b, c);
            if let (ExtReal::Finite(d), ExtReal::Finite(v)) = (direct, via) {
                if d > v * slack {
                    return fail(MetricAxiom::M3, &[a, b, c], format!("d(a, c) = {d} > {v}"));
                }
            } else if via.is_finite() {
                return fail(
                    MetricAxiom::M3,
                    &[a, b, c],
                    format!("d(a, c) = inf > {via}"),
                );
            }
        }
    }
    MetricCheck {
        triples_checked: triples.len(),
        violation: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternativeOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Absolute rounding allowance of the metric, added to the
    /// `d(Tⁿ⁺¹x, Tⁿ⁺²x) ≤ L·d(Tⁿx, Tⁿ⁺¹x)` check.
    pub rounding: f64,
}

impl Default for AlternativeOptions {
    fn default() -> Self {
        Self {
            max_iter: 64,
            tol: 1e-10,
            rounding: 1e-13,
        }
    }
}

/// The two branches of the fixed-point alternative.
#[derive(Debug, Clone, PartialEq)]
pub enum AlternativeOutcome<P, T> {
    /// `d(Tⁿx, Tⁿ⁺¹x) = ∞` for every inspected `n`.
    AllInfinite { orbit_distances: Vec<ExtReal<T>> },
    /// The orbit reached `d(Tⁿx, Tⁿ⁺¹x) ≤ tol` at `n = iterations`.
    Converged {
        fixed_point: P,
        /// First index with a finite consecutive distance.
        n0: usize,
        iterations: usize,
        orbit_distances: Vec<ExtReal<T>>,
        /// `d(Tⁿ⁰⁺¹x, Tⁿ⁰x)/(1 − L)`, a bound on `d(Tⁿ⁰x, y*)`.
        aposteriori_bound: ExtReal<T>,
    },
}

impl<P, T> AlternativeOutcome<P, T> {
    pub fn orbit_distances(&self) -> &[ExtReal<T>] {
        match self {
            Self::AllInfinite { orbit_distances }
            | Self::Converged {
                orbit_distances, ..
            } => orbit_distances,
        }
    }
}

/// Runs the orbit `x0, T x0, T² x0, …` and classifies it.
///
/// Once distances are finite each step must satisfy
/// `d(Tⁿ⁺¹x, Tⁿ⁺²x) ≤ L·d(Tⁿx, Tⁿ⁺¹x)·(1 + 1e−9) + rounding`, otherwise
/// [`Error::NotContractive`] is returned. Finite distances that never reach
/// `tol` give [`Error::Exhausted`].
pub fn iterate_alternative<P, T, F, D>(
    map: F,
    x0: P,
    lipschitz: T,
    metric: &D,
    opts: AlternativeOptions,
) -> Result<AlternativeOutcome<P, T>>
where
    T: Real,
    F: Fn(&P) -> P,
    D: GeneralizedMetric<P, T> + ?Sized,
{
    check_lipschitz(lipschitz)?;
    if opts.max_iter == 0 {
        return Err(Error::OutOfRange("max_iter must be >= 1".into()));
    }
    let tol = T::lit(opts.tol);
    let slack = T::one() + T::lit(CONTRACTION_SLACK);
    let rounding = T::lit(opts.rounding);
    let mut x = x0;
    let mut orbit_distances = Vec::new();
    let mut n0 = None;

    for n in 0..opts.max_iter {
        let tx = map(&x);
        let d = metric.distance(&x, &tx);
        if let (Some(prev), Some(_)) = (orbit_distances.last().copied(), n0) {
            let prev: ExtReal<T> = prev;
            let exceeds = match (prev, d) {
                (ExtReal::Finite(p), ExtReal::Finite(c)) => c > lipschitz * p * slack + rounding,
                (ExtReal::Finite(_), ExtReal::Infinite) => true,
                _ => false,
            };
            if exceeds {
                let ratio = match (prev, d) {
                    (ExtReal::Finite(p), ExtReal::Finite(c)) => (c / p).as_f64(),
                    _ => f64::INFINITY,
                };
                return Err(Error::NotContractive {
                    step: n,
                    ratio,
                    lipschitz: lipschitz.as_f64(),
                });
            }
        }
        orbit_distances.push(d);
        if let ExtReal::Finite(dist) = d {
            let start = *n0.get_or_insert(n);
            if dist <= tol {
                let aposteriori = aposteriori_bound(lipschitz, orbit_distances[start])?;
                return Ok(AlternativeOutcome::Converged {
                    fixed_point: x,
                    n0: start,
                    iterations: n,
                    orbit_distances,
                    aposteriori_bound: aposteriori,
                });
            }
        }
        x = tx;
    }
    match n0 {
        None => Ok(AlternativeOutcome::AllInfinite { orbit_distances }),
        Some(_) => Err(Error::Exhausted {
            iterations: opts.max_iter,
        }),
    }
}

fn check_lipschitz<T: Real>(lipschitz: T) -> Result<()> {
    if !(lipschitz > T::zero() && lipschitz < T::one()) {
        return Err(Error::OutOfRange(format!(
            "Lipschitz constant must lie in (0, 1), got {lipschitz}"
        )));
    }
    Ok(())
}

/// `d(Ty, y)/(1 − L)`, the distance bound from `y` to the fixed point.
pub fn aposteriori_bound<T: Real>(lipschitz: T, d_ty_y: ExtReal<T>) -> Result<ExtReal<T>> {
    check_lipschitz(lipschitz)?;
    Ok(d_ty_y.scale((T::one() - lipschitz).recip()))
}

/// The scaling operator `g ↦ (x ↦ q⁻ⁿ g(qⁿ x))`, i.e. `n` applications of
/// `g ↦ g(q·)/q`.
#[derive(Debug, Clone)]
pub struct ScaledMap<M, T> {
    inner: M,
    q: T,
    power: i32,
}

impl<M, T: Real> ScaledMap<M, T> {
    pub fn new(inner: M, q: T, power: i32) -> Result<Self> {
        if !(q > T::zero() && q.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "scaling factor must be positive, got {q}"
            )));
        }
        Ok(Self { inner, q, power })
    }
}

/// One application of the scaling operator.
pub fn scaling_operator<M, T: Real>(g: M, q: T) -> Result<ScaledMap<M, T>> {
    ScaledMap::new(g, q, 1)
}

impl<M, T> CandidateMap<T> for ScaledMap<M, T>
where
    T: Real,
    M: CandidateMap<T>,
{
    fn spec(&self) -> crate::algebra::AlgebraSpec {
        self.inner.spec()
    }

    fn eval(&self, x: &Element<T>) -> Result<Element<T>> {
        let up = self.q.powi(self.power);
        Ok(self.inner.eval(&x.scale_real(up))?.scale_real(up.recip()))
    }
}

/// Finite-probe estimate of
/// `d(g, h) = inf{c ∈ [0, ∞] : ‖g(x) − h(x)‖ ≤ c·φ(x, 0) for all x}`.
///
/// Probes are organized as rays `{qᵏx₀ : k = 0..=depth}` so the scaling
/// operator maps the interior of the probe set (`k < depth`) back into it.
/// The value is a lower estimate of the true supremum over `E`.
#[derive(Debug, Clone)]
pub struct FunctionSpaceMetric<T: Real> {
    rays: Vec<Vec<Element<T>>>,
    control: ControlFunction<T>,
}

impl<T: Real> FunctionSpaceMetric<T> {
    /// Builds rays `qᵏx₀` from non-zero base points.
    pub fn from_rays(
        bases: &[Element<T>],
        q: T,
        depth: usize,
        control: ControlFunction<T>,
    ) -> Result<Self> {
        if !(q > T::zero() && q.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "scaling factor must be positive, got {q}"
            )));
        }
        let rays: Vec<Vec<Element<T>>> = bases
            .iter()
            .filter(|b| !b.is_zero())
            .map(|b| {
                (0..=depth)
                    .map(|k| b.scale_real(q.powi(k as i32)))
                    .collect()
            })
            .collect();
        if rays.is_empty() {
            return Err(Error::OutOfRange(
                "probe set needs at least one non-zero base point".into(),
            ));
        }
        Ok(Self { rays, control })
    }

    pub fn probes(&self) -> impl Iterator<Item = &Element<T>> {
        self.rays.iter().flatten()
    }

    pub fn control(&self) -> &ControlFunction<T> {
        &self.control
    }

    /// Probe set without the outermost point of each ray; its image under
    /// `x ↦ qx` lies inside the full probe set.
    pub fn interior(&self) -> Self {
        let rays = self
            .rays
            .iter()
            .filter(|r| r.len() > 1)
            .map(|r| r[..r.len() - 1].to_vec())
            .collect();
        Self {
            rays,
            control: self.control.clone(),
        }
    }

    pub fn distance<G, H>(&self, g: &G, h: &H) -> Result<ExtReal<T>>
    where
        G: CandidateMap<T> + ?Sized,
        H: CandidateMap<T> + ?Sized,
    {
        let mut sup = ExtReal::zero();
        for x in self.probes() {
            let gap = g.eval(x)?.checked_sub(&h.eval(x)?)?.norm()?;
            let weight = self.control.eval(x, &Element::zero(x.spec()))?;
            sup = sup.max(ExtReal::ratio(gap, weight));
        }
        Ok(sup)
    }

    /// Compares `d(Tg, Th)` on the interior probes with `L·d(g, h)` on the
    /// full probe set, `T` being the scaling operator with factor `q`.
    pub fn contraction_check<G, H>(
        &self,
        g: &G,
        h: &H,
        q: T,
        lipschitz: T,
    ) -> Result<ContractionCheck<T>>
    where
        G: CandidateMap<T>,
        H: CandidateMap<T>,
    {
        let before = self.distance(g, h)?;
        let after = self
            .interior()
            .distance(&scaling_operator(g, q)?, &scaling_operator(h, q)?)?;
        let holds = match (after, before) {
            (_, ExtReal::Infinite) => true,
            (ExtReal::Infinite, ExtReal::Finite(_)) => false,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                a <= lipschitz * b * (T::one() + T::lit(CONTRACTION_SLACK))
            }
        };
        Ok(ContractionCheck {
            before,
            after,
            holds,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCheck<T> {
    pub before: ExtReal<T>,
    pub after: ExtReal<T>,
    pub holds: bool,
}
