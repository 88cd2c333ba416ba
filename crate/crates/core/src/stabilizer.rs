//! Scaling-limit construction of the exact involution near a candidate map.
//!
//! Given a control `φ` with `φ(qx, qy) ≤ qLφ(x, y)` for one of `q = 2`
//! (index `i = 0`) or `q = 1/2` (index `i = 1`), the limit
//! `I(x) = lim qⁿ⁻ f(qⁿx)` exists, is the unique involution within finite
//! distance of `f`, and satisfies `‖I(x) − f(x)‖ ≤ L^{1−i}/(1 − L)·φ(x, 0)`.

use std::fmt;
use std::sync::Arc;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::fixedpoint::ExtReal;
use crate::maps::CandidateMap;
use crate::scalar::Real;

/// Norm above which an iterate is treated as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e300;
/// Consecutive growing differences tolerated before the orbit is declared
/// non-Cauchy.
pub const NON_CAUCHY_RUN: usize = 8;
/// Multiplier applied to empirically estimated Lipschitz constants.
pub const LIPSCHITZ_SAFETY: f64 = 1.05;

type ControlFn<T> = dyn Fn(&Element<T>, &Element<T>) -> Result<T> + Send + Sync;

/// User-supplied control function.
#[derive(Clone)]
pub struct CustomControl<T: Real> {
    name: String,
    func: Arc<ControlFn<T>>,
}

impl<T: Real> CustomControl<T> {
    pub fn new<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(&Element<T>, &Element<T>) -> Result<T> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<T: Real> fmt::Debug for CustomControl<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomControl")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// The perturbation envelope `φ(x, y)`.
#[derive(Debug, Clone)]
pub enum ControlFunction<T: Real> {
    /// `θ(‖x‖^r + ‖y‖^r)`
    PowerSum {
        theta: T,
        r: T,
    },
    /// `θ‖xy‖^r`
    PowerProduct {
        theta: T,
        r: T,
    },
    Custom(CustomControl<T>),
}

impl<T: Real> ControlFunction<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PowerSum { theta, r } | Self::PowerProduct { theta, r } => {
                if !(*theta >= T::zero() && theta.is_finite()) {
                    return Err(Error::OutOfRange(format!(
                        "control theta must be finite and >= 0, got {theta}"
                    )));
                }
                if !(*r > T::zero() && r.is_finite()) {
                    return Err(Error::OutOfRange(format!(
                        "control exponent r must be > 0, got {r}"
                    )));
                }
                Ok(())
            }
            Self::Custom(_) => Ok(()),
        }
    }

    pub fn kind_name(&self) -> &str {
        match self {
            Self::PowerSum { .. } => "power_sum",
            Self::PowerProduct { .. } => "power_product",
            Self::Custom(c) => c.name(),
        }
    }

    pub fn eval(&self, x: &Element<T>, y: &Element<T>) -> Result<T> {
        if x.spec() != y.spec() {
            return Err(Error::SpecMismatch {
                left: x.spec(),
                right: y.spec(),
            });
        }
        let value = match self {
            Self::PowerSum { theta, r } => {
                *theta * (x.norm()?.pow_nonneg(*r) + y.norm()?.pow_nonneg(*r))
            }
            Self::PowerProduct { theta, r } => *theta * x.checked_mul(y)?.norm()?.pow_nonneg(*r),
            Self::Custom(c) => (c.func)(x, y)?,
        };
        if !(value >= T::zero()) {
            return Err(Error::OutOfRange(format!(
                "control returned {value}, expected a value >= 0"
            )));
        }
        Ok(value)
    }
}

/// `q = 2` (`Up`, index 0) or `q = 1/2` (`Down`, index 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn q<T: Real>(self) -> T {
        match self {
            Self::Up => T::lit(2.0),
            Self::Down => T::lit(0.5),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Up => 0,
            Self::Down => 1,
        }
    }
}

/// Contraction data `(q, i, L)` for a control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingDirection<T> {
    pub direction: Direction,
    pub lipschitz: T,
    /// Empirical `L` when it was measured on samples.
    pub measured_lipschitz: Option<T>,
}

impl<T: Real> ScalingDirection<T> {
    pub fn new(direction: Direction, lipschitz: T) -> Result<Self> {
        if !(lipschitz > T::zero() && lipschitz < T::one()) {
            return Err(Error::OutOfRange(format!(
                "Lipschitz constant must lie in (0, 1), got {lipschitz}"
            )));
        }
        Ok(Self {
            direction,
            lipschitz,
            measured_lipschitz: None,
        })
    }

    pub fn q(&self) -> T {
        self.direction.q()
    }

    pub fn index(&self) -> u8 {
        self.direction.index()
    }

    /// `L^{1−i}/(1 − L)`.
    pub fn bound_factor(&self) -> T {
        let one = T::one();
        let lead = match self.direction {
            Direction::Up => self.lipschitz,
            Direction::Down => one,
        };
        lead / (one - self.lipschitz)
    }
}

impl<T: Real> Serialize for ScalingDirection<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ScalingDirection", 4)?;
        s.serialize_field("q", &self.q().as_f64())?;
        s.serialize_field("i", &self.index())?;
        s.serialize_field("L", &self.lipschitz.as_f64())?;
        s.serialize_field("measured_L", &self.measured_lipschitz.map(|v| v.as_f64()))?;
        s.end()
    }
}

/// Picks the contracting direction for an analytic control.
///
/// Power sum: `r < 1 → (2, 0, 2^{r−1})`, `r > 1 → (1/2, 1, 2^{1−r})`.
/// Power product: the same with `2r` in place of `r`.
pub fn select_direction<T: Real>(control: &ControlFunction<T>) -> Result<ScalingDirection<T>> {
    control.validate()?;
    let (growth, exponent) = match control {
        ControlFunction::PowerSum { r, .. } => (*r, *r),
        ControlFunction::PowerProduct { r, .. } => (*r * T::lit(2.0), *r * T::lit(2.0)),
        ControlFunction::Custom(_) => {
            return Err(Error::OutOfRange(
                "custom controls need sampled points; use select_direction_empirical".into(),
            ))
        }
    };
    let two = T::lit(2.0);
    // φ(2x, 2y) = 2^growth·φ(x, y); halve it for the factor q in qL
    let up = two.pow_nonneg(exponent) / two;
    let down = two / two.pow_nonneg(growth);
    if up < T::one() {
        ScalingDirection::new(Direction::Up, up)
    } else if down < T::one() {
        ScalingDirection::new(Direction::Down, down)
    } else {
        Err(Error::NoContraction {
            lipschitz_up: up.as_f64(),
            lipschitz_down: down.as_f64(),
        })
    }
}

/// Largest `φ(qx, qy)/(q·φ(x, y))` over the samples.
pub fn estimate_lipschitz<T: Real>(
    control: &ControlFunction<T>,
    q: T,
    samples: &[(Element<T>, Element<T>)],
) -> Result<ExtReal<T>> {
    let mut sup = ExtReal::zero();
    for (x, y) in samples {
        let base = control.eval(x, y)?;
        let scaled = control.eval(&x.scale_real(q), &y.scale_real(q))?;
        sup = sup.max(ExtReal::ratio(scaled, q * base));
    }
    Ok(sup)
}

/// Direction selection from sampled points.
///
/// Analytic kinds return the analytic `L` with the measurement attached.
/// Custom controls use the measured `L` times [`LIPSCHITZ_SAFETY`] and pick
/// the smaller of the two when both directions contract.
pub fn select_direction_empirical<T: Real>(
    control: &ControlFunction<T>,
    samples: &[(Element<T>, Element<T>)],
) -> Result<ScalingDirection<T>> {
    if samples.is_empty() {
        return Err(Error::OutOfRange(
            "empirical direction selection needs samples".into(),
        ));
    }
    let up = estimate_lipschitz(control, Direction::Up.q(), samples)?;
    let down = estimate_lipschitz(control, Direction::Down.q(), samples)?;
    if let ControlFunction::PowerSum { .. } | ControlFunction::PowerProduct { .. } = control {
        let mut dir = select_direction(control)?;
        dir.measured_lipschitz = match dir.direction {
            Direction::Up => up.finite(),
            Direction::Down => down.finite(),
        };
        return Ok(dir);
    }
    let safety = T::lit(LIPSCHITZ_SAFETY);
    let candidates = [(Direction::Up, up), (Direction::Down, down)];
    let best = candidates
        .iter()
        .filter_map(|(d, l)| l.finite().map(|v| (*d, v, v * safety)))
        .filter(|(_, _, padded)| *padded < T::one() && *padded > T::zero())
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal));
    match best {
        Some((direction, measured, padded)) => Ok(ScalingDirection {
            direction,
            lipschitz: padded,
            measured_lipschitz: Some(measured),
        }),
        None => Err(Error::NoContraction {
            lipschitz_up: up.finite().map_or(f64::INFINITY, |v| (v * safety).as_f64()),
            lipschitz_down: down
                .finite()
                .map_or(f64::INFINITY, |v| (v * safety).as_f64()),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizerOptions {
    pub max_n: usize,
    pub tol_rel: f64,
}

impl Default for StabilizerOptions {
    fn default() -> Self {
        Self {
            max_n: 48,
            tol_rel: 1e-10,
        }
    }
}

impl StabilizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_n == 0 {
            return Err(Error::OutOfRange("stabilizer.max_n must be >= 1".into()));
        }
        if !(self.tol_rel > 0.0 && self.tol_rel.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "stabilizer.tol_rel must be > 0, got {}",
                self.tol_rel
            )));
        }
        Ok(())
    }
}

/// Orbit `aₙ = q⁻ⁿ f(qⁿ x)` of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationTrace<T: Real> {
    pub x: Element<T>,
    /// `a₀ = f(x), a₁, …, a_{n_used}`.
    pub iterates: Vec<Element<T>>,
    /// `diffs[n] = ‖aₙ₊₁ − aₙ‖`.
    pub diffs: Vec<T>,
    pub n_used: usize,
    pub converged: bool,
}

impl<T: Real> StabilizationTrace<T> {
    /// The last iterate, taken as `I(x)`.
    pub fn result(&self) -> &Element<T> {
        self.iterates.last().expect("trace holds at least f(x)")
    }
}

fn checked_size<T: Real>(e: &Element<T>, step: usize) -> Result<()> {
    let size = e.max_abs();
    if !size.is_finite() || size > T::lit(OVERFLOW_LIMIT) {
        return Err(Error::Overflow {
            step,
            norm: size.as_f64(),
        });
    }
    Ok(())
}

/// Iterates `aₙ = q⁻ⁿ f(qⁿ x)` until `‖aₙ₊₁ − aₙ‖ ≤ tol_rel·max(1, ‖aₙ‖)`
/// or `n_used = max_n`.
pub fn stabilize_point<T, M>(
    f: &M,
    dir: &ScalingDirection<T>,
    x: &Element<T>,
    opts: &StabilizerOptions,
) -> Result<StabilizationTrace<T>>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    opts.validate()?;
    let q = dir.q();
    let tol = T::lit(opts.tol_rel);
    let growth_slack = T::one() + T::lit(1e-9);

    let first = f.eval(x)?;
    checked_size(&first, 0)?;
    let mut prev_norm = first.norm()?;
    let mut iterates = vec![first];
    let mut diffs: Vec<T> = Vec::with_capacity(opts.max_n);
    let mut growing = 0usize;
    let mut converged = false;

    for n in 1..=opts.max_n {
        let up = q.powi(n as i32);
        let arg = x.scale_real(up);
        checked_size(&arg, n)?;
        let image = f.eval(&arg)?;
        checked_size(&image, n)?;
        let next = image.scale_real(up.recip());
        let last = iterates.last().expect("non-empty");
        let diff = next.checked_sub(last)?.norm()?;

        if let Some(&before) = diffs.last() {
            if diff > before * growth_slack {
                growing += 1;
                if growing >= NON_CAUCHY_RUN {
                    return Err(Error::NonCauchy { step: n });
                }
            } else {
                growing = 0;
            }
        }
        diffs.push(diff);
        let next_norm = next.norm()?;
        iterates.push(next);
        if diff <= tol * prev_norm.max(T::one()) {
            converged = true;
            break;
        }
        prev_norm = next_norm;
    }

    let n_used = iterates.len() - 1;
    Ok(StabilizationTrace {
        x: x.clone(),
        iterates,
        diffs,
        n_used,
        converged,
    })
}

/// `I` as a map: each evaluation runs [`stabilize_point`].
#[derive(Debug, Clone)]
pub struct StabilizedMap<M, T> {
    f: M,
    dir: ScalingDirection<T>,
    opts: StabilizerOptions,
}

impl<M, T: Real> StabilizedMap<M, T> {
    pub fn new(f: M, dir: ScalingDirection<T>, opts: StabilizerOptions) -> Self {
        Self { f, dir, opts }
    }

    pub fn inner(&self) -> &M {
        &self.f
    }

    pub fn direction(&self) -> &ScalingDirection<T> {
        &self.dir
    }

    pub fn options(&self) -> &StabilizerOptions {
        &self.opts
    }
}

impl<M, T> CandidateMap<T> for StabilizedMap<M, T>
where
    T: Real,
    M: CandidateMap<T>,
{
    fn spec(&self) -> crate::algebra::AlgebraSpec {
        self.f.spec()
    }

    fn eval(&self, x: &Element<T>) -> Result<Element<T>> {
        Ok(stabilize_point(&self.f, &self.dir, x, &self.opts)?
            .result()
            .clone())
    }
}

/// `L^{1−i}/(1 − L)·φ(x, 0)`.
pub fn error_bound<T: Real>(
    dir: &ScalingDirection<T>,
    control: &ControlFunction<T>,
    x: &Element<T>,
) -> Result<T> {
    Ok(dir.bound_factor() * control.eval(x, &Element::zero(x.spec()))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryRegime {
    /// Power-sum control with `0 < r < 1`.
    SumRLt1,
    /// Power-sum control with `r > 1`.
    SumRGt1,
    /// Power-product control, `r ≠ 1/2`.
    Product,
}

/// Coefficient of `θ‖x‖^r` in the stability bound, derived by substituting
/// the selected `L` into `L^{1−i}/(1 − L)`, next to the printed corollary
/// coefficient.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CorollaryConstant {
    pub regime: CorollaryRegime,
    pub r: f64,
    pub derived: f64,
    pub printed: f64,
    /// Printed coefficient is negative, which no norm bound can be.
    pub sign_anomaly: bool,
    /// Printed coefficient is at least the derived one.
    pub printed_is_looser: bool,
}

pub fn corollary_constant<T: Real>(r: T, regime: CorollaryRegime) -> Result<CorollaryConstant> {
    let one = T::one();
    let two = T::lit(2.0);
    let in_range = match regime {
        CorollaryRegime::SumRLt1 => r > T::zero() && r < one,
        CorollaryRegime::SumRGt1 => r > one && r.is_finite(),
        CorollaryRegime::Product => r > T::zero() && r.is_finite() && r != T::lit(0.5),
    };
    if !in_range {
        return Err(Error::OutOfRange(format!(
            "r = {r} is outside the {regime:?} regime"
        )));
    }
    let two_r = two.pow_nonneg(r);
    let (derived, stated) = match regime {
        CorollaryRegime::SumRLt1 => {
            let dir = select_direction(&ControlFunction::PowerSum { theta: one, r })?;
            (dir.bound_factor(), two / (two - two_r))
        }
        CorollaryRegime::SumRGt1 => {
            let dir = select_direction(&ControlFunction::PowerSum { theta: one, r })?;
            (dir.bound_factor(), two_r / (two - two_r))
        }
        // φ(x, 0) = 0, so the bound collapses and f is itself the involution
        CorollaryRegime::Product => (T::zero(), T::zero()),
    };
    Ok(CorollaryConstant {
        regime,
        r: r.as_f64(),
        derived: derived.as_f64(),
        printed: stated.as_f64(),
        sign_anomaly: stated < T::zero(),
        printed_is_looser: stated >= derived,
    })
}

/// Finite-depth approximation of `I(I(x))` compared with `x`: both limits
/// are cut at `opts.max_n`.
pub fn involutivity_residual<T, M>(
    f: &M,
    dir: &ScalingDirection<T>,
    x: &Element<T>,
    opts: &StabilizerOptions,
) -> Result<T>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    let y = stabilize_point(f, dir, x, opts)?;
    let z = stabilize_point(f, dir, y.result(), opts)?;
    z.result().checked_sub(x)?.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraSpec;
    use crate::maps::{ApproxMap, InvolutionKind, Perturbation, RawMap};
    use crate::scalar::scalar;

    fn sc(v: f64) -> Element<f64> {
        Element::scalar(scalar(v, 0.0)).unwrap()
    }

    fn scalar_f(theta: f64) -> ApproxMap<f64> {
        ApproxMap::new(
            AlgebraSpec::scalar(),
            InvolutionKind::Conjugation,
            Perturbation::fixed(theta, 0.5, sc(1.0)).unwrap(),
        )
        .unwrap()
    }

    fn m2(re: [f64; 4]) -> Element<f64> {
        Element::from_real(AlgebraSpec::matrix(2).unwrap(), &re).unwrap()
    }

    #[test]
    fn control_eval_examples() {
        let phi = ControlFunction::PowerSum { theta: 0.3, r: 0.5 };
        assert!((phi.eval(&sc(4.0), &sc(0.0)).unwrap() - 0.6).abs() < 1e-15);
        let prod = ControlFunction::PowerProduct { theta: 2.0, r: 0.3 };
        assert_eq!(prod.eval(&sc(4.0), &sc(0.0)).unwrap(), 0.0);
        let zero = ControlFunction::PowerSum { theta: 0.0, r: 0.5 };
        assert_eq!(zero.eval(&sc(4.0), &sc(7.0)).unwrap(), 0.0);
        let p = Element::<f64>::zero(AlgebraSpec::pointwise(2).unwrap());
        assert!(phi.eval(&sc(1.0), &p).is_err());
    }

    #[test]
    fn select_direction_examples() {
        let d = select_direction(&ControlFunction::PowerSum {
            theta: 1.0_f64,
            r: 0.5,
        })
        .unwrap();
        assert_eq!((d.direction, d.index()), (Direction::Up, 0));
        assert_eq!(d.q(), 2.0);
        assert!((d.lipschitz - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((d.lipschitz - 2f64.powf(-0.5)).abs() < 1e-16);

        let d = select_direction(&ControlFunction::PowerSum { theta: 1.0, r: 3.0 }).unwrap();
        assert_eq!(
            (d.direction, d.q(), d.lipschitz),
            (Direction::Down, 0.5, 0.25)
        );

        assert!(matches!(
            select_direction(&ControlFunction::PowerSum {
                theta: 1.0,
                r: 1.0f64
            }),
            Err(Error::NoContraction { .. })
        ));
        assert!(matches!(
            select_direction(&ControlFunction::PowerProduct {
                theta: 1.0,
                r: 0.5f64
            }),
            Err(Error::NoContraction { .. })
        ));
        let d = select_direction(&ControlFunction::PowerProduct {
            theta: 1.0,
            r: 0.25,
        })
        .unwrap();
        assert_eq!(d.direction, Direction::Up);
        assert!((d.lipschitz - 2f64.powf(-0.5)).abs() < 1e-16);
        let d = select_direction(&ControlFunction::PowerProduct { theta: 1.0, r: 1.0 }).unwrap();
        assert_eq!((d.direction, d.lipschitz), (Direction::Down, 0.5));
    }

    #[test]
    fn empirical_direction_for_custom_control() {
        // φ(x, y) = ‖x‖^{3/2} + ‖y‖^{3/2} scales like the power sum with r = 3/2
        let custom = ControlFunction::Custom(CustomControl::new(
            "r15",
            |x: &Element<f64>, y: &Element<f64>| Ok(x.norm()?.powf(1.5) + y.norm()?.powf(1.5)),
        ));
        assert!(select_direction(&custom).is_err());
        let samples = vec![(sc(1.0), sc(2.0)), (sc(0.3), sc(0.0)), (sc(5.0), sc(5.0))];
        let d = select_direction_empirical(&custom, &samples).unwrap();
        assert_eq!(d.direction, Direction::Down);
        let measured = d.measured_lipschitz.unwrap();
        assert!((measured - 2f64.powf(-0.5)).abs() < 1e-12);
        assert!((d.lipschitz - LIPSCHITZ_SAFETY * measured).abs() < 1e-15);

        let flat = ControlFunction::Custom(CustomControl::new(
            "linear",
            |x: &Element<f64>, _: &Element<f64>| x.norm(),
        ));
        assert!(matches!(
            select_direction_empirical(&flat, &samples),
            Err(Error::NoContraction { .. })
        ));

        let analytic = ControlFunction::PowerSum { theta: 0.3, r: 0.5 };
        let d = select_direction_empirical(&analytic, &samples).unwrap();
        assert!((d.measured_lipschitz.unwrap() - d.lipschitz).abs() < 1e-12);
    }

    #[test]
    fn exact_involution_is_fixed_by_the_stabilizer() {
        let f = ApproxMap::exact(AlgebraSpec::matrix(2).unwrap(), InvolutionKind::Adjoint).unwrap();
        let dir = select_direction(&ControlFunction::PowerSum { theta: 0.3, r: 0.5 }).unwrap();
        let x = m2([1.0, -2.0, 0.5, 3.0]);
        let t = stabilize_point(&f, &dir, &x, &StabilizerOptions::default()).unwrap();
        assert!(t.converged);
        assert_eq!(t.diffs, vec![0.0]);
        assert!(t.iterates.iter().all(|a| *a == x.conj_transpose()));
    }

    #[test]
    fn scalar_orbit_matches_closed_form() {
        let dir = select_direction(&ControlFunction::PowerSum { theta: 0.3, r: 0.5 }).unwrap();
        let opts = StabilizerOptions {
            max_n: 30,
            tol_rel: 1e-300,
        };
        let t = stabilize_point(&scalar_f(0.1), &dir, &sc(4.0), &opts).unwrap();
        assert!(!t.converged);
        assert_eq!(t.n_used, 30);
        for (n, a) in t.iterates.iter().enumerate() {
            let expected = 4.0 + 0.2 * 2f64.powf(-(n as f64) / 2.0);
            assert!((a.data()[0].re - expected).abs() < 1e-14, "n = {n}");
        }
        for (n, d) in t.diffs.iter().enumerate().take(20) {
            let expected = 0.2 * (1.0 - 2f64.powf(-0.5)) * 2f64.powf(-(n as f64) / 2.0);
            assert!((d - expected).abs() <= 1e-15 + 1e-9 * expected, "n = {n}");
        }
    }

    #[test]
    fn stabilizer_at_zero() {
        let dir = select_direction(&ControlFunction::PowerSum { theta: 0.3, r: 0.5 }).unwrap();
        let t = stabilize_point(
            &scalar_f(0.1),
            &dir,
            &sc(0.0),
            &StabilizerOptions::default(),
        )
        .unwrap();
        assert!(t.iterates.iter().all(|a| a.is_zero()));
    }

    #[test]
    fn stabilizer_failure_modes() {
        let up = select_direction(&ControlFunction::PowerSum { theta: 0.3, r: 0.5 }).unwrap();
        // δ grows like ‖x‖², so q⁻ⁿδ(qⁿx) blows up along q = 2
        let wrong = ApproxMap::new(
            AlgebraSpec::scalar(),
            InvolutionKind::Conjugation,
            Perturbation::fixed(0.1, 2.0, sc(1.0)).unwrap(),
        )
        .unwrap();
        let err = stabilize_point(
            &wrong,
            &up,
            &sc(3.0),
            &StabilizerOptions {
                max_n: 48,
                tol_rel: 1e-10,
            },
        );
        assert!(matches!(err, Err(Error::NonCauchy { .. })));

        let big = RawMap::new(AlgebraSpec::scalar(), |x: &Element<f64>| {
            Ok(if x.norm()? > 1e12 {
                x.scale_real(1e295)
            } else {
                x.conj_entries()
            })
        })
        .unwrap();
        let opts = StabilizerOptions {
            max_n: 200,
            tol_rel: 1e-10,
        };
        assert!(matches!(
            stabilize_point(&big, &up, &sc(1e13), &opts),
            Err(Error::Overflow { step: 0, .. })
        ));
        assert!(stabilize_point(
            &big,
            &up,
            &sc(1.0),
            &StabilizerOptions {
                max_n: 0,
                tol_rel: 1e-10
            }
        )
        .is_err());
    }

    #[test]
    fn error_bound_examples() {
        let up = select_direction(&ControlFunction::PowerSum { theta: 0.1, r: 0.5 }).unwrap();
        let b = error_bound(
            &up,
            &ControlFunction::PowerSum { theta: 0.1, r: 0.5 },
            &sc(4.0),
        )
        .unwrap();
        assert!((b - (1.0 + 2f64.sqrt()) * 0.2).abs() < 1e-15);
        assert!((b - 0.482843).abs() < 1e-6);

        let down = ScalingDirection::new(Direction::Down, 0.25).unwrap();
        // φ(x, 0) = 1 at ‖x‖ = 1 for θ = 1
        let b = error_bound(
            &down,
            &ControlFunction::PowerSum { theta: 1.0, r: 3.0 },
            &sc(1.0),
        )
        .unwrap();
        assert!((b - 4.0 / 3.0).abs() < 1e-15);

        let prod = ControlFunction::PowerProduct {
            theta: 5.0,
            r: 0.25,
        };
        let dir = select_direction(&prod).unwrap();
        assert_eq!(
            error_bound(&dir, &prod, &m2([1.0, 2.0, 3.0, 4.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn corollary_constant_examples() {
        let c = corollary_constant(0.5f64, CorollaryRegime::SumRLt1).unwrap();
        assert!((c.derived - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((c.derived - 2.41421).abs() < 1e-5);
        assert!((c.printed - 3.41421).abs() < 1e-5);
        assert!(c.printed_is_looser && !c.sign_anomaly);

        let c = corollary_constant(2.0f64, CorollaryRegime::SumRGt1).unwrap();
        assert_eq!((c.derived, c.printed), (2.0, -2.0));
        assert!(c.sign_anomaly);

        let c = corollary_constant(0.1f64, CorollaryRegime::Product).unwrap();
        assert_eq!(c.derived, 0.0);

        assert!(corollary_constant(1.5f64, CorollaryRegime::SumRLt1).is_err());
        assert!(corollary_constant(0.5f64, CorollaryRegime::SumRGt1).is_err());
        assert!(corollary_constant(0.5f64, CorollaryRegime::Product).is_err());
    }

    #[test]
    fn involutivity_residual_examples() {
        let spec = AlgebraSpec::matrix(2).unwrap();
        let dir = select_direction(&ControlFunction::PowerSum { theta: 0.3, r: 0.5 }).unwrap();
        let opts = StabilizerOptions::default();
        let exact = ApproxMap::exact(spec, InvolutionKind::Adjoint).unwrap();
        let x = m2([1.0, -2.0, 0.5, 3.0]);
        assert!(involutivity_residual(&exact, &dir, &x, &opts).unwrap() < 1e-12);
        assert_eq!(
            involutivity_residual(&exact, &dir, &Element::zero(spec), &opts).unwrap(),
            0.0
        );

        let u = m2([0.3, -0.1, 0.7, 0.2]);
        let f = ApproxMap::new(
            spec,
            InvolutionKind::Adjoint,
            Perturbation::fixed(0.1, 0.5, u).unwrap(),
        )
        .unwrap();
        assert!(involutivity_residual(&f, &dir, &x, &opts).unwrap() <= 1e-6);
    }
}
