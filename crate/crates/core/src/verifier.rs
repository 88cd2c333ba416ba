//! Sampled verification of the stability hypotheses and of the properties
//! of the stabilized map.
//!
//! Every supremum here is taken over the declared probe set only. Sample
//! enumeration order is fixed, work is spread over the rayon pool, and the
//! reductions keep the first (lowest index) sample on ties, so reports are
//! reproducible regardless of thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Element;
use crate::error::Result;
use crate::fixedpoint::ExtReal;
use crate::maps::{
    antimul_defect, cstar_defect, cstar_defect_reversed, jensen_defect, CandidateMap,
    LambdaSampler, LambdaStage, SampledLambda,
};
use crate::scalar::{Real, Scalar};
use crate::stabilizer::{
    error_bound, involutivity_residual, stabilize_point, ControlFunction, ScalingDirection,
    StabilizationTrace, StabilizedMap, StabilizerOptions,
};

/// Slack on the `‖I − f‖ ≤ bound` ratio.
pub const BOUND_RATIO_SLACK: f64 = 1e-9;
/// Absolute tolerance on `‖I − f‖` where the bound is zero.
pub const BOUND_ABS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Jensen,
    Antimultiplicative,
    Involutive,
    CStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `sup ‖defect‖/φ` with `0/0 = 0` and `positive/0 = ∞`.
    Ratio,
    /// `sup` of an absolute residual.
    AbsoluteResidual,
}

/// Sample attaining a reported extremum. `y_index = None` together with
/// `y = Some(0)` marks the zero partner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<T: Real> {
    pub x_index: usize,
    pub x: Element<T>,
    pub y_index: Option<usize>,
    pub y: Option<Element<T>>,
    #[serde(serialize_with = "serialize_lambda")]
    pub lambda: Option<Scalar<T>>,
}

fn serialize_lambda<T: Real, S: serde::Serializer>(
    lambda: &Option<Scalar<T>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    lambda.map(|z| [z.re.as_f64(), z.im.as_f64()]).serialize(s)
}

impl<T: Real> Witness<T> {
    fn single(x_index: usize, x: &Element<T>) -> Self {
        Self {
            x_index,
            x: x.clone(),
            y_index: None,
            y: None,
            lambda: None,
        }
    }

    pub fn y_is_zero(&self) -> bool {
        self.y.as_ref().is_some_and(|y| y.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisEntry<T: Real> {
    pub name: Hypothesis,
    pub measure: Measure,
    pub sup: ExtReal<T>,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<Witness<T>>,
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport<T: Real> {
    pub entries: Vec<HypothesisEntry<T>>,
    /// `sup | ‖f(x)x‖ − ‖x‖² |/φ(x, x)`, informational only.
    pub cstar_reversed_sup: ExtReal<T>,
}

impl<T: Real> DefectReport<T> {
    pub fn entry(&self, name: Hypothesis) -> &HypothesisEntry<T> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .expect("every hypothesis is scanned")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub stabilizer: StabilizerOptions,
    /// Absolute tolerance for the involutivity residual.
    pub involutive_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            stabilizer: StabilizerOptions::default(),
            involutive_tol: 1e-6,
        }
    }
}

/// A pair sample: probe index and partner (`None` = the zero element).
type Pair = (usize, Option<usize>);

type JensenRow<T> = (ExtReal<T>, (Pair, Scalar<T>));

/// `(i, 0)` then `(i, j)` for `j ≥ i`, row by row.
fn unordered_pairs(n: usize) -> Vec<Pair> {
    (0..n)
        .flat_map(|i| std::iter::once((i, None)).chain((i..n).map(move |j| (i, Some(j)))))
        .collect()
}

/// `(i, 0)` then `(i, j)` for every `j`, row by row.
fn ordered_pairs(n: usize) -> Vec<Pair> {
    (0..n)
        .flat_map(|i| std::iter::once((i, None)).chain((0..n).map(move |j| (i, Some(j)))))
        .collect()
}

fn partner<'a, T: Real>(
    probes: &'a [Element<T>],
    zero: &'a Element<T>,
    j: Option<usize>,
) -> &'a Element<T> {
    j.map_or(zero, |j| &probes[j])
}

/// Keeps the first maximum; `None` entries are skipped.
fn first_max<T: Real, W>(values: Vec<(ExtReal<T>, W)>) -> (ExtReal<T>, Option<W>) {
    let mut best = ExtReal::zero();
    let mut arg = None;
    for (v, w) in values {
        if arg.is_none() || v > best {
            best = v;
            arg = Some(w);
        }
    }
    (best, arg)
}

fn first_max_real<T: Real, W>(values: Vec<(T, W)>) -> (T, Option<W>) {
    let (best, arg) = first_max(
        values
            .into_iter()
            .map(|(v, w)| (ExtReal::Finite(v), w))
            .collect(),
    );
    (best.finite().unwrap_or_else(T::infinity), arg)
}

fn common_spec<T: Real>(probes: &[Element<T>]) -> Result<crate::algebra::AlgebraSpec> {
    let first = probes
        .first()
        .ok_or_else(|| crate::error::Error::OutOfRange("probe set must be non-empty".into()))?;
    for p in probes {
        if p.spec() != first.spec() {
            return Err(crate::error::Error::SpecMismatch {
                left: first.spec(),
                right: p.spec(),
            });
        }
    }
    Ok(first.spec())
}

/// Scans the four stability hypotheses over the probe set.
///
/// * Jensen: `‖D_λf(x, y)‖/φ(x, y)` over unordered probe pairs, pairs with 0,
///   and every arc-stage `λ`.
/// * anti-multiplicativity: `‖f(xy) − f(y)f(x)‖/φ(x, y)` over ordered pairs and pairs with 0.
/// * involutivity: `‖I(I(x)) − x‖` per probe against an absolute tolerance.
/// * C*-identity: `| ‖xf(x)‖ − ‖x‖² |/φ(x, x)` per probe.
pub fn scan_hypotheses<T, M>(
    f: &M,
    control: &ControlFunction<T>,
    dir: &ScalingDirection<T>,
    lambdas: &LambdaSampler,
    probes: &[Element<T>],
    opts: &ScanOptions,
) -> Result<DefectReport<T>>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    let spec = common_spec(probes)?;
    let zero = Element::zero(spec);
    let arc: Vec<Scalar<T>> = lambdas
        .sample::<T>()?
        .into_iter()
        .filter(|l| l.stage == LambdaStage::Arc)
        .map(|l| l.value)
        .collect();

    let pairs = unordered_pairs(probes.len());
    let jensen_rows: Vec<Vec<JensenRow<T>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (&probes[i], partner(probes, &zero, j));
            let phi = control.eval(x, y)?;
            arc.iter()
                .map(|&lambda| {
                    let d = jensen_defect(f, lambda, x, y)?.norm()?;
                    Ok((ExtReal::ratio(d, phi), ((i, j), lambda)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let jensen_samples = pairs.len() * arc.len();
    let (jensen_sup, jensen_arg) = first_max(jensen_rows.into_iter().flatten().collect());

    let pairs = ordered_pairs(probes.len());
    let antimul_rows: Vec<(ExtReal<T>, Pair)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (&probes[i], partner(probes, &zero, j));
            let d = antimul_defect(f, x, y)?.norm()?;
            Ok((ExtReal::ratio(d, control.eval(x, y)?), (i, j)))
        })
        .collect::<Result<_>>()?;
    let antimul_samples = antimul_rows.len();
    let (antimul_sup, antimul_arg) = first_max(antimul_rows);

    let per_probe: Vec<(T, ExtReal<T>, ExtReal<T>)> = probes
        .par_iter()
        .map(|x| {
            let involutive = involutivity_residual(f, dir, x, &opts.stabilizer)?;
            let phi = control.eval(x, x)?;
            let cstar = ExtReal::ratio(cstar_defect(f, x)?, phi);
            let cstar_rev = ExtReal::ratio(cstar_defect_reversed(f, x)?, phi);
            Ok((involutive, cstar, cstar_rev))
        })
        .collect::<Result<_>>()?;
    let (involutive_sup, involutive_arg) = first_max_real(
        per_probe
            .iter()
            .enumerate()
            .map(|(i, p)| (p.0, i))
            .collect(),
    );
    let (cstar_sup, cstar_arg) = first_max(
        per_probe
            .iter()
            .enumerate()
            .map(|(i, p)| (p.1, i))
            .collect(),
    );
    let cstar_reversed_sup = per_probe
        .iter()
        .fold(ExtReal::zero(), |acc, p| acc.max(p.2));

    let pair_witness = |(i, j): Pair, lambda: Option<Scalar<T>>| Witness {
        x_index: i,
        x: probes[i].clone(),
        y_index: j,
        y: Some(partner(probes, &zero, j).clone()),
        lambda,
    };
    let ratio_entry = |name, sup: ExtReal<T>, witness, samples_used| HypothesisEntry {
        name,
        measure: Measure::Ratio,
        sup,
        tolerance: 1.0,
        pass: sup <= ExtReal::Finite(T::one()),
        witness,
        samples_used,
    };

    let entries = vec![
        ratio_entry(
            Hypothesis::Jensen,
            jensen_sup,
            jensen_arg.map(|(p, l)| pair_witness(p, Some(l))),
            jensen_samples,
        ),
        ratio_entry(
            Hypothesis::Antimultiplicative,
            antimul_sup,
            antimul_arg.map(|p| pair_witness(p, None)),
            antimul_samples,
        ),
        HypothesisEntry {
            name: Hypothesis::Involutive,
            measure: Measure::AbsoluteResidual,
            sup: ExtReal::Finite(involutive_sup),
            tolerance: opts.involutive_tol,
            pass: involutive_sup <= T::lit(opts.involutive_tol),
            witness: involutive_arg.map(|i| Witness::single(i, &probes[i])),
            samples_used: probes.len(),
        },
        ratio_entry(
            Hypothesis::CStar,
            cstar_sup,
            cstar_arg.map(|i| Witness::single(i, &probes[i])),
            probes.len(),
        ),
    ];
    Ok(DefectReport {
        entries,
        cstar_reversed_sup,
    })
}

/// Runs the stabilizer on every probe, in probe order.
pub fn stabilize_probes<T, M>(
    f: &M,
    dir: &ScalingDirection<T>,
    probes: &[Element<T>],
    opts: &StabilizerOptions,
) -> Result<Vec<StabilizationTrace<T>>>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    probes
        .par_iter()
        .map(|x| stabilize_point(f, dir, x, opts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Additivity,
    ConjHomogeneity,
    Antimultiplicativity,
    Involutivity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawEntry<T: Real> {
    pub law: Law,
    pub stage: Option<LambdaStage>,
    /// Largest defect normalized by `max(1, norms of the arguments)`.
    pub max_defect: T,
    pub witness: Option<Witness<T>>,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport<T: Real> {
    pub entries: Vec<LawEntry<T>>,
    pub tolerance: f64,
    pub tuples: usize,
    /// Probes whose stabilization hit `max_n` before the tolerance.
    pub unconverged_probes: usize,
}

impl<T: Real> LawReport<T> {
    pub fn max_defect(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.max_defect)
            .fold(T::zero(), T::max)
    }

    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, law: Law, stage: Option<LambdaStage>) -> Option<&LawEntry<T>> {
        self.entries
            .iter()
            .find(|e| e.law == law && e.stage == stage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawOptions {
    pub stabilizer: StabilizerOptions,
    /// Partners per probe for the two-argument laws: `(i, i + k mod n)` for
    /// `k = 1..=pairs_per_probe`.
    pub pairs_per_probe: usize,
    pub tol: f64,
}

impl Default for LawOptions {
    fn default() -> Self {
        Self {
            stabilizer: StabilizerOptions::default(),
            pairs_per_probe: 5,
            tol: 1e-6,
        }
    }
}

fn norm_scale<T: Real>(norms: &[T]) -> T {
    norms.iter().copied().fold(T::one(), T::max)
}

/// Measures the involution laws on `I = lim q⁻ⁿf(qⁿ·)`: additivity,
/// conjugate homogeneity for each multiplier stage, anti-multiplicativity
/// and involutivity.
pub fn verify_involution_laws<T, M>(
    f: &M,
    dir: &ScalingDirection<T>,
    lambdas: &LambdaSampler,
    probes: &[Element<T>],
    opts: &LawOptions,
) -> Result<LawReport<T>>
where
    T: Real,
    M: CandidateMap<T>,
{
    common_spec(probes)?;
    let n = probes.len();
    let stab = StabilizedMap::new(f, *dir, opts.stabilizer);
    let traces = stabilize_probes(f, dir, probes, &opts.stabilizer)?;
    let unconverged_probes = traces.iter().filter(|t| !t.converged).count();
    let images: Vec<Element<T>> = traces.into_iter().map(|t| t.result().clone()).collect();
    let norms: Vec<T> = probes.iter().map(|x| x.norm()).collect::<Result<_>>()?;
    let lams: Vec<SampledLambda<T>> = lambdas.sample()?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (1..=opts.pairs_per_probe).map(move |k| (i, (i + k) % n)))
        .collect();
    let tol = T::lit(opts.tol);

    let pair_witness = |i: usize, j: usize| Witness {
        x_index: i,
        x: probes[i].clone(),
        y_index: Some(j),
        y: Some(probes[j].clone()),
        lambda: None,
    };

    let additivity: Vec<(T, (usize, usize))> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let sum = probes[i].checked_add(&probes[j])?;
            let expected = images[i].checked_add(&images[j])?;
            let d = stab.eval(&sum)?.checked_sub(&expected)?.norm()?;
            Ok((d / norm_scale(&[norms[i], norms[j], sum.norm()?]), (i, j)))
        })
        .collect::<Result<_>>()?;

    let antimul: Vec<(T, (usize, usize))> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let prod = probes[i].checked_mul(&probes[j])?;
            let expected = images[j].checked_mul(&images[i])?;
            let d = stab.eval(&prod)?.checked_sub(&expected)?.norm()?;
            Ok((
                d / norm_scale(&[norms[i], norms[j], norms[i] * norms[j]]),
                (i, j),
            ))
        })
        .collect::<Result<_>>()?;

    let homogeneity: Vec<(T, (usize, usize))> = (0..n)
        .flat_map(|i| (0..lams.len()).map(move |l| (i, l)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(i, l)| {
            let lambda = lams[l].value;
            let d = stab
                .eval(&probes[i].scale(lambda))?
                .checked_sub(&images[i].scale(lambda.conj()))?
                .norm()?;
            Ok((
                d / norm_scale(&[norms[i], norms[i] * lambda.norm()]),
                (i, l),
            ))
        })
        .collect::<Result<_>>()?;

    let involutivity: Vec<(T, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = stab.eval(&images[i])?.checked_sub(&probes[i])?.norm()?;
            Ok((d / norm_scale(&[norms[i]]), i))
        })
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    let mut push = |law, stage, samples, (max_defect, witness): (T, Option<Witness<T>>)| {
        entries.push(LawEntry {
            law,
            stage,
            max_defect,
            witness,
            samples,
            pass: max_defect <= tol,
        });
    };

    let samples = additivity.len();
    let (m, w) = first_max_real(additivity);
    push(
        Law::Additivity,
        None,
        samples,
        (m, w.map(|(i, j)| pair_witness(i, j))),
    );

    for stage in LambdaStage::ALL {
        let rows: Vec<(T, (usize, usize))> = homogeneity
            .iter()
            .filter(|(_, (_, l))| lams[*l].stage == stage)
            .copied()
            .collect();
        let samples = rows.len();
        let (m, w) = first_max_real(rows);
        let witness = w.map(|(i, l)| Witness {
            lambda: Some(lams[l].value),
            ..Witness::single(i, &probes[i])
        });
        push(Law::ConjHomogeneity, Some(stage), samples, (m, witness));
    }

    let samples = antimul.len();
    let (m, w) = first_max_real(antimul);
    push(
        Law::Antimultiplicativity,
        None,
        samples,
        (m, w.map(|(i, j)| pair_witness(i, j))),
    );

    let samples = involutivity.len();
    let (m, w) = first_max_real(involutivity);
    push(
        Law::Involutivity,
        None,
        samples,
        (m, w.map(|i| Witness::single(i, &probes[i]))),
    );

    let tuples = entries.iter().map(|e| e.samples).sum();
    Ok(LawReport {
        entries,
        tolerance: opts.tol,
        tuples,
        unconverged_probes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeBound<T: Real> {
    pub index: usize,
    pub norm: T,
    /// `‖I(x) − f(x)‖`
    pub gap: T,
    pub bound: T,
    pub ratio: ExtReal<T>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<T: Real> {
    pub max_ratio: ExtReal<T>,
    pub witness_index: Option<usize>,
    pub probes_checked: usize,
    pub pass: bool,
    pub ratio_slack: f64,
    pub abs_tol: f64,
    /// Probes whose stabilization hit `max_n` before the tolerance.
    pub unconverged_probes: usize,
    #[serde(skip)]
    pub per_probe: Vec<ProbeBound<T>>,
}

/// Bound report from precomputed stabilization traces.
pub fn bound_report<T: Real>(
    control: &ControlFunction<T>,
    dir: &ScalingDirection<T>,
    traces: &[StabilizationTrace<T>],
) -> Result<BoundReport<T>> {
    let limit = T::one() + T::lit(BOUND_RATIO_SLACK);
    let abs_tol = T::lit(BOUND_ABS_TOL);
    let per_probe: Vec<ProbeBound<T>> = traces
        .iter()
        .enumerate()
        .map(|(index, t)| {
            let gap = t.result().checked_sub(&t.iterates[0])?.norm()?;
            let bound = error_bound(dir, control, &t.x)?;
            let ratio = ExtReal::ratio(gap, bound);
            let pass = if bound > T::zero() {
                ratio <= ExtReal::Finite(limit)
            } else {
                gap <= abs_tol
            };
            Ok(ProbeBound {
                index,
                norm: t.x.norm()?,
                gap,
                bound,
                ratio,
                pass,
            })
        })
        .collect::<Result<_>>()?;
    let (max_ratio, witness_index) =
        first_max(per_probe.iter().map(|p| (p.ratio, p.index)).collect());
    Ok(BoundReport {
        max_ratio,
        witness_index,
        probes_checked: per_probe.len(),
        pass: per_probe.iter().all(|p| p.pass),
        ratio_slack: BOUND_RATIO_SLACK,
        abs_tol: BOUND_ABS_TOL,
        unconverged_probes: traces.iter().filter(|t| !t.converged).count(),
        per_probe,
    })
}

/// Checks `‖I(x) − f(x)‖ ≤ L^{1−i}/(1 − L)·φ(x, 0)` on every probe.
pub fn verify_bound<T, M>(
    f: &M,
    control: &ControlFunction<T>,
    dir: &ScalingDirection<T>,
    probes: &[Element<T>],
    opts: &StabilizerOptions,
) -> Result<BoundReport<T>>
where
    T: Real,
    M: CandidateMap<T> + ?Sized,
{
    bound_report(control, dir, &stabilize_probes(f, dir, probes, opts)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport<T: Real> {
    pub max_gap: T,
    pub witness_index: Option<usize>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Largest `‖I₁(x) − I₂(x)‖` over the probes for two candidates around the
/// same involution.
pub fn verify_uniqueness<T, M1, M2>(
    f1: &M1,
    f2: &M2,
    dir: &ScalingDirection<T>,
    probes: &[Element<T>],
    opts: &StabilizerOptions,
    tol: f64,
) -> Result<UniquenessReport<T>>
where
    T: Real,
    M1: CandidateMap<T> + ?Sized,
    M2: CandidateMap<T> + ?Sized,
{
    let gaps: Vec<(T, usize)> = probes
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let a = stabilize_point(f1, dir, x, opts)?;
            let b = stabilize_point(f2, dir, x, opts)?;
            Ok((a.result().checked_sub(b.result())?.norm()?, i))
        })
        .collect::<Result<_>>()?;
    let (max_gap, witness_index) = first_max_real(gaps);
    Ok(UniquenessReport {
        max_gap,
        witness_index,
        tolerance: tol,
        pass: max_gap <= T::lit(tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CstarReport<T: Real> {
    /// `max | ‖xI(x)‖ − ‖x‖² |/‖x‖²`
    pub max_ratio: T,
    pub witness: Option<Witness<T>>,
    pub tolerance: f64,
    pub pass: bool,
    /// Same ratio with the product order reversed, `‖I(x)x‖`; not asserted.
    pub reversed_max_ratio: T,
}

/// Checks the C*-identity for the stabilized involution on every probe.
pub fn verify_cstar<T, M>(
    f: &M,
    dir: &ScalingDirection<T>,
    probes: &[Element<T>],
    opts: &StabilizerOptions,
    tol: f64,
) -> Result<CstarReport<T>>
where
    T: Real,
    M: CandidateMap<T>,
{
    let stab = StabilizedMap::new(f, *dir, *opts);
    let rows: Vec<(T, T)> = probes
        .par_iter()
        .map(|x| {
            let sq = x.norm()?.powi(2);
            let plain = ExtReal::ratio(cstar_defect(&stab, x)?, sq);
            let reversed = ExtReal::ratio(cstar_defect_reversed(&stab, x)?, sq);
            // sq = 0 only for x = 0, where both defects vanish
            Ok((
                plain.finite().unwrap_or(T::zero()),
                reversed.finite().unwrap_or(T::zero()),
            ))
        })
        .collect::<Result<_>>()?;
    let reversed_max_ratio = rows.iter().map(|r| r.1).fold(T::zero(), T::max);
    let (max_ratio, arg) = first_max_real(
        rows.into_iter()
            .enumerate()
            .map(|(i, r)| (r.0, i))
            .collect(),
    );
    Ok(CstarReport {
        max_ratio,
        witness: arg.map(|i| Witness::single(i, &probes[i])),
        tolerance: tol,
        pass: max_ratio <= T::lit(tol),
        reversed_max_ratio,
    })
}
