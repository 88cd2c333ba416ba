//! Small worked examples of the fixed-point alternative on the real line.

use serde::Serialize;
use stabilizer_core::fixedpoint::{AbsoluteDifference, DiscreteMetric};
use stabilizer_core::{iterate_alternative, AlternativeOptions, AlternativeOutcome, ExtReal};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum DemoOutcome {
    Converged {
        fixed_point: f64,
        n0: usize,
        iterations: usize,
        aposteriori_bound: ExtReal<f64>,
        /// `d(x₀, y*)` over the a-posteriori bound; 1 when the bound is attained.
        bound_ratio: ExtReal<f64>,
    },
    AllInfinite {
        inspected: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoCase {
    pub name: &'static str,
    pub map: &'static str,
    pub start: f64,
    pub lipschitz: f64,
    pub outcome: DemoOutcome,
}

fn summarize(start: f64, out: AlternativeOutcome<f64, f64>) -> DemoOutcome {
    match out {
        AlternativeOutcome::Converged {
            fixed_point,
            n0,
            iterations,
            aposteriori_bound,
            ..
        } => DemoOutcome::Converged {
            fixed_point,
            n0,
            iterations,
            aposteriori_bound,
            bound_ratio: match aposteriori_bound {
                ExtReal::Finite(b) => ExtReal::ratio((start - fixed_point).abs(), b),
                ExtReal::Infinite => ExtReal::zero(),
            },
        },
        AlternativeOutcome::AllInfinite { orbit_distances } => DemoOutcome::AllInfinite {
            inspected: orbit_distances.len(),
        },
    }
}

/// Affine contraction `t ↦ t/2 + 1` from 0, the translation `t ↦ t + 1`
/// under the discrete metric, and the identity.
pub fn demo_fixedpoint() -> Result<Vec<DemoCase>, CliError> {
    let exact = AlternativeOptions {
        max_iter: 200,
        tol: 0.0,
        ..AlternativeOptions::default()
    };
    let affine = iterate_alternative(
        |t: &f64| 0.5 * t + 1.0,
        0.0,
        0.5,
        &AbsoluteDifference,
        exact,
    )?;
    let discrete = iterate_alternative(
        |t: &f64| t + 1.0,
        0.0,
        0.5,
        &DiscreteMetric,
        AlternativeOptions {
            max_iter: 32,
            ..AlternativeOptions::default()
        },
    )?;
    let identity = iterate_alternative(|t: &f64| *t, 3.0, 0.5, &AbsoluteDifference, exact)?;
    Ok(vec![
        DemoCase {
            name: "affine",
            map: "t/2 + 1",
            start: 0.0,
            lipschitz: 0.5,
            outcome: summarize(0.0, affine),
        },
        DemoCase {
            name: "discrete",
            map: "t + 1",
            start: 0.0,
            lipschitz: 0.5,
            outcome: summarize(0.0, discrete),
        },
        DemoCase {
            name: "identity",
            map: "t",
            start: 3.0,
            lipschitz: 0.5,
            outcome: summarize(3.0, identity),
        },
    ])
}
