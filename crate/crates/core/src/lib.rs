//! Numerical stabilization of approximate involutions on finite-dimensional
//! Banach *-algebras.
//!
//! A candidate map `f` that is close to an involution, measured against a
//! control function `φ`, is driven to the exact involution
//! `I(x) = lim q⁻ⁿ f(qⁿx)` with `q ∈ {2, 1/2}` picked so that the scaling
//! operator contracts. The crate measures the hypotheses that license this,
//! runs the limit, and checks the a-priori error bound, the involution laws,
//! uniqueness and the C*-identity on sampled probes.
//!
//! Everything is generic over [`Real`]; the aliases below fix the common
//! instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod fixedpoint;
pub mod maps;
pub mod scalar;
pub mod stabilizer;
pub mod verifier;

pub use algebra::{sample_element, sample_probes, sample_unit, AlgebraKind, AlgebraSpec, Element};
pub use error::{Error, Result};
pub use fixedpoint::{
    aposteriori_bound, gmetric_check, iterate_alternative, scaling_operator, AlternativeOptions,
    AlternativeOutcome, ExtReal, FunctionSpaceMetric, GeneralizedMetric,
};
pub use maps::{
    antimul_defect, arc_root, circle_decomposition, cstar_defect, jensen_defect, ApproxMap,
    CandidateMap, InvolutionKind, LambdaSampler, LambdaStage, Perturbation, PerturbationKind,
    PerturbationSpec, RawMap, SampledLambda, Twist,
};
pub use scalar::{scalar, Real, Scalar};
pub use stabilizer::{
    corollary_constant, error_bound, select_direction, select_direction_empirical, stabilize_point,
    ControlFunction, CorollaryConstant, CorollaryRegime, Direction, ScalingDirection,
    StabilizationTrace, StabilizedMap, StabilizerOptions,
};
pub use verifier::{
    scan_hypotheses, verify_bound, verify_cstar, verify_involution_laws, verify_uniqueness,
    BoundReport, CstarReport, DefectReport, Hypothesis, LawReport, UniquenessReport,
};

/// Double-double arithmetic (about 32 significant digits).
pub type DoubleDouble = twofloat::TwoFloat;

pub type Element64 = Element<f64>;
pub type ElementDD = Element<DoubleDouble>;
pub type ApproxMap64 = ApproxMap<f64>;
pub type ApproxMapDD = ApproxMap<DoubleDouble>;
pub type ControlFunction64 = ControlFunction<f64>;
pub type ControlFunctionDD = ControlFunction<DoubleDouble>;
pub type ScalingDirection64 = ScalingDirection<f64>;
