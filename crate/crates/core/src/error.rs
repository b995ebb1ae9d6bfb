//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("jet division by zero value")]
    DivisionByZero,

    #[error("{op} requires a positive operand value, got {value}")]
    NonPositiveArgument { op: &'static str, value: f64 },

    #[error("point {point:?} is outside the chart domain of model '{model}'")]
    OutOfDomain { model: String, point: Vec<f64> },

    #[error("|xi|^2 = {norm_sq} >= c = {c} at the evaluation point; mu is undefined there")]
    XiTooLarge { norm_sq: f64, c: f64 },

    #[error("metric matrix is singular or not positive definite at the evaluation point")]
    SingularMetric,

    #[error("tangent vectors have mismatched base points")]
    MismatchedBasePoints,

    #[error("degenerate vector (norm {norm} below threshold {threshold})")]
    DegenerateVector { norm: f64, threshold: f64 },

    #[error("holomorphic plane is degenerate (denominator {denom} below 1e-12)")]
    DegeneratePlane { denom: f64 },

    #[error("xi vanishes at the requested point; the operation needs xi != 0")]
    XiVanishes,

    #[error("geometry carries no complex structure; the operation needs J")]
    MissingComplexStructure,

    #[error("input 2-form is not antisymmetric (max |w_ij + w_ji| = {residual})")]
    NonAntisymmetric { residual: f64 },

    #[error("vector is not tangent to the leaf (normal component {residual} beyond tolerance)")]
    NotTangent { residual: f64 },

    #[error("no leaf parameterization is available for this model/leaf combination")]
    NoLeafChart,

    #[error("base geometry is not Ricci-flat (|Ric| = {norm}); the Einstein check does not apply")]
    BaseNotRicciFlat { norm: f64 },

    #[error("curve leaves the chart domain at parameter t = {t}")]
    CurveOutOfDomain { t: f64 },

    #[error("evaluation produced a non-finite value during {context}")]
    NonFinite { context: &'static str },

    #[error("invalid model parameters: {reason}")]
    InvalidParams { reason: String },

    #[error("unknown model '{name}'; valid kinds: flat_ball, cone_round_sphere, warped_generic")]
    UnknownModel { name: String },

    #[error("unknown check id '{name}'; valid ids: {valid}")]
    UnknownCheck { name: String, valid: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
