//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,
    #[error("circle radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("R_alpha parameter must satisfy -1 < alpha <= 1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("R_s smoothness parameter must be >= 1, got {0}")]
    SmoothnessTooLow(i32),
    #[error("R-conjunction join requires s >= 2, got {0}")]
    ConjunctionOrderTooLow(i32),
    #[error("R-equivalence order must be >= 1, got {0}")]
    ReqOrderTooLow(i32),
    #[error("MVP exponent must be >= 1, got {0}")]
    MvpExponentTooLow(i32),
    #[error("curve quadrature needs at least {min} points, got {got}")]
    TooFewQuadraturePoints { min: usize, got: usize },
    #[error("polygon loop {loop_index} has {got} vertices; at least 3 required")]
    TooFewVertices { loop_index: usize, got: usize },
    #[error("polygon loop {loop_index} has coincident consecutive vertices at {vertex}")]
    RepeatedVertex { loop_index: usize, vertex: usize },
    #[error("polygon loop {loop_index} orientation is wrong: outer loop must be counterclockwise, inner loops clockwise")]
    BadOrientation { loop_index: usize },
    #[error("transfinite interpolant needs at least one piece")]
    EmptyTransfinite,
    #[error("transfinite exponent must be >= 1, got {0}")]
    TransfiniteExponentTooLow(i32),
    #[error("dimension {0} unsupported; expected 1..=4")]
    BadDimension(usize),
    #[error("curve is not closed: c(0) != c(1)")]
    CurveNotClosed,
    #[error("curve tangent vanishes at parameter t={0}")]
    CurveTangentVanishes(f64),
    #[error("failed to read polygon file: {0}")]
    PolygonIo(String),
    #[error("polygon file: bad vertex line {line}: {content:?}")]
    PolygonParse { line: usize, content: String },
}

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("loss evaluated to a non-finite value: {0}")]
    NonFiniteLoss(f64),
    #[error("gradient component {index} is non-finite ({value})")]
    NonFiniteGradient { index: usize, value: f64 },
    #[error("field evaluation produced a non-finite value at {point:?}")]
    NonFiniteEval { point: Vec<f64> },
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("network needs at least one hidden layer and nonzero widths")]
    BadArchitecture,
    #[error("input dimension mismatch: network expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter length mismatch: expected {expected}, got {got}")]
    ParamLengthMismatch { expected: usize, got: usize },
    #[error("non-finite gradient in optimizer step (first bad index {index})")]
    NonFiniteGradient { index: usize },
    #[error("checkpoint I/O failed: {0}")]
    CheckpointIo(String),
    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot place {requested} points in the domain with margin {margin}")]
    SamplingFailed { requested: usize, margin: f64 },
    #[error("non-finite residual at point {point:?}")]
    NonFiniteResidual { point: Vec<f64> },
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("degenerate trial: mean square of the field fell below 1e-30")]
    DegenerateTrial,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("{0}")]
    Config(String),
}
