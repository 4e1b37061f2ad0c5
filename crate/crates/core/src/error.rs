use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("cone must have between 1 and d active coordinates")]
    EmptyCone,
    #[error("active coordinate {index} out of range for dimension {dim}")]
    ActiveIndexOutOfRange { index: usize, dim: usize },
    #[error("active coordinate {0} listed twice")]
    DuplicateActiveIndex(usize),
    #[error("expected {expected} exponents, got {got}")]
    ExponentCount { expected: usize, got: usize },
    #[error("exponents must be positive (got {0})")]
    NonPositiveExponent(f64),
    #[error("point has {got} coordinates, weight expects {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("point lies outside the cone: coordinate {index} is {value}")]
    PointOutsideCone { index: usize, value: f64 },
    #[error("quadrature budget {got} is below the minimum of {min} nodes")]
    BudgetTooSmall { got: usize, min: usize },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("measure argument must be positive, got {0}")]
    NonPositiveMeasure(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid box leaves the cone closure along coordinate {0}")]
    GridOutsideCone(usize),
    #[error("samples do not vanish on the box boundary (max |f| = {0} on a free face)")]
    SupportNotCompact(f64),
    #[error("zero function")]
    ZeroFunction,
    #[error("threshold list is empty")]
    EmptyThresholds,
    #[error("thresholds must be positive and strictly increasing")]
    InvalidThresholds,
    #[error("composition map must be increasing on the range of the function")]
    NonIncreasingMap,
    #[error("exponent p must lie in [1, inf), got {0}")]
    ExponentOutOfRange(f64),

    #[error("invalid radial profile: {0}")]
    InvalidRadialProfile(String),
    #[error("radial profile is increasing between r = {0} and the next node")]
    IncreasingProfile(f64),
    #[error("invalid one-dimensional profile: {0}")]
    InvalidProfile(String),
    #[error("truncation must be positive, got {0}")]
    NonPositiveTruncation(f64),
    #[error("profile phi was not produced from the radial profile (node {node} deviates by {deviation})")]
    MismatchedProfiles { node: usize, deviation: f64 },
    #[error("coefficient a = {a} must lie in (0, {max}]")]
    CoefficientOutOfRange { a: f64, max: f64 },

    #[error("q must exceed 1 (got {0})")]
    ExponentNotAboveOne(f64),
    #[error("beta must lie in (0, 1] (got {0})")]
    BetaOutOfRange(f64),
    #[error("grid needs at least 16 cells (got {0})")]
    TooFewCells(usize),
    #[error("breakpoint tau = {tau} must lie in (0, {truncation})")]
    BreakpointOutOfRange { tau: f64, truncation: f64 },
    #[error("refinement schedule must be strictly increasing and nonempty")]
    InvalidSchedule,
    #[error("optimizer did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        partial: Box<crate::moser::MoserReport>,
    },
    #[error("value changed by {difference} when the truncation was doubled")]
    TruncationNotConverged {
        difference: f64,
        partial: Box<crate::moser::MoserReport>,
    },
    #[error("report was computed for q = {report_q}, but the weight has D = {dimension}")]
    ExponentMismatch { report_q: f64, dimension: f64 },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
