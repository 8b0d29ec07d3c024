use core::fmt;

/// Errors raised by integration, factorization, and observer propagation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector field or matrix flow produced NaN/Inf at time `t`.
    NonFiniteDerivative { t: f64 },
    /// Step size must be positive and finite.
    InvalidStepSize { h: f64 },
    /// Integration horizon must satisfy `tf >= t0` with both finite.
    InvalidHorizon { t0: f64, tf: f64 },
    /// A matrix column became numerically rank deficient during elimination.
    SingularMatrix { column: usize },
    /// Re-orthonormalization of a subspace frame failed at time `t`.
    FrameCollapse { t: f64, column: usize },
    /// A frame was constructed from a matrix without orthonormal columns.
    NotOrthonormal { defect: f64 },
    /// Operand shapes do not conform.
    DimensionMismatch { context: &'static str },
    /// The Riccati matrix lost positive definiteness at time `t`.
    DefinitenessLoss { t: f64 },
    /// The estimation error norm exceeded the divergence threshold.
    Divergence { t: f64, norm: f64 },
    /// An averaging window contains no samples.
    EmptyWindow,
    /// The requested window does not fit into the usable horizon.
    WindowTooLong { window: f64, usable: f64 },
    /// The window length is not a multiple of the grid step.
    WindowOffGrid { window: f64, h: f64 },
    /// Model dimension below the minimum the model supports.
    ModelDimension { n: usize, min: usize },
    /// Output dimension `p` outside `1..=n`.
    OutputDimension { p: usize, n: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFiniteDerivative { t } => {
                write!(f, "non-finite derivative at t = {t}")
            }
            Self::InvalidStepSize { h } => write!(f, "invalid step size h = {h}"),
            Self::InvalidHorizon { t0, tf } => {
                write!(f, "invalid horizon [{t0}, {tf}]")
            }
            Self::SingularMatrix { column } => {
                write!(f, "rank deficiency detected at column {column}")
            }
            Self::FrameCollapse { t, column } => {
                write!(f, "frame collapse at t = {t} (column {column})")
            }
            Self::NotOrthonormal { defect } => {
                write!(f, "columns not orthonormal (defect {defect:e})")
            }
            Self::DimensionMismatch { context } => {
                write!(f, "dimension mismatch in {context}")
            }
            Self::DefinitenessLoss { t } => {
                write!(f, "Riccati matrix lost positive definiteness at t = {t}")
            }
            Self::Divergence { t, norm } => {
                write!(f, "estimation error diverged at t = {t} (norm {norm:e})")
            }
            Self::EmptyWindow => write!(f, "empty averaging window"),
            Self::WindowTooLong { window, usable } => {
                write!(f, "window H = {window} exceeds usable horizon {usable}")
            }
            Self::WindowOffGrid { window, h } => {
                write!(f, "window H = {window} is not a multiple of the step h = {h}")
            }
            Self::ModelDimension { n, min } => {
                write!(f, "model dimension n = {n} below minimum {min}")
            }
            Self::OutputDimension { p, n } => {
                write!(f, "output dimension p = {p} outside 1..={n}")
            }
        }
    }
}

impl core::error::Error for Error {}
