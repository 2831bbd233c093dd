use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdpError {
    #[error("hypothesis labels are required for this operation")]
    LabelsRequired,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{0} requires a density for the alternative distribution")]
    DensityRequired(&'static str),

    #[error("degenerate slope: 1 - a - c*g(t_c) = {0} is not positive")]
    DegenerateSlope(f64),

    #[error("t_min = {t_min} is below the enforcement floor {floor}")]
    BelowFloor { t_min: f64, floor: f64 },

    #[error("input mismatch: {0}")]
    Mismatch(String),

    #[error("unknown validation target `{0}`")]
    UnknownTarget(String),

    #[error("config error: {0}")]
    Config(String),
}

impl FdpError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        FdpError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            FdpError::LabelsRequired => "labels-required",
            FdpError::EmptyInput(_) => "empty-input",
            FdpError::InvalidParameter { .. } => "invalid-parameter",
            FdpError::Domain(_) => "domain",
            FdpError::InsufficientData { .. } => "insufficient-data",
            FdpError::DensityRequired(_) => "density-required",
            FdpError::DegenerateSlope(_) => "degenerate-slope",
            FdpError::BelowFloor { .. } => "below-floor",
            FdpError::Mismatch(_) => "mismatch",
            FdpError::UnknownTarget(_) => "unknown-target",
            FdpError::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, FdpError>;

pub(crate) fn check_level(name: &'static str, alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(FdpError::param(name, format!("{alpha} is not in (0, 1)")))
    }
}

pub(crate) fn check_pvalues(pvalues: &[f64]) -> Result<()> {
    if pvalues.is_empty() {
        return Err(FdpError::EmptyInput("no p-values".into()));
    }
    if let Some((i, p)) = pvalues
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p >= 0.0 && **p <= 1.0))
    {
        return Err(FdpError::param(
            "pvalues",
            format!("value {p} at index {i} is not in [0, 1]"),
        ));
    }
    Ok(())
}
