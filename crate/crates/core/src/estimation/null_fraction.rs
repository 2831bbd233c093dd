use serde::{Deserialize, Serialize};

use super::density::{default_bandwidth, kernel_density};
use super::ecdf::EcdfEstimate;
use crate::error::{check_level, check_pvalues, FdpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullFractionMethod {
    Storey,
    AstarLower,
    KernelMinDensity,
}

/// An estimate of the alternative weight a (or of its identifiable floor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullFractionEstimate {
    pub value: f64,
    pub method: NullFractionMethod,
    /// t0 for Storey, the bandwidth for the kernel method, ε_m for a*.
    pub parameter: f64,
    pub alpha: Option<f64>,
}

impl NullFractionEstimate {
    /// Wraps a user-supplied value, e.g. a known a.
    pub fn fixed(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(FdpError::param("a", format!("{value} is not in [0, 1]")));
        }
        Ok(NullFractionEstimate {
            value,
            method: NullFractionMethod::Storey,
            parameter: f64::NAN,
            alpha: None,
        })
    }
}

/// Half-width of the DKW band: sqrt(log(2/α) / (2m)).
pub fn dkw_epsilon(m: usize, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(FdpError::param("m", "must be at least 1"));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(FdpError::param("alpha", format!("{alpha} is not in (0, 2]")));
    }
    Ok(((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt())
}

pub const DEFAULT_T0: f64 = 0.5;

/// max{0, (𝔾_m(t0) − t0)/(1 − t0)}
pub fn storey_a0(pvalues: &[f64], t0: f64) -> Result<NullFractionEstimate> {
    check_pvalues(pvalues)?;
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(FdpError::param("t0", format!("{t0} is not in (0, 1)")));
    }
    let g = pvalues.iter().filter(|&&p| p <= t0).count() as f64 / pvalues.len() as f64;
    Ok(NullFractionEstimate {
        value: ((g - t0) / (1.0 - t0)).max(0.0),
        method: NullFractionMethod::Storey,
        parameter: t0,
        alpha: None,
    })
}

/// Lower 1 − α confidence bound for the alternative weight:
/// max_t (Ĝ(t) − t − ε_m)/(1 − t), clamped at zero.
///
/// Ĝ is linear between breakpoints and the ratio is a Möbius map of t there,
/// so it is monotone on each piece; checking each piece's start value and the
/// left limit at its end is exact.
pub fn astar_lower(ghat: &EcdfEstimate, alpha: f64) -> Result<NullFractionEstimate> {
    check_level("alpha", alpha)?;
    let eps = dkw_epsilon(ghat.m(), alpha)?;
    let ratio = |t: f64, g: f64| (g - t - eps) / (1.0 - t);
    let mut best: f64 = 0.0;
    for piece in ghat.pieces() {
        if piece.start < 1.0 {
            best = best.max(ratio(piece.start, piece.at(piece.start)));
        }
        if piece.end < 1.0 {
            best = best.max(ratio(piece.end, piece.at(piece.end)));
        }
    }
    Ok(NullFractionEstimate {
        value: best.min(1.0),
        method: NullFractionMethod::AstarLower,
        parameter: eps,
        alpha: Some(alpha),
    })
}

/// 1 − min ĝ for a boundary-reflected kernel density estimate ĝ, clamped to
/// [0, 1]. `bandwidth = None` uses m^(−1/5).
pub fn kernel_a_consistent(pvalues: &[f64], bandwidth: Option<f64>) -> Result<NullFractionEstimate> {
    check_pvalues(pvalues)?;
    if pvalues.len() < 10 {
        return Err(FdpError::InsufficientData {
            needed: 10,
            got: pvalues.len(),
        });
    }
    let h = bandwidth.unwrap_or_else(|| default_bandwidth(pvalues.len()));
    let density = kernel_density(pvalues, h)?;
    let min = density.values().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(NullFractionEstimate {
        value: (1.0 - min).clamp(0.0, 1.0),
        method: NullFractionMethod::KernelMinDensity,
        parameter: h,
        alpha: None,
    })
}
