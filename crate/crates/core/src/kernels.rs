//! Covariance kernels of the Gaussian limits of the centred, √m-scaled
//! processes built from p-values under the mixture model.

use serde::{Deserialize, Serialize};

use crate::error::{FdpError, Result};
use crate::model::MixtureModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelKind {
    /// Entry (i, j) of the joint kernel of the null and alternative counting
    /// processes (W_0, W_1).
    Matrix { i: usize, j: usize },
    /// Ω_c = (1 − c)Λ_0 − cΛ_1
    Omega { c: f64 },
    /// the FDP process Γ
    Gamma,
    /// Q̂ with known a
    Q,
    /// Q̂⁻¹, indexed by levels (u, v)
    QInverse,
    /// Q̂ with Storey's â₀ at t0
    Storey { t0: f64 },
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub model: MixtureModel,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, model: MixtureModel) -> Self {
        KernelSpec { kind, model }
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        eval_kernel(self, s, t)
    }
}

/// s ∧ t − st, the Brownian bridge covariance.
pub fn bridge_r(s: f64, t: f64) -> f64 {
    s.min(t) - s * t
}

/// Joint covariance of (W_0(s), W_1(t)) as a 2×2 matrix.
pub fn matrix_r(model: &MixtureModel, s: f64, t: f64) -> [[f64; 2]; 2] {
    let a = model.a();
    let (fs, ft) = (model.f_cdf(s), model.f_cdf(t));
    [
        [(1.0 - a) * s.min(t) - (1.0 - a).powi(2) * s * t, -(1.0 - a) * s * a * ft],
        [-(1.0 - a) * t * a * fs, a * model.f_cdf(s.min(t)) - a * a * fs * ft],
    ]
}

fn check_unit(s: f64, t: f64, open_at_zero: bool) -> Result<()> {
    for x in [s, t] {
        let ok = if open_at_zero {
            x > 0.0 && x <= 1.0
        } else {
            (0.0..=1.0).contains(&x)
        };
        if !ok {
            return Err(FdpError::Domain(format!("kernel argument {x} outside its domain")));
        }
    }
    Ok(())
}

/// Cov(𝔾(s), 𝔾(t)) for the limiting marginal empirical process.
fn g_cov(model: &MixtureModel, s: f64, t: f64) -> f64 {
    model.g_cdf(s.min(t)) - model.g_cdf(s) * model.g_cdf(t)
}

pub fn eval_kernel(spec: &KernelSpec, s: f64, t: f64) -> Result<f64> {
    let model = &spec.model;
    let a = model.a();
    match spec.kind {
        KernelKind::Matrix { i, j } => {
            check_unit(s, t, false)?;
            if i > 1 || j > 1 {
                return Err(FdpError::param("kernel", "matrix indices must be 0 or 1"));
            }
            Ok(matrix_r(model, s, t)[i][j])
        }
        KernelKind::Omega { c } => {
            check_unit(s, t, false)?;
            let (fs, ft) = (model.f_cdf(s), model.f_cdf(t));
            Ok((1.0 - a) * (1.0 - c) * ((1.0 - c) * (s.min(t) - (1.0 - a) * s * t) + a * c * (t * fs + s * ft))
                + a * c * (c * model.f_cdf(s.min(t)) - a * c * fs * ft))
        }
        KernelKind::Gamma => {
            check_unit(s, t, true)?;
            let (fs, ft) = (model.f_cdf(s), model.f_cdf(t));
            let (gs, gt) = (model.g_cdf(s), model.g_cdf(t));
            let num = (1.0 - a) * s * t * model.f_cdf(s.min(t)) + a * fs * ft * s.min(t);
            Ok(a * (1.0 - a) * num / (gs * gs * gt * gt))
        }
        KernelKind::Q => {
            check_unit(s, t, true)?;
            let (gs, gt) = (model.g_cdf(s), model.g_cdf(t));
            Ok(model.q(s) * model.q(t) * g_cov(model, s, t) / (gs * gt))
        }
        KernelKind::QInverse => {
            let (u, v) = (s, t);
            let (s, t) = (q_preimage(model, u)?, q_preimage(model, v)?);
            let du = 1.0 - a - u * model.g_density(s)?;
            let dv = 1.0 - a - v * model.g_density(t)?;
            if du <= 0.0 || dv <= 0.0 {
                return Err(FdpError::Domain("Q is not strictly increasing at the preimage".into()));
            }
            Ok(u * v * g_cov(model, s, t) / (du * dv))
        }
        KernelKind::Storey { t0 } => {
            check_unit(s, t, true)?;
            if !(t0 > 0.0 && t0 < 1.0) {
                return Err(FdpError::param("t0", format!("{t0} is not in (0, 1)")));
            }
            let (gs, gt, g0) = (model.g_cdf(s), model.g_cdf(t), model.g_cdf(t0));
            let c = |x: f64, y: f64| g_cov(model, x, y);
            let bracket = gs * gt * c(t0, t0)
                + gs * (1.0 - g0) * c(t0, t)
                + gt * (1.0 - g0) * c(s, t0)
                + (1.0 - g0).powi(2) * c(s, t);
            Ok(s * t / ((1.0 - t0).powi(2) * gs * gs * gt * gt) * bracket)
        }
    }
}

/// s = Q⁻¹(u), requiring u inside the range of Q on (0, 1].
pub fn q_preimage(model: &MixtureModel, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0 - model.a()) {
        return Err(FdpError::Domain(format!("Q is not invertible at level {u}")));
    }
    let s = model.q_inverse(u);
    if s <= 0.0 {
        return Err(FdpError::Domain(format!("Q is not invertible at level {u}")));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AlternativeFamily, PowerCdf};
    use std::sync::Arc;

    fn normal_model() -> MixtureModel {
        MixtureModel::from_family(0.25, &AlternativeFamily::OneSidedNormal { theta: 3.0, n: 1.0 }).unwrap()
    }

    fn all_kinds() -> Vec<KernelKind> {
        vec![
            KernelKind::Matrix { i: 0, j: 0 },
            KernelKind::Matrix { i: 1, j: 1 },
            KernelKind::Omega { c: 0.05 },
            KernelKind::Gamma,
            KernelKind::Q,
            KernelKind::Storey { t0: 0.5 },
        ]
    }

    #[test]
    fn symmetric_with_nonnegative_diagonal() {
        let model = normal_model();
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        for kind in all_kinds() {
            let spec = KernelSpec::new(kind, model.clone());
            for &s in &grid {
                assert!(spec.eval(s, s).unwrap() >= -1e-15, "{kind:?} at {s}");
                for &t in &grid {
                    let (x, y) = (spec.eval(s, t).unwrap(), spec.eval(t, s).unwrap());
                    assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{kind:?} ({s}, {t})");
                }
            }
        }
        let spec = KernelSpec::new(KernelKind::QInverse, model.clone());
        let levels: Vec<f64> = (1..=20).map(|i| 0.7 * i as f64 / 20.0).collect();
        for &u in &levels {
            for &v in &levels {
                let (x, y) = (spec.eval(u, v).unwrap(), spec.eval(v, u).unwrap());
                assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
            }
        }
        let m = matrix_r(&model, 0.2, 0.6);
        let mt = matrix_r(&model, 0.6, 0.2);
        assert_eq!(m[0][1], mt[1][0]);
    }

    #[test]
    fn gamma_kernel_vanishes_without_alternatives() {
        let spec = KernelSpec::new(KernelKind::Gamma, MixtureModel::uniform());
        assert_eq!(spec.eval(0.3, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn omega_is_the_matching_combination_of_the_matrix() {
        let model = normal_model();
        let c: f64 = 0.1;
        let (s, t) = (0.03, 0.4);
        let r = matrix_r(&model, s, t);
        let rt = matrix_r(&model, t, s);
        // Cov((1−c)W0(s) − cW1(s), (1−c)W0(t) − cW1(t))
        let direct = (1.0 - c).powi(2) * r[0][0] - c * (1.0 - c) * (r[0][1] + rt[0][1]) + c * c * r[1][1];
        let k = eval_kernel(&KernelSpec::new(KernelKind::Omega { c }, model), s, t).unwrap();
        assert!((k - direct).abs() < 1e-14);
    }

    #[test]
    fn inverse_kernel_rescales_q_kernel() {
        let model = normal_model();
        let kq = KernelSpec::new(KernelKind::Q, model.clone());
        let kinv = KernelSpec::new(KernelKind::QInverse, model.clone());
        for &(u, v) in &[(0.02, 0.05), (0.1, 0.3), (0.5, 0.6)] {
            let (s, t) = (q_preimage(&model, u).unwrap(), q_preimage(&model, v).unwrap());
            let lhs = kinv.eval(u, v).unwrap() * model.q_prime(s).unwrap() * model.q_prime(t).unwrap();
            let rhs = kq.eval(s, t).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn domain_violations_are_errors() {
        let model = MixtureModel::new(0.5, Arc::new(PowerCdf::sqrt())).unwrap();
        assert!(eval_kernel(&KernelSpec::new(KernelKind::Gamma, model.clone()), 0.0, 0.5).is_err());
        assert!(eval_kernel(&KernelSpec::new(KernelKind::QInverse, model.clone()), 0.9, 0.1).is_err());
        assert!(eval_kernel(&KernelSpec::new(KernelKind::Matrix { i: 2, j: 0 }, model), 0.1, 0.1).is_err());
    }
}
