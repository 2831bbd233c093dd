//! Two-groups mixture model for p-values.
//!
//! A hypothesis is a false null with probability `a`; true-null p-values are
//! Uniform(0, 1) and false-null p-values follow an alternative CDF `F` that
//! dominates the uniform. The marginal is `G = (1 − a)U + aF`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FdpError, Result};
use crate::normal;
use crate::numeric;

/// Alternative p-value distribution. Only the CDF is mandatory.
pub trait AlternativeDistribution: Send + Sync + fmt::Debug {
    fn cdf(&self, t: f64) -> f64;

    fn density(&self, _t: f64) -> Option<f64> {
        None
    }

    fn quantile(&self, _u: f64) -> Option<f64> {
        None
    }

    fn describe(&self) -> String;
}

/// p-value of a one-sided z-test of θ = 0 against θ > 0 with `n`
/// observations, under true mean `theta`: F(t) = Φ̄(Φ̄⁻¹(t) − √n θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSidedNormal {
    pub theta: f64,
    pub n: f64,
}

impl OneSidedNormal {
    pub fn new(theta: f64, n: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(FdpError::param("theta", "one-sided alternative needs theta >= 0"));
        }
        if !(n.is_finite() && n > 0.0) {
            return Err(FdpError::param("n", "must be positive"));
        }
        Ok(OneSidedNormal { theta, n })
    }

    fn shift(&self) -> f64 {
        self.n.sqrt() * self.theta
    }
}

impl AlternativeDistribution for OneSidedNormal {
    fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            normal::upper_tail(normal::upper_quantile(t) - self.shift())
        }
    }

    fn density(&self, t: f64) -> Option<f64> {
        let s = self.shift();
        let z = normal::upper_quantile(t.clamp(0.0, 1.0));
        Some((s * z - 0.5 * s * s).exp())
    }

    fn quantile(&self, u: f64) -> Option<f64> {
        Some(if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            normal::upper_tail(normal::upper_quantile(u) + self.shift())
        })
    }

    fn describe(&self) -> String {
        format!("one-sided normal (theta = {}, n = {})", self.theta, self.n)
    }
}

/// p-value of a two-sided z-test: P = 2Φ̄(|X|), X ~ N(√n θ, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSidedNormal {
    pub theta: f64,
    pub n: f64,
}

impl TwoSidedNormal {
    pub fn new(theta: f64, n: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(FdpError::param("theta", "must be finite"));
        }
        if !(n.is_finite() && n > 0.0) {
            return Err(FdpError::param("n", "must be positive"));
        }
        Ok(TwoSidedNormal { theta, n })
    }

    fn shift(&self) -> f64 {
        self.n.sqrt() * self.theta
    }
}

/// Density of the two-sided normal-test p-value at `p` ∈ (0, 1):
/// ½ e^{−nθ²/2} [e^{−√n θ z} + e^{√n θ z}] with z = Φ⁻¹(1 − p/2).
pub fn pvalue_density_two_sided_normal(theta: f64, n: f64, p: f64) -> Result<f64> {
    // p = 1 is admitted as the closed right endpoint, where z = 0.
    if !(p > 0.0 && p <= 1.0) {
        return Err(FdpError::Domain(format!("p = {p} is outside (0, 1]")));
    }
    if n.is_nan() || n <= 0.0 || !theta.is_finite() {
        return Err(FdpError::param("theta/n", "need finite theta and n > 0"));
    }
    let s = n.sqrt() * theta;
    let z = normal::upper_quantile(p / 2.0);
    // cosh form, rearranged to avoid overflow for large s·z
    Ok(0.5 * ((-s * z - 0.5 * s * s).exp() + (s * z - 0.5 * s * s).exp()))
}

impl AlternativeDistribution for TwoSidedNormal {
    fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let s = self.shift();
        let z = normal::upper_quantile(t / 2.0);
        (normal::upper_tail(z - s) + normal::upper_tail(z + s)).min(1.0)
    }

    fn density(&self, t: f64) -> Option<f64> {
        pvalue_density_two_sided_normal(self.theta, self.n, t.clamp(f64::MIN_POSITIVE, 1.0)).ok()
    }

    fn quantile(&self, u: f64) -> Option<f64> {
        Some(numeric::invert_monotone(u, 1e-15, |t| self.cdf(t)))
    }

    fn describe(&self) -> String {
        format!("two-sided normal (theta = {}, n = {})", self.theta, self.n)
    }
}

/// F(t) = t^β with 0 < β ≤ 1, the Beta(β, 1) law. β = ½ is the square-root CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCdf {
    pub exponent: f64,
}

impl PowerCdf {
    pub fn new(exponent: f64) -> Result<Self> {
        if exponent > 0.0 && exponent <= 1.0 {
            Ok(PowerCdf { exponent })
        } else {
            Err(FdpError::param(
                "exponent",
                format!("{exponent} is not in (0, 1]; the CDF would not dominate the uniform"),
            ))
        }
    }

    pub fn sqrt() -> Self {
        PowerCdf { exponent: 0.5 }
    }
}

impl AlternativeDistribution for PowerCdf {
    fn cdf(&self, t: f64) -> f64 {
        t.clamp(0.0, 1.0).powf(self.exponent)
    }

    fn density(&self, t: f64) -> Option<f64> {
        Some(self.exponent * t.clamp(0.0, 1.0).powf(self.exponent - 1.0))
    }

    fn quantile(&self, u: f64) -> Option<f64> {
        Some(u.clamp(0.0, 1.0).powf(1.0 / self.exponent))
    }

    fn describe(&self) -> String {
        format!("power CDF t^{}", self.exponent)
    }
}

/// Uniform on [0, b]: F(t) = min(t / b, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBelow {
    pub upper: f64,
}

impl UniformBelow {
    pub fn new(upper: f64) -> Result<Self> {
        if upper > 0.0 && upper <= 1.0 {
            Ok(UniformBelow { upper })
        } else {
            Err(FdpError::param("upper", format!("{upper} is not in (0, 1]")))
        }
    }
}

impl AlternativeDistribution for UniformBelow {
    fn cdf(&self, t: f64) -> f64 {
        (t / self.upper).clamp(0.0, 1.0)
    }

    fn density(&self, t: f64) -> Option<f64> {
        Some(if t < self.upper { 1.0 / self.upper } else { 0.0 })
    }

    fn quantile(&self, u: f64) -> Option<f64> {
        Some(u.clamp(0.0, 1.0) * self.upper)
    }

    fn describe(&self) -> String {
        format!("uniform on [0, {}]", self.upper)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied alternative.
#[derive(Clone)]
pub struct CustomAlternative {
    pub label: String,
    pub cdf: ScalarFn,
    pub density: Option<ScalarFn>,
    pub quantile: Option<ScalarFn>,
}

impl fmt::Debug for CustomAlternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomAlternative")
            .field("label", &self.label)
            .field("density", &self.density.is_some())
            .field("quantile", &self.quantile.is_some())
            .finish()
    }
}

impl AlternativeDistribution for CustomAlternative {
    fn cdf(&self, t: f64) -> f64 {
        (self.cdf)(t)
    }

    fn density(&self, t: f64) -> Option<f64> {
        self.density.as_ref().map(|d| d(t))
    }

    fn quantile(&self, u: f64) -> Option<f64> {
        self.quantile.as_ref().map(|q| q(u))
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Declarative alternative families, as read from scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AlternativeFamily {
    OneSidedNormal {
        theta: f64,
        #[serde(default = "one")]
        n: f64,
    },
    TwoSidedNormal {
        theta: f64,
        #[serde(default = "one")]
        n: f64,
    },
    Beta {
        shape: f64,
    },
    Sqrt,
    UniformBelow {
        upper: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl AlternativeFamily {
    pub fn build(&self) -> Result<Arc<dyn AlternativeDistribution>> {
        Ok(match *self {
            AlternativeFamily::OneSidedNormal { theta, n } => Arc::new(OneSidedNormal::new(theta, n)?),
            AlternativeFamily::TwoSidedNormal { theta, n } => Arc::new(TwoSidedNormal::new(theta, n)?),
            AlternativeFamily::Beta { shape } => Arc::new(PowerCdf::new(shape)?),
            AlternativeFamily::Sqrt => Arc::new(PowerCdf::sqrt()),
            AlternativeFamily::UniformBelow { upper } => Arc::new(UniformBelow::new(upper)?),
        })
    }

    /// Sample-size parameter ν of the family, when it has one.
    pub fn sharpness(&self) -> Option<f64> {
        match *self {
            AlternativeFamily::OneSidedNormal { n, .. } | AlternativeFamily::TwoSidedNormal { n, .. } => Some(n),
            _ => None,
        }
    }
}

/// The triple (a, F, G).
#[derive(Debug, Clone)]
pub struct MixtureModel {
    a: f64,
    alternative: Arc<dyn AlternativeDistribution>,
    nu: Option<f64>,
}

impl MixtureModel {
    pub fn new(a: f64, alternative: Arc<dyn AlternativeDistribution>) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(FdpError::param("a", format!("{a} is not in [0, 1]")));
        }
        Ok(MixtureModel {
            a,
            alternative,
            nu: None,
        })
    }

    pub fn from_family(a: f64, family: &AlternativeFamily) -> Result<Self> {
        let mut model = MixtureModel::new(a, family.build()?)?;
        model.nu = family.sharpness();
        Ok(model)
    }

    /// The all-null model: a = 0, G = U.
    pub fn uniform() -> Self {
        MixtureModel {
            a: 0.0,
            alternative: Arc::new(UniformBelow { upper: 1.0 }),
            nu: None,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = Some(nu);
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    pub fn alternative(&self) -> &Arc<dyn AlternativeDistribution> {
        &self.alternative
    }

    pub fn f_cdf(&self, t: f64) -> f64 {
        self.alternative.cdf(t)
    }

    pub fn f_density(&self, t: f64) -> Result<f64> {
        self.alternative
            .density(t)
            .ok_or(FdpError::DensityRequired("alternative density"))
    }

    pub fn g_cdf(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        (1.0 - self.a) * t + self.a * self.f_cdf(t)
    }

    pub fn g_density(&self, t: f64) -> Result<f64> {
        if self.a == 0.0 {
            return Ok(1.0);
        }
        Ok((1.0 - self.a) + self.a * self.f_density(t)?)
    }

    /// Q(t) = (1 − a)t / G(t), with Q(0) = 0.
    pub fn q(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let g = self.g_cdf(t);
        if g <= 0.0 {
            return 0.0;
        }
        (1.0 - self.a) * t / g
    }

    /// Q̃(t) = a(1 − F(t)) / (1 − G(t)).
    pub fn q_tilde(&self, t: f64) -> Result<f64> {
        let denom = 1.0 - self.g_cdf(t);
        if denom <= 0.0 {
            return Err(FdpError::Domain(format!("1 - G({t}) = 0")));
        }
        Ok(self.a * (1.0 - self.f_cdf(t)) / denom)
    }

    /// Q'(t) = (1 − a)(G(t) − t g(t)) / G(t)².
    pub fn q_prime(&self, t: f64) -> Result<f64> {
        let g = self.g_cdf(t);
        if t.is_nan() || t <= 0.0 || g <= 0.0 {
            return Err(FdpError::Domain(format!("Q' undefined at t = {t}")));
        }
        Ok((1.0 - self.a) * (g - t * self.g_density(t)?) / (g * g))
    }

    /// sup{t ∈ [0, 1] : Q(t) ≤ c}. Never empty because Q(0) = 0.
    pub fn q_inverse(&self, c: f64) -> f64 {
        numeric::sup_where(0.0, 1.0, 4096, 1e-13, |t| self.q(t) <= c).unwrap_or(0.0)
    }

    /// (E Γ(t), E Ξ(t)) for m tests at a fixed threshold t ∈ (0, 1).
    pub fn expected_fdp_fnp(&self, m: usize, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0 && t < 1.0) {
            return Err(FdpError::param("t", format!("{t} is not in (0, 1)")));
        }
        let g = self.g_cdf(t);
        let m = m as f64;
        let fdp = self.q(t) * (1.0 - (1.0 - g).powf(m));
        let fnp = self.q_tilde(t)? * (1.0 - g.powf(m));
        Ok((fdp, fnp))
    }

    pub fn describe(&self) -> String {
        format!("a = {}, F = {}", self.a, self.alternative.describe())
    }
}
