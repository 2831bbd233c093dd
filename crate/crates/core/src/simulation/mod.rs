//! Sample generation under the mixture model, purity quantities, and a
//! Monte Carlo harness that checks the distributional claims the rest of
//! the crate relies on.

mod validation;

use serde::{Deserialize, Serialize};

pub use crate::kernels::{bridge_r, eval_kernel, matrix_r, q_preimage, KernelKind, KernelSpec};
pub use validation::{run_validation, Check, ValidationReport, ValidationTarget};

use crate::error::{FdpError, Result};
use crate::model::{AlternativeFamily, MixtureModel};
use crate::numeric::invert_monotone;
use crate::rng::{self, Purpose};
use crate::sample::LabeledSample;

/// One simulation scenario, usually read from a TOML file:
///
/// ```toml
/// m = 1000
/// a = 0.25
/// reps = 500
/// seed = 7
/// grid = [0.01, 0.05, 0.2]
///
/// [alternative]
/// family = "one-sided-normal"
/// theta = 3.0
/// ```
///
/// `family` is one of `one-sided-normal` and `two-sided-normal` (with
/// `theta` and optional `n`, default 1), `beta` (`shape`, F(t) = t^shape),
/// `sqrt`, or `uniform-below` (`upper`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub m: usize,
    pub a: f64,
    pub alternative: AlternativeFamily,
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Vec<f64>,
}

impl ScenarioConfig {
    pub fn new(m: usize, a: f64, alternative: AlternativeFamily, reps: usize, seed: u64) -> Self {
        ScenarioConfig {
            m,
            a,
            alternative,
            reps,
            seed,
            grid: Vec::new(),
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| FdpError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FdpError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(FdpError::param("m", "must be at least 1"));
        }
        if self.reps == 0 {
            return Err(FdpError::param("reps", "must be at least 1"));
        }
        if let Some(t) = self.grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(FdpError::param("grid", format!("{t} is not in [0, 1]")));
        }
        self.model().map(|_| ())
    }

    pub fn model(&self) -> Result<MixtureModel> {
        MixtureModel::from_family(self.a, &self.alternative)
    }
}

/// Replication `rep` of the scenario.
pub fn generate_sample(config: &ScenarioConfig, rep: u64) -> Result<LabeledSample> {
    config.validate()?;
    sample_from_model(&config.model()?, config.m, config.seed, rep)
}

/// m draws from the mixture: H_i ~ Bernoulli(a), nulls uniform, alternatives
/// by inversion of F. Alternatives without a closed-form quantile are
/// inverted by bisection on their CDF.
pub fn sample_from_model(model: &MixtureModel, m: usize, seed: u64, rep: u64) -> Result<LabeledSample> {
    let mut stream = rng::stream(seed, Purpose::Sample, rep);
    let alt = model.alternative();
    let mut pvalues = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let h = rng::open_unit(&mut stream) < model.a();
        let u = rng::open_unit(&mut stream);
        let p = if h {
            alt.quantile(u).unwrap_or_else(|| invert_monotone(u, 1e-14, |t| alt.cdf(t)))
        } else {
            u
        };
        pvalues.push(p);
        labels.push(h);
    }
    LabeledSample::with_labels(pvalues, labels)
}

/// ζ = 1 − inf F′, a̲ = aζ, and the pure part F̲ of the alternative.
#[derive(Debug, Clone)]
pub struct Purity {
    pub zeta: f64,
    pub a_floor: f64,
    model: MixtureModel,
}

impl Purity {
    /// F̲(t) = (F(t) − (1 − ζ)t)/ζ; `None` when ζ = 0 (F is uniform).
    pub fn f_floor(&self, t: f64) -> Option<f64> {
        (self.zeta > 0.0).then(|| (self.model.f_cdf(t) - (1.0 - self.zeta) * t) / self.zeta)
    }
}

/// Infimum of the alternative density over a 10⁴-point grid plus points
/// approaching 1, where the infimum sits for concave F.
pub fn purity_quantities(model: &MixtureModel) -> Result<Purity> {
    let mut inf = f64::INFINITY;
    let near_one = (3..=12).map(|k| 1.0 - 10f64.powi(-k));
    for t in (1..=10_000).map(|i| i as f64 / 10_000.0).chain(near_one) {
        inf = inf.min(model.f_density(t)?);
    }
    let zeta = (1.0 - inf).clamp(0.0, 1.0);
    Ok(Purity {
        zeta,
        a_floor: model.a() * zeta,
        model: model.clone(),
    })
}
