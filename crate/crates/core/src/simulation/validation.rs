use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_sample, purity_quantities, ScenarioConfig};
use crate::envelopes::{
    asymptotic_envelope, brownian_sup_quantile, confidence_thresholds, exact_confidence_set, exact_envelope,
    SecondOrderTest, UniformityTest,
};
use crate::error::{FdpError, Result};
use crate::estimation::{astar_lower, ecdf, project_f, storey_a0, EcdfVariant, NullFractionEstimate, ProjectionShape};
use crate::kernels::{eval_kernel, q_preimage, KernelKind, KernelSpec};
use crate::model::AlternativeFamily;
use crate::numeric::format_sig;
use crate::rng::{self, Purpose};
use crate::sample::{classify, LabeledSample};
use crate::step::StepFunction;
use crate::thresholds::{plugin_threshold, rate_ceiling_known_a};

const ALPHA: f64 = 0.05;
const T0: f64 = 0.5;
const KERNEL_GRID: [f64; 3] = [0.05, 0.1, 0.2];
/// Replications and grid size for the bridge quantile used by envelope targets.
const BRIDGE_REPS: usize = 20_000;
const BRIDGE_GRID: usize = 1024;

/// A registered Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidationTarget {
    FdpMean,
    StoreyNullMass,
    StoreyVariance,
    FdpKernel,
    QKernel,
    StoreyKernel,
    QInverseIdentity,
    PluginKnownA,
    PluginStorey,
    RateCeilingKnownA,
    AstarCoverage,
    ExactSetCoverage,
    AsymptoticEnvelopeCoverage,
    ProjectionBound,
    LcmContraction,
    UniformityTestSize,
    ExampleTwo,
}

impl ValidationTarget {
    pub const ALL: [ValidationTarget; 17] = [
        ValidationTarget::FdpMean,
        ValidationTarget::StoreyNullMass,
        ValidationTarget::StoreyVariance,
        ValidationTarget::FdpKernel,
        ValidationTarget::QKernel,
        ValidationTarget::StoreyKernel,
        ValidationTarget::QInverseIdentity,
        ValidationTarget::PluginKnownA,
        ValidationTarget::PluginStorey,
        ValidationTarget::RateCeilingKnownA,
        ValidationTarget::AstarCoverage,
        ValidationTarget::ExactSetCoverage,
        ValidationTarget::AsymptoticEnvelopeCoverage,
        ValidationTarget::ProjectionBound,
        ValidationTarget::LcmContraction,
        ValidationTarget::UniformityTestSize,
        ValidationTarget::ExampleTwo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ValidationTarget::FdpMean => "fdp-mean",
            ValidationTarget::StoreyNullMass => "storey-null-mass",
            ValidationTarget::StoreyVariance => "storey-variance",
            ValidationTarget::FdpKernel => "fdp-kernel",
            ValidationTarget::QKernel => "q-kernel",
            ValidationTarget::StoreyKernel => "storey-kernel",
            ValidationTarget::QInverseIdentity => "q-inverse-identity",
            ValidationTarget::PluginKnownA => "plugin-known-a",
            ValidationTarget::PluginStorey => "plugin-storey",
            ValidationTarget::RateCeilingKnownA => "rate-ceiling-known-a",
            ValidationTarget::AstarCoverage => "astar-coverage",
            ValidationTarget::ExactSetCoverage => "exact-set-coverage",
            ValidationTarget::AsymptoticEnvelopeCoverage => "asymptotic-envelope-coverage",
            ValidationTarget::ProjectionBound => "projection-bound",
            ValidationTarget::LcmContraction => "lcm-contraction",
            ValidationTarget::UniformityTestSize => "uniformity-test-size",
            ValidationTarget::ExampleTwo => "example-two",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ValidationTarget::FdpMean => "mean FDP at fixed thresholds against Q(t)(1 - (1 - G(t))^m)",
            ValidationTarget::StoreyNullMass => "Storey estimate under the global null is zero half the time",
            ValidationTarget::StoreyVariance => "variance of the scaled Storey estimate",
            ValidationTarget::FdpKernel => "covariance of the scaled FDP process",
            ValidationTarget::QKernel => "covariance of the scaled Q estimate with known a",
            ValidationTarget::StoreyKernel => "covariance of the scaled Q estimate with Storey's a",
            ValidationTarget::QInverseIdentity => "inverse-Q kernel times Q'(s)Q'(t) equals the Q kernel",
            ValidationTarget::PluginKnownA => "mean FDP of the plug-in threshold with known a",
            ValidationTarget::PluginStorey => "mean FDP of the plug-in threshold with Storey's a",
            ValidationTarget::RateCeilingKnownA => "P{FDP <= c} at the known-a rate-ceiling threshold",
            ValidationTarget::AstarCoverage => "coverage of the lower confidence bound for the purity floor",
            ValidationTarget::ExactSetCoverage => "coverage of the exact labeling confidence set",
            ValidationTarget::AsymptoticEnvelopeCoverage => "coverage of the asymptotic FDP and count envelopes",
            ValidationTarget::ProjectionBound => "projection estimate of F within 2||G - Ghat||/a",
            ValidationTarget::LcmContraction => "concave majorant is no farther from G than the ECDF",
            ValidationTarget::UniformityTestSize => "size of the second-order uniformity test",
            ValidationTarget::ExampleTwo => "rate-ceiling and minimum-rate thresholds on the synthetic example",
        }
    }

    /// The scenario the target runs when none is supplied.
    pub fn default_scenario(&self) -> ScenarioConfig {
        let normal = AlternativeFamily::OneSidedNormal { theta: 3.0, n: 1.0 };
        let base = |m: usize, reps: usize| ScenarioConfig::new(m, 0.25, normal.clone(), reps, 20_040_101);
        match self {
            ValidationTarget::FdpMean => base(100, 100_000).with_grid(vec![0.01, 0.05, 0.2]),
            // odd m keeps G_m(1/2) = 1/2 off the lattice, removing the atom at 0
            ValidationTarget::StoreyNullMass => ScenarioConfig { a: 0.0, ..base(1001, 10_000) },
            ValidationTarget::StoreyVariance => base(5000, 2000),
            ValidationTarget::FdpKernel | ValidationTarget::QKernel | ValidationTarget::StoreyKernel => {
                base(5000, 2000).with_grid(KERNEL_GRID.to_vec())
            }
            ValidationTarget::QInverseIdentity => base(1, 1).with_grid(vec![0.02, 0.05, 0.1, 0.3, 0.6]),
            ValidationTarget::PluginKnownA | ValidationTarget::PluginStorey => base(5000, 2000),
            ValidationTarget::RateCeilingKnownA => base(10_000, 5000),
            ValidationTarget::AstarCoverage => base(1000, 1000),
            ValidationTarget::ExactSetCoverage => base(50, 1000),
            ValidationTarget::AsymptoticEnvelopeCoverage => base(1000, 1000),
            ValidationTarget::ProjectionBound | ValidationTarget::LcmContraction => {
                ScenarioConfig::new(2000, 0.5, AlternativeFamily::Sqrt, 100, 20_040_101)
            }
            ValidationTarget::UniformityTestSize => ScenarioConfig { a: 0.0, ..base(10, 100_000) },
            ValidationTarget::ExampleTwo => base(1000, 20),
        }
    }
}

impl FromStr for ValidationTarget {
    type Err = FdpError;

    fn from_str(s: &str) -> Result<Self> {
        ValidationTarget::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| FdpError::UnknownTarget(s.to_string()))
    }
}

/// One comparison: passes when `lower ≤ statistic ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub prediction: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, statistic: f64, prediction: f64, lower: f64, upper: f64) -> Self {
        Check {
            name: name.into(),
            statistic,
            prediction,
            lower,
            upper,
            passed: statistic >= lower && statistic <= upper,
        }
    }

    fn within(name: impl Into<String>, statistic: f64, prediction: f64, tolerance: f64) -> Self {
        Check::new(name, statistic, prediction, prediction - tolerance, prediction + tolerance)
    }

    fn relative(name: impl Into<String>, statistic: f64, prediction: f64, rel: f64) -> Self {
        let tol = rel * prediction.abs();
        Check::within(name, statistic, prediction, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub target: String,
    pub description: String,
    pub scenario: ScenarioConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    pub const CSV_HEADER: &'static str = "target,check,statistic,prediction,lower,upper,passed";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.target,
                c.name,
                format_sig(c.statistic),
                format_sig(c.prediction),
                format_sig(c.lower),
                format_sig(c.upper),
                c.passed
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FdpError::Config(e.to_string()))
    }
}

/// Runs `target` on `scenario`, or on the target's default scenario.
pub fn run_validation(target: ValidationTarget, scenario: Option<&ScenarioConfig>) -> Result<ValidationReport> {
    let config = scenario.cloned().unwrap_or_else(|| target.default_scenario());
    config.validate()?;
    let checks = match target {
        ValidationTarget::FdpMean => fdp_mean(&config)?,
        ValidationTarget::StoreyNullMass => storey_null_mass(&config)?,
        ValidationTarget::StoreyVariance => storey_variance(&config)?,
        ValidationTarget::FdpKernel | ValidationTarget::QKernel | ValidationTarget::StoreyKernel => {
            kernel_covariance(&config, target)?
        }
        ValidationTarget::QInverseIdentity => q_inverse_identity(&config)?,
        ValidationTarget::PluginKnownA => plugin(&config, true)?,
        ValidationTarget::PluginStorey => plugin(&config, false)?,
        ValidationTarget::RateCeilingKnownA => rate_ceiling(&config)?,
        ValidationTarget::AstarCoverage => astar_coverage(&config)?,
        ValidationTarget::ExactSetCoverage => exact_set_coverage(&config)?,
        ValidationTarget::AsymptoticEnvelopeCoverage => envelope_coverage(&config)?,
        ValidationTarget::ProjectionBound => projection_bound(&config)?,
        ValidationTarget::LcmContraction => lcm_contraction(&config)?,
        ValidationTarget::UniformityTestSize => uniformity_size(&config)?,
        ValidationTarget::ExampleTwo => example_two(&config)?,
    };
    Ok(ValidationReport {
        target: target.name().to_string(),
        description: target.description().to_string(),
        passed: checks.iter().all(|c| c.passed),
        scenario: config,
        checks,
    })
}

/// Applies `f` to every replication, in parallel, keeping replication order.
fn per_rep<T: Send>(config: &ScenarioConfig, f: impl Fn(LabeledSample) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| f(generate_sample(config, rep)?))
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let s: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    s / (xs.len() as f64 - 1.0)
}

fn fraction(flags: &[bool]) -> f64 {
    flags.iter().filter(|&&b| b).count() as f64 / flags.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn grid_or(config: &ScenarioConfig, fallback: &[f64]) -> Vec<f64> {
    if config.grid.is_empty() {
        fallback.to_vec()
    } else {
        config.grid.clone()
    }
}

fn fdp_mean(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let model = config.model()?;
    let grid = grid_or(config, &[0.01, 0.05, 0.2]);
    let paths = per_rep(config, |s| grid.iter().map(|&t| Ok(classify(&s, t)?.fdp())).collect::<Result<Vec<f64>>>())?;
    grid.iter()
        .enumerate()
        .map(|(j, &t)| {
            let xs: Vec<f64> = paths.iter().map(|p| p[j]).collect();
            let se = (covariance(&xs, &xs) / xs.len() as f64).sqrt();
            let (pred, _) = model.expected_fdp_fnp(config.m, t)?;
            Ok(Check::within(format!("mean fdp at t={}", format_sig(t)), mean(&xs), pred, 3.0 * se))
        })
        .collect()
}

fn storey_null_mass(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let root_m = (config.m as f64).sqrt();
    let scaled = per_rep(config, |s| Ok(root_m * storey_a0(s.pvalues(), T0)?.value))?;
    let zero: Vec<bool> = scaled.iter().map(|&x| x == 0.0).collect();
    let positive: Vec<f64> = scaled.iter().copied().filter(|&x| x > 0.0).collect();
    let sigma = (T0 / (1.0 - T0)).sqrt();
    let half_normal_mean = sigma * (2.0 / std::f64::consts::PI).sqrt();
    Ok(vec![
        Check::within("mass at zero", fraction(&zero), 0.5, 0.02),
        Check::relative("mean of the positive part", mean(&positive), half_normal_mean, 0.10),
    ])
}

fn storey_variance(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let model = config.model()?;
    let root_m = (config.m as f64).sqrt();
    let est = per_rep(config, |s| Ok(storey_a0(s.pvalues(), T0)?.value))?;
    let g0 = model.g_cdf(T0);
    let target = (g0 - T0) / (1.0 - T0);
    let scaled: Vec<f64> = est.iter().map(|a| root_m * (a - target)).collect();
    let var = covariance(&scaled, &scaled);
    let predicted = g0 * (1.0 - g0) / (1.0 - T0).powi(2);
    let se_mean = (var / est.len() as f64).sqrt() / root_m;
    Ok(vec![
        Check::relative("variance of sqrt(m)(a0 - limit)", var, predicted, 0.10),
        Check::within("mean of a0", mean(&est), target, 4.0 * se_mean),
    ])
}

fn kernel_covariance(config: &ScenarioConfig, target: ValidationTarget) -> Result<Vec<Check>> {
    let model = config.model()?;
    let grid = grid_or(config, &KERNEL_GRID);
    let m = config.m as f64;
    let root_m = m.sqrt();
    let a = model.a();
    let storey_limit = (model.g_cdf(T0) - T0) / (1.0 - T0);
    let centre = |t: f64| match target {
        ValidationTarget::StoreyKernel => (1.0 - storey_limit) * t / model.g_cdf(t),
        _ => model.q(t),
    };
    let paths = per_rep(config, |s| {
        let sorted = s.sorted();
        let a_hat = match target {
            ValidationTarget::StoreyKernel => storey_a0(s.pvalues(), T0)?.value,
            _ => a,
        };
        grid.iter()
            .map(|&t| {
                let value = match target {
                    ValidationTarget::FdpKernel => classify(&s, t)?.fdp(),
                    _ => {
                        let r = sorted.partition_point(|&p| p <= t);
                        if r == 0 {
                            return Err(FdpError::Domain(format!("no p-value below {t}; increase m")));
                        }
                        (1.0 - a_hat) * t * m / r as f64
                    }
                };
                Ok(root_m * (value - centre(t)))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let kind = match target {
        ValidationTarget::FdpKernel => KernelKind::Gamma,
        ValidationTarget::QKernel => KernelKind::Q,
        _ => KernelKind::Storey { t0: T0 },
    };
    let spec = KernelSpec::new(kind, model);
    let mut checks = Vec::new();
    for (i, &s) in grid.iter().enumerate() {
        for (j, &t) in grid.iter().enumerate() {
            let xs: Vec<f64> = paths.iter().map(|p| p[i]).collect();
            let ys: Vec<f64> = paths.iter().map(|p| p[j]).collect();
            let k = eval_kernel(&spec, s, t)?;
            checks.push(Check::relative(
                format!("cov at ({}, {})", format_sig(s), format_sig(t)),
                covariance(&xs, &ys),
                k,
                0.15,
            ));
        }
    }
    Ok(checks)
}

fn q_inverse_identity(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let model = config.model()?;
    let levels = grid_or(config, &[0.02, 0.05, 0.1, 0.3, 0.6]);
    let kq = KernelSpec::new(KernelKind::Q, model.clone());
    let kinv = KernelSpec::new(KernelKind::QInverse, model.clone());
    let mut worst: f64 = 0.0;
    for &u in &levels {
        for &v in &levels {
            let (s, t) = (q_preimage(&model, u)?, q_preimage(&model, v)?);
            let lhs = kinv.eval(u, v)? * model.q_prime(s)? * model.q_prime(t)?;
            worst = worst.max((lhs - kq.eval(s, t)?).abs());
        }
    }
    Ok(vec![Check::new("max abs discrepancy", worst, 0.0, 0.0, 1e-10)])
}

fn plugin(config: &ScenarioConfig, known_a: bool) -> Result<Vec<Check>> {
    let model = config.model()?;
    let fdps = per_rep(config, |s| {
        let a_hat = if known_a {
            NullFractionEstimate::fixed(model.a())?
        } else {
            storey_a0(s.pvalues(), T0)?
        };
        let t = plugin_threshold(s.pvalues(), &a_hat, ALPHA, EcdfVariant::Plain)?;
        Ok(classify(&s, t.t)?.fdp())
    })?;
    let m = mean(&fdps);
    Ok(vec![if known_a {
        Check::within("mean fdp", m, ALPHA, 0.01)
    } else {
        Check::new("mean fdp", m, ALPHA, 0.0, ALPHA + 0.01)
    }])
}

fn rate_ceiling(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let model = config.model()?;
    let c = 0.05;
    let t = rate_ceiling_known_a(&model, config.m, c, ALPHA)?.t;
    let ok = per_rep(config, |s| Ok(classify(&s, t)?.fdp() <= c))?;
    Ok(vec![Check::new("P{fdp <= c}", fraction(&ok), 1.0 - ALPHA, 0.93, 0.97)])
}

fn astar_coverage(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let floor = purity_quantities(&config.model()?)?.a_floor;
    let covered = per_rep(config, |s| {
        let g = ecdf(s.pvalues(), EcdfVariant::Plain)?;
        Ok(astar_lower(&g, ALPHA)?.value <= floor)
    })?;
    Ok(vec![Check::new("coverage", fraction(&covered), 1.0 - ALPHA, 0.94, 1.0)])
}

fn exact_set_coverage(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let outcomes = per_rep(config, |s| {
        let labels = s.labels().expect("simulated samples are labeled");
        let set = exact_confidence_set(s.pvalues(), ALPHA)?;
        let inside = set.contains(s.pvalues(), labels)?;
        let mut violations = 0usize;
        if inside {
            let env = exact_envelope(&set, s.pvalues())?;
            for &t in s.pvalues() {
                if classify(&s, t)?.fdp() > env.eval(t).expect("p-values lie in the domain") {
                    violations += 1;
                }
            }
        }
        Ok((inside, violations))
    })?;
    let inside: Vec<bool> = outcomes.iter().map(|o| o.0).collect();
    let violations: usize = outcomes.iter().map(|o| o.1).sum();
    Ok(vec![
        Check::new("coverage", fraction(&inside), 1.0 - ALPHA, 0.94, 1.0),
        Check::new("envelope violations when covered", violations as f64, 0.0, 0.0, 0.0),
    ])
}

fn bridge_w(config: &ScenarioConfig, t_min: f64) -> Result<f64> {
    Ok(brownian_sup_quantile(ALPHA / 2.0, t_min, BRIDGE_GRID, BRIDGE_REPS, config.seed)?.value)
}

fn envelope_coverage(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let t_min = 0.1 / config.m as f64;
    let w = bridge_w(config, t_min)?;
    let outcomes = per_rep(config, |s| {
        let env = asymptotic_envelope(s.pvalues(), T0, ALPHA, Some(t_min), w)?;
        let labels = s.labels().expect("simulated samples are labeled");
        let mut pairs: Vec<(f64, bool)> = s.pvalues().iter().copied().zip(labels.iter().copied()).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        // Γ and M₁|₀ only move at p-values while both bounds rise between them
        let (mut fdp_ok, mut count_ok) = (true, true);
        let (mut r, mut v) = (0usize, 0usize);
        let mut i = 0;
        while i < pairs.len() && pairs[i].0 < t_min {
            r += 1;
            v += usize::from(!pairs[i].1);
            i += 1;
        }
        let mut check = |t: f64, r: usize, v: usize| {
            let gamma = if r == 0 { 0.0 } else { v as f64 / r as f64 };
            fdp_ok &= gamma <= env.eval(t).expect("in domain");
            count_ok &= v as f64 <= env.count_bound_at(t).expect("in domain");
        };
        let mut at_min = (r, v);
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == t_min {
            at_min.0 += 1;
            at_min.1 += usize::from(!pairs[j].1);
            j += 1;
        }
        check(t_min, at_min.0, at_min.1);
        while i < pairs.len() {
            let t = pairs[i].0;
            while i < pairs.len() && pairs[i].0 == t {
                r += 1;
                v += usize::from(!pairs[i].1);
                i += 1;
            }
            check(t, r, v);
        }
        Ok((fdp_ok, count_ok))
    })?;
    let fdp: Vec<bool> = outcomes.iter().map(|o| o.0).collect();
    let count: Vec<bool> = outcomes.iter().map(|o| o.1).collect();
    Ok(vec![
        Check::new("fdp envelope coverage", fraction(&fdp), 1.0 - ALPHA, 0.94, 1.0),
        Check::new("count envelope coverage", fraction(&count), 1.0 - ALPHA, 0.94, 1.0),
        Check::new("bridge quantile w", w, w, 0.0, f64::INFINITY),
    ])
}

/// sup_t |F(t) − H(t)| for continuous nondecreasing F and a step function H.
fn sup_to_step(f: impl Fn(f64) -> f64, h: &StepFunction) -> f64 {
    let mut edges = vec![0.0];
    edges.extend_from_slice(h.knots());
    edges.push(1.0);
    let mut values = vec![h.initial()];
    values.extend_from_slice(h.values());
    let mut d: f64 = 0.0;
    for (w, &v) in edges.windows(2).zip(&values) {
        d = d.max((f(w[0]) - v).abs()).max((f(w[1]) - v).abs());
    }
    d.max((f(1.0) - h.eval(1.0)).abs())
}

fn projection_bound(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let model = config.model()?;
    if model.a() <= 0.0 {
        return Err(FdpError::param("a", "the projection bound needs a > 0"));
    }
    let ok = per_rep(config, |s| {
        let g = ecdf(s.pvalues(), EcdfVariant::Plain)?;
        let proj = project_f(&g, model.a(), ProjectionShape::Step)?;
        let step = proj.to_step().expect("step projections are step functions");
        let lhs = sup_to_step(|t| model.f_cdf(t), &step);
        let rhs = 2.0 * g.sup_distance(&|t| model.g_cdf(t)) / model.a();
        Ok(lhs <= rhs + 1e-12)
    })?;
    let held = ok.iter().filter(|&&b| b).count() as f64;
    Ok(vec![Check::new("runs within the bound", held, ok.len() as f64, ok.len() as f64, ok.len() as f64)])
}

fn lcm_contraction(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let model = config.model()?;
    let ok = per_rep(config, |s| {
        let g = |t: f64| model.g_cdf(t);
        let plain = ecdf(s.pvalues(), EcdfVariant::Plain)?.sup_distance(&g);
        let lcm = ecdf(s.pvalues(), EcdfVariant::Lcm)?.sup_distance(&g);
        Ok(lcm <= plain + 1e-12)
    })?;
    let held = ok.iter().filter(|&&b| b).count() as f64;
    Ok(vec![Check::new("runs with lcm no farther", held, ok.len() as f64, ok.len() as f64, ok.len() as f64)])
}

fn uniformity_size(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let test = SecondOrderTest::new(ALPHA)?;
    let rejected: Vec<bool> = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut stream = rng::stream(config.seed, Purpose::Auxiliary, rep);
            let subset: Vec<f64> = (0..config.m).map(|_| stream.gen::<f64>()).collect();
            test.rejects(&subset)
        })
        .collect();
    Ok(vec![Check::within("rejection rate", fraction(&rejected), ALPHA, 0.005)])
}

fn example_two(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let c = 0.05;
    let t_min = 0.1 / config.m as f64;
    let w = bridge_w(config, t_min)?;
    let runs = per_rep(config, |s| {
        let set = exact_confidence_set(s.pvalues(), ALPHA)?;
        let exact = exact_envelope(&set, s.pvalues())?;
        let asym = asymptotic_envelope(s.pvalues(), T0, ALPHA, Some(t_min), w)?;
        let te = confidence_thresholds(&exact, Some(c))?.t;
        let ta = confidence_thresholds(&asym, Some(c))?.t;
        let z = confidence_thresholds(&exact, None)?.z.expect("minimum-rate thresholds report Z");
        Ok((ta, te, z))
    })?;
    let ta: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let te: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let z: Vec<f64> = runs.iter().map(|r| r.2).collect();
    let ordered: Vec<bool> = runs.iter().map(|r| r.0 >= r.1).collect();
    Ok(vec![
        Check::new("median asymptotic rate-ceiling threshold", median(&ta), 0.00062, 1e-4, 1e-2),
        Check::new("median exact rate-ceiling threshold", median(&te), 0.00046, 1e-4, 1e-2),
        Check::new("fraction asymptotic >= exact", fraction(&ordered), 1.0, 0.8, 1.0),
        Check::new("median exact minimum-rate Z", median(&z), 0.011, 0.0, 0.05),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for t in ValidationTarget::ALL {
            assert_eq!(t.name().parse::<ValidationTarget>().unwrap(), t);
            assert!(t.default_scenario().validate().is_ok());
        }
        assert!(matches!("lemma".parse::<ValidationTarget>(), Err(FdpError::UnknownTarget(_))));
    }

    #[test]
    fn reports_are_reproducible() {
        let scenario = ValidationTarget::FdpMean.default_scenario();
        let small = ScenarioConfig { reps: 300, ..scenario };
        let a = run_validation(ValidationTarget::FdpMean, Some(&small)).unwrap();
        let b = run_validation(ValidationTarget::FdpMean, Some(&small)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.checks.len(), 3);
        assert!(a.to_csv().starts_with(ValidationReport::CSV_HEADER));
    }

    #[test]
    fn deterministic_identity_target_passes() {
        let r = run_validation(ValidationTarget::QInverseIdentity, None).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn sup_to_step_against_a_grid() {
        let h = StepFunction::new(0.0, [(0.2, 0.5), (0.6, 0.9)]).unwrap();
        let f = |t: f64| t.sqrt();
        let grid = (0..=100_000).map(|i| i as f64 / 100_000.0);
        let brute = grid.map(|t| (f(t) - h.eval(t)).abs()).fold(0.0, f64::max);
        let exact = sup_to_step(f, &h);
        assert!(exact >= brute && exact - brute < 1e-4);
    }
}
