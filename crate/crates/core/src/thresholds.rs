//! Rejection thresholds: reject hypothesis i when P_i ≤ t.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_level, check_pvalues, FdpError, Result};
use crate::estimation::{default_bandwidth, ecdf, kernel_density, EcdfVariant, NullFractionEstimate};
use crate::kernels::{eval_kernel, KernelKind, KernelSpec};
use crate::model::MixtureModel;
use crate::normal;
use crate::sample::{order_statistic, sorted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMethod {
    Uncorrected,
    Bonferroni,
    Fixed,
    FirstR,
    Bh,
    Oracle,
    Plugin,
    BayesClassifier,
    RateCeilingKnownA,
    RateCeiling,
    MinimumRate,
}

impl ThresholdMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdMethod::Uncorrected => "uncorrected",
            ThresholdMethod::Bonferroni => "bonferroni",
            ThresholdMethod::Fixed => "fixed",
            ThresholdMethod::FirstR => "first-r",
            ThresholdMethod::Bh => "bh",
            ThresholdMethod::Oracle => "oracle",
            ThresholdMethod::Plugin => "plugin",
            ThresholdMethod::BayesClassifier => "bayes-classifier",
            ThresholdMethod::RateCeilingKnownA => "rate-ceiling-known-a",
            ThresholdMethod::RateCeiling => "rate-ceiling",
            ThresholdMethod::MinimumRate => "minimum-rate",
        }
    }
}

/// A chosen threshold and what it does to the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub method: ThresholdMethod,
    pub t: f64,
    /// The threshold is the left limit t⁻: reject P_i < t rather than ≤ t.
    pub left_limit: bool,
    /// #{P_i ≤ t}, or #{P_i < t} for a left limit; absent for population
    /// thresholds computed without data.
    pub rejected: Option<usize>,
    pub alpha: Option<f64>,
    /// reported rate bound Z for confidence thresholds
    pub z: Option<f64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl ThresholdResult {
    pub fn new(method: ThresholdMethod, t: f64) -> Self {
        ThresholdResult {
            method,
            t,
            left_limit: false,
            rejected: None,
            alpha: None,
            z: None,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn left_limit(mut self) -> Self {
        self.left_limit = true;
        self
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = Some(z);
        self
    }

    pub fn diagnostic(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    /// Fills in the rejection count for the given data.
    pub fn count(mut self, pvalues: &[f64]) -> Self {
        self.rejected = Some(self.rejects(pvalues));
        self
    }

    pub fn rejects(&self, pvalues: &[f64]) -> usize {
        if self.left_limit {
            pvalues.iter().filter(|&&p| p < self.t).count()
        } else {
            pvalues.iter().filter(|&&p| p <= self.t).count()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimpleKind {
    Uncorrected,
    Bonferroni,
    Fixed(f64),
    FirstR(usize),
}

pub fn simple_thresholds(pvalues: &[f64], alpha: f64, kind: SimpleKind) -> Result<ThresholdResult> {
    check_pvalues(pvalues)?;
    check_level("alpha", alpha)?;
    let m = pvalues.len();
    let result = match kind {
        SimpleKind::Uncorrected => ThresholdResult::new(ThresholdMethod::Uncorrected, alpha),
        SimpleKind::Bonferroni => ThresholdResult::new(ThresholdMethod::Bonferroni, alpha / m as f64),
        SimpleKind::Fixed(t) => {
            if !(0.0..=1.0).contains(&t) {
                return Err(FdpError::param("t", format!("{t} is not in [0, 1]")));
            }
            ThresholdResult::new(ThresholdMethod::Fixed, t)
        }
        SimpleKind::FirstR(r) => {
            if r > m {
                return Err(FdpError::param("r", format!("{r} exceeds m = {m}")));
            }
            ThresholdResult::new(ThresholdMethod::FirstR, order_statistic(&sorted(pvalues), r))
                .diagnostic("r", r as f64)
        }
    };
    Ok(result.with_alpha(alpha).count(pvalues))
}

/// Step-up rule: R = max{i : P_(i) ≤ αi/m}, threshold P_(R).
pub fn bh_threshold(pvalues: &[f64], alpha: f64) -> Result<ThresholdResult> {
    check_pvalues(pvalues)?;
    check_level("alpha", alpha)?;
    let p = sorted(pvalues);
    let m = p.len() as f64;
    let r = (1..=p.len()).rev().find(|&i| p[i - 1] <= alpha * i as f64 / m).unwrap_or(0);
    Ok(ThresholdResult::new(ThresholdMethod::Bh, order_statistic(&p, r))
        .with_alpha(alpha)
        .diagnostic("r_bh", r as f64)
        .count(pvalues))
}

/// sup{t : Q(t) ≤ α} for a fully specified model.
pub fn oracle_threshold(model: &MixtureModel, alpha: f64) -> Result<ThresholdResult> {
    check_level("alpha", alpha)?;
    Ok(ThresholdResult::new(ThresholdMethod::Oracle, model.q_inverse(alpha)).with_alpha(alpha))
}

/// sup{t : (1 − â)t ≤ αĜ(t)}, solved exactly on each linear piece of Ĝ.
///
/// The reported threshold is the largest observed p-value not above that
/// supremum (or 1 when the supremum is 1), which rejects the same hypotheses;
/// the raw supremum is kept under the `sup` diagnostic.
pub fn plugin_threshold(
    pvalues: &[f64],
    ahat: &NullFractionEstimate,
    alpha: f64,
    variant: EcdfVariant,
) -> Result<ThresholdResult> {
    check_level("alpha", alpha)?;
    let ghat = ecdf(pvalues, variant)?;
    let keep = 1.0 - ahat.value;
    let mut sup: f64 = 0.0;
    for piece in ghat.pieces() {
        // keep·t ≤ α(A + Bt)  ⇔  k·t ≤ αA
        let k = keep - alpha * piece.slope;
        let rhs = alpha * piece.intercept;
        let candidate = if k > 0.0 {
            let bound = rhs / k;
            (bound >= piece.start).then(|| bound.min(piece.end))
        } else if k == 0.0 {
            (rhs >= 0.0).then_some(piece.end)
        } else {
            Some(piece.end)
        };
        if let Some(c) = candidate {
            sup = sup.max(c);
        }
    }
    if keep <= alpha * ghat.eval(1.0) {
        sup = 1.0;
    }
    let t = if sup >= 1.0 {
        1.0
    } else {
        let p = ghat.sorted();
        let i = p.partition_point(|&x| x <= sup);
        order_statistic(p, i)
    };
    Ok(ThresholdResult::new(ThresholdMethod::Plugin, t)
        .with_alpha(alpha)
        .diagnostic("sup", sup)
        .diagnostic("a_hat", ahat.value)
        .count(pvalues))
}

/// Largest grid point where the kernel density estimate of g exceeds 1.
pub fn bayes_classifier_threshold(pvalues: &[f64], bandwidth: Option<f64>) -> Result<ThresholdResult> {
    check_pvalues(pvalues)?;
    if pvalues.len() < 10 {
        return Err(FdpError::InsufficientData {
            needed: 10,
            got: pvalues.len(),
        });
    }
    let h = bandwidth.unwrap_or_else(|| default_bandwidth(pvalues.len()));
    let density = kernel_density(pvalues, h)?;
    let t = density
        .grid()
        .iter()
        .zip(density.values())
        .filter(|(_, &g)| g > 1.0)
        .map(|(&x, _)| x)
        .fold(0.0, f64::max);
    Ok(ThresholdResult::new(ThresholdMethod::BayesClassifier, t)
        .diagnostic("bandwidth", h)
        .count(pvalues))
}

/// Known-a threshold whose FDP stays below the ceiling c with probability
/// about 1 − α: t_c − z_α/√m · √K_Ω(t_c, t_c) / (1 − a − c·g(t_c)), where
/// t_c = Q⁻¹(c).
pub fn rate_ceiling_known_a(model: &MixtureModel, m: usize, c: f64, alpha: f64) -> Result<ThresholdResult> {
    check_level("alpha", alpha)?;
    check_level("ceiling", c)?;
    if m == 0 {
        return Err(FdpError::param("m", "must be at least 1"));
    }
    if model.a() == 0.0 {
        return Err(FdpError::param("model", "the alternative must differ from the uniform"));
    }
    let tc = model.q_inverse(c);
    if !(tc > 0.0 && tc < 1.0) {
        return Err(FdpError::Domain(format!("Q^-1({c}) = {tc} is not inside (0, 1)")));
    }
    let slope = 1.0 - model.a() - c * model.g_density(tc)?;
    if slope <= 0.0 {
        return Err(FdpError::DegenerateSlope(slope));
    }
    let k = eval_kernel(&KernelSpec::new(KernelKind::Omega { c }, model.clone()), tc, tc)?;
    let z = normal::upper_quantile(alpha);
    let t = tc - z / (m as f64).sqrt() * k.sqrt() / slope;
    Ok(ThresholdResult::new(ThresholdMethod::RateCeilingKnownA, t.clamp(0.0, 1.0))
        .with_alpha(alpha)
        .diagnostic("t_c", tc)
        .diagnostic("k_omega", k)
        .diagnostic("slope", slope)
        .diagnostic("ceiling", c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AlternativeFamily, CustomAlternative, UniformBelow};
    use proptest::prelude::*;
    use std::sync::Arc;

    use crate::examples::EXAMPLE1;

    #[test]
    fn example_one_simple_and_bh() {
        let b = simple_thresholds(&EXAMPLE1, 0.05, SimpleKind::Bonferroni).unwrap();
        assert!((b.t - 0.05 / 15.0).abs() < 1e-15);
        assert_eq!(b.rejected, Some(3));
        let u = simple_thresholds(&EXAMPLE1, 0.05, SimpleKind::Uncorrected).unwrap();
        assert_eq!(u.rejected, Some(9));
        let bh = bh_threshold(&EXAMPLE1, 0.05).unwrap();
        assert_eq!(bh.t, 0.0095);
        assert_eq!(bh.rejected, Some(4));
        let r0 = simple_thresholds(&EXAMPLE1, 0.05, SimpleKind::FirstR(0)).unwrap();
        assert_eq!((r0.t, r0.rejected), (0.0, Some(0)));
        assert!(simple_thresholds(&EXAMPLE1, 0.05, SimpleKind::FirstR(16)).is_err());
    }

    #[test]
    fn bh_with_nothing_to_reject() {
        let bh = bh_threshold(&[1.0; 5], 0.05).unwrap();
        assert_eq!((bh.t, bh.rejected), (0.0, Some(0)));
    }

    #[test]
    fn plugin_edge_cases() {
        let zero = NullFractionEstimate::fixed(0.0).unwrap();
        let p = plugin_threshold(&EXAMPLE1, &zero, 0.05, EcdfVariant::Plain).unwrap();
        assert_eq!(p.t, 0.0095);
        let one = NullFractionEstimate::fixed(1.0).unwrap();
        let p = plugin_threshold(&EXAMPLE1, &one, 0.05, EcdfVariant::Plain).unwrap();
        assert_eq!((p.t, p.rejected), (1.0, Some(15)));
    }

    #[test]
    fn oracle_examples() {
        let uniform = oracle_threshold(&MixtureModel::uniform(), 0.5).unwrap();
        assert_eq!(uniform.t, 0.0);
        let m = MixtureModel::new(0.5, Arc::new(UniformBelow::new(0.5).unwrap())).unwrap();
        assert!((oracle_threshold(&m, 0.4).unwrap().t - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn oracle_matches_dense_grid() {
        let model =
            MixtureModel::from_family(0.25, &AlternativeFamily::OneSidedNormal { theta: 3.0, n: 1.0 }).unwrap();
        let t = oracle_threshold(&model, 0.05).unwrap().t;
        let n = 1_000_000;
        let grid = (0..=n).map(|i| i as f64 / n as f64).filter(|&t| model.q(t) <= 0.05).fold(0.0, f64::max);
        assert!((t - grid).abs() < 1e-6, "{t} vs {grid}");
    }

    #[test]
    fn known_a_rate_ceiling() {
        let model =
            MixtureModel::from_family(0.25, &AlternativeFamily::OneSidedNormal { theta: 3.0, n: 1.0 }).unwrap();
        let half = rate_ceiling_known_a(&model, 100, 0.05, 0.5).unwrap();
        assert!((half.t - model.q_inverse(0.05)).abs() < 1e-15);
        let small = rate_ceiling_known_a(&model, 10_000, 0.05, 0.05).unwrap();
        let big = rate_ceiling_known_a(&model, 1_000_000, 0.05, 0.05).unwrap();
        assert!(small.t < big.t && big.t < half.t);
        // the correction shrinks like 1/√m
        let ratio = (half.t - small.t) / (half.t - big.t);
        assert!((ratio - 10.0).abs() < 1e-9, "{ratio}");
        assert!(rate_ceiling_known_a(&MixtureModel::uniform(), 100, 0.05, 0.05).is_err());
    }

    #[test]
    fn degenerate_slope_is_reported() {
        // For a valid concave G the slope is positive at t_c; an inflated
        // user-supplied density exercises the error path.
        let alt = CustomAlternative {
            label: "sqrt with inflated density".into(),
            cdf: Arc::new(|t: f64| t.sqrt()),
            density: Some(Arc::new(|_| 10.0)),
            quantile: None,
        };
        let m = MixtureModel::new(0.5, Arc::new(alt)).unwrap();
        assert!(matches!(rate_ceiling_known_a(&m, 100, 0.1, 0.05), Err(FdpError::DegenerateSlope(_))));
    }

    fn naive_bh(p: &[f64], alpha: f64) -> usize {
        let mut s = p.to_vec();
        s.sort_by(f64::total_cmp);
        let m = s.len();
        for i in (1..=m).rev() {
            if s[i - 1] <= alpha * i as f64 / m as f64 {
                return i;
            }
        }
        0
    }

    proptest! {
        #[test]
        fn bh_agrees_with_scan_and_plugin(p in proptest::collection::vec(0.0f64..=1.0, 1..=12), alpha in 0.01f64..0.5) {
            let bh = bh_threshold(&p, alpha).unwrap();
            prop_assert_eq!(bh.rejected, Some(naive_bh(&p, alpha)));
            let zero = NullFractionEstimate::fixed(0.0).unwrap();
            let pi = plugin_threshold(&p, &zero, alpha, EcdfVariant::Plain).unwrap();
            prop_assert_eq!(pi.t, bh.t);
            prop_assert_eq!(pi.rejected, bh.rejected);
            let bonf = simple_thresholds(&p, alpha, SimpleKind::Bonferroni).unwrap();
            let unc = simple_thresholds(&p, alpha, SimpleKind::Uncorrected).unwrap();
            // BH reports P_(R), which may sit below α/m, so compare rejection sets
            prop_assert!(bonf.rejected <= bh.rejected && bh.rejected <= unc.rejected);
        }

        #[test]
        fn plugin_is_monotone_in_ahat(p in proptest::collection::vec(0.0f64..=1.0, 1..30), a1 in 0.0f64..=1.0, a2 in 0.0f64..=1.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            for v in [EcdfVariant::Plain, EcdfVariant::Floor, EcdfVariant::Lcm] {
                let tl = plugin_threshold(&p, &NullFractionEstimate::fixed(lo).unwrap(), 0.1, v).unwrap();
                let th = plugin_threshold(&p, &NullFractionEstimate::fixed(hi).unwrap(), 0.1, v).unwrap();
                prop_assert!(tl.t <= th.t);
            }
        }
    }
}
