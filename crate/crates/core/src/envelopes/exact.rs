use serde::Serialize;

use super::{EnvelopeMethod, EnvelopeResult, Shape};
use crate::error::{check_level, check_pvalues, FdpError, Result};
use crate::sample::sorted;
use crate::step::StepFunction;

/// A test of the hypothesis that a set of p-values is an i.i.d. uniform
/// sample. Used to decide which labelings are plausible.
pub trait UniformityTest: Send + Sync {
    /// Whether uniformity of `subset` is rejected.
    fn rejects(&self, subset: &[f64]) -> bool;
    fn describe(&self) -> String;
}

/// Rejects when the second-smallest value is at most c_k(α), where
/// P{V_(2) ≤ c} = α for k uniforms. Sets of size 0 or 1 are always accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderTest {
    alpha: f64,
}

impl SecondOrderTest {
    pub fn new(alpha: f64) -> Result<Self> {
        check_level("alpha", alpha)?;
        Ok(SecondOrderTest { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// c_k(α); `None` for k ≤ 1.
    pub fn critical_value(&self, k: usize) -> Option<f64> {
        (k >= 2).then(|| second_order_critical_value(k, self.alpha))
    }
}

impl UniformityTest for SecondOrderTest {
    fn rejects(&self, subset: &[f64]) -> bool {
        let Some(c) = self.critical_value(subset.len()) else {
            return false;
        };
        subset.iter().filter(|&&p| p <= c).count() >= 2
    }

    fn describe(&self) -> String {
        format!("second order statistic, level {}", self.alpha)
    }
}

/// P{V_(2) ≤ c} for the second order statistic of k uniforms.
fn second_order_cdf(k: usize, c: f64) -> f64 {
    if c >= 1.0 {
        return 1.0;
    }
    let k = k as f64;
    // 1 − (1−c)^k − k·c·(1−c)^(k−1), with powers via log1p for large k
    let lg = (-c).ln_1p();
    let tail = (k * lg).exp() + k * c * ((k - 1.0) * lg).exp();
    1.0 - tail
}

fn second_order_critical_value(k: usize, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if second_order_cdf(k, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Whether `uniformity_test_second_order` rejects the subset at level α.
pub fn uniformity_test_second_order(subset: &[f64], alpha: f64) -> Result<bool> {
    Ok(SecondOrderTest::new(alpha)?.rejects(subset))
}

/// What the acceptance region looks like for labelings with exactly k nulls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullCountSummary {
    pub k: usize,
    /// c_k(α); absent for k ≤ 1, which are always accepted
    pub critical: Option<f64>,
    /// #{P_i ≤ c_k}
    pub below: usize,
    /// at least one labeling with k nulls is accepted
    pub feasible: bool,
}

/// The 1 − α confidence set of labelings under the second-order test.
///
/// A labeling with k nulls is accepted iff at most one null p-value is ≤ c_k.
/// So acceptance depends on the labeling only through k and how many nulls
/// fall at or below c_k, and one summary per k describes the whole set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactConfidenceSet {
    pub alpha: f64,
    pub summaries: Vec<NullCountSummary>,
    sorted: Vec<f64>,
}

impl ExactConfidenceSet {
    pub fn m(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_pvalues(&self) -> &[f64] {
        &self.sorted
    }

    /// ℳ_α: null counts with at least one accepted labeling.
    pub fn null_counts(&self) -> Vec<usize> {
        self.summaries.iter().filter(|s| s.feasible).map(|s| s.k).collect()
    }

    /// Membership of a labeling (`true` = alternative), with labels aligned to
    /// `pvalues` as originally supplied.
    pub fn contains(&self, pvalues: &[f64], is_alternative: &[bool]) -> Result<bool> {
        if pvalues.len() != self.m() || is_alternative.len() != self.m() {
            return Err(FdpError::Mismatch("labeling length differs from the sample".into()));
        }
        let nulls: Vec<f64> = pvalues
            .iter()
            .zip(is_alternative)
            .filter(|(_, &alt)| !alt)
            .map(|(&p, _)| p)
            .collect();
        Ok(match self.summaries[nulls.len()].critical {
            None => true,
            Some(c) => nulls.iter().filter(|&&p| p <= c).count() <= 1,
        })
    }

    /// Largest number of accepted-labeling nulls at or below t, among
    /// labelings with k nulls, given R = #{P ≤ t}.
    fn max_nulls(&self, s: &NullCountSummary, t: f64, r: usize, left: bool) -> usize {
        let Some(c) = s.critical else {
            return s.k.min(r);
        };
        let upto = |x: f64| {
            if left && x >= t {
                self.sorted.partition_point(|&p| p < t)
            } else {
                self.sorted.partition_point(|&p| p <= x)
            }
        };
        let low = upto(c.min(t));
        // one null may sit at or below c_k; every p in (c_k, t] may be null
        s.k.min(low.min(1) + (r - low))
    }

    fn count_bound_at(&self, t: f64, left: bool) -> (usize, usize) {
        let r = if left {
            self.sorted.partition_point(|&p| p < t)
        } else {
            self.sorted.partition_point(|&p| p <= t)
        };
        let n = self
            .summaries
            .iter()
            .filter(|s| s.feasible)
            .map(|s| self.max_nulls(s, t, r, left))
            .max()
            .unwrap_or(0);
        (n, r)
    }
}

pub fn exact_confidence_set(pvalues: &[f64], alpha: f64) -> Result<ExactConfidenceSet> {
    check_pvalues(pvalues)?;
    let test = SecondOrderTest::new(alpha)?;
    let sorted = sorted(pvalues);
    let m = sorted.len();
    let summaries = (0..=m)
        .map(|k| {
            let critical = test.critical_value(k);
            let below = critical.map_or(0, |c| sorted.partition_point(|&p| p <= c));
            let feasible = k <= 1 || k <= (m - below) + below.min(1);
            NullCountSummary {
                k,
                critical,
                below,
                feasible,
            }
        })
        .collect();
    Ok(ExactConfidenceSet {
        alpha,
        summaries,
        sorted,
    })
}

/// Γ̄(t) = max over accepted labelings of Γ(t), on [P_(1), 1].
pub fn exact_envelope(confset: &ExactConfidenceSet, pvalues: &[f64]) -> Result<EnvelopeResult> {
    if sorted(pvalues) != confset.sorted {
        return Err(FdpError::Mismatch(
            "confidence set was built from different p-values".into(),
        ));
    }
    let mut knots: Vec<f64> = confset.sorted.clone();
    knots.dedup();
    let mut gamma = Vec::with_capacity(knots.len());
    let mut counts = Vec::with_capacity(knots.len());
    for &t in &knots {
        let (n, r) = confset.count_bound_at(t, false);
        gamma.push((t, n as f64 / r as f64));
        counts.push((t, n as f64));
    }
    let test = SecondOrderTest::new(confset.alpha)?;
    let mut meta = std::collections::BTreeMap::new();
    meta.insert("m".to_string(), confset.m() as f64);
    if let (Some(&lo), Some(&hi)) = (confset.null_counts().first(), confset.null_counts().last()) {
        meta.insert("m0_min".to_string(), lo as f64);
        meta.insert("m0_max".to_string(), hi as f64);
    }
    Ok(EnvelopeResult {
        method: EnvelopeMethod::Exact,
        alpha: confset.alpha,
        level: 1.0 - confset.alpha,
        t_min: knots[0],
        gamma_bar: StepFunction::new(0.0, gamma)?,
        v_fn: None,
        count_bound: StepFunction::new(0.0, counts)?,
        meta,
        description: test.describe(),
        shape: Shape::Exact,
        sorted: confset.sorted.clone(),
    })
}
