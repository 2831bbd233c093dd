//! Labeled p-value samples, the 2×2 classification table, and the FDP/FNP
//! processes as functions of the rejection threshold.

use serde::{Deserialize, Serialize};

use crate::error::{check_pvalues, FdpError, Result};
use crate::step::StepFunction;

/// P-values with optional hypothesis labels. A label of `true` marks a false
/// null (an alternative, H = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pvalues: Vec<f64>,
    labels: Option<Vec<bool>>,
}

impl LabeledSample {
    pub fn new(pvalues: Vec<f64>) -> Result<Self> {
        check_pvalues(&pvalues)?;
        Ok(LabeledSample { pvalues, labels: None })
    }

    pub fn with_labels(pvalues: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        check_pvalues(&pvalues)?;
        if labels.len() != pvalues.len() {
            return Err(FdpError::Mismatch(format!(
                "{} p-values but {} labels",
                pvalues.len(),
                labels.len()
            )));
        }
        Ok(LabeledSample {
            pvalues,
            labels: Some(labels),
        })
    }

    pub fn len(&self) -> usize {
        self.pvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pvalues.is_empty()
    }

    pub fn pvalues(&self) -> &[f64] {
        &self.pvalues
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    fn require_labels(&self) -> Result<&[bool]> {
        self.labels.as_deref().ok_or(FdpError::LabelsRequired)
    }

    /// P_(1) ≤ … ≤ P_(m), stable for ties.
    pub fn sorted(&self) -> Vec<f64> {
        sorted(&self.pvalues)
    }

    /// M_0, the number of true nulls.
    pub fn null_count(&self) -> Result<usize> {
        Ok(self.require_labels()?.iter().filter(|h| !**h).count())
    }

    /// M_1, the number of false nulls.
    pub fn alternative_count(&self) -> Result<usize> {
        Ok(self.require_labels()?.iter().filter(|h| **h).count())
    }

    /// (p, is_alternative) pairs in increasing p order.
    fn sorted_pairs(&self) -> Result<Vec<(f64, bool)>> {
        let labels = self.require_labels()?;
        let mut pairs: Vec<(f64, bool)> = self.pvalues.iter().copied().zip(labels.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pairs)
    }
}

pub(crate) fn sorted(pvalues: &[f64]) -> Vec<f64> {
    let mut v = pvalues.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// P_(i) with the convention P_(0) = 0.
pub fn order_statistic(sorted: &[f64], i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        sorted[i - 1]
    }
}

/// The 2×2 table of (truth × decision) counts at a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    /// true null, not rejected
    pub m00: usize,
    /// true null, rejected (false discoveries)
    pub m10: usize,
    /// false null, not rejected (missed discoveries)
    pub m01: usize,
    /// false null, rejected
    pub m11: usize,
    pub r: usize,
}

impl CountsTable {
    pub fn m(&self) -> usize {
        self.m00 + self.m10 + self.m01 + self.m11
    }

    /// FDP: M_{1|0}/R, 0 when R = 0.
    pub fn fdp(&self) -> f64 {
        if self.r == 0 {
            0.0
        } else {
            self.m10 as f64 / self.r as f64
        }
    }

    /// FNP: M_{0|1}/(m − R), 0 when R = m.
    pub fn fnp(&self) -> f64 {
        let accepted = self.m() - self.r;
        if accepted == 0 {
            0.0
        } else {
            self.m01 as f64 / accepted as f64
        }
    }
}

/// Classifies every hypothesis under the rule "reject when P_i ≤ t".
pub fn classify(sample: &LabeledSample, t: f64) -> Result<CountsTable> {
    let labels = sample.require_labels()?;
    let mut c = CountsTable {
        m00: 0,
        m10: 0,
        m01: 0,
        m11: 0,
        r: 0,
    };
    for (&p, &alt) in sample.pvalues.iter().zip(labels) {
        match (p <= t, alt) {
            (true, false) => c.m10 += 1,
            (true, true) => c.m11 += 1,
            (false, false) => c.m00 += 1,
            (false, true) => c.m01 += 1,
        }
    }
    c.r = c.m10 + c.m11;
    Ok(c)
}

/// Γ(t): the false discovery proportion as a function of the threshold.
/// Zero below the smallest p-value; jumps only at observed p-values.
pub fn fdp_process(sample: &LabeledSample) -> Result<StepFunction> {
    let pairs = sample.sorted_pairs()?;
    let mut points = Vec::with_capacity(pairs.len());
    let (mut r, mut v) = (0usize, 0usize);
    let mut i = 0;
    while i < pairs.len() {
        let p = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == p {
            r += 1;
            if !pairs[i].1 {
                v += 1;
            }
            i += 1;
        }
        points.push((p, v as f64 / r as f64));
    }
    StepFunction::new(0.0, points)
}

/// Ξ(t): the false nondiscovery proportion. Zero once every p-value is
/// rejected.
pub fn fnp_process(sample: &LabeledSample) -> Result<StepFunction> {
    let pairs = sample.sorted_pairs()?;
    let m = pairs.len();
    let m1 = pairs.iter().filter(|(_, h)| *h).count();
    let initial = m1 as f64 / m as f64;
    let mut points = Vec::with_capacity(m);
    let (mut r, mut rejected_alt) = (0usize, 0usize);
    let mut i = 0;
    while i < m {
        let p = pairs[i].0;
        while i < m && pairs[i].0 == p {
            r += 1;
            if pairs[i].1 {
                rejected_alt += 1;
            }
            i += 1;
        }
        let value = if r == m {
            0.0
        } else {
            (m1 - rejected_alt) as f64 / (m - r) as f64
        };
        points.push((p, value));
    }
    StepFunction::new(initial, points)
}

/// M_{1|0}(t) as a step function of t.
pub fn false_discovery_count(sample: &LabeledSample) -> Result<StepFunction> {
    let pairs = sample.sorted_pairs()?;
    let mut points = Vec::with_capacity(pairs.len());
    let mut v = 0usize;
    for (p, alt) in pairs {
        if !alt {
            v += 1;
        }
        points.push((p, v as f64));
    }
    StepFunction::new(0.0, points)
}
