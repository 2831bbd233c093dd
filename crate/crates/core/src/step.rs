use serde::{Deserialize, Serialize};

use crate::error::{FdpError, Result};

/// Right-continuous piecewise-constant function on [0, 1].
///
/// `values[i]` holds on `[knots[i], knots[i + 1])` (the last one through 1),
/// and `initial` holds on `[0, knots[0])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    initial: f64,
}

impl StepFunction {
    pub fn constant(value: f64) -> Self {
        StepFunction {
            knots: Vec::new(),
            values: Vec::new(),
            initial: value,
        }
    }

    /// Builds from (knot, value) pairs. Knots are sorted; for tied knots the
    /// last pair wins.
    pub fn new(initial: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
        if let Some((k, _)) = pts.iter().find(|(k, v)| !k.is_finite() || v.is_nan()) {
            return Err(FdpError::param("knots", format!("non-finite knot or value at {k}")));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots: Vec<f64> = Vec::with_capacity(pts.len());
        let mut values: Vec<f64> = Vec::with_capacity(pts.len());
        for (k, v) in pts {
            if knots.last() == Some(&k) {
                *values.last_mut().unwrap() = v;
            } else {
                knots.push(k);
                values.push(v);
            }
        }
        Ok(StepFunction {
            knots,
            values,
            initial,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k <= t);
        if idx == 0 {
            self.initial
        } else {
            self.values[idx - 1]
        }
    }

    /// Left limit f(t⁻).
    pub fn eval_left(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k < t);
        if idx == 0 {
            self.initial
        } else {
            self.values[idx - 1]
        }
    }

    /// Constant pieces as `(start, end, value)`, covering `[0, 1]`.
    pub fn pieces(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.knots.len() + 1);
        let first = self.knots.first().copied().unwrap_or(1.0);
        if first > 0.0 || self.knots.is_empty() {
            out.push((0.0, first, self.initial));
        }
        for (i, (&k, &v)) in self.knots.iter().zip(&self.values).enumerate() {
            let end = self.knots.get(i + 1).copied().unwrap_or(1.0);
            out.push((k, end.max(k), v));
        }
        out
    }

    /// Sup-norm distance, evaluated at every knot of both functions and their
    /// left limits.
    pub fn sup_distance(&self, other: &StepFunction) -> f64 {
        let mut d = (self.initial - other.initial).abs();
        for &k in self.knots.iter().chain(&other.knots) {
            d = d.max((self.eval(k) - other.eval(k)).abs());
            d = d.max((self.eval_left(k) - other.eval_left(k)).abs());
        }
        d
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> StepFunction {
        StepFunction {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            initial: f(self.initial),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(self.initial, |a, &b| a.min(b))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(self.initial, |a, &b| a.max(b))
    }
}
