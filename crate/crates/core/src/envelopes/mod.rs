//! Upper confidence envelopes Γ̄ for the FDP process, the matching bound on
//! the false discovery count, and thresholds read off an envelope.

mod asymptotic;
mod exact;

use std::collections::BTreeMap;

use serde::Serialize;

pub use asymptotic::{asymptotic_envelope, brownian_sup_quantile, delta_m, t_min_floor, BridgeQuantile};
pub use exact::{
    exact_confidence_set, exact_envelope, uniformity_test_second_order, ExactConfidenceSet, NullCountSummary,
    SecondOrderTest, UniformityTest,
};

use crate::error::{check_level, FdpError, Result};
use crate::step::StepFunction;
use crate::thresholds::{ThresholdMethod, ThresholdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeMethod {
    Asymptotic,
    Exact,
}

impl EnvelopeMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnvelopeMethod::Asymptotic => "asymptotic",
            EnvelopeMethod::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    Exact,
    /// Γ̄(t) = min{V(t)/Ĝ(t), 1} with V(t) = (1 − a0)t + δ√t/√m
    Asymptotic { a0: f64, delta: f64 },
}

/// An upper envelope on its domain [t_min, 1].
///
/// For the exact method `gamma_bar` is the envelope itself. The asymptotic
/// envelope rises continuously between p-values, so `gamma_bar` holds its
/// values at the knots (t_min and the p-values above it), which are the
/// minima over each piece; use [`EnvelopeResult::eval`] for other points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeResult {
    pub method: EnvelopeMethod,
    pub alpha: f64,
    pub level: f64,
    pub t_min: f64,
    pub gamma_bar: StepFunction,
    /// V(t) at the knots (asymptotic only)
    pub v_fn: Option<StepFunction>,
    /// bound on the number of false discoveries at the knots
    pub count_bound: StepFunction,
    pub meta: BTreeMap<String, f64>,
    pub description: String,
    #[serde(skip)]
    pub(crate) shape: Shape,
    #[serde(skip)]
    pub(crate) sorted: Vec<f64>,
}

/// A maximal interval between knots on which Γ̄ is continuous and nondecreasing.
#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    end: f64,
    /// the right end belongs to the piece (only for the piece reaching 1)
    closed: bool,
    at_start: f64,
    at_end: f64,
}

impl EnvelopeResult {
    pub fn m(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_pvalues(&self) -> &[f64] {
        &self.sorted
    }

    fn in_domain(&self, t: f64) -> bool {
        t >= self.t_min && t <= 1.0
    }

    fn rejections(&self, t: f64, left: bool) -> usize {
        if left {
            self.sorted.partition_point(|&p| p < t)
        } else {
            self.sorted.partition_point(|&p| p <= t)
        }
    }

    fn formula(&self, t: f64, r: usize) -> f64 {
        match self.shape {
            Shape::Exact => unreachable!("exact envelopes are stored as step functions"),
            Shape::Asymptotic { .. } => {
                if r == 0 {
                    1.0
                } else {
                    (self.v_formula(t) * self.m() as f64 / r as f64).min(1.0)
                }
            }
        }
    }

    fn v_formula(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Exact => f64::NAN,
            Shape::Asymptotic { a0, delta } => (1.0 - a0) * t + delta * t.sqrt() / (self.m() as f64).sqrt(),
        }
    }

    /// Γ̄(t); `None` outside the domain.
    pub fn eval(&self, t: f64) -> Option<f64> {
        if !self.in_domain(t) {
            return None;
        }
        Some(match self.shape {
            Shape::Exact => self.gamma_bar.eval(t),
            Shape::Asymptotic { .. } => self.formula(t, self.rejections(t, false)),
        })
    }

    /// Γ̄(t⁻) for t in (t_min, 1].
    pub fn eval_left(&self, t: f64) -> Option<f64> {
        if !(t > self.t_min && t <= 1.0) {
            return None;
        }
        Some(match self.shape {
            Shape::Exact => self.gamma_bar.eval_left(t),
            Shape::Asymptotic { .. } => self.formula(t, self.rejections(t, true)),
        })
    }

    /// V(t) on the domain, asymptotic envelopes only.
    pub fn v(&self, t: f64) -> Option<f64> {
        match self.shape {
            Shape::Asymptotic { .. } if self.in_domain(t) => Some(self.v_formula(t)),
            _ => None,
        }
    }

    /// Bound on the false discovery count at t.
    pub fn count_bound_at(&self, t: f64) -> Option<f64> {
        if !self.in_domain(t) {
            return None;
        }
        Some(match self.shape {
            Shape::Exact => self.count_bound.eval(t),
            Shape::Asymptotic { .. } => self.m() as f64 * self.v_formula(t),
        })
    }

    fn pieces(&self) -> Vec<Piece> {
        let knots = self.gamma_bar.knots();
        let mut out = Vec::with_capacity(knots.len());
        for (i, &start) in knots.iter().enumerate() {
            let (end, closed) = match knots.get(i + 1) {
                Some(&next) => (next, false),
                None => (1.0, true),
            };
            let at_start = self.eval(start).expect("knots lie in the domain");
            let at_end = if end > start {
                self.eval_left(end).expect("piece ends lie in the domain")
            } else {
                at_start
            };
            out.push(Piece {
                start,
                end,
                closed,
                at_start,
                at_end,
            });
        }
        out
    }

    /// sup{t in the piece : Γ̄(t) ≤ c}, given Γ̄(start) ≤ c < Γ̄(end⁻).
    fn solve_within(&self, piece: &Piece, c: f64) -> f64 {
        match self.shape {
            Shape::Exact => piece.start,
            Shape::Asymptotic { a0, delta } => {
                let r = self.rejections(piece.start, false);
                if r == 0 {
                    return piece.start;
                }
                // (1 − a0)t + b√t = c·r/m, solved for √t
                let a = 1.0 - a0;
                let b = delta / (self.m() as f64).sqrt();
                let rhs = c * r as f64 / self.m() as f64;
                let s = if a > 0.0 {
                    2.0 * rhs / (b + (b * b + 4.0 * a * rhs).sqrt())
                } else if b > 0.0 {
                    rhs / b
                } else {
                    return piece.end;
                };
                (s * s).clamp(piece.start, piece.end)
            }
        }
    }
}

/// Rate-ceiling threshold when `ceiling` is given, minimum-rate otherwise.
///
/// Rate ceiling: T_c = sup{t ≥ t_min : Γ̄(t) ≤ c}, or 0 (rejecting nothing)
/// when the set is empty. Minimum rate: Z = min Γ̄ and T is the right end of
/// the leftmost connected set on which Γ̄ = Z; the leftmost point of that
/// set is kept as the `leftmost_minimizer` diagnostic. Either T may be a
/// left limit, flagged on the result.
pub fn confidence_thresholds(env: &EnvelopeResult, ceiling: Option<f64>) -> Result<ThresholdResult> {
    let pieces = env.pieces();
    if pieces.is_empty() {
        return Err(FdpError::Domain("the envelope has an empty domain".into()));
    }
    let result = match ceiling {
        Some(c) => {
            check_level("ceiling", c)?;
            let mut best: Option<(f64, bool)> = None;
            for p in pieces.iter().filter(|p| p.at_start <= c) {
                best = Some(if p.at_end <= c {
                    (p.end, !p.closed)
                } else {
                    (env.solve_within(p, c), false)
                });
            }
            let out = match best {
                Some((t, left)) => {
                    let r = ThresholdResult::new(ThresholdMethod::RateCeiling, t);
                    if left {
                        r.left_limit()
                    } else {
                        r
                    }
                }
                None => ThresholdResult::new(ThresholdMethod::RateCeiling, 0.0).left_limit(),
            };
            out.with_z(c).diagnostic("ceiling", c)
        }
        None => {
            let z = pieces.iter().map(|p| p.at_start).fold(f64::INFINITY, f64::min);
            let first = pieces.iter().position(|p| p.at_start == z).expect("minimum is attained");
            let mut j = first;
            let (t, left) = loop {
                let p = &pieces[j];
                if p.at_end > z {
                    break (env.solve_within(p, z), false);
                }
                match pieces.get(j + 1) {
                    Some(next) if next.at_start == z => j += 1,
                    _ => break (p.end, !p.closed),
                }
            };
            let r = ThresholdResult::new(ThresholdMethod::MinimumRate, t);
            let r = if left { r.left_limit() } else { r };
            r.with_z(z).diagnostic("leftmost_minimizer", pieces[first].start)
        }
    };
    Ok(result
        .with_alpha(env.alpha)
        .diagnostic("level", env.level)
        .count(&env.sorted))
}

/// The false discovery count bound as a step function over the envelope's
/// knots: the largest null count among accepted labelings for the exact
/// method, m·V(t) sampled at the knots for the asymptotic one.
pub fn m10_envelope(env: &EnvelopeResult, m: usize) -> Result<StepFunction> {
    if m != env.m() {
        return Err(FdpError::Mismatch(format!(
            "envelope was built from {} p-values, not {m}",
            env.m()
        )));
    }
    Ok(env.count_bound.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::EXAMPLE1;

    fn example1() -> EnvelopeResult {
        let set = exact_confidence_set(&EXAMPLE1, 0.05).unwrap();
        exact_envelope(&set, &EXAMPLE1).unwrap()
    }

    #[test]
    fn example_one_exact_envelope() {
        let env = example1();
        let set = exact_confidence_set(&EXAMPLE1, 0.05).unwrap();
        assert_eq!(set.null_counts(), (0..=7).collect::<Vec<_>>());
        let expected = [
            1.0,
            0.5,
            1.0 / 3.0,
            0.25,
            0.2,
            1.0 / 6.0,
            1.0 / 7.0,
            0.125,
            1.0 / 9.0,
            0.2,
            3.0 / 11.0,
            1.0 / 3.0,
            5.0 / 13.0,
            3.0 / 7.0,
            7.0 / 15.0,
        ];
        let mut sorted = EXAMPLE1.to_vec();
        sorted.sort_by(f64::total_cmp);
        for (p, want) in sorted.iter().zip(expected) {
            assert!((env.eval(*p).unwrap() - want).abs() < 1e-12, "at {p}");
        }
        assert!(env.gamma_bar.values().iter().all(|&v| v >= 0.05));
        assert!(env.eval(0.0095).unwrap() <= 0.25);
        assert!(env.eval_left(0.4262).unwrap() <= 0.25);
        assert_eq!(env.eval(sorted[0] / 2.0), None);

        let min_rate = confidence_thresholds(&env, None).unwrap();
        assert_eq!(min_rate.t, 0.324);
        assert!(min_rate.left_limit);
        assert!((min_rate.z.unwrap() - 1.0 / 9.0).abs() < 1e-12);
        assert_eq!(min_rate.rejected, Some(9));
        assert_eq!(min_rate.diagnostics["leftmost_minimizer"], 0.0459);

        let ceiling = confidence_thresholds(&env, Some(0.25)).unwrap();
        assert_eq!(ceiling.t, 0.4262);
        assert!(ceiling.left_limit);
        assert_eq!(ceiling.rejected, Some(10));
    }

    #[test]
    fn envelope_at_one_gives_no_ceiling_threshold() {
        let env = asymptotic_envelope(&[0.2, 0.5, 0.9, 0.95], 0.5, 0.05, Some(0.1), 1e6).unwrap();
        assert!(env.gamma_bar.values().iter().all(|&v| v == 1.0));
        let r = confidence_thresholds(&env, Some(0.9)).unwrap();
        assert_eq!((r.t, r.rejected), (0.0, Some(0)));
        let min = confidence_thresholds(&env, None).unwrap();
        assert_eq!(min.z, Some(1.0));
        assert_eq!(min.t, 1.0);
        assert_eq!(min.diagnostics["leftmost_minimizer"], 0.1);
        assert!(confidence_thresholds(&env, Some(1.5)).is_err());
    }

    #[test]
    fn thresholds_on_asymptotic_envelope_match_a_scan() {
        let p: Vec<f64> = (0..400)
            .map(|i| {
                let u = (i as f64 + 0.5) / 400.0;
                if i % 3 == 0 {
                    u.powi(6)
                } else {
                    u
                }
            })
            .collect();
        let env = asymptotic_envelope(&p, 0.5, 0.05, None, 2.5).unwrap();
        for c in [0.2, 0.4, 0.6] {
            let r = confidence_thresholds(&env, Some(c)).unwrap();
            let grid = (0..=200_000).map(|i| env.t_min + (1.0 - env.t_min) * i as f64 / 200_000.0);
            let scan = grid.filter(|&t| env.eval(t).unwrap() <= c).fold(0.0, f64::max);
            assert!(r.t >= scan - 1e-12 && r.t - scan < 1e-4, "c = {c}: {} vs {scan}", r.t);
            if !r.left_limit && r.t > 0.0 {
                assert!(env.eval(r.t).unwrap() <= c + 1e-12);
            }
        }
        let min = confidence_thresholds(&env, None).unwrap();
        let grid_min = (0..=200_000)
            .map(|i| env.eval(env.t_min + (1.0 - env.t_min) * i as f64 / 200_000.0).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min.z.unwrap() <= grid_min + 1e-15);
        assert_eq!(env.eval(min.t), min.z);
    }

    #[test]
    fn count_envelope_sizes_must_agree() {
        let env = example1();
        assert_eq!(m10_envelope(&env, 15).unwrap(), env.count_bound);
        assert!(m10_envelope(&env, 14).is_err());
    }
}
