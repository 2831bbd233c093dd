use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{EnvelopeMethod, EnvelopeResult, Shape};
use crate::error::{check_level, check_pvalues, FdpError, Result};
use crate::estimation::storey_a0;
use crate::rng::{self, Purpose};
use crate::sample::sorted;
use crate::step::StepFunction;

/// Smallest number of bridge replications accepted.
pub const MIN_REPS: usize = 10_000;

/// A Monte Carlo quantile with the settings that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeQuantile {
    pub value: f64,
    pub alpha_half: f64,
    pub t_floor: f64,
    pub grid_size: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Upper `alpha_half` quantile of max B(t)/√t over a grid on [t_floor, 1],
/// B a standard Brownian bridge.
///
/// The grid is geometric from `t_floor` to 1 (a single point {1} when
/// `grid_size` is 1). Bridge values on the grid are exact in law: a Brownian
/// motion is built from independent Gaussian increments and pinned with
/// B = W − tW(1). Replication i draws from its own counter-derived stream,
/// so the result does not depend on how the work is scheduled.
pub fn brownian_sup_quantile(
    alpha_half: f64,
    t_floor: f64,
    grid_size: usize,
    reps: usize,
    seed: u64,
) -> Result<BridgeQuantile> {
    check_level("alpha_half", alpha_half)?;
    if !(t_floor > 0.0 && t_floor < 1.0) {
        return Err(FdpError::param("t_floor", format!("{t_floor} is not in (0, 1)")));
    }
    if grid_size == 0 {
        return Err(FdpError::param("grid_size", "must be positive"));
    }
    if reps < MIN_REPS {
        return Err(FdpError::param("reps", format!("{reps} is below the minimum {MIN_REPS}")));
    }
    let grid: Vec<f64> = if grid_size == 1 {
        vec![1.0]
    } else {
        let n = (grid_size - 1) as f64;
        let mut g: Vec<f64> = (0..grid_size).map(|i| t_floor.powf(1.0 - i as f64 / n)).collect();
        *g.last_mut().unwrap() = 1.0;
        g
    };
    let steps: Vec<f64> = grid
        .iter()
        .scan(0.0, |prev, &t| {
            let dt = t - *prev;
            *prev = t;
            Some(dt.max(0.0).sqrt())
        })
        .collect();

    let mut stats: Vec<f64> = (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.len()],
            |w, rep| {
                let mut stream = rng::stream(seed, Purpose::Bridge, rep as u64);
                let mut acc = 0.0;
                for (slot, sd) in w.iter_mut().zip(&steps) {
                    acc += sd * rng::normal(&mut stream);
                    *slot = acc;
                }
                let w1 = acc;
                grid.iter()
                    .zip(w.iter())
                    .map(|(&t, &wt)| (wt - t * w1) / t.sqrt())
                    .fold(f64::NEG_INFINITY, f64::max)
            },
        )
        .collect();
    stats.sort_by(f64::total_cmp);
    let idx = (((1.0 - alpha_half) * reps as f64).ceil() as usize).clamp(1, reps) - 1;
    Ok(BridgeQuantile {
        value: stats[idx],
        alpha_half,
        t_floor,
        grid_size,
        reps,
        seed,
    })
}

/// Δ_m = max{2(1 − a0)w, √2/(1 − t0)·√log(4/α)}.
pub fn delta_m(a0: f64, w: f64, t0: f64, alpha: f64) -> f64 {
    let spread = std::f64::consts::SQRT_2 / (1.0 - t0) * (4.0 / alpha).ln().sqrt();
    (2.0 * (1.0 - a0) * w).max(spread)
}

/// Smallest t_min accepted for a sample of size m: 1/m².
pub fn t_min_floor(m: usize) -> f64 {
    let m = m as f64;
    1.0 / (m * m)
}

/// Default lower cutoff when none is given: 1/(10m).
fn default_t_min(m: usize) -> f64 {
    0.1 / m as f64
}

/// Γ̄(t) = min{Q̂(t) + Δ_m√t/(√m·Ĝ(t)), 1} on [t_min, 1], with Q̂ built
/// from Storey's estimate â₀ at t0 and the plain ECDF Ĝ. Γ̄ is 1 where Ĝ = 0.
pub fn asymptotic_envelope(
    pvalues: &[f64],
    t0: f64,
    alpha: f64,
    t_min: Option<f64>,
    w: f64,
) -> Result<EnvelopeResult> {
    check_pvalues(pvalues)?;
    check_level("alpha", alpha)?;
    if !(w.is_finite() && w >= 0.0) {
        return Err(FdpError::param("w", format!("{w} is not a nonnegative number")));
    }
    let m = pvalues.len();
    let floor = t_min_floor(m);
    let t_min = t_min.unwrap_or_else(|| default_t_min(m).max(floor));
    if t_min < floor {
        return Err(FdpError::BelowFloor { t_min, floor });
    }
    if t_min > 1.0 {
        return Err(FdpError::Domain(format!("t_min = {t_min} leaves an empty domain")));
    }
    let a0 = storey_a0(pvalues, t0)?.value;
    let delta = delta_m(a0, w, t0, alpha);
    let sorted = sorted(pvalues);

    let mut knots = vec![t_min];
    knots.extend(sorted.iter().copied().filter(|&p| p > t_min));
    knots.dedup();

    let mut meta = BTreeMap::new();
    meta.insert("delta_m".to_string(), delta);
    meta.insert("a0".to_string(), a0);
    meta.insert("t0".to_string(), t0);
    meta.insert("w".to_string(), w);
    meta.insert("t_min_floor".to_string(), floor);
    meta.insert("m".to_string(), m as f64);

    let mut env = EnvelopeResult {
        method: EnvelopeMethod::Asymptotic,
        alpha,
        level: 1.0 - alpha,
        t_min,
        gamma_bar: StepFunction::constant(1.0),
        v_fn: None,
        count_bound: StepFunction::constant(0.0),
        meta,
        description: "asymptotic envelope from the Storey null fraction and a bridge quantile".to_string(),
        shape: Shape::Asymptotic { a0, delta },
        sorted,
    };
    let sample = |f: &dyn Fn(f64) -> f64| StepFunction::new(1.0, knots.iter().map(|&t| (t, f(t))));
    env.gamma_bar = sample(&|t| env.eval(t).expect("knot in domain"))?;
    env.v_fn = Some(sample(&|t| env.v(t).expect("knot in domain"))?);
    env.count_bound = sample(&|t| env.count_bound_at(t).expect("knot in domain"))?;
    Ok(env)
}
