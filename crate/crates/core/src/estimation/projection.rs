//! Projection estimate of the alternative CDF F: the CDF H closest in sup
//! norm to (Ĝ − (1 − â)U)/â, found by local search over moves of constant
//! segments (or of single nodes for the concave, piecewise-linear shape).

use serde::{Deserialize, Serialize};

use super::ecdf::EcdfEstimate;
use crate::error::{FdpError, Result};
use crate::step::StepFunction;

const IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionShape {
    /// constant between consecutive distinct p-values
    Step,
    /// concave, linear between consecutive distinct p-values
    Concave,
}

/// The fitted H. `knots[0] = 0`; the remaining knots are the distinct
/// p-values in (0, 1). H(1) = 1 always.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub shape: ProjectionShape,
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    /// ‖Ĝ − (1 − â)U − âH‖∞ at the returned H
    pub objective: f64,
    pub iterations: usize,
    /// false when the iteration cap stopped the search
    pub converged: bool,
}

impl Projection {
    pub fn eval(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 1.0;
        }
        let i = self.knots.partition_point(|&k| k <= t).max(1) - 1;
        match self.shape {
            ProjectionShape::Step => self.values[i],
            ProjectionShape::Concave => {
                let (x1, y1) = self.node(i + 1);
                let (x0, y0) = (self.knots[i], self.values[i]);
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }

    fn node(&self, i: usize) -> (f64, f64) {
        if i < self.knots.len() {
            (self.knots[i], self.values[i])
        } else {
            (1.0, 1.0)
        }
    }

    /// The step-shaped fit as a [`StepFunction`]; `None` for the concave shape.
    pub fn to_step(&self) -> Option<StepFunction> {
        if self.shape != ProjectionShape::Step {
            return None;
        }
        let pts = self.knots.iter().copied().zip(self.values.iter().copied()).skip(1).chain([(1.0, 1.0)]);
        StepFunction::new(self.values[0], pts).ok()
    }
}

/// One interval of the p-value grid, with the residual r(t) = Ĝ(t) − (1 − â)t
/// sampled wherever it can attain its extremes there.
#[derive(Debug, Clone)]
struct Cell {
    start: f64,
    samples: Vec<(f64, f64)>,
    lo: f64,
    hi: f64,
}

fn cells(ghat: &EcdfEstimate, ahat: f64) -> Vec<Cell> {
    let mut knots = vec![0.0];
    for &p in ghat.sorted() {
        if p > 0.0 && p < 1.0 && knots.last() != Some(&p) {
            knots.push(p);
        }
    }
    let pieces = ghat.pieces();
    let mut out = Vec::with_capacity(knots.len());
    for (j, &start) in knots.iter().enumerate() {
        let end = knots.get(j + 1).copied().unwrap_or(1.0);
        let mut samples = Vec::new();
        for piece in pieces.iter().filter(|p| p.start < end && p.end > start) {
            for t in [piece.start.max(start), piece.end.min(end)] {
                samples.push((t, piece.at(t) - (1.0 - ahat) * t));
            }
        }
        let lo = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        out.push(Cell {
            start,
            samples,
            lo,
            hi,
        });
    }
    out
}

/// F̂ = argmin over CDFs H of ‖Ĝ − (1 − â)U − âH‖∞, by the segment-move search.
pub fn project_f(ghat: &EcdfEstimate, ahat: f64, shape: ProjectionShape) -> Result<Projection> {
    if !(ahat > 0.0 && ahat <= 1.0) {
        return Err(FdpError::param("ahat", format!("{ahat} is not in (0, 1]")));
    }
    let cells = cells(ghat, ahat);
    let cap = 10 * ghat.m().max(1);
    let init = initial_values(ghat, ahat, &cells);
    let (values, iterations, converged) = match shape {
        ProjectionShape::Step => StepSearch::new(&cells, ahat, init).run(cap),
        ProjectionShape::Concave => concave_search(&cells, ahat, concave_start(&cells, &init), cap),
    };
    let knots: Vec<f64> = cells.iter().map(|c| c.start).collect();
    let mut proj = Projection {
        shape,
        knots,
        values,
        objective: 0.0,
        iterations,
        converged,
    };
    proj.objective = projection_objective(ghat, ahat, &proj);
    Ok(proj)
}

/// ‖Ĝ − (1 − â)U − âH‖∞ for a fitted H on the grid of `ghat`. Samples at a
/// cell's right end are left limits, so the cell's own piece of H applies.
pub fn projection_objective(ghat: &EcdfEstimate, ahat: f64, h: &Projection) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, cell) in cells(ghat, ahat).iter().enumerate() {
        let (x0, y0) = h.node(j);
        let (x1, y1) = h.node(j + 1);
        for &(t, r) in &cell.samples {
            let ht = match h.shape {
                ProjectionShape::Step => y0,
                ProjectionShape::Concave => y0 + (y1 - y0) * (t - x0) / (x1 - x0),
            };
            worst = worst.max((r - ahat * ht).abs());
        }
    }
    worst
}

/// Running maximum of (Ĝ − (1 − â)t)/â at the grid points, clamped to [0, 1].
fn initial_values(ghat: &EcdfEstimate, ahat: f64, cells: &[Cell]) -> Vec<f64> {
    let mut running = f64::NEG_INFINITY;
    cells
        .iter()
        .map(|c| {
            running = running.max((ghat.eval(c.start) - (1.0 - ahat) * c.start) / ahat);
            running.clamp(0.0, 1.0)
        })
        .collect()
}

struct StepSearch<'a> {
    cells: &'a [Cell],
    a: f64,
    h: Vec<f64>,
}

/// A candidate move of cells `from..=to` to the common value `value`.
#[derive(Debug, Clone, Copy)]
struct Move {
    from: usize,
    to: usize,
    value: f64,
    gain: f64,
}

impl<'a> StepSearch<'a> {
    fn new(cells: &'a [Cell], a: f64, h: Vec<f64>) -> Self {
        StepSearch { cells, a, h }
    }

    fn dev(&self, j: usize, v: f64) -> f64 {
        let c = &self.cells[j];
        (c.hi - self.a * v).abs().max((c.lo - self.a * v).abs())
    }

    /// Best common value for a block within `[lower, upper]`, and the gain
    /// relative to the current objective `d`.
    fn plan(&self, from: usize, to: usize, lower: f64, upper: f64, d: f64) -> Move {
        // max_j dev_j(v) = max(a·v − min_j lo_j, max_j hi_j − a·v)
        let lo = (from..=to).map(|j| self.cells[j].lo).fold(f64::INFINITY, f64::min);
        let hi = (from..=to).map(|j| self.cells[j].hi).fold(f64::NEG_INFINITY, f64::max);
        let value = ((lo + hi) / (2.0 * self.a)).clamp(lower, upper);
        let worst = (from..=to).map(|j| self.dev(j, value)).fold(0.0, f64::max);
        Move {
            from,
            to,
            value,
            gain: d - worst,
        }
    }

    fn run(mut self, cap: usize) -> (Vec<f64>, usize, bool) {
        let n = self.cells.len();
        for iteration in 0..cap {
            // Step 1: leftmost cell with the largest deviation
            let (mut jstar, mut d) = (0, f64::NEG_INFINITY);
            for j in 0..n {
                let dj = self.dev(j, self.h[j]);
                if dj > d {
                    d = dj;
                    jstar = j;
                }
            }
            let v = self.h[jstar];
            let mut l = jstar;
            while l > 0 && self.h[l - 1] == v {
                l -= 1;
            }
            let mut r = jstar;
            while r + 1 < n && self.h[r + 1] == v {
                r += 1;
            }
            let below = if l == 0 { 0.0 } else { self.h[l - 1] };
            let above = if r + 1 == n { 1.0 } else { self.h[r + 1] };

            // Steps 2-3: move the whole segment
            let whole = self.plan(l, r, below, above, d);
            let chosen = if whole.gain > IMPROVEMENT_TOL {
                whole
            } else {
                // Step 4: split the segment at the worst cell and move one end
                let mut best: Option<Move> = None;
                for k in jstar..r {
                    let mv = self.plan(l, k, below, v, d);
                    if best.is_none_or(|b| mv.gain > b.gain) {
                        best = Some(mv);
                    }
                }
                for k in (l + 1)..=jstar {
                    let mv = self.plan(k, r, v, above, d);
                    if best.is_none_or(|b| mv.gain > b.gain) {
                        best = Some(mv);
                    }
                }
                match best {
                    Some(mv) if mv.gain > IMPROVEMENT_TOL => mv,
                    _ => return (self.h, iteration, true),
                }
            };
            for j in chosen.from..=chosen.to {
                self.h[j] = chosen.value;
            }
        }
        (self.h, cap, false)
    }
}

/// Least concave majorant of the step initializer through (0, 0) and (1, 1),
/// read off at the grid points.
fn concave_start(cells: &[Cell], init: &[f64]) -> Vec<f64> {
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    pts.extend(cells.iter().zip(init).skip(1).map(|(c, &v)| (c.start, v)));
    pts.push((1.0, 1.0));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    cells
        .iter()
        .map(|c| {
            let k = hull.partition_point(|v| v.0 <= c.start).clamp(1, hull.len() - 1);
            let (a, b) = (hull[k - 1], hull[k]);
            (a.1 + (b.1 - a.1) * (c.start - a.0) / (b.0 - a.0)).min(1.0)
        })
        .collect()
}

/// Node-move search for the concave, piecewise-linear shape. Node 0 sits at
/// (0, 0) and the final node at (1, 1); both stay fixed.
fn concave_search(cells: &[Cell], a: f64, mut h: Vec<f64>, cap: usize) -> (Vec<f64>, usize, bool) {
    let n = cells.len();
    let x = |i: usize| if i < n { cells[i].start } else { 1.0 };
    let cell_dev = |h: &[f64], j: usize| -> f64 {
        let (x0, x1) = (x(j), x(j + 1));
        let (y0, y1) = (h[j], if j + 1 < n { h[j + 1] } else { 1.0 });
        cells[j]
            .samples
            .iter()
            .map(|&(t, r)| (r - a * (y0 + (y1 - y0) * (t - x0) / (x1 - x0))).abs())
            .fold(0.0, f64::max)
    };
    for iteration in 0..cap {
        let (mut jstar, mut d) = (0, f64::NEG_INFINITY);
        for j in 0..n {
            let dj = cell_dev(&h, j);
            if dj > d {
                d = dj;
                jstar = j;
            }
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for node in [jstar, jstar + 1] {
            if node == 0 || node >= n {
                continue;
            }
            let (lower, upper) = concave_bounds(&h, node, &x);
            if lower > upper {
                continue;
            }
            let local = |v: f64| {
                let mut trial = h.clone();
                trial[node] = v;
                cell_dev(&trial, node - 1).max(cell_dev(&trial, node))
            };
            let v = golden_min(&local, lower, upper);
            let gain = d - local(v);
            if best.is_none_or(|b| gain > b.2) {
                best = Some((node, v, gain));
            }
        }
        match best {
            Some((node, v, gain)) if gain > IMPROVEMENT_TOL => h[node] = v,
            _ => return (h, iteration, true),
        }
    }
    (h, cap, false)
}

/// Range of node `i` that keeps H concave and nondecreasing with the other
/// nodes held fixed.
fn concave_bounds(h: &[f64], i: usize, x: &dyn Fn(usize) -> f64) -> (f64, f64) {
    let n = h.len();
    let y = |k: usize| if k < n { h[k] } else { 1.0 };
    let slope = |k: usize| (y(k + 1) - y(k)) / (x(k + 1) - x(k));
    let (dl, dr) = (x(i) - x(i - 1), x(i + 1) - x(i));
    // chord between the neighbours keeps the kink at i concave
    let mut lower = (y(i - 1) / dl + y(i + 1) / dr) / (1.0 / dl + 1.0 / dr);
    lower = lower.max(y(i - 1));
    let mut upper = y(i + 1);
    if i >= 2 {
        upper = upper.min(y(i - 1) + dl * slope(i - 2));
    }
    if i + 1 < n {
        upper = upper.min(y(i + 1) - dr * slope(i + 1));
    }
    (lower, upper.min(1.0))
}

/// Minimizer of a convex function on [a, b].
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_895;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [a, b, mid]
        .into_iter()
        .min_by(|u, v| f(*u).total_cmp(&f(*v)))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::ecdf::{ecdf, EcdfVariant};
    use proptest::prelude::*;

    /// Exact minimum of the step objective: bisect on the level λ and check
    /// feasibility greedily (each cell's admissible interval, kept monotone).
    fn exact_step_optimum(cells: &[Cell], a: f64) -> f64 {
        let feasible = |lambda: f64| {
            let mut prev: f64 = 0.0;
            for c in cells {
                let lo = ((c.hi - lambda) / a).max(0.0);
                let hi = ((c.lo + lambda) / a).min(1.0);
                let v = prev.max(lo);
                if v > hi + 1e-15 {
                    return false;
                }
                prev = v;
            }
            true
        };
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn identity_case_reproduces_ghat() {
        let p = [0.05, 0.2, 0.2, 0.6, 0.9];
        let g = ecdf(&p, EcdfVariant::Plain).unwrap();
        let f = project_f(&g, 1.0, ProjectionShape::Step).unwrap();
        assert!(f.objective < 1e-12);
        for t in [0.0, 0.05, 0.1, 0.2, 0.5, 0.6, 0.95, 1.0] {
            assert!((f.eval(t) - g.eval(t)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let g = ecdf(&[0.1, 0.5], EcdfVariant::Plain).unwrap();
        assert!(project_f(&g, 0.0, ProjectionShape::Step).is_err());
        assert!(project_f(&g, 1.5, ProjectionShape::Step).is_err());
    }

    /// Exhaustive search over nondecreasing step values on a 1/64 grid.
    fn brute_force(cells: &[Cell], a: f64) -> f64 {
        fn go(cells: &[Cell], a: f64, j: usize, min_k: usize, acc: f64, best: &mut f64) {
            if acc >= *best {
                return;
            }
            if j == cells.len() {
                *best = acc;
                return;
            }
            for k in min_k..=64 {
                let v = k as f64 / 64.0;
                let d = (cells[j].hi - a * v).abs().max((cells[j].lo - a * v).abs());
                go(cells, a, j + 1, k, acc.max(d), best);
            }
        }
        let mut best = f64::INFINITY;
        go(cells, a, 0, 0, 0.0, &mut best);
        best
    }

    #[test]
    fn tiny_instances_match_exhaustive_search() {
        let cases: [([f64; 4], f64); 5] = [
            ([0.01, 0.03, 0.4, 0.8], 0.5),
            ([0.2, 0.25, 0.3, 0.9], 0.3),
            ([0.001, 0.5, 0.51, 0.99], 0.7),
            ([0.6, 0.7, 0.8, 0.95], 0.4),
            ([0.05, 0.05, 0.1, 0.3], 0.9),
        ];
        for (p, a) in cases {
            let g = ecdf(&p, EcdfVariant::Plain).unwrap();
            let f = project_f(&g, a, ProjectionShape::Step).unwrap();
            let cs = cells(&g, a);
            let brute = brute_force(&cs, a);
            // rounding the optimum to the grid costs at most a/128
            assert!(f.objective <= brute + 1e-12, "{p:?}: {} > {}", f.objective, brute);
            assert!(f.objective >= brute - a / 128.0 - 1e-12);
        }
    }

    proptest! {
        #[test]
        fn step_fit_is_a_cdf_and_optimal(
            p in proptest::collection::vec(0.0f64..=1.0, 1..40),
            a in 0.05f64..=1.0,
            variant in prop_oneof![Just(EcdfVariant::Plain), Just(EcdfVariant::Floor), Just(EcdfVariant::Lcm)],
        ) {
            let g = ecdf(&p, variant).unwrap();
            let f = project_f(&g, a, ProjectionShape::Step).unwrap();
            prop_assert!(f.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f.values.iter().all(|v| (0.0..=1.0).contains(v)));
            let exact = exact_step_optimum(&cells(&g, a), a);
            prop_assert!(f.objective <= exact + 1e-9, "objective {} exact {}", f.objective, exact);
            let step = f.to_step().unwrap();
            prop_assert_eq!(step.eval(1.0), 1.0);
        }

        #[test]
        fn concave_fit_is_a_concave_cdf(
            p in proptest::collection::vec(0.0f64..=1.0, 1..30),
            a in 0.1f64..=1.0,
        ) {
            let g = ecdf(&p, EcdfVariant::Lcm).unwrap();
            let f = project_f(&g, a, ProjectionShape::Concave).unwrap();
            let mut xs = f.knots.clone();
            xs.push(1.0);
            let ys: Vec<f64> = xs.iter().map(|&t| f.eval(t)).collect();
            prop_assert!(ys.windows(2).all(|w| w[0] <= w[1] + 1e-12));
            prop_assert!(ys.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
            let slopes: Vec<f64> = (0..xs.len() - 1)
                .filter(|&i| xs[i + 1] > xs[i])
                .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
                .collect();
            prop_assert!(slopes.windows(2).all(|w| w[0] >= w[1] - 1e-7));
            let start = Projection {
                values: concave_start(&cells(&g, a), &initial_values(&g, a, &cells(&g, a))),
                ..f.clone()
            };
            prop_assert!(f.objective <= projection_objective(&g, a, &start) + 1e-12);
        }
    }
}
