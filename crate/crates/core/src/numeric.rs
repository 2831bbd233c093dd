//! Small root-finding and search helpers shared by several modules.

/// Bisection for the crossing of a predicate that holds at `lo` and fails at
/// `hi`. Returns the last point where it holds, to within `tol`.
pub fn bisect_last_true(mut lo: f64, mut hi: f64, tol: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// sup{t ∈ [lo, hi] : pred(t)} for a predicate whose true-set may not be an
/// interval. A coarse scan locates the rightmost true grid cell, then
/// bisection refines the crossing. Returns `None` if the predicate fails on the
/// whole scan.
pub fn sup_where(lo: f64, hi: f64, scan: usize, tol: f64, pred: impl Fn(f64) -> bool) -> Option<f64> {
    let scan = scan.max(2);
    let step = (hi - lo) / scan as f64;
    let grid = |i: usize| if i == scan { hi } else { lo + i as f64 * step };
    let last = (0..=scan).rev().find(|&i| pred(grid(i)))?;
    if last == scan {
        return Some(hi);
    }
    Some(bisect_last_true(grid(last), grid(last + 1), tol, &pred))
}

/// Inverts a nondecreasing function on [0, 1]: returns inf{t : f(t) ≥ u}.
pub fn invert_monotone(u: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

/// Renders `x` rounded to 10 significant digits, in the shortest form that
/// parses back to the rounded value.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("scientific format parses");
    format!("{rounded}")
}
