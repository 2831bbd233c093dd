use serde::{Deserialize, Serialize};

use crate::error::{check_pvalues, FdpError, Result};
use crate::sample::sorted;
use crate::step::StepFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EcdfVariant {
    /// 𝔾_m(t) = #{P_i ≤ t}/m
    Plain,
    /// max{𝔾_m(t), t}
    Floor,
    /// least concave majorant of 𝔾_m
    Lcm,
}

impl std::str::FromStr for EcdfVariant {
    type Err = FdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(EcdfVariant::Plain),
            "floor" => Ok(EcdfVariant::Floor),
            "lcm" => Ok(EcdfVariant::Lcm),
            other => Err(FdpError::param("variant", format!("unknown variant `{other}`"))),
        }
    }
}

/// Ĝ restricted to `[start, end)` equals `intercept + slope·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPiece {
    pub start: f64,
    pub end: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl LinearPiece {
    pub fn at(&self, t: f64) -> f64 {
        self.intercept + self.slope * t
    }
}

/// An estimate Ĝ of the marginal p-value CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfEstimate {
    variant: EcdfVariant,
    sorted: Vec<f64>,
    base: StepFunction,
    hull: Vec<(f64, f64)>,
}

/// Builds the requested estimate of G from raw p-values.
pub fn ecdf(pvalues: &[f64], variant: EcdfVariant) -> Result<EcdfEstimate> {
    check_pvalues(pvalues)?;
    let sorted = sorted(pvalues);
    let m = sorted.len() as f64;
    let mut points = Vec::new();
    for (i, &p) in sorted.iter().enumerate() {
        if sorted.get(i + 1) != Some(&p) {
            points.push((p, (i + 1) as f64 / m));
        }
    }
    let hull = if variant == EcdfVariant::Lcm {
        upper_hull(&points)
    } else {
        Vec::new()
    };
    let base = StepFunction::new(0.0, points)?;
    Ok(EcdfEstimate {
        variant,
        sorted,
        base,
        hull,
    })
}

/// Upper concave hull of (0, 0), the ECDF jump tops, and (1, 1).
fn upper_hull(tops: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(tops.len() + 2);
    if tops.first().is_none_or(|p| p.0 > 0.0) {
        pts.push((0.0, 0.0));
    }
    pts.extend_from_slice(tops);
    if pts.last().is_none_or(|p| p.0 < 1.0) {
        pts.push((1.0, 1.0));
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly above the chord a→p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

impl EcdfEstimate {
    pub fn variant(&self) -> EcdfVariant {
        self.variant
    }

    pub fn m(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// The plain empirical CDF 𝔾_m.
    pub fn base(&self) -> &StepFunction {
        &self.base
    }

    /// Vertices of the concave majorant (LCM variant only).
    pub fn hull(&self) -> &[(f64, f64)] {
        &self.hull
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.variant {
            EcdfVariant::Plain => self.base.eval(t),
            EcdfVariant::Floor => self.base.eval(t).max(t.min(1.0)),
            EcdfVariant::Lcm => self.hull_eval(t),
        }
    }

    /// Ĝ(t⁻)
    pub fn eval_left(&self, t: f64) -> f64 {
        match self.variant {
            EcdfVariant::Plain => self.base.eval_left(t),
            EcdfVariant::Floor => self.base.eval_left(t).max(t.min(1.0)),
            EcdfVariant::Lcm => self.hull_eval(t),
        }
    }

    fn hull_eval(&self, t: f64) -> f64 {
        let h = &self.hull;
        if t <= h[0].0 {
            return h[0].1;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let k = h.partition_point(|v| v.0 <= t);
        let (a, b) = (h[k - 1], h[k]);
        a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
    }

    /// Ĝ as linear pieces on half-open intervals covering [0, 1).
    pub fn pieces(&self) -> Vec<LinearPiece> {
        let mut out = Vec::new();
        match self.variant {
            EcdfVariant::Plain | EcdfVariant::Floor => {
                for (s, e, v) in self.base.pieces() {
                    if e <= s {
                        continue;
                    }
                    let flat = LinearPiece {
                        start: s,
                        end: e,
                        intercept: v,
                        slope: 0.0,
                    };
                    let diag = |start, end| LinearPiece {
                        start,
                        end,
                        intercept: 0.0,
                        slope: 1.0,
                    };
                    if self.variant == EcdfVariant::Plain || v >= e {
                        out.push(flat);
                    } else if v <= s {
                        out.push(diag(s, e));
                    } else {
                        out.push(LinearPiece { end: v, ..flat });
                        out.push(diag(v, e));
                    }
                }
            }
            EcdfVariant::Lcm => {
                for w in self.hull.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let slope = (b.1 - a.1) / (b.0 - a.0);
                    out.push(LinearPiece {
                        start: a.0,
                        end: b.0,
                        intercept: a.1 - slope * a.0,
                        slope,
                    });
                }
            }
        }
        out
    }

    /// Points where Ĝ may change slope or jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.pieces().iter().map(|p| p.start).collect();
        pts.push(1.0);
        pts.dedup();
        pts
    }

    /// sup_t |Ĝ(t) − G(t)| for a continuous CDF `g`. Exact at the piece
    /// endpoints; interior extrema are located by golden-section search, which
    /// is exact when `g` is concave.
    pub fn sup_distance(&self, g: &dyn Fn(f64) -> f64) -> f64 {
        let mut d: f64 = 0.0;
        for piece in self.pieces() {
            let diff = |t: f64| piece.at(t) - g(t);
            d = d.max(diff(piece.start).abs()).max(diff(piece.end).abs());
            if piece.slope != 0.0 || self.variant != EcdfVariant::Plain {
                let lo = golden_max(&|t| -diff(t), piece.start, piece.end);
                let hi = golden_max(&diff, piece.start, piece.end);
                d = d.max(lo).max(hi);
            }
        }
        d.max((self.eval(1.0) - g(1.0)).abs())
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_895;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
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
    fc.max(fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_plain_and_lcm() {
        let plain = ecdf(&[0.5], EcdfVariant::Plain).unwrap();
        assert_eq!(plain.eval(0.49), 0.0);
        assert_eq!(plain.eval(0.5), 1.0);
        assert_eq!(plain.eval(1.0), 1.0);
        let lcm = ecdf(&[0.5], EcdfVariant::Lcm).unwrap();
        for &t in &[0.0, 0.1, 0.25, 0.5, 0.7, 1.0] {
            assert!((lcm.eval(t) - (2.0 * t).min(1.0)).abs() < 1e-15, "t = {t}");
        }
    }

    #[test]
    fn floor_variant_dominates_identity() {
        let f = ecdf(&[0.9, 0.95], EcdfVariant::Floor).unwrap();
        assert_eq!(f.eval(0.3), 0.3);
        assert_eq!(f.eval(0.9), 0.9);
        assert_eq!(f.eval(0.92), 0.92);
        assert_eq!(f.eval(0.95), 1.0);
        for p in f.pieces() {
            let mid = 0.5 * (p.start + p.end);
            assert!((p.at(mid) - f.eval(mid)).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(ecdf(&[], EcdfVariant::Plain), Err(FdpError::EmptyInput(_))));
        assert!(ecdf(&[0.2, 1.2], EcdfVariant::Plain).is_err());
    }

    /// Brute-force majorant: at each x the LCM is the best chord over all
    /// pairs of graph points straddling x.
    fn lcm_oracle(points: &[(f64, f64)], x: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for &(x1, y1) in points {
            for &(x2, y2) in points {
                if x1 <= x && x <= x2 {
                    let y = if x2 == x1 {
                        y1.max(y2)
                    } else {
                        y1 + (y2 - y1) * (x - x1) / (x2 - x1)
                    };
                    best = best.max(y);
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn lcm_matches_brute_force_hull(p in proptest::collection::vec(0.0f64..=1.0, 8)) {
            let e = ecdf(&p, EcdfVariant::Lcm).unwrap();
            let s = sorted(&p);
            let mut pts = vec![(0.0, 0.0), (1.0, 1.0)];
            for (i, &x) in s.iter().enumerate() {
                pts.push((x, (i + 1) as f64 / 8.0));
            }
            for x in s.iter().copied().chain((0..=50).map(|i| i as f64 / 50.0)) {
                prop_assert!((e.eval(x) - lcm_oracle(&pts, x)).abs() < 1e-12);
                prop_assert!(e.eval(x) >= e.base().eval(x) - 1e-12);
            }
            // concavity: slopes nonincreasing
            let slopes: Vec<f64> = e.pieces().iter().map(|p| p.slope).collect();
            prop_assert!(slopes.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        }

        #[test]
        fn variants_satisfy_their_contracts(p in proptest::collection::vec(0.0f64..=1.0, 1..30), t in 0.0f64..=1.0) {
            let plain = ecdf(&p, EcdfVariant::Plain).unwrap();
            let floor = ecdf(&p, EcdfVariant::Floor).unwrap();
            let lcm = ecdf(&p, EcdfVariant::Lcm).unwrap();
            let count = p.iter().filter(|&&x| x <= t).count() as f64 / p.len() as f64;
            prop_assert_eq!(plain.eval(t), count);
            prop_assert_eq!(floor.eval(t), count.max(t));
            prop_assert!(lcm.eval(t) >= count - 1e-12);
            prop_assert_eq!(plain.eval(1.0), 1.0);
        }
    }
}
