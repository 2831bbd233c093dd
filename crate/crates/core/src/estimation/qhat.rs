use super::ecdf::{ecdf, EcdfEstimate, EcdfVariant};
use super::null_fraction::NullFractionEstimate;
use crate::error::{FdpError, Result};

/// Q̂(t) = (1 − â)t / Ĝ(t), with Q̂(0) = 0.
#[derive(Debug, Clone)]
pub struct QHat {
    ghat: EcdfEstimate,
    a: f64,
}

impl QHat {
    /// Uses `a` directly; with the true a this is the known-a estimator.
    pub fn new(ghat: EcdfEstimate, a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(FdpError::param("a", format!("{a} is not in [0, 1]")));
        }
        Ok(QHat { ghat, a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn ghat(&self) -> &EcdfEstimate {
        &self.ghat
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.ratio(t, self.ghat.eval(t))
    }

    /// Q̂(t⁻)
    pub fn eval_left(&self, t: f64) -> Result<f64> {
        self.ratio(t, self.ghat.eval_left(t))
    }

    fn ratio(&self, t: f64, g: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let num = (1.0 - self.a) * t;
        if num == 0.0 {
            return Ok(0.0);
        }
        if g <= 0.0 {
            return Err(FdpError::Domain(format!("estimated G is zero at t = {t}")));
        }
        Ok(num / g)
    }
}

pub fn q_hat(pvalues: &[f64], ahat: &NullFractionEstimate, variant: EcdfVariant) -> Result<QHat> {
    QHat::new(ecdf(pvalues, variant)?, ahat.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::examples::EXAMPLE1;

    #[test]
    fn zero_a_at_order_statistics() {
        let q = q_hat(&EXAMPLE1, &NullFractionEstimate::fixed(0.0).unwrap(), EcdfVariant::Plain).unwrap();
        assert!((q.eval(0.0095).unwrap() - 0.035625).abs() < 1e-15);
        for (i, &p) in EXAMPLE1.iter().enumerate() {
            assert!((q.eval(p).unwrap() - p * 15.0 / (i + 1) as f64).abs() < 1e-14);
        }
        assert_eq!(q.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn full_alternative_weight_vanishes() {
        let q = q_hat(&EXAMPLE1, &NullFractionEstimate::fixed(1.0).unwrap(), EcdfVariant::Plain).unwrap();
        assert!([0.00005, 0.1, 0.5, 1.0].iter().all(|&t| q.eval(t).unwrap() == 0.0));
    }

    #[test]
    fn below_first_pvalue_is_a_domain_error() {
        let half = NullFractionEstimate::fixed(0.5).unwrap();
        let q = q_hat(&EXAMPLE1, &half, EcdfVariant::Plain).unwrap();
        assert!(matches!(q.eval(0.00005), Err(FdpError::Domain(_))));
        let q = q_hat(&EXAMPLE1, &half, EcdfVariant::Floor).unwrap();
        assert!((q.eval(0.00005).unwrap() - 0.5).abs() < 1e-15);
    }
}
