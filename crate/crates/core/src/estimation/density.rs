use crate::error::{check_pvalues, FdpError, Result};

pub const GRID_POINTS: usize = 512;

pub fn default_bandwidth(m: usize) -> f64 {
    (m as f64).powf(-0.2)
}

/// Kernel density estimate of g on an evenly spaced grid over [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDensity {
    grid: Vec<f64>,
    values: Vec<f64>,
    bandwidth: f64,
}

impl KernelDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Linear interpolation between grid points.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.grid.len() - 1;
        let x = t.clamp(0.0, 1.0) * n as f64;
        let i = (x.floor() as usize).min(n - 1);
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

fn triangular(u: f64) -> f64 {
    (1.0 - u.abs()).max(0.0)
}

/// Triangular-kernel estimate with reflection at 0 and 1, so mass near the
/// edges is not lost.
pub fn kernel_density(pvalues: &[f64], bandwidth: f64) -> Result<KernelDensity> {
    check_pvalues(pvalues)?;
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(FdpError::param("bandwidth", format!("{bandwidth} must be positive")));
    }
    let h = bandwidth;
    let scale = 1.0 / (pvalues.len() as f64 * h);
    let grid: Vec<f64> = (0..GRID_POINTS).map(|j| j as f64 / (GRID_POINTS - 1) as f64).collect();
    let values = grid
        .iter()
        .map(|&x| {
            let sum: f64 = pvalues
                .iter()
                .map(|&p| triangular((x - p) / h) + triangular((x + p) / h) + triangular((x - (2.0 - p)) / h))
                .sum();
            sum * scale
        })
        .collect();
    Ok(KernelDensity {
        grid,
        values,
        bandwidth: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    #[test]
    fn reflected_estimate_integrates_to_one() {
        let p = [0.01, 0.02, 0.3, 0.5, 0.97, 0.99, 1.0, 0.0, 0.45, 0.6];
        let d = kernel_density(&p, 0.15).unwrap();
        // the interpolant is exact for the piecewise-linear estimate up to the
        // grid spacing
        let mass = integrate(&|t| d.eval(t), 0.0, 1.0, 1e-10);
        assert!((mass - 1.0).abs() < 5e-3, "mass {mass}");
    }

    #[test]
    fn flat_input_is_flat() {
        let p: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = kernel_density(&p, 0.1).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 0.01));
    }
}
