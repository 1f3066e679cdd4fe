use crate::error::{BenchError, Result};

/// `t ≈ prefactor · χ^exponent`, fitted in log-log space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    /// Coefficient of determination of the log-log regression.
    pub r2: f64,
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

/// Ordinary least squares on `(ln χ, ln t)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLaw> {
    if points.len() < 3 {
        return Err(BenchError::Invalid(format!("power-law fit needs at least 3 points, got {}", points.len())));
    }
    for &(x, y) in points {
        for v in [x, y] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(BenchError::NonPositive(v));
            }
        }
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(BenchError::Invalid("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerLaw { exponent: slope, prefactor: intercept.exp(), r2 })
}
