use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log2 x, log2 y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log2 residuals.
    pub residual: f64,
}

impl OrderFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.log2()).exp2()
    }
}

/// Fits `y ≈ C x^slope` to `(x, y)` samples, typically `(tau, error)`.
pub fn fit_order(samples: &[(f64, f64)]) -> Result<OrderFit> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(format!(
            "order fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if let Some(&(x, y)) = samples
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::Degenerate(format!(
            "order fit needs positive finite samples, got ({x}, {y})"
        )));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x.log2(), y.log2())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all samples share the same abscissa".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(OrderFit {
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn synthetic_first_order() {
        let samples: Vec<_> = (3..10).map(|k| {
            let tau = (-(k as f64)).exp2();
            (tau, 3.7 * tau)
        }).collect();
        let fit = fit_order(&samples).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!((fit.predict(0.5) - 1.85).abs() < 1e-12);
    }

    #[test]
    fn synthetic_half_order() {
        let samples: Vec<_> = [0.1, 0.05, 0.01, 0.001].iter().map(|&t: &f64| (t, 2.0 * t.sqrt())).collect();
        assert!((fit_order(&samples).unwrap().slope - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_order(&[(0.1, 1.0)]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (0.05, 0.0)]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (0.1, 0.5)]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (-0.1, 0.5)]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_power_laws(p in -3.0f64..3.0, c in 0.01f64..100.0, k0 in 1i32..6, len in 2usize..9) {
            let samples: Vec<_> = (0..len).map(|i| {
                let tau = (-((k0 + i as i32) as f64)).exp2();
                (tau, c * tau.powf(p))
            }).collect();
            let fit = fit_order(&samples).unwrap();
            prop_assert!((fit.slope - p).abs() < 1e-12);
        }
    }
}
