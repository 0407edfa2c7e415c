use num_complex::Complex64;

use crate::OracleError;

/// One point of an ħ-scan: the integral, its truncated series and the scale (usually the
/// modulus of the leading prefactor) that makes the remainder relative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitSample {
    pub hbar: f64,
    pub exact: Complex64,
    /// Quadrature error estimate of `exact`.
    pub error: f64,
    pub truncation: Complex64,
    pub scale: f64,
}

impl FitSample {
    pub fn remainder(&self) -> f64 {
        (self.exact - self.truncation).norm() / self.scale
    }

    /// Remainder indistinguishable from quadrature noise.
    fn at_noise_floor(&self) -> bool {
        (self.exact - self.truncation).norm() <= 10.0 * self.error + 1e-13 * self.exact.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    /// Least-squares slope of `log remainder` against `log ħ`.
    pub slope: f64,
    pub intercept: f64,
    /// Twice the standard error of the slope (zero with exactly two distinct points).
    pub band: f64,
    /// Some remainder is at the quadrature noise floor, so the slope says nothing.
    pub degenerate: bool,
    pub remainders: Vec<(f64, f64)>,
}

/// Fit `log|I(ħ) − T(ħ)|/scale ≈ slope · log ħ + intercept` over at least four samples spanning
/// a decade.
pub fn series_fit(samples: &[FitSample]) -> Result<SlopeFit, OracleError> {
    let (lo, hi) = samples.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.hbar), hi.max(s.hbar)));
    let span = if samples.is_empty() { 0.0 } else { hi / lo };
    if samples.len() < 4 || !(span >= 10.0 - 1e-9) {
        return Err(OracleError::InsufficientSamples { count: samples.len(), span });
    }
    let degenerate = samples.iter().any(FitSample::at_noise_floor);
    let remainders: Vec<(f64, f64)> = samples.iter().map(|s| (s.hbar, s.remainder())).collect();
    let pts: Vec<(f64, f64)> = remainders.iter().map(|&(h, r)| (h.ln(), r.max(f64::MIN_POSITIVE).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let band = 2.0 * (rss / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, band, degenerate, remainders })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(h: f64, r: f64) -> FitSample {
        FitSample { hbar: h, exact: Complex64::new(1.0 + r, 0.0), error: 0.0, truncation: Complex64::new(1.0, 0.0), scale: 1.0 }
    }

    #[test]
    fn recovers_a_power_law() {
        let s: Vec<FitSample> = [0.1, 0.05, 0.02, 0.01].iter().map(|&h| sample(h, 3.0 * h * h)).collect();
        let fit = series_fit(&s).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9 && fit.band < 1e-6 && !fit.degenerate);
    }

    #[test]
    fn needs_a_decade() {
        let s: Vec<FitSample> = [0.1, 0.05, 0.04, 0.02].iter().map(|&h| sample(h, h)).collect();
        assert!(matches!(series_fit(&s), Err(OracleError::InsufficientSamples { count: 4, .. })));
    }

    #[test]
    fn flags_the_noise_floor() {
        let s: Vec<FitSample> = [0.1, 0.05, 0.02, 0.01].iter().map(|&h| sample(h, 0.0)).collect();
        assert!(series_fit(&s).unwrap().degenerate);
    }
}
