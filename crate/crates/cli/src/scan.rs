use feynlab::exact::rat_to_f64;
use feynlab::stationary::{ActionModel, AsymptoticSeries};
use feynlab_oracle::{oscillatory_integral, series_fit, FitSample, Mode, Polynomial, QuadratureSpec, Ramp, RampKind};
use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::report::Check;
use crate::CliError;

pub const DEFAULT_HBARS: [f64; 5] = [0.1, 0.05, 0.025, 0.0125, 0.01];

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub hbars: Vec<f64>,
    /// Erf ramps, one per axis. `None` means a default window in one dimension when a series
    /// is compared, and the `ε`-regularized integral otherwise.
    pub window: Option<Vec<Ramp>>,
    pub resolution: Option<usize>,
    pub mode: Mode,
}

/// `lo:hi:width` per axis, axes separated by commas.
pub fn parse_window(text: &str) -> Result<Vec<Ramp>, CliError> {
    text.split(',')
        .map(|axis| {
            let parts: Vec<f64> = axis
                .split(':')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Input(format!("bad window {axis:?}: {e}")))?;
            match parts[..] {
                [lo, hi, width] if lo < hi && width > 0.0 => Ok(Ramp { lo, hi, width, kind: RampKind::Erf }),
                _ => Err(CliError::Input(format!("window {axis:?} must be lo:hi:width with lo < hi and width > 0"))),
            }
        })
        .collect()
}

pub fn phase_polynomial(model: &ActionModel) -> Result<Polynomial, CliError> {
    let dim = model.action.dim();
    if dim == 0 || dim > 3 {
        return Err(CliError::Input(format!("the oracle integrates in 1 to 3 dimensions, model has {dim}")));
    }
    let mut terms = Vec::new();
    for (e, c) in model.action.terms() {
        if !c.is_real() {
            return Err(CliError::Input("the oracle needs a real action".into()));
        }
        terms.push((e.clone(), rat_to_f64(&c.re)));
    }
    Ok(Polynomial::new(dim, terms))
}

/// Erf window reaching 2.5 past the outermost critical points in one dimension, where `|S'|`
/// is large enough for any polynomial action of degree ≥ 3 with moderate coefficients.
fn default_window(series: &AsymptoticSeries) -> Vec<Ramp> {
    let xs: Vec<f64> = series.contributions.iter().map(|c| rat_to_f64(&c.point[0])).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    vec![Ramp { lo: lo - 2.5, hi: hi + 2.5, width: 0.15, kind: RampKind::Erf }]
}

fn leading_scale(series: &AsymptoticSeries, hbar: f64) -> f64 {
    series
        .contributions
        .iter()
        .map(|c| (c.fresnel.to_c64(hbar) * c.constant.to_c64()).norm() * std::f64::consts::PI.powi(c.pi_power as i32))
        .sum()
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Quadrature at each ħ; with a series, the remainder of its `order` truncation and the
/// log-log slope of those remainders. `prediction` is the same series one order further, used
/// to decide which slope to expect.
pub fn scan(
    model: &ActionModel,
    series: Option<(&AsymptoticSeries, &AsymptoticSeries, usize)>,
    opts: &ScanOptions,
) -> Result<(Value, Vec<Check>), CliError> {
    let phase = phase_polynomial(model)?;
    let density = model.density.to_c64();
    let mut points = Vec::new();
    let mut samples = Vec::new();
    let window = match (&opts.window, series) {
        (None, Some((s, _, _))) if phase.dim() == 1 => Some(default_window(s)),
        (w, _) => w.clone(),
    };
    for &h in &opts.hbars {
        let mut spec = match &window {
            Some(r) => {
                if r.len() != phase.dim() {
                    return Err(CliError::Input(format!("window has {} axes, model has {}", r.len(), phase.dim())));
                }
                QuadratureSpec { tolerance: 1e-9, ..QuadratureSpec::windowed(phase.clone(), h, r.clone(), 40000) }
            }
            None => QuadratureSpec::new(phase.clone(), h),
        };
        spec.mode = opts.mode;
        if let Some(n) = opts.resolution {
            spec.resolution = n;
        }
        let q = oscillatory_integral(&spec).map_err(|e| CliError::pipeline("oracle", e))?;
        let value = q.value * density;
        let error = q.error * density.norm();
        let mut point = json!({ "hbar": h, "value": complex(value), "error": error });
        if let Some((s, _, order)) = series {
            let sample = FitSample { hbar: h, exact: value, error, truncation: s.truncated(order).eval_f64(h), scale: leading_scale(s, h) };
            point["truncation"] = complex(sample.truncation);
            point["relative_remainder"] = json!(sample.remainder());
            samples.push(sample);
        }
        points.push(point);
    }
    let mut out = json!({ "mode": format!("{:?}", opts.mode).to_lowercase(), "samples": points });
    let mut checks = Vec::new();
    if let Some((_, prediction, order)) = series {
        let fit = series_fit(&samples).map_err(|e| CliError::pipeline("oracle", e))?;
        let next_nonzero = prediction.contributions.iter().any(|c| !c.corrections.coeff(order as i32 + 1).is_zero());
        let expected = (order + 1) as f64;
        let (pass, detail) = if fit.degenerate {
            (true, "remainder at the quadrature noise floor".to_string())
        } else if next_nonzero {
            ((fit.slope - expected).abs() <= 0.3, format!("slope {:.3} against {expected} ± 0.3", fit.slope))
        } else {
            (fit.slope >= expected + 0.7, format!("slope {:.3}, next coefficient zero so expected at least {}", fit.slope, expected + 0.7))
        };
        out["fit"] = json!({ "order": order, "slope": fit.slope, "band": fit.band, "degenerate": fit.degenerate, "expected_slope": expected });
        checks.push(Check::new("oracle remainder slope", pass, detail));
    }
    Ok((out, checks))
}
