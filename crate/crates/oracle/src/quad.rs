use num_complex::Complex64;
use rayon::prelude::*;

use crate::{OracleError, Polynomial};

/// `e^{(i/ħ)S}` or the Euclidean weight `e^{−S/ħ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Oscillatory,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RampKind {
    /// `C^∞` with compact support, built from `e^{−1/t}`.
    Compact,
    /// `½(1 + erf)`: analytic, with Gaussian tails cut at eight widths.
    Erf,
}

/// Window equal to 1 on `[lo, hi]`, falling off over `width` on each side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ramp {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub kind: RampKind,
}

impl Ramp {
    fn support(&self) -> (f64, f64) {
        let reach = match self.kind {
            RampKind::Compact => self.width,
            RampKind::Erf => 8.0 * self.width,
        };
        (self.lo - reach, self.hi + reach)
    }

    fn eval(&self, x: f64) -> f64 {
        match self.kind {
            RampKind::Compact => smoothstep((x - self.lo + self.width) / self.width) * smoothstep((self.hi + self.width - x) / self.width),
            RampKind::Erf => {
                let s = std::f64::consts::SQRT_2 * self.width;
                0.25 * (1.0 + libm::erf((x - self.lo) / s)) * (1.0 + libm::erf((self.hi - x) / s))
            }
        }
    }
}

/// `0` for `t ≤ 0`, `1` for `t ≥ 1`, smooth in between.
fn smoothstep(t: f64) -> f64 {
    let f = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        f(t) / (f(t) + f(1.0 - t))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    /// No cutoff: the regularizer `e^{−ε|x|²/ħ}` alone makes the integral converge.
    None,
    /// One ramp per axis.
    Box(Vec<Ramp>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub phase: Polynomial,
    /// Extra polynomial factor in the integrand, e.g. a radial Jacobian.
    pub amplitude: Option<Polynomial>,
    pub hbar: f64,
    pub mode: Mode,
    pub window: Window,
    /// Strictly decreasing positive `ε`; may be empty only for a windowed integral.
    pub eps: Vec<f64>,
    /// Trapezoid intervals per axis (even).
    pub resolution: usize,
    /// Degree of the polynomial extrapolation in `ε`.
    pub extrapolation_order: usize,
    /// Relative error above which the result is rejected.
    pub tolerance: f64,
}

impl QuadratureSpec {
    /// Defaults: no amplitude, oscillatory, `ε ∈ {0.12, 0.10, …, 0.02}`, 2000 intervals per
    /// axis, degree-5 extrapolation, tolerance `10⁻³`.
    pub fn new(phase: Polynomial, hbar: f64) -> Self {
        QuadratureSpec {
            phase,
            amplitude: None,
            hbar,
            mode: Mode::Oscillatory,
            window: Window::None,
            eps: (1..=6).rev().map(|k| 0.02 * k as f64).collect(),
            resolution: 2000,
            extrapolation_order: 5,
            tolerance: 1e-3,
        }
    }

    /// Windowed integral without `ε` regularization.
    pub fn windowed(phase: Polynomial, hbar: f64, ramps: Vec<Ramp>, resolution: usize) -> Self {
        QuadratureSpec { window: Window::Box(ramps), eps: Vec::new(), resolution, ..QuadratureSpec::new(phase, hbar) }
    }

    pub fn with_amplitude(mut self, a: Polynomial) -> Self {
        self.amplitude = Some(a);
        self
    }

    fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: &str| Err(OracleError::InvalidSpec(m.into()));
        let n = self.phase.dim();
        if n == 0 || n > 3 {
            return bad("dimension must be 1, 2 or 3");
        }
        if self.amplitude.as_ref().is_some_and(|a| a.dim() != n) {
            return bad("amplitude dimension differs from the phase");
        }
        if self.hbar.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return bad("ħ must be positive");
        }
        if self.resolution < 4 || self.resolution % 2 == 1 {
            return bad("resolution must be even and at least 4");
        }
        if self.eps.iter().any(|&e| e.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
            || self.eps.windows(2).any(|w| w[1] >= w[0])
        {
            return bad("ε schedule must be positive and strictly decreasing");
        }
        match &self.window {
            Window::None if self.eps.is_empty() => bad("an unwindowed integral needs an ε schedule"),
            Window::Box(r) if r.len() != n => bad("one ramp per axis"),
            Window::Box(r) if r.iter().any(|r| !(r.width > 0.0) || !(r.hi >= r.lo)) => bad("ramps need lo ≤ hi and width > 0"),
            _ if !self.eps.is_empty() && self.extrapolation_order >= self.eps.len() => {
                bad("extrapolation order must be below the number of ε values")
            }
            _ => Ok(()),
        }
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        match &self.window {
            Window::Box(r) => r.iter().map(Ramp::support).collect(),
            Window::None => {
                // e^{−ε L²/ħ} below 10⁻¹⁸ for the smallest ε
                let l = (41.5 * self.hbar / self.eps.last().copied().unwrap_or(1.0)).sqrt();
                vec![(-l, l); self.phase.dim()]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Extrapolation residual plus the change from halving the grid and a round-off bound.
    pub error: f64,
    /// Integral at each `ε` of the schedule.
    pub per_eps: Vec<(f64, Complex64)>,
}

/// Sum in a fixed pairwise order.
fn pairwise(v: &[Complex64]) -> Complex64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise(a) + pairwise(b)
}

/// Trapezoid sums at resolution `n` and `n/2` (reusing the even nodes) for one `ε`, and a
/// round-off bound from the `L¹` norm of the integrand.
fn trapezoid(spec: &QuadratureSpec, eps: f64, domain: &[(f64, f64)]) -> (Complex64, Complex64, f64) {
    let n = spec.resolution;
    let dim = domain.len();
    let h: Vec<f64> = domain.iter().map(|(a, b)| (b - a) / n as f64).collect();
    let weight = |k: usize| if k == 0 || k == n { 0.5 } else { 1.0 };
    let count = (n + 1).pow(dim as u32 - 1);
    // each task handles one line along the last axis
    let lines: Vec<(Complex64, Complex64, f64)> = (0..count)
        .into_par_iter()
        .map(|line| {
            let mut idx = vec![0usize; dim];
            let mut rest = line;
            for slot in idx[..dim - 1].iter_mut().rev() {
                *slot = rest % (n + 1);
                rest /= n + 1;
            }
            let mut x = vec![0.0; dim];
            let mut w_outer = 1.0;
            let mut coarse_outer = true;
            for d in 0..dim - 1 {
                x[d] = domain[d].0 + idx[d] as f64 * h[d];
                w_outer *= weight(idx[d]);
                coarse_outer &= idx[d] % 2 == 0;
            }
            let mut fine = Vec::with_capacity(n + 1);
            let mut coarse = Vec::with_capacity(n / 2 + 1);
            for k in 0..=n {
                x[dim - 1] = domain[dim - 1].0 + k as f64 * h[dim - 1];
                let f = integrand(spec, eps, &x) * (w_outer * weight(k));
                if coarse_outer && k % 2 == 0 {
                    coarse.push(f);
                }
                fine.push(f);
            }
            let l1: f64 = fine.iter().map(|f| f.norm()).sum();
            (pairwise(&fine), pairwise(&coarse), l1)
        })
        .collect();
    let fine: Vec<Complex64> = lines.iter().map(|l| l.0).collect();
    let coarse: Vec<Complex64> = lines.iter().map(|l| l.1).collect();
    let vol: f64 = h.iter().product();
    let l1: f64 = lines.iter().map(|l| l.2).sum::<f64>() * vol;
    (pairwise(&fine) * vol, pairwise(&coarse) * vol * 2f64.powi(dim as i32), 1e3 * f64::EPSILON * l1)
}

fn integrand(spec: &QuadratureSpec, eps: f64, x: &[f64]) -> Complex64 {
    let window = match &spec.window {
        Window::None => 1.0,
        Window::Box(r) => r.iter().zip(x).map(|(r, &xi)| r.eval(xi)).product(),
    };
    if window == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let amp = spec.amplitude.as_ref().map_or(1.0, |a| a.eval(x)) * window;
    let s = spec.phase.eval(x) / spec.hbar;
    let damp = -eps * x.iter().map(|v| v * v).sum::<f64>() / spec.hbar;
    match spec.mode {
        Mode::Oscillatory => Complex64::from_polar(amp * damp.exp(), s),
        Mode::Euclidean => Complex64::new(amp * (damp - s).exp(), 0.0),
    }
}

/// Neville extrapolation of `(ε_j, I_j)` to `ε = 0`.
fn extrapolate(points: &[(f64, Complex64)]) -> Complex64 {
    let mut p: Vec<Complex64> = points.iter().map(|q| q.1).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (points[i].0, points[i + m].0);
            p[i] = (p[i] * xj - p[i + 1] * xi) / (xj - xi);
        }
    }
    p[0]
}

/// `∫ a(x) w(x) e^{(i/ħ)S(x) − ε|x|²/ħ} dx` by the trapezoid rule for every `ε` of the schedule,
/// extrapolated to `ε → 0` with a polynomial of degree `extrapolation_order` through the
/// smallest `ε` values.
pub fn oscillatory_integral(spec: &QuadratureSpec) -> Result<QuadratureResult, OracleError> {
    spec.validate()?;
    let domain = spec.domain();
    let (value, error, per_eps) = if spec.eps.is_empty() {
        let (fine, coarse, roundoff) = trapezoid(spec, 0.0, &domain);
        (fine, (fine - coarse).norm() + roundoff, Vec::new())
    } else {
        let runs: Vec<(f64, Complex64, f64)> = spec
            .eps
            .iter()
            .map(|&e| {
                let (fine, coarse, roundoff) = trapezoid(spec, e, &domain);
                (e, fine, (fine - coarse).norm() + roundoff)
            })
            .collect();
        let m = spec.extrapolation_order;
        let tail = &runs[runs.len() - m - 1..];
        let pts: Vec<(f64, Complex64)> = tail.iter().map(|r| (r.0, r.1)).collect();
        let value = extrapolate(&pts);
        let lower = if m == 0 { pts[0].1 } else { extrapolate(&pts[1..]) };
        let grid = tail.iter().map(|r| r.2).fold(0.0, f64::max);
        (value, (value - lower).norm() + grid, runs.iter().map(|r| (r.0, r.1)).collect())
    };
    if !(error <= spec.tolerance * value.norm()) {
        return Err(OracleError::NonConvergent { error, magnitude: value.norm() });
    }
    Ok(QuadratureResult { value, error, per_eps })
}
