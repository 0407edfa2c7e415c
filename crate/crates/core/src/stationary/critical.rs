use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::StationaryError;
use crate::exact::{rational_vec_serde, taylor_data, PolyFunction, Rational};

/// Largest denominator tried when rationalizing a converged coordinate.
const MAX_DENOMINATOR: i64 = 1_000_000;

/// Best rational approximation with denominator at most `max_den`, by continued fractions.
pub fn rationalize(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= tol * x.abs().max(1.0) {
            return Some(Rational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// A critical point verified in exact arithmetic.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CriticalPoint {
    #[serde(with = "rational_vec_serde")]
    pub x: Vec<Rational>,
    pub hessian_rank: usize,
}

impl CriticalPoint {
    pub fn is_degenerate(&self) -> bool {
        self.hessian_rank < self.x.len()
    }
}

/// Outcome of a seeded search: verified points plus per-seed diagnostics.
#[derive(Clone, Debug, Default)]
pub struct CriticalSearch {
    pub points: Vec<CriticalPoint>,
    pub issues: Vec<StationaryError>,
}

impl CriticalSearch {
    pub fn nondegenerate(&self) -> Vec<&CriticalPoint> {
        self.points.iter().filter(|p| !p.is_degenerate()).collect()
    }
}

/// Solve `a x = b` by partial pivoting; `None` when numerically singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn float_rank(h: &[Vec<f64>], tol: f64) -> usize {
    let mut a = h.to_vec();
    let n = a.len();
    let mut rank = 0;
    for c in 0..n {
        let Some(p) = (rank..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())) else { break };
        if a[p][c].abs() < tol {
            continue;
        }
        a.swap(rank, p);
        for r in rank + 1..n {
            let f = a[r][c] / a[rank][c];
            for k in c..n {
                a[r][k] -= f * a[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// Rational grid `{-2, -3/2, …, 2}^n`, used when the caller supplies no seeds.
pub fn default_seeds(n: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (-4..=4).map(|k| k as f64 / 2.0).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
    }
    out
}

/// Damped Newton on `∇S` from each seed, then continued-fraction rationalization and an exact
/// recheck of `∇S = 0`. Points whose Hessian is singular are kept with their rank; converged
/// points that fail to rationalize but sit on a singular Hessian are reported as degenerate.
pub fn find_critical_points(s: &PolyFunction, seeds: &[Vec<f64>], tol: f64, max_iter: usize) -> CriticalSearch {
    let n = s.dim();
    let grad = s.gradient();
    let hess: Vec<Vec<PolyFunction>> = grad.iter().map(|g| g.gradient()).collect();
    let eval_g = |x: &[f64]| -> Vec<f64> { grad.iter().map(|g| g.eval_f64(x).re).collect() };
    let eval_h = |x: &[f64]| -> Vec<Vec<f64>> {
        hess.iter().map(|row| row.iter().map(|h| h.eval_f64(x).re).collect()).collect()
    };
    let mut out = CriticalSearch::default();
    for seed in seeds {
        let mut x = seed.clone();
        let mut converged = false;
        for _ in 0..max_iter {
            let g = eval_g(&x);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < tol * 1e-3 {
                converged = true;
                break;
            }
            let h = eval_h(&x);
            // Levenberg-Marquardt step on the gradient system: (HᵀH + μ) δ = −Hᵀ g
            let mu = 1e-12 + norm * 1e-8;
            let hth: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| h[k][i] * h[k][j]).sum::<f64>() + if i == j { mu } else { 0.0 }).collect())
                .collect();
            let rhs: Vec<f64> = (0..n).map(|i| -(0..n).map(|k| h[k][i] * g[k]).sum::<f64>()).collect();
            let Some(d) = solve(hth, rhs) else { break };
            for i in 0..n {
                x[i] += d[i];
            }
        }
        if !converged {
            let g = eval_g(&x);
            converged = g.iter().map(|v| v * v).sum::<f64>().sqrt() < tol;
        }
        if !converged {
            out.issues.push(StationaryError::NoConvergence { seed: seed.clone() });
            continue;
        }
        let exact: Option<Vec<Rational>> = x.iter().map(|&v| rationalize(v, MAX_DENOMINATOR, 1e-9)).collect();
        let verified = exact.filter(|p| grad.iter().all(|g| g.eval_rational(p).is_zero()));
        match verified {
            Some(p) => {
                if out.points.iter().any(|q| q.x == p) {
                    continue;
                }
                let rank = taylor_data(s, &p, 2).map(|t| t.hessian.matrix().rank()).unwrap_or(0);
                out.points.push(CriticalPoint { x: p, hessian_rank: rank });
            }
            None => {
                let rank = float_rank(&eval_h(&x), 1e-7);
                if rank < n {
                    out.issues.push(StationaryError::DegenerateHessian { point: x.iter().map(|v| format!("{v:.12}")).collect(), rank });
                } else {
                    out.issues.push(StationaryError::NotRational { point: x.clone() });
                }
            }
        }
    }
    out.points.sort_by(|a, b| a.x.cmp(&b.x));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, Scalar};
    use num_traits::One;

    #[test]
    fn continued_fractions() {
        assert_eq!(rationalize(1.0 / 3.0, 1000, 1e-12), Some(rat(1, 3)));
        assert_eq!(rationalize(-2.5, 1000, 1e-12), Some(rat(-5, 2)));
        assert_eq!(rationalize(0.0, 10, 1e-12), Some(int(0)));
        assert_eq!(rationalize(std::f64::consts::PI, 100, 1e-12), None);
    }

    #[test]
    fn third_is_recovered() {
        // (x - 1/3)^2
        let s = PolyFunction::from_terms(
            1,
            [(vec![2], Scalar::one()), (vec![1], Scalar::from_ratio(-2, 3)), (vec![0], Scalar::from_ratio(1, 9))],
        );
        let r = find_critical_points(&s, &default_seeds(1), 1e-10, 50);
        assert_eq!(r.points, vec![CriticalPoint { x: vec![rat(1, 3)], hessian_rank: 1 }]);
    }
}
