use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::RMatrix;
use super::poly::PolyFunction;
use super::scalar::{Rational, Scalar};
use super::tensor::SymTensor;
use super::ExactError;

/// Symmetric rational bilinear form.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct QuadraticForm {
    matrix: RMatrix,
}

/// Exact inverse, determinant and signature of a nondegenerate form.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct QuadAnalysis {
    pub inverse: RMatrix,
    #[serde(with = "super::scalar::rational_serde")]
    pub det: Rational,
    pub signature: i64,
}

impl QuadraticForm {
    pub fn new(matrix: RMatrix) -> Result<Self, ExactError> {
        if !matrix.is_symmetric() {
            return Err(ExactError::NotSymmetric);
        }
        Ok(QuadraticForm { matrix })
    }

    pub fn diag(values: Vec<Rational>) -> Self {
        QuadraticForm { matrix: RMatrix::diag(values) }
    }

    pub fn identity(n: usize) -> Self {
        QuadraticForm { matrix: RMatrix::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    /// `Aᵀ Q A`.
    pub fn congruent(&self, a: &RMatrix) -> Self {
        QuadraticForm { matrix: a.transpose().mul(&self.matrix).mul(a) }
    }

    /// Pivots of a symmetric Gaussian (congruence) reduction, one per dimension.
    /// Returns `None` when the form is degenerate.
    pub fn congruence_pivots(&self) -> Option<Vec<Rational>> {
        let n = self.dim();
        let mut a = self.matrix.clone();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            if a[(k, k)].is_zero() {
                if let Some(j) = (k + 1..n).find(|&j| !a[(j, j)].is_zero()) {
                    swap_sym(&mut a, k, j);
                } else if let Some(j) = (k + 1..n).find(|&j| !a[(k, j)].is_zero()) {
                    // row_k += row_j, col_k += col_j: new diagonal is 2 a_kj
                    for c in 0..n {
                        let v = a[(j, c)].clone();
                        a[(k, c)] += v;
                    }
                    for r in 0..n {
                        let v = a[(r, j)].clone();
                        a[(r, k)] += v;
                    }
                } else {
                    return None;
                }
            }
            let p = a[(k, k)].clone();
            let col: Vec<Rational> = (0..n).map(|r| a[(r, k)].clone()).collect();
            for r in k + 1..n {
                if col[r].is_zero() {
                    continue;
                }
                let f = &col[r] / &p;
                for c in k + 1..n {
                    let v = &f * &col[c];
                    a[(r, c)] -= v;
                }
            }
            for r in k + 1..n {
                a[(r, k)] = Rational::zero();
                a[(k, r)] = Rational::zero();
            }
            pivots.push(p);
        }
        Some(pivots)
    }

    pub fn analyze(&self) -> Result<QuadAnalysis, ExactError> {
        let pivots = self.congruence_pivots().ok_or(ExactError::DegenerateForm)?;
        let det = pivots.iter().fold(Rational::one(), |acc, p| acc * p);
        let signature = pivots.iter().map(|p| if p.is_positive() { 1 } else { -1 }).sum();
        let inverse = self.matrix.inverse().ok_or(ExactError::DegenerateForm)?;
        Ok(QuadAnalysis { inverse, det, signature })
    }

    pub fn to_polynomial(&self) -> PolyFunction {
        let n = self.dim();
        let mut p = PolyFunction::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                p.add_term(e, Scalar::real(&self.matrix[(i, j)] / Rational::from_integer(2.into())));
            }
        }
        p
    }
}

fn swap_sym(a: &mut RMatrix, i: usize, j: usize) {
    let n = a.rows();
    for c in 0..n {
        let t = a[(i, c)].clone();
        a[(i, c)] = a[(j, c)].clone();
        a[(j, c)] = t;
    }
    for r in 0..n {
        let t = a[(r, i)].clone();
        a[(r, i)] = a[(r, j)].clone();
        a[(r, j)] = t;
    }
}

/// Decomposition of `S(x0 + y)` into value, gradient, Hessian and higher symmetric tensors.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TaylorData {
    pub value: Scalar,
    pub gradient: Vec<Scalar>,
    pub hessian: QuadraticForm,
    /// Tensors of rank 3, 4, ... up to the requested degree.
    pub interactions: Vec<SymTensor>,
}

impl TaylorData {
    pub fn interaction(&self, rank: usize) -> Option<&SymTensor> {
        rank.checked_sub(3).and_then(|k| self.interactions.get(k))
    }

    pub fn reassemble(&self) -> PolyFunction {
        let n = self.hessian.dim();
        let mut p = PolyFunction::constant(n, self.value.clone());
        for (i, g) in self.gradient.iter().enumerate() {
            p = p.add(&PolyFunction::var(n, i).scale(g));
        }
        p = p.add(&self.hessian.to_polynomial());
        for t in &self.interactions {
            p = p.add(&t.to_polynomial());
        }
        p
    }
}

pub fn taylor_data(s: &PolyFunction, x0: &[Rational], max_deg: usize) -> Result<TaylorData, ExactError> {
    assert!(max_deg >= 2, "max_deg must be at least 2");
    let n = s.dim();
    if x0.len() != n {
        return Err(ExactError::DimensionMismatch { expected: n, found: x0.len() });
    }
    let shifted = s.shift(x0);
    let value = shifted.constant_term();
    let gradient = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            shifted.coeff(&e)
        })
        .collect();
    let quad = SymTensor::from_homogeneous(&shifted.homogeneous_part(2), 2);
    let mut m = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = quad.get(&[i, j]);
            if !v.is_real() {
                return Err(ExactError::ComplexHessian);
            }
            m[(i, j)] = v.re;
        }
    }
    let interactions = (3..=max_deg).map(|k| SymTensor::from_homogeneous(&shifted.homogeneous_part(k as u32), k)).collect();
    Ok(TaylorData { value, gradient, hessian: QuadraticForm { matrix: m }, interactions })
}
