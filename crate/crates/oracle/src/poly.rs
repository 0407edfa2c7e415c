/// Real polynomial in at most three variables, stored as a list of monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, f64)>) -> Self {
        assert!(terms.iter().all(|(e, _)| e.len() == dim), "exponent length must equal the dimension");
        Polynomial { dim, terms }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Polynomial::new(dim, vec![(vec![0; dim], c)])
    }

    /// `Σ_i c_i x_i^k` style helper for separable polynomials: `coeffs[k]` multiplies `x^k`.
    pub fn univariate(coeffs: &[f64]) -> Self {
        Polynomial::new(1, coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(k, &c)| (vec![k as u32], c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_monomials() {
        let p = Polynomial::new(2, vec![(vec![2, 0], 0.5), (vec![1, 1], -1.0), (vec![0, 0], 3.0)]);
        assert_eq!(p.eval(&[2.0, 3.0]), 2.0 - 6.0 + 3.0);
        assert_eq!(Polynomial::univariate(&[0.0, 0.0, 0.5]).eval(&[4.0]), 8.0);
    }
}
