use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::scalar::{Rational, Scalar};

/// Truncated Laurent series `Σ c_k ħ^k` with exact coefficients.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HbarSeries {
    terms: BTreeMap<i32, Scalar>,
}

impl HbarSeries {
    pub fn zero() -> Self {
        HbarSeries::default()
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(0, c)
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn monomial(power: i32, c: Scalar) -> Self {
        let mut s = Self::zero();
        s.add_term(power, c);
        s
    }

    /// `(c ħ)^k`, e.g. `(-iħ)^k` with `c = -i`.
    pub fn scaled_power(c: &Scalar, k: i32) -> Self {
        let v = if k >= 0 { c.pow(k as u32) } else { c.inv().expect("zero base").pow((-k) as u32) };
        Self::monomial(k, v)
    }

    pub fn add_term(&mut self, power: i32, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(power).or_insert_with(Scalar::zero);
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&power);
        }
    }

    pub fn coeff(&self, power: i32) -> Scalar {
        self.terms.get(&power).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i32, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_power(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Scalar::one()))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(*k, c * s);
        }
        out
    }

    /// Product keeping powers up to and including `max_power`.
    pub fn mul_trunc(&self, o: &Self, max_power: i32) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if a + b <= max_power {
                    out.add_term(a + b, ca * cb);
                }
            }
        }
        out
    }

    pub fn truncate(&self, max_power: i32) -> Self {
        HbarSeries { terms: self.terms.range(..=max_power).map(|(k, c)| (*k, c.clone())).collect() }
    }

    /// `exp(self)` through `max_power`; requires every power to be positive.
    pub fn exp_trunc(&self, max_power: i32) -> Self {
        assert!(self.min_power().is_none_or(|p| p > 0), "exp of a series with non-positive powers");
        let mut out = Self::one();
        let mut term = Self::one();
        let mut k = 1i64;
        loop {
            term = term.mul_trunc(self, max_power).scale(&Scalar::real(Rational::new(1.into(), k.into())));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
            k += 1;
        }
        out
    }

    pub fn eval_f64(&self, hbar: f64) -> num_complex::Complex64 {
        self.terms.iter().map(|(k, c)| c.to_c64() * hbar.powi(*k)).sum()
    }
}

impl fmt::Display for HbarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})ħ"),
                _ => format!("({c})ħ^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for HbarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_linear_series() {
        let x = HbarSeries::monomial(1, Scalar::from_int(2));
        let e = x.exp_trunc(3);
        assert_eq!(e.coeff(0), Scalar::one());
        assert_eq!(e.coeff(1), Scalar::from_int(2));
        assert_eq!(e.coeff(2), Scalar::from_int(2));
        assert_eq!(e.coeff(3), Scalar::from_ratio(4, 3));
        assert!(e.coeff(4).is_zero());
    }

    #[test]
    fn scaled_negative_power() {
        let s = HbarSeries::scaled_power(&(-Scalar::i()), -1);
        assert_eq!(s.coeff(-1), Scalar::i());
    }
}
