use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::scalar::{Rational, Scalar};

/// Exponent multi-index of a monomial.
pub type Exponent = Vec<u32>;

/// Multivariate polynomial with exact coefficients. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PolyFunction {
    dim: usize,
    terms: BTreeMap<Exponent, Scalar>,
}

#[derive(Serialize, Deserialize)]
struct PolyTerm {
    exp: Vec<u32>,
    coeff: Scalar,
}

#[derive(Serialize, Deserialize)]
struct PolyWire {
    dim: usize,
    terms: Vec<PolyTerm>,
}

impl Serialize for PolyFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyWire {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| PolyTerm { exp: e.clone(), coeff: c.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = PolyWire::deserialize(d)?;
        let mut p = PolyFunction::zero(w.dim);
        for t in w.terms {
            if t.exp.len() != w.dim {
                return Err(serde::de::Error::custom("exponent length differs from dim"));
            }
            p.add_term(t.exp, t.coeff);
        }
        Ok(p)
    }
}

impl PolyFunction {
    pub fn zero(dim: usize) -> Self {
        PolyFunction { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Scalar) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Scalar::one())
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(e, Scalar::one())
    }

    pub fn monomial(exp: Exponent, c: Scalar) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, Scalar)>>(dim: usize, terms: I) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            assert_eq!(e.len(), dim, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32]) -> Scalar {
        self.terms.get(exp).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&vec![0; self.dim])
    }

    pub fn add_term(&mut self, exp: Exponent, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(Scalar::is_real)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        PolyFunction { dim: self.dim, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.dim);
        if s.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let mut out = Self::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.dim);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            out.add_term(f, c.scale(&Rational::from_integer(e[i].into())));
        }
        out
    }

    pub fn gradient(&self) -> Vec<PolyFunction> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    pub fn eval(&self, x: &[Scalar]) -> Scalar {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, k) in x.iter().zip(e) {
                if *k > 0 {
                    t = &t * &xi.pow(*k);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Scalar {
        let xs: Vec<Scalar> = x.iter().cloned().map(Scalar::real).collect();
        self.eval(&xs)
    }

    pub fn eval_f64(&self, x: &[f64]) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = c.to_c64();
            for (xi, k) in x.iter().zip(e) {
                t *= xi.powi(*k as i32);
            }
            acc += t;
        }
        acc
    }

    /// Substitute every variable by a polynomial in a (possibly different) space.
    pub fn compose(&self, subs: &[PolyFunction]) -> PolyFunction {
        assert_eq!(subs.len(), self.dim, "substitution arity mismatch");
        let target = subs.first().map(|p| p.dim).unwrap_or(0);
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut t = PolyFunction::constant(target, c.clone());
            for (s, k) in subs.iter().zip(e) {
                if *k > 0 {
                    t = t.mul(&s.pow(*k));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// The polynomial `y ↦ self(x0 + y)`.
    pub fn shift(&self, x0: &[Rational]) -> PolyFunction {
        let subs: Vec<PolyFunction> = (0..self.dim)
            .map(|i| {
                PolyFunction::var(self.dim, i).add(&PolyFunction::constant(self.dim, Scalar::real(x0[i].clone())))
            })
            .collect();
        self.compose(&subs)
    }

    pub fn homogeneous_part(&self, d: u32) -> PolyFunction {
        PolyFunction {
            dim: self.dim,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() == d).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Re-embed into a space of dimension `dim`, variable `i` going to `map[i]`.
    pub fn embed(&self, dim: usize, map: &[usize]) -> PolyFunction {
        let mut out = Self::zero(dim);
        for (e, c) in &self.terms {
            let mut f = vec![0; dim];
            for (i, k) in e.iter().enumerate() {
                f[map[i]] += k;
            }
            out.add_term(f, c.clone());
        }
        out
    }

    pub fn map_coeffs<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> PolyFunction {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }
}

impl fmt::Display for PolyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}
