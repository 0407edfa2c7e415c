//! Grassmann calculus over a super vector space with polynomial even part.
//!
//! Odd monomials are stored as bitmasks over the odd generators and always read in increasing
//! generator order, so `θ_a θ_b` with `a < b` is the canonical form and `θ_b θ_a = −θ_a θ_b`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{PolyFunction, RMatrix, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuperError {
    #[error("operands live on different super spaces")]
    SpaceMismatch,
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("duplicate generator name {0}")]
    DuplicateName(String),
    #[error("too many odd generators ({0}, at most 64)")]
    TooManyOdd(usize),
}

/// Names of even and odd generators; the odd order fixes every sign.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SuperSpace {
    even: Vec<String>,
    odd: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Generator {
    Even(usize),
    Odd(usize),
}

impl Generator {
    pub fn parity(self) -> u8 {
        match self {
            Generator::Even(_) => 0,
            Generator::Odd(_) => 1,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl SuperSpace {
    pub fn new<S: Into<String>>(even: impl IntoIterator<Item = S>, odd: impl IntoIterator<Item = S>) -> Result<Arc<Self>, SuperError> {
        let even: Vec<String> = even.into_iter().map(Into::into).collect();
        let odd: Vec<String> = odd.into_iter().map(Into::into).collect();
        if odd.len() > 64 {
            return Err(SuperError::TooManyOdd(odd.len()));
        }
        let mut seen = BTreeSet::new();
        for n in even.iter().chain(&odd) {
            if !seen.insert(n.clone()) {
                return Err(SuperError::DuplicateName(n.clone()));
            }
        }
        Ok(Arc::new(SuperSpace { even, odd }))
    }

    pub fn even_dim(&self) -> usize {
        self.even.len()
    }

    pub fn odd_dim(&self) -> usize {
        self.odd.len()
    }

    pub fn even_names(&self) -> &[String] {
        &self.even
    }

    pub fn odd_names(&self) -> &[String] {
        &self.odd
    }

    pub fn generator(&self, name: &str) -> Result<Generator, SuperError> {
        if let Some(i) = self.even.iter().position(|n| n == name) {
            return Ok(Generator::Even(i));
        }
        if let Some(i) = self.odd.iter().position(|n| n == name) {
            return Ok(Generator::Odd(i));
        }
        Err(SuperError::UnknownGenerator(name.to_string()))
    }

    pub fn name(&self, g: Generator) -> &str {
        match g {
            Generator::Even(i) => &self.even[i],
            Generator::Odd(i) => &self.odd[i],
        }
    }

    pub fn generators(&self) -> impl Iterator<Item = Generator> + '_ {
        (0..self.even.len()).map(Generator::Even).chain((0..self.odd.len()).map(Generator::Odd))
    }
}

/// Sign of `θ^a θ^b` reordered into canonical form, or `None` if they share a generator.
fn mask_product_sign(a: u64, b: u64) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(swaps % 2 == 1)
}

/// Element of `Pol(even) ⊗ Λ(odd)`: odd bitmask ↦ polynomial coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct SuperFunction {
    space: Arc<SuperSpace>,
    terms: BTreeMap<u64, PolyFunction>,
}

impl SuperFunction {
    pub fn zero(space: &Arc<SuperSpace>) -> Self {
        SuperFunction { space: space.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(space: &Arc<SuperSpace>, c: Scalar) -> Self {
        Self::from_poly(space, PolyFunction::constant(space.even_dim(), c))
    }

    pub fn one(space: &Arc<SuperSpace>) -> Self {
        Self::constant(space, Scalar::one())
    }

    pub fn from_poly(space: &Arc<SuperSpace>, p: PolyFunction) -> Self {
        assert_eq!(p.dim(), space.even_dim(), "polynomial dimension differs from the even dimension");
        let mut f = Self::zero(space);
        f.add_component(0, p);
        f
    }

    pub fn generator(space: &Arc<SuperSpace>, g: Generator) -> Self {
        match g {
            Generator::Even(i) => Self::from_poly(space, PolyFunction::var(space.even_dim(), i)),
            Generator::Odd(i) => {
                let mut f = Self::zero(space);
                f.add_component(1u64 << i, PolyFunction::one(space.even_dim()));
                f
            }
        }
    }

    pub fn named(space: &Arc<SuperSpace>, name: &str) -> Result<Self, SuperError> {
        Ok(Self::generator(space, space.generator(name)?))
    }

    /// Odd monomial `θ_{i₁}⋯θ_{i_k}` in the given order (sign from reordering).
    pub fn odd_monomial(space: &Arc<SuperSpace>, odd: &[usize]) -> Self {
        odd.iter().fold(Self::one(space), |acc, &i| acc.mul(&Self::generator(space, Generator::Odd(i))))
    }

    pub fn space(&self) -> &Arc<SuperSpace> {
        &self.space
    }

    pub fn components(&self) -> impl Iterator<Item = (u64, &PolyFunction)> {
        self.terms.iter().map(|(m, p)| (*m, p))
    }

    pub fn component(&self, mask: u64) -> PolyFunction {
        self.terms.get(&mask).cloned().unwrap_or_else(|| PolyFunction::zero(self.space.even_dim()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of (odd monomial, even monomial) terms.
    pub fn term_count(&self) -> usize {
        self.terms.values().map(PolyFunction::len).sum()
    }

    pub fn add_component(&mut self, mask: u64, p: PolyFunction) {
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(q) => {
                *q = q.add(&p);
                if q.is_zero() {
                    self.terms.remove(&mask);
                }
            }
            None => {
                self.terms.insert(mask, p);
            }
        }
    }

    /// Parity if homogeneous; zero counts as even.
    pub fn parity(&self) -> Option<u8> {
        let mut ps = self.terms.keys().map(|m| (m.count_ones() % 2) as u8);
        let first = ps.next().unwrap_or(0);
        ps.all(|p| p == first).then_some(first)
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Some(0)
    }

    /// Split into homogeneous even and odd parts.
    pub fn split_parity(&self) -> (SuperFunction, SuperFunction) {
        let mut even = Self::zero(&self.space);
        let mut odd = Self::zero(&self.space);
        for (m, p) in &self.terms {
            let t = if m.count_ones() % 2 == 0 { &mut even } else { &mut odd };
            t.terms.insert(*m, p.clone());
        }
        (even, odd)
    }

    pub fn same_space(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.space, &o.space) || self.space == o.space
    }

    pub fn check_space(&self, o: &Self) -> Result<(), SuperError> {
        if self.same_space(o) {
            Ok(())
        } else {
            Err(SuperError::SpaceMismatch)
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert!(self.same_space(o), "space mismatch");
        let mut out = self.clone();
        for (m, p) in &o.terms {
            out.add_component(*m, p.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(&self.space);
        if s.is_zero() {
            return out;
        }
        for (m, p) in &self.terms {
            out.terms.insert(*m, p.scale(s));
        }
        out
    }

    /// Multiply every coefficient polynomial by an even polynomial.
    pub fn mul_poly(&self, p: &PolyFunction) -> Self {
        let mut out = Self::zero(&self.space);
        for (m, q) in &self.terms {
            out.add_component(*m, q.mul(p));
        }
        out
    }

    /// Graded product with Koszul signs.
    pub fn mul(&self, o: &Self) -> Self {
        assert!(self.same_space(o), "space mismatch");
        let mut out = Self::zero(&self.space);
        for (a, p) in &self.terms {
            for (b, q) in &o.terms {
                let Some(neg) = mask_product_sign(*a, *b) else { continue };
                let pq = p.mul(q);
                out.add_component(a | b, if neg { pq.neg() } else { pq });
            }
        }
        out
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, SuperError> {
        self.check_space(o)?;
        Ok(self.mul(o))
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(&self.space), |acc, _| acc.mul(self))
    }

    /// `exp(f)` for `f` without a pure-even part, where nilpotency ends the series.
    pub fn exp_nilpotent(&self) -> Self {
        assert!(!self.terms.contains_key(&0), "exponent has a pure-even part");
        let mut out = Self::one(&self.space);
        let mut term = Self::one(&self.space);
        let mut k = 1i64;
        loop {
            term = term.mul(self).scale(&Scalar::from_ratio(1, k));
            if term.is_zero() {
                return out;
            }
            out = out.add(&term);
            k += 1;
        }
    }

    /// Derivative in an even generator.
    pub fn even_derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for (m, p) in &self.terms {
            out.add_component(*m, p.partial(i));
        }
        out
    }

    /// Left or right derivative in odd generator `j`.
    pub fn odd_derivative(&self, j: usize, side: Side) -> Self {
        let bit = 1u64 << j;
        let mut out = Self::zero(&self.space);
        for (m, p) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let passed = match side {
                Side::Left => (m & (bit - 1)).count_ones(),
                Side::Right => (m >> (j + 1)).count_ones(),
            };
            out.add_component(m & !bit, if passed % 2 == 1 { p.neg() } else { p.clone() });
        }
        out
    }

    /// Derivative in any generator; even generators are the same from both sides.
    pub fn derivative(&self, g: Generator, side: Side) -> Self {
        match g {
            Generator::Even(i) => self.even_derivative(i),
            Generator::Odd(j) => self.odd_derivative(j, side),
        }
    }

    pub fn try_odd_derivative(&self, name: &str, side: Side) -> Result<Self, SuperError> {
        match self.space.generator(name)? {
            Generator::Odd(j) => Ok(self.odd_derivative(j, side)),
            Generator::Even(_) => Err(SuperError::UnknownGenerator(format!("{name} is not odd"))),
        }
    }

    /// Substitute every generator by a super function (an algebra map). Images of even
    /// generators must be even.
    pub fn substitute(&self, target: &Arc<SuperSpace>, even: &[SuperFunction], odd: &[SuperFunction]) -> Self {
        assert_eq!(even.len(), self.space.even_dim());
        assert_eq!(odd.len(), self.space.odd_dim());
        let mut pow_cache: BTreeMap<(usize, u32), SuperFunction> = BTreeMap::new();
        let mut out = SuperFunction::zero(target);
        for (m, p) in &self.terms {
            let mut odd_part = SuperFunction::one(target);
            for j in 0..64 {
                if m & (1u64 << j) != 0 {
                    odd_part = odd_part.mul(&odd[j]);
                }
            }
            if odd_part.is_zero() {
                continue;
            }
            for (e, c) in p.terms() {
                let mut t = odd_part.scale(c);
                for (i, &k) in e.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let pw = pow_cache.entry((i, k)).or_insert_with(|| even[i].pow(k)).clone();
                    t = pw.mul(&t);
                }
                out = out.add(&t);
            }
        }
        out
    }

    /// Evaluate the even generators at a point, keeping the odd structure.
    pub fn eval_even(&self, x: &[Rational]) -> BTreeMap<u64, Scalar> {
        self.terms.iter().map(|(m, p)| (*m, p.eval_rational(x))).filter(|(_, c)| !c.is_zero()).collect()
    }

    pub fn map_coeffs<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> Self {
        let mut out = Self::zero(&self.space);
        for (m, p) in &self.terms {
            out.add_component(*m, p.map_coeffs(&f));
        }
        out
    }

    /// Move to a larger space whose generator lists extend this one's by name.
    pub fn embed(&self, target: &Arc<SuperSpace>) -> Result<Self, SuperError> {
        let even: Vec<SuperFunction> =
            self.space.even.iter().map(|n| SuperFunction::named(target, n)).collect::<Result<_, _>>()?;
        let odd: Vec<SuperFunction> =
            self.space.odd.iter().map(|n| SuperFunction::named(target, n)).collect::<Result<_, _>>()?;
        Ok(self.substitute(target, &even, &odd))
    }
}

impl fmt::Display for SuperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, p) in &self.terms {
            for (e, c) in p.terms() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({c})")?;
                for (i, &k) in e.iter().enumerate() {
                    match k {
                        0 => {}
                        1 => write!(f, "·{}", self.space.even[i])?,
                        _ => write!(f, "·{}^{k}", self.space.even[i])?,
                    }
                }
                for j in 0..self.space.odd.len() {
                    if m & (1u64 << j) != 0 {
                        write!(f, "·{}", self.space.odd[j])?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SuperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct SuperTermWire {
    even: Vec<u32>,
    odd: Vec<String>,
    coeff: Scalar,
}

#[derive(Serialize, Deserialize)]
struct SuperWire {
    space: SuperSpace,
    terms: Vec<SuperTermWire>,
}

impl Serialize for SuperFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut terms = Vec::new();
        for (m, p) in &self.terms {
            let odd: Vec<String> =
                (0..self.space.odd.len()).filter(|j| m & (1u64 << j) != 0).map(|j| self.space.odd[j].clone()).collect();
            for (e, c) in p.terms() {
                terms.push(SuperTermWire { even: e.clone(), odd: odd.clone(), coeff: c.clone() });
            }
        }
        SuperWire { space: (*self.space).clone(), terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SuperFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let w = SuperWire::deserialize(d)?;
        let space = SuperSpace::new(w.space.even.clone(), w.space.odd.clone()).map_err(D::Error::custom)?;
        parse_terms(&space, w.terms).map_err(D::Error::custom)
    }
}

fn parse_terms(space: &Arc<SuperSpace>, terms: Vec<SuperTermWire>) -> Result<SuperFunction, SuperError> {
    let mut f = SuperFunction::zero(space);
    for t in terms {
        if t.even.len() != space.even_dim() {
            return Err(SuperError::UnknownGenerator(format!("even exponent of length {}", t.even.len())));
        }
        let mut odd = Vec::new();
        for n in &t.odd {
            match space.generator(n)? {
                Generator::Odd(j) => odd.push(j),
                Generator::Even(_) => return Err(SuperError::UnknownGenerator(format!("{n} is not odd"))),
            }
        }
        let mono = SuperFunction::odd_monomial(space, &odd);
        f = f.add(&mono.mul_poly(&PolyFunction::monomial(t.even, t.coeff)));
    }
    Ok(f)
}

/// Berezin integral over the listed odd generators, integrating the first listed one first:
/// `∂_{v_k} ⋯ ∂_{v_1} f` with left derivatives. Other generators are left in place.
pub fn berezin_integral(f: &SuperFunction, variables: &[usize]) -> SuperFunction {
    variables.iter().fold(f.clone(), |acc, &v| acc.odd_derivative(v, Side::Left))
}

/// Name-based form of [`berezin_integral`].
pub fn berezin_integral_named(f: &SuperFunction, variables: &[&str]) -> Result<SuperFunction, SuperError> {
    let mut idx = Vec::new();
    for n in variables {
        match f.space().generator(n)? {
            Generator::Odd(j) => idx.push(j),
            Generator::Even(_) => return Err(SuperError::UnknownGenerator(format!("{n} is not odd"))),
        }
    }
    Ok(berezin_integral(f, &idx))
}

/// Space `Π(V ⊕ V*)` with generators `θ¹…θⁿ, θ̄₁…θ̄ₙ`.
pub fn ghost_pair_space(n: usize) -> Arc<SuperSpace> {
    let odd: Vec<String> = (1..=n).map(|i| format!("t{i}")).chain((1..=n).map(|i| format!("tb{i}"))).collect();
    SuperSpace::new(Vec::<String>::new(), odd).expect("distinct names")
}

/// Canonical Berezinian `Dθⁿ Dθ̄ₙ ⋯ Dθ¹ Dθ̄₁` on [`ghost_pair_space`], as an integration order.
pub fn canonical_berezinian(n: usize) -> Vec<usize> {
    (0..n).rev().flat_map(|i| [i, n + i]).collect()
}

/// `∫ μ^c exp(B_i^j θ^i θ̄_j)`.
pub fn berezin_det(b: &RMatrix) -> Rational {
    assert!(b.is_square(), "berezin_det needs a square matrix");
    let n = b.rows();
    let space = ghost_pair_space(n);
    let mut x = SuperFunction::zero(&space);
    for i in 0..n {
        for j in 0..n {
            if b[(i, j)].is_zero() {
                continue;
            }
            let t = SuperFunction::odd_monomial(&space, &[i, n + j]).scale(&Scalar::real(b[(i, j)].clone()));
            x = x.add(&t);
        }
    }
    let top = berezin_integral(&x.exp_nilpotent(), &canonical_berezinian(n));
    let c = top.component(0).constant_term();
    debug_assert!(c.is_real());
    c.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn odd_space(n: usize) -> Arc<SuperSpace> {
        SuperSpace::new(vec!["x".to_string()], (1..=n).map(|i| format!("θ{i}"))).unwrap()
    }

    #[test]
    fn anticommutation() {
        let s = odd_space(2);
        let t1 = SuperFunction::generator(&s, Generator::Odd(0));
        let t2 = SuperFunction::generator(&s, Generator::Odd(1));
        assert_eq!(t1.mul(&t2), t2.mul(&t1).neg());
        assert!(t1.mul(&t1).is_zero());
        // (a + bθ)(c + dθ) = ac + (ad + bc)θ
        let f = SuperFunction::constant(&s, Scalar::from_int(2)).add(&t1.scale(&Scalar::from_int(3)));
        let g = SuperFunction::constant(&s, Scalar::from_int(5)).add(&t1.scale(&Scalar::from_int(7)));
        let want = SuperFunction::constant(&s, Scalar::from_int(10)).add(&t1.scale(&Scalar::from_int(29)));
        assert_eq!(f.mul(&g), want);
    }

    #[test]
    fn odd_derivatives() {
        let s = odd_space(2);
        let t1 = SuperFunction::generator(&s, Generator::Odd(0));
        let t2 = SuperFunction::generator(&s, Generator::Odd(1));
        let p = t1.mul(&t2);
        assert_eq!(p.odd_derivative(0, Side::Left), t2);
        assert_eq!(p.odd_derivative(1, Side::Left), t1.neg());
        assert_eq!(p.odd_derivative(1, Side::Right), t1);
        assert_eq!(p.odd_derivative(0, Side::Right), t2.neg());
    }

    #[test]
    fn berezin_examples() {
        let s = odd_space(2);
        let t1 = SuperFunction::generator(&s, Generator::Odd(0));
        let t2 = SuperFunction::generator(&s, Generator::Odd(1));
        let f = SuperFunction::constant(&s, Scalar::from_int(4)).add(&t1.scale(&Scalar::from_int(9)));
        assert_eq!(berezin_integral(&f, &[0]), SuperFunction::constant(&s, Scalar::from_int(9)));
        let g = SuperFunction::constant(&s, Scalar::from_int(3)).add(&t1.scale(&Scalar::from_int(2)));
        assert!(berezin_integral(&g, &[0, 1]).is_zero());
        assert_eq!(berezin_integral(&t1.mul(&t2), &[0, 1]), SuperFunction::one(&s));
        assert_eq!(berezin_integral_named(&t1.mul(&t2), &["θ1", "θ2"]).unwrap(), SuperFunction::one(&s));
        assert!(berezin_integral_named(&t1, &["x"]).is_err());
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(berezin_det(&RMatrix::from_ints(&[vec![7]])), int(7));
        assert_eq!(berezin_det(&RMatrix::identity(2)), int(1));
        let m = RMatrix::from_ints(&[vec![2, -1, 0], vec![3, 4, 1], vec![0, 5, -2]]);
        assert_eq!(berezin_det(&m), m.det_cofactor());
    }

    #[test]
    fn json_round_trip() {
        let s = odd_space(2);
        let x = SuperFunction::named(&s, "x").unwrap();
        let f = x.mul(&SuperFunction::odd_monomial(&s, &[1, 0])).add(&SuperFunction::constant(&s, Scalar::from_ratio(1, 3)));
        let j = serde_json::to_string(&f).unwrap();
        let back: SuperFunction = serde_json::from_str(&j).unwrap();
        assert_eq!(back, f);
    }
}
