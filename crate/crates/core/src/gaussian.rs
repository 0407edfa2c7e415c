//! Normalized expectations under a super-Gaussian weight `e^{(i/ħ)(½ zᵀHz + Q_odd(θ))}`,
//! evaluated term by term: Wick moments for the even generators and finite Berezin
//! integrals for the odd ones. No graphs are involved.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::exact::{HbarSeries, PolyFunction, QuadraticForm, RMatrix, Rational, Scalar};
use crate::superalgebra::{berezin_integral, SuperFunction};
use crate::wick::wick_moment;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaussianError {
    #[error("even quadratic part is degenerate")]
    DegenerateEven,
    #[error("odd quadratic part is degenerate")]
    DegenerateOdd,
    #[error("quadratic part has a term of odd degree or with even-dependent odd coefficients")]
    NotQuadratic,
    #[error("exponent term of degree {0} carries no positive power of ħ")]
    LowDegree(u32),
    #[error("integration order must list every odd generator once")]
    BadOrder,
}

/// Gaussian data split from an even quadratic super function.
#[derive(Clone, Debug)]
pub struct SuperGaussian {
    even_dim: usize,
    /// `−H⁻¹`
    propagator: RMatrix,
    pub hessian: QuadraticForm,
    /// odd monomial mask ↦ `A_m/A_0`, the moment being `(ħ/i)^{|m|/2} · A_m/A_0`
    odd_moments: BTreeMap<u64, Rational>,
    /// `∫ e^{(i/ħ)Q_odd} = (i/ħ)^{N/2} · odd_norm` in the given integration order
    pub odd_norm: Rational,
    pub odd_dim: usize,
}

fn odd_degree(mask: u64) -> u32 {
    mask.count_ones()
}

fn poly_total_degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

impl SuperGaussian {
    /// `quadratic` must be even, with a pure-even part homogeneous of degree two and an odd
    /// part made of constant-coefficient bilinears. `odd_order` is the Berezin integration order
    /// (first listed is integrated first).
    pub fn new(quadratic: &SuperFunction, odd_order: &[usize]) -> Result<Self, GaussianError> {
        let space = quadratic.space().clone();
        let n = space.even_dim();
        let nodd = space.odd_dim();
        let mut sorted = odd_order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..nodd).collect::<Vec<_>>() {
            return Err(GaussianError::BadOrder);
        }
        let mut h = RMatrix::zeros(n, n);
        let mut odd_q = SuperFunction::zero(&space);
        for (mask, p) in quadratic.components() {
            match odd_degree(mask) {
                0 => {
                    for (e, c) in p.terms() {
                        if poly_total_degree(e) != 2 || !c.is_real() {
                            return Err(GaussianError::NotQuadratic);
                        }
                        let idx: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat(i).take(e[i] as usize)).collect();
                        if idx[0] == idx[1] {
                            h[(idx[0], idx[0])] = &c.re * Rational::from_integer(2.into());
                        } else {
                            h[(idx[0], idx[1])] = c.re.clone();
                            h[(idx[1], idx[0])] = c.re.clone();
                        }
                    }
                }
                2 => {
                    if p.terms().any(|(e, _)| poly_total_degree(e) != 0) {
                        return Err(GaussianError::NotQuadratic);
                    }
                    odd_q.add_component(mask, p.clone());
                }
                _ => return Err(GaussianError::NotQuadratic),
            }
        }
        let hessian = QuadraticForm::new(h).map_err(|_| GaussianError::NotQuadratic)?;
        let propagator = hessian.analyze().map_err(|_| GaussianError::DegenerateEven)?.inverse.neg();
        if nodd % 2 != 0 {
            return Err(GaussianError::DegenerateOdd);
        }
        // ∫ θ^m e^{tQ} picks t^p Q^p/p! with |m| + 2p = N
        let half = nodd / 2;
        let mut powers = vec![SuperFunction::one(&space)];
        for p in 1..=half {
            let next = powers[p - 1].mul(&odd_q).scale(&Scalar::from_ratio(1, p as i64));
            powers.push(next);
        }
        let top = |f: &SuperFunction| -> Rational {
            let c = berezin_integral(f, odd_order).component(0).constant_term();
            debug_assert!(c.is_real());
            c.re
        };
        let odd_norm = top(&powers[half]);
        if odd_norm.is_zero() {
            return Err(GaussianError::DegenerateOdd);
        }
        let mut odd_moments = BTreeMap::new();
        for mask in 0u64..(1u64 << nodd) {
            let d = odd_degree(mask) as usize;
            if d % 2 != 0 {
                continue;
            }
            let bits: Vec<usize> = (0..nodd).filter(|j| mask & (1 << j) != 0).collect();
            let mono = SuperFunction::odd_monomial(&space, &bits);
            let a = top(&mono.mul(&powers[half - d / 2]));
            if !a.is_zero() {
                odd_moments.insert(mask, a / &odd_norm);
            }
        }
        Ok(SuperGaussian { even_dim: n, propagator, hessian, odd_moments, odd_norm, odd_dim: nodd })
    }

    /// `⟨θ^mask⟩` as a one-term series.
    pub fn odd_moment(&self, mask: u64) -> HbarSeries {
        match self.odd_moments.get(&mask) {
            None => HbarSeries::zero(),
            Some(c) => {
                let r = odd_degree(mask) as i64 / 2;
                HbarSeries::monomial(r as i32, Scalar::minus_i_pow(r).scale(c))
            }
        }
    }

    /// `⟨f⟩` for a super function of finite degree.
    pub fn expectation(&self, f: &SuperFunction) -> HbarSeries {
        let mut cache: BTreeMap<Vec<u32>, HbarSeries> = BTreeMap::new();
        let mut out = HbarSeries::zero();
        for (mask, p) in f.components() {
            let odd = self.odd_moment(mask);
            if odd.is_zero() {
                continue;
            }
            let mut even = HbarSeries::zero();
            for (e, c) in p.terms() {
                let m = cache.entry(e.clone()).or_insert_with(|| self.even_moment(e));
                even = even.add(&m.scale(c));
            }
            out = out.add(&even.mul_trunc(&odd, i32::MAX));
        }
        out
    }

    fn even_moment(&self, e: &[u32]) -> HbarSeries {
        debug_assert_eq!(e.len(), self.even_dim);
        let idx: Vec<usize> = e.iter().enumerate().flat_map(|(i, &m)| std::iter::repeat(i).take(m as usize)).collect();
        wick_moment(&self.propagator, &idx).to_series()
    }

    /// `⟨exp((i/ħ)V)⟩` through `ħ^order`; every term of `v` must have total degree at least three.
    pub fn exp_expectation(&self, v: &SuperFunction, order: usize) -> Result<HbarSeries, GaussianError> {
        self.exp_expectation_parts(&[(-1, v.scale(&Scalar::i()))], order)
    }

    /// `⟨exp(Σ ħ^{q} F_q)⟩` through `ħ^order`. Each monomial `z^e θ^m` of `F_q` must satisfy
    /// `2q + |e| + |m| ≥ 1`, so that its expectation carries a positive power of ħ.
    pub fn exp_expectation_parts(&self, parts: &[(i32, SuperFunction)], order: usize) -> Result<HbarSeries, GaussianError> {
        let order = order as i32;
        // doubled ħ weight of ħ^q z^e θ^m after taking the expectation
        let weight = |q: i32, mask: u64, e: &[u32]| -> i32 { 2 * q + (poly_total_degree(e) + odd_degree(mask)) as i32 };
        for (q, f) in parts {
            for (mask, p) in f.components() {
                for (e, _) in p.terms() {
                    if weight(*q, mask, e) < 1 {
                        return Err(GaussianError::LowDegree(poly_total_degree(e) + odd_degree(mask)));
                    }
                }
            }
        }
        let prune = |q: i32, f: &SuperFunction| -> SuperFunction {
            let mut out = SuperFunction::zero(f.space());
            for (mask, p) in f.components() {
                let kept = PolyFunction::from_terms(
                    p.dim(),
                    p.terms().filter(|(e, _)| weight(q, mask, e) <= 2 * order).map(|(e, c)| (e.clone(), c.clone())),
                );
                out.add_component(mask, kept);
            }
            out
        };
        let space = match parts.first() {
            Some((_, f)) => f.space().clone(),
            None => return Ok(HbarSeries::one()),
        };
        let mut out = HbarSeries::one();
        // X^j/j!, grouped by the explicit ħ power
        let mut power: BTreeMap<i32, SuperFunction> = BTreeMap::from([(0, SuperFunction::one(&space))]);
        for j in 1..=(2 * order.max(0)) {
            let mut next: BTreeMap<i32, SuperFunction> = BTreeMap::new();
            for (q0, f0) in &power {
                for (q, f) in parts {
                    let prod = prune(q0 + q, &f0.mul(f));
                    if prod.is_zero() {
                        continue;
                    }
                    let slot = next.entry(q0 + q).or_insert_with(|| SuperFunction::zero(&space));
                    *slot = slot.add(&prod);
                }
            }
            let inv = Scalar::from_ratio(1, j as i64);
            power = next.into_iter().map(|(q, f)| (q, f.scale(&inv))).filter(|(_, f)| !f.is_zero()).collect();
            if power.is_empty() {
                break;
            }
            for (q, f) in &power {
                for (p, c) in self.expectation(f).terms() {
                    out.add_term(p + q, c.clone());
                }
            }
        }
        Ok(out.truncate(order))
    }
}

/// Pieces of a super function around an even point, sorted by total degree (even plus odd).
#[derive(Clone, Debug)]
pub struct LocalSplit {
    pub value: Scalar,
    pub linear: SuperFunction,
    pub quadratic: SuperFunction,
    pub interaction: SuperFunction,
}

/// Shift the even generators by `point` and split by total degree.
pub fn local_split(f: &SuperFunction, point: &[Rational]) -> LocalSplit {
    let space = f.space().clone();
    let n = space.even_dim();
    assert_eq!(point.len(), n, "point has the wrong dimension");
    let mut shifted = SuperFunction::zero(&space);
    for (mask, p) in f.components() {
        shifted.add_component(mask, p.shift(point));
    }
    let mut parts = [SuperFunction::zero(&space), SuperFunction::zero(&space), SuperFunction::zero(&space)];
    let mut interaction = SuperFunction::zero(&space);
    let mut value = Scalar::zero();
    for (mask, p) in shifted.components() {
        for (e, c) in p.terms() {
            let d = poly_total_degree(e) + odd_degree(mask);
            let mono = PolyFunction::monomial(e.clone(), c.clone());
            match d {
                0 => value = c.clone(),
                1 | 2 => parts[d as usize].add_component(mask, mono),
                _ => interaction.add_component(mask, mono),
            }
        }
    }
    let [_, linear, quadratic] = parts;
    LocalSplit { value, linear, quadratic, interaction }
}
