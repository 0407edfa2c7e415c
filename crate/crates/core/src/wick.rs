//! Fresnel closed forms and Gaussian moments by perfect matchings.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{
    format_rational, rat_to_f64, rational_serde, ExactError, HbarSeries, PolyFunction, QuadraticForm, RMatrix, Rational,
    Scalar,
};

/// Normalization of the Gaussian exponent.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FresnelNormalization {
    /// `∫ exp(i Q(x,x))`, value `π^{n/2} e^{iπ sign/4} / |det Q|^{1/2}`.
    Lemma,
    /// `∫ exp((i/2ħ) Q(x,x))`, value `(2πħ)^{n/2} e^{iπ sign/4} / |det Q|^{1/2}`.
    Hbar,
}

/// Symbolic Fresnel integral value; ħ stays a formal variable.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FresnelValue {
    pub dim: usize,
    pub signature: i64,
    #[serde(with = "rational_serde")]
    pub abs_det: Rational,
    pub normalization: FresnelNormalization,
}

impl FresnelValue {
    /// Numeric value; `hbar` is ignored in lemma normalization.
    pub fn to_c64(&self, hbar: f64) -> Complex64 {
        let base = match self.normalization {
            FresnelNormalization::Lemma => PI,
            FresnelNormalization::Hbar => 2.0 * PI * hbar,
        };
        let modulus = base.powf(self.dim as f64 / 2.0) / rat_to_f64(&self.abs_det).sqrt();
        Complex64::from_polar(modulus, PI * self.signature as f64 / 4.0)
    }

    /// Phase `e^{iπ sign/4}` as an eighth root of unity index (`sign mod 8`).
    pub fn phase_eighths(&self) -> i64 {
        self.signature.rem_euclid(8)
    }
}

impl fmt::Display for FresnelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.normalization {
            FresnelNormalization::Lemma => "π",
            FresnelNormalization::Hbar => "2πħ",
        };
        write!(f, "({base})^({}/2)·e^(iπ·{}/4)/|{}|^(1/2)", self.dim, self.signature, format_rational(&self.abs_det))
    }
}

pub fn fresnel_value(q: &QuadraticForm, normalization: FresnelNormalization) -> Result<FresnelValue, ExactError> {
    let a = q.analyze()?;
    Ok(FresnelValue { dim: q.dim(), signature: a.signature, abs_det: a.det.abs(), normalization })
}

/// Exact value `coeff · (ħ/i)^power`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HbarOverIPower {
    #[serde(with = "rational_serde")]
    pub coeff: Rational,
    pub power: u32,
}

impl HbarOverIPower {
    pub fn zero() -> Self {
        HbarOverIPower { coeff: Rational::zero(), power: 0 }
    }

    pub fn to_series(&self) -> HbarSeries {
        HbarSeries::monomial(self.power as i32, Scalar::minus_i_pow(self.power as i64).scale(&self.coeff))
    }
}

impl fmt::Display for HbarOverIPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·(ħ/i)^{}", format_rational(&self.coeff), self.power)
    }
}

/// Sum over perfect matchings of the tuple of `Π K[i_a][i_b]`, pairing the first open slot recursively.
pub fn matching_sum(k: &RMatrix, indices: &[usize]) -> Rational {
    fn rec(k: &RMatrix, idx: &[usize], open: &mut Vec<usize>) -> Rational {
        if open.is_empty() {
            return Rational::one();
        }
        let a = open.remove(0);
        let mut acc = Rational::zero();
        for j in 0..open.len() {
            let b = open[j];
            let w = &k[(idx[a], idx[b])];
            if w.is_zero() {
                continue;
            }
            open.remove(j);
            acc += w * rec(k, idx, open);
            open.insert(j, b);
        }
        open.insert(0, a);
        acc
    }
    if indices.len() % 2 != 0 {
        return Rational::zero();
    }
    let mut open: Vec<usize> = (0..indices.len()).collect();
    rec(k, indices, &mut open)
}

/// Moment `∂_{J_{i1}}…∂_{J_{in}} exp((ħ/2i) K^{ij} J_i J_j)` at `J = 0`, by perfect matchings.
pub fn wick_moment(k: &RMatrix, indices: &[usize]) -> HbarOverIPower {
    assert!(indices.iter().all(|&i| i < k.rows()), "index outside the dimension of K");
    if indices.len() % 2 != 0 {
        return HbarOverIPower::zero();
    }
    let coeff = matching_sum(k, indices);
    if coeff.is_zero() {
        return HbarOverIPower::zero();
    }
    HbarOverIPower { coeff, power: (indices.len() / 2) as u32 }
}

/// Default bound on the tuple length accepted by [`moment_oracle`].
pub const ORACLE_MAX_LEN: usize = 10;

/// Same moment as [`wick_moment`], computed by differentiating the generating exponential.
///
/// The derivative of `P(J,t)·exp(t·B(J)/2)` is `(∂P + P·t·∂B/2)·exp(t·B/2)` with
/// `B = K^{ij}J_iJ_j` and `t = ħ/i`; the polynomial prefactor is tracked exactly.
pub fn moment_oracle(k: &RMatrix, indices: &[usize]) -> HbarOverIPower {
    moment_oracle_bounded(k, indices, ORACLE_MAX_LEN)
}

/// [`moment_oracle`] with an explicit bound on the tuple length.
pub fn moment_oracle_bounded(k: &RMatrix, indices: &[usize], max_len: usize) -> HbarOverIPower {
    assert!(indices.len() <= max_len, "tuple longer than the oracle bound");
    let n = k.rows();
    let t = n; // extra variable carrying ħ/i
    let dim = n + 1;
    let mut b = PolyFunction::zero(dim);
    for i in 0..n {
        for j in 0..n {
            let mut e = vec![0; dim];
            e[i] += 1;
            e[j] += 1;
            b.add_term(e, Scalar::real(k[(i, j)].clone()));
        }
    }
    let half_t = PolyFunction::var(dim, t).scale(&Scalar::from_ratio(1, 2));
    let db: Vec<PolyFunction> = (0..n).map(|i| b.partial(i).mul(&half_t)).collect();
    let mut p = PolyFunction::one(dim);
    for (step, &i) in indices.iter().enumerate() {
        p = p.partial(i).add(&p.mul(&db[i]));
        // each remaining derivative lowers the J-degree by at most one
        let left = (indices.len() - step - 1) as u32;
        p = PolyFunction::from_terms(dim, p.terms().filter(|(e, _)| e[..n].iter().sum::<u32>() <= left).map(|(e, c)| (e.clone(), c.clone())));
    }
    let mut out = HbarOverIPower::zero();
    for (e, c) in p.terms() {
        if e[..n].iter().all(|&x| x == 0) {
            assert!(out.coeff.is_zero(), "moment has a single power of ħ/i");
            out = HbarOverIPower { coeff: c.re.clone(), power: e[t] };
        }
    }
    out
}
