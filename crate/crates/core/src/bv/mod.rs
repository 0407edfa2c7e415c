//! Finite-dimensional BV calculus on Darboux pairs `(z^α, z⁺_α)` of opposite parity.
//!
//! Conventions, fixed here once:
//! * bracket `(f, g) = Σ_α ∂_r f/∂z^α · ∂_l g/∂z⁺_α − ∂_r f/∂z⁺_α · ∂_l g/∂z^α`, so `(z, z⁺) = 1`;
//! * Laplacian `Δ = Σ_α (−1)^{|z^α|} ∂_l/∂z^α ∂_l/∂z⁺_α`, so `Δ(x x⁺) = 1` for even `x`;
//! * `Δ(fg) = Δf·g + (−1)^{|f|} f·Δg + (−1)^{|f|} (f, g)`;
//! * `Δ e^{(i/ħ)S} = (i/ħ)² (½(S,S) − iħΔS) e^{(i/ħ)S}` for even `S`.

mod integral;
mod model;
mod pushforward;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{PolyFunction, Scalar};
use crate::gauge::{brst_images, FPModel, GaugeError};
use crate::gaussian::GaussianError;
use crate::stationary::StationaryError;
use crate::superalgebra::{Generator, Side, SuperError, SuperFunction, SuperSpace};

pub use integral::{bv_integral, lagrangian_berezin_integral, restrict_to_lagrangian, BVIntegralOptions, LinearLagrangian};
pub use model::{terms_from_wire, terms_to_wire, BVModel, TermWire};
pub use pushforward::{bv_pushforward, Pushforward};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BVError {
    #[error("function does not live on the BV space")]
    SpaceMismatch,
    #[error("invalid BV space: {0}")]
    BadSpace(String),
    #[error("BV action has an odd part")]
    OddAction,
    #[error("classical master equation fails: ½(S,S) = {residual}")]
    CMEViolation { residual: String },
    #[error("not a Lagrangian subspace: {0}")]
    NotLagrangian(String),
    #[error("degenerate restriction: {0}")]
    DegenerateRestriction(String),
    #[error("split is not symplectic: {0}")]
    SplitNotSymplectic(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Super(#[from] SuperError),
    #[error(transparent)]
    Stationary(#[from] StationaryError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
}

impl From<GaussianError> for BVError {
    fn from(e: GaussianError) -> Self {
        BVError::DegenerateRestriction(e.to_string())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BVPair {
    pub name: String,
    pub parity: u8,
}

impl BVPair {
    pub fn new(name: impl Into<String>, parity: u8) -> Self {
        BVPair { name: name.into(), parity }
    }
}

/// Darboux pairs with the super space they generate. Even generators: even fields, then
/// antifields of odd fields; odd generators: odd fields, then antifields of even fields.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(into = "Vec<BVPair>", try_from = "Vec<BVPair>")]
pub struct BVSpace {
    pairs: Vec<BVPair>,
    space: Arc<SuperSpace>,
    fields: Vec<Generator>,
    antifields: Vec<Generator>,
}

impl From<BVSpace> for Vec<BVPair> {
    fn from(s: BVSpace) -> Self {
        s.pairs
    }
}

impl TryFrom<Vec<BVPair>> for BVSpace {
    type Error = BVError;
    fn try_from(pairs: Vec<BVPair>) -> Result<Self, BVError> {
        BVSpace::build(pairs)
    }
}

pub fn antifield_name(field: &str) -> String {
    format!("{field}+")
}

impl BVSpace {
    pub fn new(pairs: Vec<BVPair>) -> Result<Arc<Self>, BVError> {
        Self::build(pairs).map(Arc::new)
    }

    fn build(pairs: Vec<BVPair>) -> Result<Self, BVError> {
        let mut seen = BTreeSet::new();
        for p in &pairs {
            if p.parity > 1 {
                return Err(BVError::BadSpace(format!("parity of {} must be 0 or 1", p.name)));
            }
            if p.name.is_empty() || p.name.ends_with('+') {
                return Err(BVError::BadSpace(format!("field name {:?} is empty or ends with '+'", p.name)));
            }
            if !seen.insert(p.name.clone()) {
                return Err(BVError::BadSpace(format!("duplicate field {}", p.name)));
            }
        }
        let names = |parity: u8| pairs.iter().filter(move |p| p.parity == parity);
        let even: Vec<String> =
            names(0).map(|p| p.name.clone()).chain(names(1).map(|p| antifield_name(&p.name))).collect();
        let odd: Vec<String> =
            names(1).map(|p| p.name.clone()).chain(names(0).map(|p| antifield_name(&p.name))).collect();
        let space = SuperSpace::new(even, odd)?;
        let fields = pairs.iter().map(|p| space.generator(&p.name)).collect::<Result<_, _>>()?;
        let antifields = pairs.iter().map(|p| space.generator(&antifield_name(&p.name))).collect::<Result<_, _>>()?;
        Ok(BVSpace { pairs, space, fields, antifields })
    }

    pub fn pairs(&self) -> &[BVPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn super_space(&self) -> &Arc<SuperSpace> {
        &self.space
    }

    pub fn field(&self, alpha: usize) -> Generator {
        self.fields[alpha]
    }

    pub fn antifield(&self, alpha: usize) -> Generator {
        self.antifields[alpha]
    }

    pub fn pair_index(&self, field: &str) -> Option<usize> {
        self.pairs.iter().position(|p| p.name == field)
    }

    /// Fields only: even fields, then odd fields, in pair order.
    pub fn field_space(&self) -> Arc<SuperSpace> {
        let pick = |parity: u8| self.pairs.iter().filter(move |p| p.parity == parity).map(|p| p.name.clone());
        SuperSpace::new(pick(0).collect::<Vec<_>>(), pick(1).collect::<Vec<_>>()).expect("names checked")
    }

    /// The pairs whose fields are listed, in this space's order.
    pub fn subspace(&self, fields: &[&str]) -> Result<Arc<BVSpace>, BVError> {
        for f in fields {
            if self.pair_index(f).is_none() {
                return Err(BVError::BadSpace(format!("unknown field {f}")));
            }
        }
        BVSpace::new(self.pairs.iter().filter(|p| fields.contains(&p.name.as_str())).cloned().collect())
    }

    /// Any generator (field or antifield) by name.
    pub fn coordinate(&self, name: &str) -> Result<SuperFunction, BVError> {
        Ok(SuperFunction::named(&self.space, name)?)
    }

    /// Move a function from another space by generator name; generators missing here map to zero.
    pub fn lift(&self, f: &SuperFunction) -> SuperFunction {
        transfer(f, &self.space)
    }

    fn owns(&self, f: &SuperFunction) -> Result<(), BVError> {
        if **f.space() == *self.space {
            Ok(())
        } else {
            Err(BVError::SpaceMismatch)
        }
    }
}

/// Substitute generators by name into `target`, sending unknown names to zero.
pub fn transfer(f: &SuperFunction, target: &Arc<SuperSpace>) -> SuperFunction {
    let image = |name: &String| SuperFunction::named(target, name).unwrap_or_else(|_| SuperFunction::zero(target));
    let even: Vec<SuperFunction> = f.space().even_names().iter().map(image).collect();
    let odd: Vec<SuperFunction> = f.space().odd_names().iter().map(image).collect();
    f.substitute(target, &even, &odd)
}

/// Total degree of every monomial, odd generators included, capped at `max`.
pub fn truncate_degree(f: &SuperFunction, max: u32) -> SuperFunction {
    let mut out = SuperFunction::zero(f.space());
    for (mask, p) in f.components() {
        let odd = mask.count_ones();
        let kept = PolyFunction::from_terms(
            p.dim(),
            p.terms().filter(|(e, _)| e.iter().sum::<u32>() + odd <= max).map(|(e, c)| (e.clone(), c.clone())),
        );
        out.add_component(mask, kept);
    }
    out
}

pub fn bv_bracket(bv: &BVSpace, f: &SuperFunction, g: &SuperFunction) -> Result<SuperFunction, BVError> {
    bv.owns(f)?;
    bv.owns(g)?;
    let mut out = SuperFunction::zero(&bv.space);
    for alpha in 0..bv.len() {
        let (z, zp) = (bv.field(alpha), bv.antifield(alpha));
        let a = f.derivative(z, Side::Right);
        if !a.is_zero() {
            out = out.add(&a.mul(&g.derivative(zp, Side::Left)));
        }
        let b = f.derivative(zp, Side::Right);
        if !b.is_zero() {
            out = out.sub(&b.mul(&g.derivative(z, Side::Left)));
        }
    }
    Ok(out)
}

pub fn bv_laplacian(bv: &BVSpace, f: &SuperFunction) -> Result<SuperFunction, BVError> {
    bv.owns(f)?;
    let mut out = SuperFunction::zero(&bv.space);
    for alpha in 0..bv.len() {
        let inner = f.derivative(bv.antifield(alpha), Side::Left);
        if inner.is_zero() {
            continue;
        }
        let term = inner.derivative(bv.field(alpha), Side::Left);
        out = if bv.pairs[alpha].parity == 0 { out.add(&term) } else { out.sub(&term) };
    }
    Ok(out)
}

/// `S = Σ_q ħ^q S_q` with every `S_q` even.
#[derive(Clone, PartialEq, Debug)]
pub struct BVAction {
    space: Arc<BVSpace>,
    terms: Vec<SuperFunction>,
}

impl BVAction {
    pub fn new(space: Arc<BVSpace>, classical: SuperFunction) -> Result<Self, BVError> {
        Self::with_terms(space, vec![classical])
    }

    /// `terms[q]` is the coefficient of `ħ^q`.
    pub fn with_terms(space: Arc<BVSpace>, terms: Vec<SuperFunction>) -> Result<Self, BVError> {
        if terms.is_empty() {
            return Err(BVError::Unsupported("BV action without a classical part".into()));
        }
        for t in &terms {
            space.owns(t)?;
            if !t.split_parity().1.is_zero() {
                return Err(BVError::OddAction);
            }
        }
        Ok(BVAction { space, terms })
    }

    pub fn space(&self) -> &Arc<BVSpace> {
        &self.space
    }

    pub fn classical(&self) -> &SuperFunction {
        &self.terms[0]
    }

    pub fn terms(&self) -> &[SuperFunction] {
        &self.terms
    }

    /// Coefficient of `ħ^q` (zero past the stored terms).
    pub fn term(&self, q: usize) -> SuperFunction {
        self.terms.get(q).cloned().unwrap_or_else(|| SuperFunction::zero(&self.space.space))
    }
}

/// `cme = ½(S₀,S₀)`; `qme[k]` is the `ħ^k` coefficient of `½(S,S) − iħΔS`.
#[derive(Clone, PartialEq, Debug)]
pub struct MasterResiduals {
    pub cme: SuperFunction,
    pub qme: Vec<SuperFunction>,
}

impl MasterResiduals {
    pub fn cme_holds(&self) -> bool {
        self.cme.is_zero()
    }

    pub fn qme_holds(&self) -> bool {
        self.qme.iter().all(SuperFunction::is_zero)
    }

    /// First nonzero QME coefficient, as `(power, residual)`.
    pub fn qme_witness(&self) -> Option<(usize, &SuperFunction)> {
        self.qme.iter().enumerate().find(|(_, r)| !r.is_zero())
    }
}

pub fn master_residuals(s: &BVAction) -> MasterResiduals {
    let bv = &s.space;
    let half = Scalar::from_ratio(1, 2);
    let bracket = |a: &SuperFunction, b: &SuperFunction| bv_bracket(bv, a, b).expect("same space");
    let top = 2 * (s.terms.len() - 1) + 1;
    let mut qme = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut r = SuperFunction::zero(&bv.space);
        for i in 0..=k {
            let (a, b) = (s.term(i), s.term(k - i));
            if !a.is_zero() && !b.is_zero() {
                r = r.add(&bracket(&a, &b).scale(&half));
            }
        }
        if k >= 1 {
            let lap = bv_laplacian(bv, &s.term(k - 1)).expect("same space");
            r = r.sub(&lap.scale(&Scalar::i()));
        }
        qme.push(r);
    }
    let cme = bracket(s.classical(), s.classical()).scale(&half);
    MasterResiduals { cme, qme }
}

/// `Δ(Sⁿ) − n Sⁿ⁻¹ ΔS − C(n,2) Sⁿ⁻² (S,S)` for `n = 1..=max_power`: the coefficients of
/// `(i/ħ)ⁿ/n!` in the exponential identity. All vanish for even `S`.
pub fn exp_identity_residuals(bv: &BVSpace, s: &SuperFunction, max_power: u32) -> Result<Vec<SuperFunction>, BVError> {
    bv.owns(s)?;
    let lap = bv_laplacian(bv, s)?;
    let br = bv_bracket(bv, s, s)?;
    let mut out = Vec::new();
    let mut pows = vec![SuperFunction::one(&bv.space)];
    for n in 1..=max_power {
        pows.push(pows[n as usize - 1].mul(s));
        let lhs = bv_laplacian(bv, &pows[n as usize])?;
        let mut rhs = pows[n as usize - 1].mul(&lap).scale(&Scalar::from_int(n as i64));
        if n >= 2 {
            let c = Scalar::from_int((n * (n - 1) / 2) as i64);
            rhs = rhs.add(&pows[n as usize - 2].mul(&br).scale(&c));
        }
        out.push(lhs.sub(&rhs));
    }
    Ok(out)
}

/// Which field space to build the BV action on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BVVariant {
    /// `x, c` and their antifields.
    Minimal,
    /// `x, λ, c, c̄` and their antifields.
    NonMinimal,
}

/// A field space with an action and the images of the BRST differential, the input of
/// `S_BV = S + Σ_α z⁺_α Q(z^α)`.
#[derive(Clone, Debug)]
pub struct BrstData {
    pub space: Arc<BVSpace>,
    /// Functions on `space`'s super space that do not involve antifields.
    pub action: SuperFunction,
    pub images: Vec<SuperFunction>,
}

/// Fields named as in the FP space (`x_i`, `l_a`, `c_a`, `cb_a`); images from the BRST operator.
pub fn brst_data(fp: &FPModel, variant: BVVariant) -> BrstData {
    let (n, k) = (fp.n(), fp.k());
    let mut pairs: Vec<BVPair> = (1..=n).map(|i| BVPair::new(format!("x{i}"), 0)).collect();
    if variant == BVVariant::NonMinimal {
        pairs.extend((1..=k).map(|a| BVPair::new(format!("l{a}"), 0)));
    }
    pairs.extend((1..=k).map(|a| BVPair::new(format!("c{a}"), 1)));
    if variant == BVVariant::NonMinimal {
        pairs.extend((1..=k).map(|a| BVPair::new(format!("cb{a}"), 1)));
    }
    let space = BVSpace::new(pairs).expect("distinct names");
    let (even, odd) = brst_images(fp);
    let fp_space = fp.space();
    let images = space
        .pairs()
        .iter()
        .map(|p| {
            let img = match fp_space.generator(&p.name).expect("FP field") {
                Generator::Even(i) => &even[i],
                Generator::Odd(j) => &odd[j],
            };
            space.lift(img)
        })
        .collect();
    let action = space.lift(&fp.lift(&fp.gauge.base.action));
    BrstData { space, action, images }
}

/// `S + Σ_α z⁺_α Q(z^α)`, with the classical master equation asserted.
pub fn bv_from_brst(data: &BrstData) -> Result<BVAction, BVError> {
    let bv = &data.space;
    let mut s = data.action.clone();
    for (alpha, img) in data.images.iter().enumerate() {
        let zp = SuperFunction::generator(bv.super_space(), bv.antifield(alpha));
        s = s.add(&zp.mul(img));
    }
    let action = BVAction::new(bv.clone(), s)?;
    let res = master_residuals(&action);
    if !res.cme_holds() {
        return Err(BVError::CMEViolation { residual: res.cme.to_string() });
    }
    Ok(action)
}

pub fn bv_from_gauge(fp: &FPModel, variant: BVVariant) -> Result<BVAction, BVError> {
    bv_from_brst(&brst_data(fp, variant))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Arc<BVSpace> {
        BVSpace::new(vec![BVPair::new("x", 0), BVPair::new("c", 1)]).unwrap()
    }

    #[test]
    fn space_layout() {
        let bv = toy();
        assert_eq!(bv.super_space().even_names(), ["x", "c+"]);
        assert_eq!(bv.super_space().odd_names(), ["c", "x+"]);
        assert!(BVSpace::new(vec![BVPair::new("x", 0), BVPair::new("x", 1)]).is_err());
        assert!(BVSpace::new(vec![BVPair::new("x+", 0)]).is_err());
    }

    #[test]
    fn normalization_golden() {
        let bv = toy();
        let c = |n: &str| bv.coordinate(n).unwrap();
        let one = SuperFunction::one(bv.super_space());
        assert_eq!(bv_bracket(&bv, &c("x"), &c("x+")).unwrap(), one);
        assert_eq!(bv_bracket(&bv, &c("c"), &c("c+")).unwrap(), one);
        assert!(bv_bracket(&bv, &c("x"), &c("x")).unwrap().is_zero());
        assert_eq!(bv_laplacian(&bv, &c("x").mul(&c("x+"))).unwrap(), one);
        assert_eq!(bv_laplacian(&bv, &c("c").mul(&c("c+"))).unwrap(), one.neg());
        assert!(bv_laplacian(&bv, &one).unwrap().is_zero());
    }

    #[test]
    fn antifield_free_action_satisfies_both_equations() {
        let bv = toy();
        let x = bv.coordinate("x").unwrap();
        let r = master_residuals(&BVAction::new(bv, x.mul(&x)).unwrap());
        assert!(r.cme_holds() && r.qme_holds());
    }
}
