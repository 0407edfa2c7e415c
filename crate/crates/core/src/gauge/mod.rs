//! Faddeev-Popov gauge fixing for polynomial actions with a Lie algebra of polynomial
//! symmetries: model validation, the FP action on `X × 𝔤* × Π(𝔤 ⊕ 𝔤*)`, BRST operator,
//! and the typed-graph expansion.

mod brst;
mod expand;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use brst::{brst_apply, brst_images, gauge_fermion, gauge_fermion_check, gauge_fermion_report, GaugeFermionReport};
pub use expand::{
    fp_critical_points, fp_direct_corrections, fp_expand, fp_expand_at, fp_rules_at, ghost_cycles, nullspace, DetMode, FPCriticalPoint,
    FPCriticalSearch, FPRules,
};

use crate::exact::{format_rational, rational_serde, ExactError, PolyFunction, RMatrix, Rational, Scalar};
use crate::gaussian::GaussianError;
use crate::graph::GraphError;
use crate::stationary::{ActionModel, StationaryError, SCHEMA_VERSION};
use crate::superalgebra::{SuperFunction, SuperSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaugeError {
    #[error("action is not invariant under v_{generator}: L_v S = {residual}")]
    NotGaugeInvariant { generator: usize, residual: String },
    #[error("bad structure constants: {0}")]
    BadStructureConstants(String),
    #[error("Faddeev-Popov operator is degenerate at {point:?}")]
    DegenerateFP { point: Vec<String> },
    #[error("gauge-slice Hessian is degenerate at {point:?}")]
    DegenerateSlice { point: Vec<String> },
    #[error("invalid gauge model: {0}")]
    InvalidModel(String),
    #[error("graph sum and connected exponential disagree at ħ^{power}")]
    RouteMismatch { power: i32 },
    #[error(transparent)]
    Stationary(#[from] StationaryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

pub(crate) fn point_strings(x: &[Rational]) -> Vec<String> {
    x.iter().map(format_rational).collect()
}

/// Structure constants `f_{ab}^c` of a Lie algebra in a chosen basis.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct StructureConstants {
    dim: usize,
    f: BTreeMap<(usize, usize, usize), Rational>,
}

impl StructureConstants {
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (usize, usize, usize, Rational)>) -> Result<Self, GaugeError> {
        let mut f = BTreeMap::new();
        for (a, b, c, v) in entries {
            if a >= dim || b >= dim || c >= dim {
                return Err(GaugeError::BadStructureConstants(format!("index ({a},{b},{c}) out of range")));
            }
            if f.insert((a, b, c), v).is_some() {
                return Err(GaugeError::BadStructureConstants(format!("entry ({a},{b},{c}) listed twice")));
            }
        }
        f.retain(|_, v: &mut Rational| !v.is_zero());
        Ok(StructureConstants { dim, f })
    }

    pub fn abelian(dim: usize) -> Self {
        StructureConstants { dim, f: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Rational {
        self.f.get(&(a, b, c)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Rational)> {
        self.f.iter()
    }

    /// `tr ad_{T_a} = Σ_b f_{ab}^b`.
    pub fn trace_ad(&self, a: usize) -> Rational {
        (0..self.dim).map(|b| self.get(a, b, b)).sum()
    }

    pub fn is_unimodular(&self) -> bool {
        (0..self.dim).all(|a| self.trace_ad(a).is_zero())
    }

    /// Antisymmetry in the lower indices and the Jacobi identity.
    pub fn check(&self) -> Result<(), GaugeError> {
        let k = self.dim;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if self.get(a, b, c) != -self.get(b, a, c) {
                        return Err(GaugeError::BadStructureConstants(format!(
                            "f_({a},{b})^{c} = {} but f_({b},{a})^{c} = {}",
                            format_rational(&self.get(a, b, c)),
                            format_rational(&self.get(b, a, c))
                        )));
                    }
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for e in 0..k {
                        let j: Rational = (0..k)
                            .map(|d| {
                                self.get(a, b, d) * self.get(d, c, e)
                                    + self.get(b, c, d) * self.get(d, a, e)
                                    + self.get(c, a, d) * self.get(d, b, e)
                            })
                            .sum();
                        if !j.is_zero() {
                            return Err(GaugeError::BadStructureConstants(format!(
                                "Jacobi fails at (a,b,c) = ({a},{b},{c}), component {e}: {}",
                                format_rational(&j)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct LieWire {
    dim: usize,
    f: Vec<(usize, usize, usize, Scalar)>,
}

impl Serialize for StructureConstants {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LieWire { dim: self.dim, f: self.f.iter().map(|(&(a, b, c), v)| (a, b, c, Scalar::real(v.clone()))).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StructureConstants {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = LieWire::deserialize(d)?;
        let mut entries = Vec::new();
        for (a, b, c, v) in w.f {
            if !v.is_real() {
                return Err(serde::de::Error::custom("structure constants must be real"));
            }
            entries.push((a, b, c, v.re));
        }
        StructureConstants::new(w.dim, entries).map_err(serde::de::Error::custom)
    }
}

/// `coeff · π^pi_power`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GroupVolume {
    #[serde(with = "rational_serde")]
    pub coeff: Rational,
    #[serde(default)]
    pub pi_power: u32,
}

impl GroupVolume {
    pub fn one() -> Self {
        GroupVolume { coeff: Rational::one(), pi_power: 0 }
    }

    pub fn to_f64(&self) -> f64 {
        crate::exact::rat_to_f64(&self.coeff) * std::f64::consts::PI.powi(self.pi_power as i32)
    }
}

impl fmt::Display for GroupVolume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_power {
            0 => write!(f, "{}", format_rational(&self.coeff)),
            1 => write!(f, "{}π", format_rational(&self.coeff)),
            p => write!(f, "{}π^{p}", format_rational(&self.coeff)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Term {
    exp: Vec<u32>,
    coeff: Scalar,
}

fn poly_from_terms(dim: usize, terms: Vec<Term>) -> Result<PolyFunction, GaugeError> {
    let mut p = PolyFunction::zero(dim);
    for t in terms {
        if t.exp.len() != dim {
            return Err(GaugeError::InvalidModel(format!("exponent {:?} has wrong length", t.exp)));
        }
        p.add_term(t.exp, t.coeff);
    }
    Ok(p)
}

fn poly_to_terms(p: &PolyFunction) -> Vec<Term> {
    p.terms().map(|(e, c)| Term { exp: e.clone(), coeff: c.clone() }).collect()
}

#[derive(Serialize, Deserialize)]
struct GaugeWire {
    schema_version: u32,
    action: ActionModel,
    lie: StructureConstants,
    vector_fields: Vec<Vec<Vec<Term>>>,
    phi: Vec<Vec<Term>>,
    #[serde(rename = "vol_G")]
    vol_g: GroupVolume,
    #[serde(rename = "N")]
    n: u32,
}

/// Action with a Lie algebra of infinitesimal symmetries `v_a = v_a^i ∂_i`, a gauge condition
/// `φ: R^n → R^k` and the data `vol(G)`, `N` of the quotient.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "GaugeWire", into = "GaugeWire")]
pub struct GaugeModel {
    pub base: ActionModel,
    pub lie: StructureConstants,
    /// `vector_fields[a][i] = v_a^i`
    pub vector_fields: Vec<Vec<PolyFunction>>,
    pub phi: Vec<PolyFunction>,
    pub vol_g: GroupVolume,
    /// Number of times the slice meets a generic orbit.
    pub intersections: u32,
}

impl TryFrom<GaugeWire> for GaugeModel {
    type Error = GaugeError;

    fn try_from(w: GaugeWire) -> Result<Self, GaugeError> {
        if w.schema_version != SCHEMA_VERSION {
            return Err(StationaryError::SchemaVersion(w.schema_version).into());
        }
        let n = w.action.dim();
        let vector_fields = w
            .vector_fields
            .into_iter()
            .map(|v| v.into_iter().map(|t| poly_from_terms(n, t)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let phi = w.phi.into_iter().map(|t| poly_from_terms(n, t)).collect::<Result<Vec<_>, _>>()?;
        let m = GaugeModel { base: w.action, lie: w.lie, vector_fields, phi, vol_g: w.vol_g, intersections: w.n };
        m.check_shapes()?;
        Ok(m)
    }
}

impl From<GaugeModel> for GaugeWire {
    fn from(m: GaugeModel) -> Self {
        GaugeWire {
            schema_version: SCHEMA_VERSION,
            vector_fields: m.vector_fields.iter().map(|v| v.iter().map(poly_to_terms).collect()).collect(),
            phi: m.phi.iter().map(poly_to_terms).collect(),
            action: m.base,
            lie: m.lie,
            vol_g: m.vol_g,
            n: m.intersections,
        }
    }
}

impl GaugeModel {
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    pub fn k(&self) -> usize {
        self.lie.dim()
    }

    fn check_shapes(&self) -> Result<(), GaugeError> {
        let (n, k) = (self.n(), self.k());
        if self.vector_fields.len() != k || self.phi.len() != k {
            return Err(GaugeError::InvalidModel(format!(
                "{} vector fields and {} gauge conditions for a {k}-dimensional algebra",
                self.vector_fields.len(),
                self.phi.len()
            )));
        }
        if k > n {
            return Err(GaugeError::InvalidModel("more generators than coordinates".into()));
        }
        let polys = self.vector_fields.iter().flatten().chain(self.phi.iter()).chain(std::iter::once(&self.base.action));
        for p in polys {
            if p.dim() != n {
                return Err(GaugeError::InvalidModel("polynomial dimension differs from the action's".into()));
            }
            if !p.is_real() {
                return Err(GaugeError::InvalidModel("model polynomials must have real coefficients".into()));
            }
        }
        if self.vector_fields.iter().any(|v| v.len() != n) {
            return Err(GaugeError::InvalidModel("vector field with wrong number of components".into()));
        }
        if self.intersections == 0 {
            return Err(GaugeError::InvalidModel("N must be positive".into()));
        }
        Ok(())
    }

    /// `v(f) = Σ_i v^i ∂_i f`.
    fn apply_field(v: &[PolyFunction], f: &PolyFunction) -> PolyFunction {
        v.iter().enumerate().fold(PolyFunction::zero(f.dim()), |acc, (i, vi)| acc.add(&vi.mul(&f.partial(i))))
    }

    /// `L_{v_a} S` for every generator.
    pub fn invariance_residuals(&self) -> Vec<PolyFunction> {
        self.vector_fields.iter().map(|v| Self::apply_field(v, &self.base.action)).collect()
    }

    /// `[v_a, v_b] − f_{ab}^c v_c`, componentwise.
    pub fn bracket_residual(&self, a: usize, b: usize) -> Vec<PolyFunction> {
        let (va, vb) = (&self.vector_fields[a], &self.vector_fields[b]);
        (0..self.n())
            .map(|i| {
                let mut r = Self::apply_field(va, &vb[i]).sub(&Self::apply_field(vb, &va[i]));
                for c in 0..self.k() {
                    let f = self.lie.get(a, b, c);
                    if !f.is_zero() {
                        r = r.sub(&self.vector_fields[c][i].scale(&Scalar::real(f)));
                    }
                }
                r
            })
            .collect()
    }

    /// All model invariants: shapes, structure constants, the bracket relation and invariance of `S`.
    pub fn validate(&self) -> Result<(), GaugeError> {
        self.check_shapes()?;
        self.lie.check()?;
        for a in 0..self.k() {
            for b in 0..self.k() {
                if let Some((i, r)) = self.bracket_residual(a, b).iter().enumerate().find(|(_, r)| !r.is_zero()) {
                    return Err(GaugeError::BadStructureConstants(format!(
                        "[v_{a}, v_{b}] − f_{a}{b}^c v_c has component {i} equal to {r}"
                    )));
                }
            }
        }
        for (a, r) in self.invariance_residuals().iter().enumerate() {
            if !r.is_zero() {
                return Err(GaugeError::NotGaugeInvariant { generator: a, residual: r.to_string() });
            }
        }
        Ok(())
    }

    /// `FP^a_b(x) = dφ^a(v_b)` as polynomials.
    pub fn fp_matrix(&self) -> Vec<Vec<PolyFunction>> {
        (0..self.k()).map(|a| (0..self.k()).map(|b| Self::apply_field(&self.vector_fields[b], &self.phi[a])).collect()).collect()
    }
}

/// `FP(x)^a_b = dφ^a(v_b(x))`.
pub fn fp_operator(gm: &GaugeModel, x: &[Rational]) -> RMatrix {
    let m = gm.fp_matrix();
    let k = gm.k();
    let mut out = RMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            out[(a, b)] = m[a][b].eval_rational(x).re;
        }
    }
    out
}

/// Superspace with even `x1…xn, l1…lk` and odd `c1…ck, cb1…cbk`.
pub fn fp_space(n: usize, k: usize) -> Arc<SuperSpace> {
    let even: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain((1..=k).map(|a| format!("l{a}"))).collect();
    let odd: Vec<String> = (1..=k).map(|a| format!("c{a}")).chain((1..=k).map(|a| format!("cb{a}"))).collect();
    SuperSpace::new(even, odd).expect("distinct names")
}

/// Gauge model together with its FP action `S + ⟨λ, φ⟩ + ⟨c̄, FP c⟩`.
#[derive(Clone, Debug)]
pub struct FPModel {
    pub gauge: GaugeModel,
    space: Arc<SuperSpace>,
    action: SuperFunction,
}

impl FPModel {
    pub fn space(&self) -> &Arc<SuperSpace> {
        &self.space
    }

    pub fn action(&self) -> &SuperFunction {
        &self.action
    }

    pub fn n(&self) -> usize {
        self.gauge.n()
    }

    pub fn k(&self) -> usize {
        self.gauge.k()
    }

    /// Replace the FP action, keeping the model (used for deliberately broken fixtures).
    pub fn with_action(mut self, action: SuperFunction) -> Self {
        assert!(action.same_space(&self.action), "space mismatch");
        self.action = action;
        self
    }

    /// A polynomial on `R^n` as a function on the FP space.
    pub fn lift(&self, p: &PolyFunction) -> SuperFunction {
        let n = self.n();
        SuperFunction::from_poly(&self.space, p.embed(n + self.k(), &(0..n).collect::<Vec<_>>()))
    }

    pub fn x(&self, i: usize) -> SuperFunction {
        SuperFunction::from_poly(&self.space, PolyFunction::var(self.n() + self.k(), i))
    }

    pub fn lambda(&self, a: usize) -> SuperFunction {
        SuperFunction::from_poly(&self.space, PolyFunction::var(self.n() + self.k(), self.n() + a))
    }

    pub fn ghost(&self, a: usize) -> SuperFunction {
        SuperFunction::odd_monomial(&self.space, &[a])
    }

    pub fn antighost(&self, a: usize) -> SuperFunction {
        SuperFunction::odd_monomial(&self.space, &[self.k() + a])
    }

    /// Odd integration order `Dc̄_k Dc^k ⋯ Dc̄_1 Dc^1` (first listed integrated first), for which
    /// `∫ e^{⟨c̄, M c⟩} = det M`.
    pub fn ghost_berezinian(&self) -> Vec<usize> {
        let k = self.k();
        (0..k).rev().flat_map(|a| [k + a, a]).collect()
    }

    /// `vol(G)/(N(2πi)^k)`, the normalization of the FP Berezinian.
    pub fn measure_prefactor(&self) -> String {
        format!("{}/({}·(2πi)^{})", self.gauge.vol_g, self.gauge.intersections, self.k())
    }
}

/// Validate the gauge model and assemble `S_FP`.
pub fn build_fp(gm: &GaugeModel) -> Result<FPModel, GaugeError> {
    gm.validate()?;
    Ok(assemble_fp_unchecked(gm))
}

/// Assemble `S_FP` without checking invariance or the bracket relations. Only meant for
/// negative controls; shapes must still agree.
pub fn assemble_fp_unchecked(gm: &GaugeModel) -> FPModel {
    let (n, k) = (gm.n(), gm.k());
    let space = fp_space(n, k);
    let mut fp = FPModel { gauge: gm.clone(), space: space.clone(), action: SuperFunction::zero(&space) };
    let mut s = fp.lift(&gm.base.action);
    for a in 0..k {
        s = s.add(&fp.lambda(a).mul(&fp.lift(&gm.phi[a])));
    }
    let m = gm.fp_matrix();
    for a in 0..k {
        for b in 0..k {
            if m[a][b].is_zero() {
                continue;
            }
            s = s.add(&fp.antighost(a).mul(&fp.lift(&m[a][b])).mul(&fp.ghost(b)));
        }
    }
    fp.action = s;
    fp
}
