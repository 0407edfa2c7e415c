//! Asymptotic expansion of `∫ e^{(i/ħ)S} μ` over `R^n` from Taylor data at the critical points.
//!
//! Conventions: the graph sum of a critical point uses the propagator `K = −Q⁻¹`
//! (with `Q` the Hessian) and weights `(−iħ)^{|E|−|V|}/|Aut Γ|`, so that the correction series
//! is the normalized Gaussian expectation of `exp((i/ħ)·interactions)`.

mod critical;
mod weight;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use critical::{default_seeds, find_critical_points, rationalize, CriticalPoint, CriticalSearch};
pub use weight::{feynman_weight, feynman_weight_with, FeynmanRules, TensorRules, VertexEntries, WeightRing};

use crate::exact::{
    format_rational, rational_vec_serde, taylor_data, ExactError, HbarSeries, PolyFunction, Rational, Scalar, SymTensor,
    TaylorData,
};
use crate::graph::{enumerate_graphs, EnumerateOptions, GraphClass, GraphError};
use crate::wick::{fresnel_value, FresnelNormalization, FresnelValue};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationaryError {
    #[error("no interaction tensor for vertex {vertex} of valence {valence}")]
    MissingTensor { vertex: usize, valence: usize },
    #[error("graph has leaves but no leaf values were supplied")]
    MissingLeafValues,
    #[error("effective-action weights need a connected graph")]
    Disconnected,
    #[error("degenerate Hessian (rank {rank}) at {point:?}")]
    DegenerateHessian { point: Vec<String>, rank: usize },
    #[error("Newton iteration did not converge from seed {seed:?}")]
    NoConvergence { seed: Vec<f64> },
    #[error("converged point {point:?} has no small rational representation")]
    NotRational { point: Vec<f64> },
    #[error("declared point {point:?} is not critical")]
    NotCritical { point: Vec<String> },
    #[error("model has no critical points")]
    NoCriticalPoints,
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("graph sum and exponentiated connected sum disagree at ħ^{power}")]
    RouteMismatch { power: i32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn point_strings(x: &[Rational]) -> Vec<String> {
    x.iter().map(format_rational).collect()
}

#[derive(Serialize, Deserialize)]
struct ModelTerm {
    exp: Vec<u32>,
    coeff: Scalar,
}

#[derive(Serialize, Deserialize)]
struct ModelWire {
    schema_version: u32,
    dimension: usize,
    polynomial: Vec<ModelTerm>,
    #[serde(default = "Scalar::one")]
    density: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    critical_points: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    gauge: bool,
}

/// Polynomial action on `R^n` with a constant density.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "ModelWire", into = "ModelWire")]
pub struct ActionModel {
    pub action: PolyFunction,
    pub density: Scalar,
    /// Declared critical points; searched for when empty.
    pub critical_points: Vec<Vec<Rational>>,
    /// Degenerate critical points are expected (gauge symmetry).
    pub gauge: bool,
}

impl TryFrom<ModelWire> for ActionModel {
    type Error = StationaryError;

    fn try_from(w: ModelWire) -> Result<Self, Self::Error> {
        if w.schema_version != SCHEMA_VERSION {
            return Err(StationaryError::SchemaVersion(w.schema_version));
        }
        let mut action = PolyFunction::zero(w.dimension);
        for t in w.polynomial {
            if t.exp.len() != w.dimension {
                return Err(StationaryError::InvalidModel(format!("exponent {:?} has wrong length", t.exp)));
            }
            action.add_term(t.exp, t.coeff);
        }
        if w.density.is_zero() {
            return Err(StationaryError::InvalidModel("density must be a nonzero constant".into()));
        }
        let mut critical_points = Vec::new();
        for p in w.critical_points.unwrap_or_default() {
            if p.len() != w.dimension || p.iter().any(|c| !c.is_real()) {
                return Err(StationaryError::InvalidModel("critical points need real coordinates of full length".into()));
            }
            critical_points.push(p.into_iter().map(|c| c.re).collect());
        }
        Ok(ActionModel { action, density: w.density, critical_points, gauge: w.gauge })
    }
}

impl From<ActionModel> for ModelWire {
    fn from(m: ActionModel) -> Self {
        ModelWire {
            schema_version: SCHEMA_VERSION,
            dimension: m.action.dim(),
            polynomial: m.action.terms().map(|(e, c)| ModelTerm { exp: e.clone(), coeff: c.clone() }).collect(),
            density: m.density,
            critical_points: if m.critical_points.is_empty() {
                None
            } else {
                Some(m.critical_points.into_iter().map(|p| p.into_iter().map(Scalar::real).collect()).collect())
            },
            gauge: m.gauge,
        }
    }
}

impl ActionModel {
    pub fn new(action: PolyFunction) -> Self {
        ActionModel { action, density: Scalar::one(), critical_points: Vec::new(), gauge: false }
    }

    pub fn with_points(mut self, points: Vec<Vec<Rational>>) -> Self {
        self.critical_points = points;
        self
    }

    pub fn dim(&self) -> usize {
        self.action.dim()
    }

    /// Declared points after an exact criticality check, or the result of a default grid search.
    pub fn resolve_critical_points(&self) -> Result<Vec<CriticalPoint>, StationaryError> {
        if self.critical_points.is_empty() {
            let found = find_critical_points(&self.action, &default_seeds(self.dim()), 1e-10, 100);
            if found.points.is_empty() {
                return Err(StationaryError::NoCriticalPoints);
            }
            return Ok(found.points);
        }
        let mut out = Vec::new();
        for p in &self.critical_points {
            let td = taylor_data(&self.action, p, 2)?;
            if td.gradient.iter().any(|g| !g.is_zero()) {
                return Err(StationaryError::NotCritical { point: point_strings(p) });
            }
            out.push(CriticalPoint { x: p.clone(), hessian_rank: td.hessian.matrix().rank() });
        }
        Ok(out)
    }
}

/// Normalization of a graph's weight.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// `(−iħ)^{|E|−|V|}/|Aut|`
    PartitionFunction,
    /// `(−iħ)^{loops}/|Aut|`, connected graphs only
    EffectiveAction,
}

/// `(−iħ)^e / |Aut| · F` as a one-term series, with `e` chosen by `mode`.
pub fn normalized_weight<R: WeightRing>(class: &GraphClass, mode: WeightMode, weight: &R) -> Result<(i32, R), StationaryError> {
    let power = match mode {
        WeightMode::PartitionFunction => class.excess,
        WeightMode::EffectiveAction => {
            if !class.representative.is_connected() {
                return Err(StationaryError::Disconnected);
            }
            class.loop_count
        }
    } as i32;
    let coeff = Scalar::minus_i_pow(power as i64).scale(&Rational::new(1.into(), (class.aut_order as i64).into()));
    Ok((power, weight.ring_scale(&coeff)))
}

/// Scalar form of [`normalized_weight`].
pub fn normalized_series(class: &GraphClass, mode: WeightMode, weight: &Scalar) -> Result<HbarSeries, StationaryError> {
    let (p, c) = normalized_weight(class, mode, weight)?;
    Ok(HbarSeries::monomial(p, c))
}

/// Contribution of one critical point:
/// `e^{(i/ħ)S(x₀)} · constant · fresnel · Σ_j c_j ħ^j`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CriticalContribution {
    #[serde(with = "rational_vec_serde")]
    pub point: Vec<Rational>,
    /// `S(x₀)`; the phase `e^{(i/ħ)S(x₀)}` stays symbolic.
    pub value: Scalar,
    pub fresnel: FresnelValue,
    /// Constant prefactor (density, group volume over intersection count, FP determinant, ...).
    pub constant: Scalar,
    /// Extra factor `π^pi_power` (group volumes).
    #[serde(default)]
    pub pi_power: u32,
    /// `1 + c₁ħ + c₂ħ² + …`
    pub corrections: HbarSeries,
}

impl CriticalContribution {
    pub fn eval_f64(&self, hbar: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, 0.0) * (Complex64::i() * self.value.to_c64() / hbar).exp();
        let pi = std::f64::consts::PI.powi(self.pi_power as i32);
        phase * pi * self.fresnel.to_c64(hbar) * self.constant.to_c64() * self.corrections.eval_f64(hbar)
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct AsymptoticSeries {
    pub order: usize,
    pub contributions: Vec<CriticalContribution>,
}

impl AsymptoticSeries {
    pub fn eval_f64(&self, hbar: f64) -> Complex64 {
        self.contributions.iter().map(|c| c.eval_f64(hbar)).sum()
    }

    /// Same series cut at `ħ^order` in every correction factor.
    pub fn truncated(&self, order: usize) -> AsymptoticSeries {
        AsymptoticSeries {
            order,
            contributions: self
                .contributions
                .iter()
                .map(|c| CriticalContribution { corrections: c.corrections.truncate(order as i32), ..c.clone() })
                .collect(),
        }
    }
}

/// Nonzero interaction tensors of a critical point.
pub fn active_interactions(td: &TaylorData) -> Vec<SymTensor> {
    td.interactions.iter().filter(|t| !t.is_zero()).cloned().collect()
}

/// Correction series `Σ_Γ (−iħ)^{|E|−|V|}/|Aut Γ| F(Γ)` through `ħ^order`, over all graphs
/// (disconnected included), together with the same series rebuilt as `exp` of the connected sum.
pub fn correction_series(td: &TaylorData, order: usize) -> Result<(HbarSeries, HbarSeries), StationaryError> {
    let q = td.hessian.analyze()?;
    let k = q.inverse.neg();
    let interactions = active_interactions(td);
    if interactions.is_empty() || order == 0 {
        return Ok((HbarSeries::one(), HbarSeries::one()));
    }
    let degrees: Vec<usize> = interactions.iter().map(SymTensor::rank).collect();
    let classes = enumerate_graphs(&EnumerateOptions::new(order as i64, &degrees))?;
    let mut all = HbarSeries::one();
    let mut connected = HbarSeries::zero();
    for c in &classes {
        let w = feynman_weight(&c.representative, &interactions, &k, None)?;
        if w.is_zero() {
            continue;
        }
        let term = normalized_series(c, WeightMode::PartitionFunction, &w)?;
        all = all.add(&term);
        if c.representative.is_connected() {
            connected = connected.add(&term);
        }
    }
    Ok((all, connected.exp_trunc(order as i32)))
}

/// Expansion at one nondegenerate critical point.
pub fn expand_at(s: &PolyFunction, x0: &[Rational], density: &Scalar, order: usize) -> Result<CriticalContribution, StationaryError> {
    let max_deg = s.degree().unwrap_or(0).max(2) as usize;
    let td = taylor_data(s, x0, max_deg)?;
    if td.gradient.iter().any(|g| !g.is_zero()) {
        return Err(StationaryError::NotCritical { point: point_strings(x0) });
    }
    let fresnel = fresnel_value(&td.hessian, FresnelNormalization::Hbar).map_err(|e| match e {
        ExactError::DegenerateForm => {
            StationaryError::DegenerateHessian { point: point_strings(x0), rank: td.hessian.matrix().rank() }
        }
        e => e.into(),
    })?;
    let (all, via_exp) = correction_series(&td, order)?;
    if let Some(p) = (0..=order as i32).find(|&p| all.coeff(p) != via_exp.coeff(p)) {
        return Err(StationaryError::RouteMismatch { power: p });
    }
    Ok(CriticalContribution { point: x0.to_vec(), value: td.value, fresnel, constant: density.clone(), pi_power: 0, corrections: all })
}

/// Full expansion: one contribution per critical point, corrections through `ħ^order`.
pub fn expand(model: &ActionModel, order: usize) -> Result<AsymptoticSeries, StationaryError> {
    let points = model.resolve_critical_points()?;
    let mut contributions = Vec::new();
    for p in points {
        if p.is_degenerate() {
            return Err(StationaryError::DegenerateHessian { point: point_strings(&p.x), rank: p.hessian_rank });
        }
        contributions.push(expand_at(&model.action, &p.x, &model.density, order)?);
    }
    Ok(AsymptoticSeries { order, contributions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use crate::graph::Graph;

    fn quartic(lambda: Rational) -> PolyFunction {
        PolyFunction::from_terms(1, [(vec![2], Scalar::from_ratio(1, 2)), (vec![4], Scalar::real(lambda / int(4)))])
    }

    #[test]
    fn quartic_first_order() {
        let m = ActionModel::new(quartic(int(1)));
        let s = expand(&m, 1).unwrap();
        assert_eq!(s.contributions.len(), 1);
        let c = &s.contributions[0];
        assert_eq!(c.point, vec![int(0)]);
        assert_eq!(c.corrections.coeff(1), Scalar::new(int(0), rat(-3, 4)));
        assert_eq!(c.fresnel.signature, 1);
    }

    #[test]
    fn quadratic_has_no_corrections() {
        let s = PolyFunction::from_terms(2, [(vec![2, 0], Scalar::one()), (vec![0, 2], Scalar::from_int(-3))]);
        let e = expand(&ActionModel::new(s).with_points(vec![vec![int(0), int(0)]]), 3).unwrap();
        assert_eq!(e.contributions[0].corrections, HbarSeries::one());
    }

    #[test]
    fn normalized_examples() {
        let theta = GraphClass::from_graph(Graph::theta()).unwrap();
        let (p, c) = normalized_weight(&theta, WeightMode::EffectiveAction, &Scalar::one()).unwrap();
        assert_eq!((p, c), (2, Scalar::from_ratio(-1, 12)));
        let g2 = GraphClass::from_graph(Graph::double_edge_with_leaves()).unwrap();
        let (p, c) = normalized_weight(&g2, WeightMode::EffectiveAction, &Scalar::one()).unwrap();
        assert_eq!((p, c), (1, Scalar::new(int(0), rat(-1, 4))));
        let f8 = GraphClass::from_graph(Graph::figure_eight()).unwrap();
        let (p, c) = normalized_weight(&f8, WeightMode::PartitionFunction, &Scalar::one()).unwrap();
        assert_eq!((p, c), (1, Scalar::new(int(0), rat(-1, 8))));
        let two = GraphClass::from_graph(Graph::theta().disjoint_union(&Graph::theta())).unwrap();
        assert_eq!(normalized_weight(&two, WeightMode::EffectiveAction, &Scalar::one()), Err(StationaryError::Disconnected));
    }

    #[test]
    fn model_json_round_trip() {
        let m = ActionModel::new(quartic(rat(1, 2))).with_points(vec![vec![int(0)]]);
        let s = serde_json::to_string(&m).unwrap();
        let back: ActionModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = s.replace("\"schema_version\":1", "\"schema_version\":7");
        assert!(serde_json::from_str::<ActionModel>(&bad).is_err());
    }
}
