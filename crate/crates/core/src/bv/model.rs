use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BVAction, BVError, BVIntegralOptions, BVPair, BVSpace, LinearLagrangian};
use crate::exact::{rational_vec_serde, Rational, Scalar};
use crate::stationary::SCHEMA_VERSION;
use crate::superalgebra::{SuperFunction, SuperSpace};

/// One term `coeff · g₁ g₂ ⋯` with generators multiplied in the listed order.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TermWire {
    pub monomial: Vec<String>,
    pub coeff: Scalar,
}

pub fn terms_to_wire(f: &SuperFunction) -> Vec<TermWire> {
    let space = f.space();
    let mut out = Vec::new();
    for (mask, p) in f.components() {
        for (e, c) in p.terms() {
            let mut monomial: Vec<String> = Vec::new();
            for (i, &k) in e.iter().enumerate() {
                monomial.extend(std::iter::repeat(space.even_names()[i].clone()).take(k as usize));
            }
            monomial.extend((0..space.odd_dim()).filter(|j| mask & (1u64 << j) != 0).map(|j| space.odd_names()[j].clone()));
            out.push(TermWire { monomial, coeff: c.clone() });
        }
    }
    out
}

pub fn terms_from_wire(space: &Arc<SuperSpace>, terms: &[TermWire]) -> Result<SuperFunction, BVError> {
    let mut f = SuperFunction::zero(space);
    for t in terms {
        let mut m = SuperFunction::constant(space, t.coeff.clone());
        for g in &t.monomial {
            m = m.mul(&SuperFunction::named(space, g)?);
        }
        f = f.add(&m);
    }
    Ok(f)
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LagrangianWire {
    GaugeFermion { psi: Vec<TermWire> },
    Coordinate { antifields: Vec<String> },
}

#[derive(Serialize, Deserialize)]
struct BVModelWire {
    schema_version: u32,
    pairs: Vec<BVPair>,
    action: Vec<TermWire>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    hbar_terms: Vec<Vec<TermWire>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lagrangian: Option<LagrangianWire>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    critical_points: Vec<RationalPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    berezinian: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RationalPoint(#[serde(with = "rational_vec_serde")] Vec<Rational>);

/// BV action with an optional gauge-fixing Lagrangian and integration data, as read from JSON.
#[derive(Clone, PartialEq, Debug)]
pub struct BVModel {
    pub action: BVAction,
    pub lagrangian: Option<LinearLagrangian>,
    pub options: BVIntegralOptions,
}

impl PartialEq for BVIntegralOptions {
    fn eq(&self, o: &Self) -> bool {
        self.critical_points == o.critical_points && self.berezinian == o.berezinian
    }
}

impl BVModel {
    pub fn space(&self) -> &Arc<BVSpace> {
        self.action.space()
    }

    pub fn from_json(text: &str) -> Result<Self, BVError> {
        let w: BVModelWire = serde_json::from_str(text).map_err(|e| BVError::BadSpace(e.to_string()))?;
        if w.schema_version != SCHEMA_VERSION {
            return Err(BVError::BadSpace(format!("unsupported schema version {}", w.schema_version)));
        }
        let bv = BVSpace::new(w.pairs)?;
        let space = bv.super_space().clone();
        let mut terms = vec![terms_from_wire(&space, &w.action)?];
        for t in &w.hbar_terms {
            terms.push(terms_from_wire(&space, t)?);
        }
        let lagrangian = match w.lagrangian {
            None => None,
            Some(LagrangianWire::Coordinate { antifields }) => Some(LinearLagrangian::Coordinate { antifields }),
            Some(LagrangianWire::GaugeFermion { psi }) => {
                Some(LinearLagrangian::GaugeFermion { psi: terms_from_wire(&bv.field_space(), &psi)? })
            }
        };
        if let Some(l) = &lagrangian {
            l.check(&bv)?;
        }
        let action = BVAction::with_terms(bv, terms)?;
        let options = BVIntegralOptions { critical_points: w.critical_points.into_iter().map(|p| p.0).collect(), berezinian: w.berezinian };
        Ok(BVModel { action, lagrangian, options })
    }

    pub fn to_json(&self) -> String {
        let w = BVModelWire {
            schema_version: SCHEMA_VERSION,
            pairs: self.space().pairs().to_vec(),
            action: terms_to_wire(self.action.classical()),
            hbar_terms: self.action.terms()[1..].iter().map(terms_to_wire).collect(),
            lagrangian: self.lagrangian.as_ref().map(|l| match l {
                LinearLagrangian::GaugeFermion { psi } => LagrangianWire::GaugeFermion { psi: terms_to_wire(psi) },
                LinearLagrangian::Coordinate { antifields } => LagrangianWire::Coordinate { antifields: antifields.clone() },
            }),
            critical_points: self.options.critical_points.iter().cloned().map(RationalPoint).collect(),
            berezinian: self.options.berezinian.clone(),
        };
        serde_json::to_string_pretty(&w).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_odd_order_signs() {
        let text = r#"{
            "schema_version": 1,
            "pairs": [{"name": "x", "parity": 0}, {"name": "c", "parity": 1}],
            "action": [{"monomial": ["x+", "c", "x"], "coeff": "2"}, {"monomial": ["x", "x"], "coeff": "1/2"}],
            "lagrangian": {"kind": "coordinate", "antifields": []}
        }"#;
        let m = BVModel::from_json(text).unwrap();
        let s = m.space();
        let xp = s.coordinate("x+").unwrap();
        let c = s.coordinate("c").unwrap();
        let x = s.coordinate("x").unwrap();
        // x⁺ c = −c x⁺ in canonical order
        let expected = xp.mul(&c).mul(&x).scale(&Scalar::from_int(2)).add(&x.mul(&x).scale(&Scalar::from_ratio(1, 2)));
        assert_eq!(m.action.classical(), &expected);
        let back = BVModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
