//! Lowered structure constants `f_{abc} = ⟨T_a, [T_b, T_c]⟩` in an orthonormal basis, their
//! consistency checks and the color weights of trivalent graphs.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{format_rational, Rational, Scalar};
use crate::graph::Graph;
use crate::stationary::SCHEMA_VERSION;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("index ({0},{1},{2}) out of range")]
    IndexOutOfRange(usize, usize, usize),
    #[error("entry ({0},{1},{2}) listed twice")]
    Duplicate(usize, usize, usize),
    #[error("vertex {vertex} has valence {valence}, not 3")]
    NotTrivalent { vertex: usize, valence: usize },
    #[error("graph has {0} leaves")]
    HasLeaves(usize),
    #[error("schema: {0}")]
    Schema(String),
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LieData {
    dim: usize,
    f: BTreeMap<(usize, usize, usize), Rational>,
}

impl LieData {
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (usize, usize, usize, Rational)>) -> Result<Self, LieError> {
        let mut f = BTreeMap::new();
        for (a, b, c, v) in entries {
            if a >= dim || b >= dim || c >= dim {
                return Err(LieError::IndexOutOfRange(a, b, c));
            }
            if f.insert((a, b, c), v).is_some() {
                return Err(LieError::Duplicate(a, b, c));
            }
        }
        f.retain(|_, v: &mut Rational| !v.is_zero());
        Ok(LieData { dim, f })
    }

    pub fn abelian(dim: usize) -> Self {
        LieData { dim, f: BTreeMap::new() }
    }

    /// `f_{abc} = ε_{abc}`, i.e. `so(3)` with `[T_a, T_b] = ε_{abc} T_c`.
    pub fn epsilon() -> Self {
        let mut f = BTreeMap::new();
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            f.insert((a, b, c), Rational::from_integer(1.into()));
            f.insert((b, a, c), Rational::from_integer((-1).into()));
        }
        LieData { dim: 3, f }
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

    /// Copy with one entry replaced (zero removes it).
    pub fn with_entry(&self, a: usize, b: usize, c: usize, v: Rational) -> Result<Self, LieError> {
        if a >= self.dim || b >= self.dim || c >= self.dim {
            return Err(LieError::IndexOutOfRange(a, b, c));
        }
        let mut out = self.clone();
        if v.is_zero() {
            out.f.remove(&(a, b, c));
        } else {
            out.f.insert((a, b, c), v);
        }
        Ok(out)
    }

    /// `tr ad_{T_j} = Σ_i ⟨T_i, [T_j, T_i]⟩ = Σ_i f_{iji}`.
    pub fn trace_ad(&self, j: usize) -> Rational {
        (0..self.dim).map(|i| self.get(i, j, i)).sum()
    }

    pub fn from_json(text: &str) -> Result<Self, LieError> {
        let w: LieWire = serde_json::from_str(text).map_err(|e| LieError::Schema(e.to_string()))?;
        if w.schema_version != SCHEMA_VERSION {
            return Err(LieError::Schema(format!("unsupported schema version {}", w.schema_version)));
        }
        let mut entries = Vec::with_capacity(w.f.len());
        for (a, b, c, v) in w.f {
            if !v.is_real() {
                return Err(LieError::Schema("structure constants must be real".into()));
            }
            entries.push((a, b, c, v.re));
        }
        LieData::new(w.dim, entries)
    }

    pub fn to_json(&self) -> String {
        let w = LieWire {
            schema_version: SCHEMA_VERSION,
            dim: self.dim,
            f: self.f.iter().map(|(&(a, b, c), v)| (a, b, c, Scalar::real(v.clone()))).collect(),
        };
        serde_json::to_string_pretty(&w).expect("serializable")
    }
}

/// Sparse `[a, b, c, value]` entries with 0-based indices.
#[derive(Serialize, Deserialize)]
struct LieWire {
    schema_version: u32,
    dim: usize,
    f: Vec<(usize, usize, usize, Scalar)>,
}

/// Index tuple where a check fails and the offending value.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub indices: Vec<usize>,
    pub value: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Check {
    fn from_first(w: Option<Witness>) -> Self {
        Check { pass: w.is_none(), witness: w }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LieReport {
    pub antisymmetry: Check,
    pub jacobi: Check,
    pub unimodular: Check,
}

impl LieReport {
    pub fn all_pass(&self) -> bool {
        self.antisymmetry.pass && self.jacobi.pass && self.unimodular.pass
    }
}

fn witness(indices: &[usize], value: Rational) -> Witness {
    Witness { indices: indices.to_vec(), value: format_rational(&value) }
}

fn tuples(dim: usize, k: u32) -> impl Iterator<Item = Vec<usize>> {
    (0..dim.pow(k)).map(move |mut n| {
        let mut t = vec![0; k as usize];
        for slot in t.iter_mut().rev() {
            *slot = n % dim;
            n /= dim;
        }
        t
    })
}

/// Total antisymmetry, Jacobi for `[T_b, T_c] = Σ_a f_{abc} T_a` and `tr ad = 0`, each with
/// the first failing index tuple (in lexicographic order).
pub fn validate(ld: &LieData) -> LieReport {
    let d = ld.dim;
    let antisymmetry = tuples(d, 3).find_map(|t| {
        let (a, b, c) = (t[0], t[1], t[2]);
        let v = ld.get(a, b, c);
        let bad = v != -ld.get(b, a, c) || v != -ld.get(a, c, b);
        bad.then(|| witness(&t, v))
    });
    // ⟨T_d, [[T_a,T_b],T_c] + cyclic⟩
    let jacobi = tuples(d, 4).find_map(|t| {
        let (a, b, c, dd) = (t[0], t[1], t[2], t[3]);
        let j: Rational = (0..d)
            .map(|e| ld.get(e, a, b) * ld.get(dd, e, c) + ld.get(e, b, c) * ld.get(dd, e, a) + ld.get(e, c, a) * ld.get(dd, e, b))
            .sum();
        (!j.is_zero()).then(|| witness(&t, j))
    });
    let unimodular = (0..d).find_map(|j| {
        let tr = ld.trace_ad(j);
        (!tr.is_zero()).then(|| witness(&[j], tr))
    });
    LieReport {
        antisymmetry: Check::from_first(antisymmetry),
        jacobi: Check::from_first(jacobi),
        unimodular: Check::from_first(unimodular),
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct IhxDefect {
    pub max_abs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl IhxDefect {
    pub fn is_zero(&self) -> bool {
        self.witness.is_none()
    }
}

/// `max |v_{abcd}|` with `v_{abcd} = Σ_e f_{abe} f_{cde} − f_{ace} f_{bde} + f_{ade} f_{bce}`, the
/// I, H and X contractions of two vertices; the witness is the first tuple attaining the maximum.
pub fn ihx_defect(ld: &LieData) -> IhxDefect {
    let d = ld.dim;
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for t in tuples(d, 4) {
        let (a, b, c, dd) = (t[0], t[1], t[2], t[3]);
        let v: Rational = (0..d)
            .map(|e| ld.get(a, b, e) * ld.get(c, dd, e) - ld.get(a, c, e) * ld.get(b, dd, e) + ld.get(a, dd, e) * ld.get(b, c, e))
            .sum();
        let v = v.abs();
        if !v.is_zero() && best.as_ref().is_none_or(|(m, _)| v > *m) {
            best = Some((v, t));
        }
    }
    match best {
        None => IhxDefect { max_abs: "0".into(), witness: None },
        Some((m, t)) => IhxDefect { max_abs: format_rational(&m), witness: Some(witness(&t, m)) },
    }
}

/// `Σ_{colorings} Π_v f_{l(h₁) l(h₂) l(h₃)} Π_e δ`, one color per edge. Each vertex reads its
/// half-edges in increasing label order, so relabelings that reorder a vertex change the sign
/// by that permutation's parity.
pub fn graph_color_weight(g: &Graph, ld: &LieData) -> Result<Scalar, LieError> {
    if !g.leaves().is_empty() {
        return Err(LieError::HasLeaves(g.leaves().len()));
    }
    for (v, block) in g.vertices().iter().enumerate() {
        if block.len() != 3 {
            return Err(LieError::NotTrivalent { vertex: v, valence: block.len() });
        }
    }
    let edges = g.edges();
    let mut edge_of = vec![0; g.half_edge_count()];
    for (k, &(a, b)) in edges.iter().enumerate() {
        edge_of[a] = k;
        edge_of[b] = k;
    }
    let mut total = Rational::zero();
    if ld.dim == 0 {
        return Ok(Scalar::zero());
    }
    for colors in tuples(ld.dim, edges.len() as u32) {
        let mut term = Rational::from_integer(1.into());
        for block in g.vertices() {
            term *= ld.get(colors[edge_of[block[0]]], colors[edge_of[block[1]]], colors[edge_of[block[2]]]);
            if term.is_zero() {
                break;
            }
        }
        total += term;
    }
    Ok(Scalar::real(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    #[test]
    fn json_round_trip() {
        let ld = LieData::epsilon();
        assert_eq!(LieData::from_json(&ld.to_json()).unwrap(), ld);
        let bad = r#"{"schema_version": 1, "dim": 2, "f": [[0, 1, 2, "1"]]}"#;
        assert_eq!(LieData::from_json(bad), Err(LieError::IndexOutOfRange(0, 1, 2)));
    }

    #[test]
    fn with_entry_replaces_and_removes() {
        let ld = LieData::epsilon().with_entry(0, 1, 2, int(0)).unwrap();
        assert_eq!(ld.entries().count(), 5);
    }
}
