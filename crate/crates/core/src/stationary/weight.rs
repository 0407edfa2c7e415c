use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::StationaryError;
use crate::exact::{RMatrix, Scalar, SymTensor};
use crate::graph::{Graph, HalfEdgeType};

/// Coefficient ring for Feynman weights. Elements must commute with each other.
pub trait WeightRing: Clone {
    fn ring_add(&self, o: &Self) -> Self;
    fn ring_mul(&self, o: &Self) -> Self;
    fn ring_scale(&self, s: &Scalar) -> Self;
    fn ring_is_zero(&self) -> bool;
}

impl WeightRing for Scalar {
    fn ring_add(&self, o: &Self) -> Self {
        self + o
    }
    fn ring_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn ring_scale(&self, s: &Scalar) -> Self {
        self * s
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero()
    }
}

/// Nonzero entries of a vertex tensor. Each key lists indices aligned with the vertex
/// signature (half-edge types sorted), nondecreasing inside every run of equal types;
/// the tensor must be symmetric within such runs.
pub type VertexEntries<R> = Vec<(Vec<usize>, R)>;

/// Data a Feynman weight is evaluated against.
pub trait FeynmanRules<R: WeightRing> {
    /// Unit of the ring.
    fn one(&self) -> R;
    /// Entries for a vertex with the given sorted type signature; `None` if the shape has no rule.
    fn vertex(&self, signature: &[HalfEdgeType]) -> Option<&VertexEntries<R>>;
    /// Edge factor between index `i` on a half-edge of type `a` and index `j` on type `b`.
    fn propagator(&self, a: HalfEdgeType, i: usize, b: HalfEdgeType, j: usize) -> Scalar;
    /// Number of index values a half-edge of type `t` ranges over.
    fn range(&self, t: HalfEdgeType) -> usize;
    /// Value of leaf number `leaf` (position in `Graph::leaves`) at index `i`.
    fn leaf(&self, leaf: usize, t: HalfEdgeType, i: usize) -> Option<R>;
}

struct Eval<'a, R: WeightRing, F: FeynmanRules<R>> {
    g: &'a Graph,
    rules: &'a F,
    /// half-edges of each vertex, sorted by type
    slots: Vec<Vec<usize>>,
    entries: Vec<&'a VertexEntries<R>>,
    leaf_pos: Vec<Option<usize>>,
    idx: Vec<usize>,
    total: Option<R>,
}

/// Distinct orderings of a nondecreasing list.
fn distinct_perms(sorted: &[usize]) -> Vec<Vec<usize>> {
    fn rec(counts: &mut BTreeMap<usize, usize>, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let keys: Vec<usize> = counts.iter().filter(|(_, c)| **c > 0).map(|(k, _)| *k).collect();
        for k in keys {
            *counts.get_mut(&k).unwrap() -= 1;
            cur.push(k);
            rec(counts, len, cur, out);
            cur.pop();
            *counts.get_mut(&k).unwrap() += 1;
        }
    }
    let mut counts = BTreeMap::new();
    for &i in sorted {
        *counts.entry(i).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    rec(&mut counts, sorted.len(), &mut Vec::new(), &mut out);
    out
}

impl<R: WeightRing, F: FeynmanRules<R>> Eval<'_, R, F> {
    fn run(&mut self, v: usize, acc: R) {
        if v == self.slots.len() {
            self.total = Some(match self.total.take() {
                None => acc,
                Some(t) => t.ring_add(&acc),
            });
            return;
        }
        let slots = self.slots[v].clone();
        let types: Vec<HalfEdgeType> = slots.iter().map(|&h| self.g.type_of(h)).collect();
        // runs of equal type inside the slot list
        let mut runs = Vec::new();
        let mut start = 0;
        for k in 1..=types.len() {
            if k == types.len() || types[k] != types[start] {
                runs.push(start..k);
                start = k;
            }
        }
        for (key, value) in self.entries[v].iter() {
            let per_run: Vec<Vec<Vec<usize>>> = runs.iter().map(|r| distinct_perms(&key[r.clone()])).collect();
            let mut choice = vec![0usize; runs.len()];
            loop {
                for (r, run) in runs.iter().enumerate() {
                    for (off, pos) in run.clone().enumerate() {
                        self.idx[slots[pos]] = per_run[r][choice[r]][off];
                    }
                }
                if let Some(factor) = self.local_factor(v, &slots) {
                    let next = acc.ring_mul(value).ring_mul(&factor);
                    if !next.ring_is_zero() {
                        self.run(v + 1, next);
                    }
                }
                // odometer over the per-run arrangements
                let mut r = 0;
                while r < runs.len() {
                    choice[r] += 1;
                    if choice[r] < per_run[r].len() {
                        break;
                    }
                    choice[r] = 0;
                    r += 1;
                }
                if r == runs.len() {
                    break;
                }
            }
        }
    }

    /// Edge factors closing at vertex `v` and its leaf values.
    fn local_factor(&self, v: usize, slots: &[usize]) -> Option<R> {
        let mut edge = Scalar::one();
        let mut leaves = self.rules.one();
        for &h in slots {
            match self.g.partner(h) {
                Some(p) => {
                    let pv = self.g.vertex_of(p);
                    // count each edge once, when its later endpoint is placed
                    if pv < v || (pv == v && p < h) {
                        edge = &edge
                            * &self.rules.propagator(self.g.type_of(p), self.idx[p], self.g.type_of(h), self.idx[h]);
                        if edge.is_zero() {
                            return None;
                        }
                    }
                }
                None => {
                    let lv = self.rules.leaf(self.leaf_pos[h].expect("leaf"), self.g.type_of(h), self.idx[h])?;
                    leaves = leaves.ring_mul(&lv);
                }
            }
        }
        Some(leaves.ring_scale(&edge))
    }
}

/// `Σ_{l: H → indices} Π_v P_v · Π_e K · Π_leaves value` for arbitrary rules and coefficient ring.
pub fn feynman_weight_with<R: WeightRing, F: FeynmanRules<R>>(g: &Graph, rules: &F) -> Result<R, StationaryError> {
    let mut slots = Vec::new();
    let mut entries = Vec::new();
    for (v, block) in g.vertices().iter().enumerate() {
        let mut s = block.clone();
        s.sort_by_key(|&h| (g.type_of(h), h));
        let sig: Vec<HalfEdgeType> = s.iter().map(|&h| g.type_of(h)).collect();
        let e = rules.vertex(&sig).ok_or(StationaryError::MissingTensor { vertex: v, valence: sig.len() })?;
        slots.push(s);
        entries.push(e);
    }
    let mut leaf_pos = vec![None; g.half_edge_count()];
    for (k, &h) in g.leaves().iter().enumerate() {
        leaf_pos[h] = Some(k);
        for i in 0..rules.range(g.type_of(h)) {
            if rules.leaf(k, g.type_of(h), i).is_none() {
                return Err(StationaryError::MissingLeafValues);
            }
        }
    }
    let mut ev = Eval { g, rules, slots, entries, leaf_pos, idx: vec![0; g.half_edge_count()], total: None };
    ev.run(0, rules.one());
    Ok(ev.total.unwrap_or_else(|| rules.one().ring_scale(&Scalar::zero())))
}

/// Rules for untyped graphs: symmetric interaction tensors, one propagator, leaf vectors.
pub struct TensorRules {
    dim: usize,
    by_valence: BTreeMap<usize, VertexEntries<Scalar>>,
    propagator: RMatrix,
    leaf_values: Vec<Vec<Scalar>>,
}

impl TensorRules {
    /// `leaf_values` holds one vector per leaf, or a single vector shared by every leaf.
    pub fn new(interactions: &[SymTensor], propagator: RMatrix, leaf_values: Vec<Vec<Scalar>>) -> Self {
        let mut by_valence = BTreeMap::new();
        for t in interactions {
            by_valence.insert(t.rank(), t.entries().map(|(k, v)| (k.clone(), v.clone())).collect());
        }
        TensorRules { dim: propagator.rows(), by_valence, propagator, leaf_values }
    }
}

impl FeynmanRules<Scalar> for TensorRules {
    fn one(&self) -> Scalar {
        Scalar::one()
    }

    fn vertex(&self, signature: &[HalfEdgeType]) -> Option<&VertexEntries<Scalar>> {
        self.by_valence.get(&signature.len())
    }

    fn propagator(&self, _: HalfEdgeType, i: usize, _: HalfEdgeType, j: usize) -> Scalar {
        Scalar::real(self.propagator[(i, j)].clone())
    }

    fn range(&self, _: HalfEdgeType) -> usize {
        self.dim
    }

    fn leaf(&self, leaf: usize, _: HalfEdgeType, i: usize) -> Option<Scalar> {
        let v = if self.leaf_values.len() == 1 { &self.leaf_values[0] } else { self.leaf_values.get(leaf)? };
        v.get(i).cloned()
    }
}

/// Feynman weight of an untyped graph with symmetric tensors `interactions`, propagator `k`.
pub fn feynman_weight(
    g: &Graph,
    interactions: &[SymTensor],
    k: &RMatrix,
    leaf_values: Option<&[Vec<Scalar>]>,
) -> Result<Scalar, StationaryError> {
    if !g.leaves().is_empty() {
        match leaf_values {
            Some(v) if v.len() == 1 || v.len() == g.leaves().len() => {}
            _ => return Err(StationaryError::MissingLeafValues),
        }
    }
    let rules = TensorRules::new(interactions, k.clone(), leaf_values.map(<[_]>::to_vec).unwrap_or_default());
    feynman_weight_with(g, &rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn single(rank: usize, v: i64) -> SymTensor {
        let mut t = SymTensor::zero(rank, 1);
        t.set(&vec![0; rank], Scalar::from_int(v));
        t
    }

    #[test]
    fn one_dimensional_weights() {
        let k = RMatrix::identity(1);
        let w = feynman_weight(&Graph::figure_eight(), &[single(4, 6)], &k, None).unwrap();
        assert_eq!(w, Scalar::from_int(6));
        let w = feynman_weight(&Graph::theta(), &[single(3, 5)], &k, None).unwrap();
        assert_eq!(w, Scalar::from_int(25));
        let w = feynman_weight(&Graph::theta(), &[single(3, 5)], &RMatrix::zeros(1, 1), None).unwrap();
        assert!(w.is_zero());
    }

    #[test]
    fn missing_data_is_reported() {
        let k = RMatrix::identity(1);
        assert!(matches!(
            feynman_weight(&Graph::theta(), &[single(4, 1)], &k, None),
            Err(StationaryError::MissingTensor { .. })
        ));
        assert_eq!(
            feynman_weight(&Graph::double_edge_with_leaves(), &[single(3, 1)], &k, None),
            Err(StationaryError::MissingLeafValues)
        );
        let leaf = vec![vec![Scalar::from_int(2)]];
        let w = feynman_weight(&Graph::double_edge_with_leaves(), &[single(3, 1)], &k, Some(&leaf)).unwrap();
        assert_eq!(w, Scalar::from_int(4));
    }

    #[test]
    fn two_dimensional_sum_over_index_maps() {
        // all-ones tensor, identity propagator: each edge picks its index freely
        let mut t = SymTensor::zero(3, 2);
        for idx in [[0, 0, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1]] {
            t.set(&idx, Scalar::one());
        }
        let w = feynman_weight(&Graph::theta(), &[t], &RMatrix::identity(2), None).unwrap();
        assert_eq!(w, Scalar::real(int(8)));
    }
}
