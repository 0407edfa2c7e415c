//! Half-edge graphs: validation, automorphism counting, canonical keys and enumeration.

mod aut;
mod canon;
mod enumerate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aut::aut_order;
pub use canon::canonical_key;
pub use enumerate::{enumerate_graphs, enumerate_by_adjacency, EnumerateOptions, TypeSystem};

/// Largest half-edge count handled by the exhaustive backends.
pub const BRUTE_FORCE_BOUND: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfEdgeType {
    Field,
    Lagrange,
    Ghost,
    Antighost,
}

impl HalfEdgeType {
    pub fn code(self) -> u8 {
        match self {
            HalfEdgeType::Field => 1,
            HalfEdgeType::Lagrange => 2,
            HalfEdgeType::Ghost => 3,
            HalfEdgeType::Antighost => 4,
        }
    }

    /// Whether an edge may join half-edges of these two types.
    pub fn pairs_with(self, other: HalfEdgeType) -> bool {
        use HalfEdgeType::*;
        match (self, other) {
            (Ghost, Antighost) | (Antighost, Ghost) => true,
            (Ghost, _) | (_, Ghost) | (Antighost, _) | (_, Antighost) => false,
            (Lagrange, Lagrange) => false,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex blocks do not partition the half-edges: {0}")]
    BadPartition(String),
    #[error("edges do not form a perfect matching of the non-leaf half-edges: {0}")]
    BadMatching(String),
    #[error("half-edge type map does not cover every half-edge")]
    BadTypes,
    #[error("edge ({0}, {1}) joins incompatible half-edge types")]
    InadmissibleEdge(usize, usize),
    #[error("graph has {0} half-edges, above the exhaustive bound {BRUTE_FORCE_BOUND}")]
    TooLarge(usize),
}

/// Feynman graph on half-edges `0..half_edges`.
///
/// Stored in a normal form (sorted blocks, sorted edges), so derived equality ignores input order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    half_edges: usize,
    vertices: Vec<Vec<usize>>,
    leaves: Vec<usize>,
    edges: Vec<(usize, usize)>,
    types: Option<Vec<HalfEdgeType>>,
    vertex_of: Vec<usize>,
    partner: Vec<Option<usize>>,
}

impl Graph {
    pub fn new(
        half_edges: usize,
        mut vertices: Vec<Vec<usize>>,
        mut leaves: Vec<usize>,
        edges: Vec<(usize, usize)>,
        types: Option<Vec<HalfEdgeType>>,
    ) -> Result<Self, GraphError> {
        let mut vertex_of = vec![usize::MAX; half_edges];
        for b in vertices.iter_mut() {
            if b.is_empty() {
                return Err(GraphError::BadPartition("empty vertex block".into()));
            }
            b.sort_unstable();
        }
        vertices.sort();
        for (v, b) in vertices.iter().enumerate() {
            for &h in b {
                if h >= half_edges {
                    return Err(GraphError::BadPartition(format!("half-edge {h} out of range")));
                }
                if vertex_of[h] != usize::MAX {
                    return Err(GraphError::BadPartition(format!("half-edge {h} in two blocks")));
                }
                vertex_of[h] = v;
            }
        }
        if let Some(h) = vertex_of.iter().position(|&v| v == usize::MAX) {
            return Err(GraphError::BadPartition(format!("half-edge {h} in no block")));
        }
        leaves.sort_unstable();
        leaves.dedup();
        let mut partner = vec![None; half_edges];
        let mut covered = vec![false; half_edges];
        for &l in &leaves {
            if l >= half_edges {
                return Err(GraphError::BadMatching(format!("leaf {l} out of range")));
            }
            covered[l] = true;
        }
        let mut norm_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= half_edges || b >= half_edges || a == b {
                return Err(GraphError::BadMatching(format!("bad edge ({a}, {b})")));
            }
            if covered[a] || covered[b] {
                return Err(GraphError::BadMatching(format!("half-edge reused in edge ({a}, {b})")));
            }
            covered[a] = true;
            covered[b] = true;
            partner[a] = Some(b);
            partner[b] = Some(a);
            norm_edges.push((a.min(b), a.max(b)));
        }
        if let Some(h) = covered.iter().position(|c| !c) {
            return Err(GraphError::BadMatching(format!("half-edge {h} is neither a leaf nor matched")));
        }
        norm_edges.sort_unstable();
        if let Some(t) = &types {
            if t.len() != half_edges {
                return Err(GraphError::BadTypes);
            }
            for &(a, b) in &norm_edges {
                if !t[a].pairs_with(t[b]) {
                    return Err(GraphError::InadmissibleEdge(a, b));
                }
            }
        }
        Ok(Graph { half_edges, vertices, leaves, edges: norm_edges, types, vertex_of, partner })
    }

    pub fn empty() -> Self {
        Graph::new(0, vec![], vec![], vec![], None).expect("empty graph is valid")
    }

    /// Relabel half-edges by `perm[h]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let vertices = self.vertices.iter().map(|b| b.iter().map(|&h| perm[h]).collect()).collect();
        let leaves = self.leaves.iter().map(|&h| perm[h]).collect();
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let types = self.types.as_ref().map(|t| {
            let mut out = t.clone();
            for (h, &ty) in t.iter().enumerate() {
                out[perm[h]] = ty;
            }
            out
        });
        Graph::new(self.half_edges, vertices, leaves, edges, types).expect("relabeling preserves validity")
    }

    pub fn half_edge_count(&self) -> usize {
        self.half_edges
    }

    pub fn vertices(&self) -> &[Vec<usize>] {
        &self.vertices
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn types(&self) -> Option<&[HalfEdgeType]> {
        self.types.as_deref()
    }

    pub fn type_of(&self, h: usize) -> HalfEdgeType {
        self.types.as_ref().map(|t| t[h]).unwrap_or(HalfEdgeType::Field)
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    pub fn partner(&self, h: usize) -> Option<usize> {
        self.partner[h]
    }

    pub fn is_leaf(&self, h: usize) -> bool {
        self.partner[h].is_none()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertices[v].len()
    }

    /// `|E| − |V|`.
    pub fn excess(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64
    }

    pub fn components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nxt = p[y];
                p[y] = r;
                y = nxt;
            }
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, self.vertex_of[a]), find(&mut parent, self.vertex_of[b]));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..n).filter(|&v| find(&mut parent, v) == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.components() <= 1
    }

    /// `|E| − |V| + components`.
    pub fn loop_count(&self) -> i64 {
        self.excess() + self.components() as i64
    }

    /// Whether some edge joins a vertex to itself.
    pub fn has_tadpole(&self) -> bool {
        self.edges.iter().any(|&(a, b)| self.vertex_of[a] == self.vertex_of[b])
    }

    /// Connected components as separate graphs, half-edges renumbered from zero.
    pub fn split_components(&self) -> Vec<Graph> {
        let mut comp_of_vertex = vec![usize::MAX; self.vertices.len()];
        let mut next = 0;
        for start in 0..self.vertices.len() {
            if comp_of_vertex[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp_of_vertex[start] = next;
            while let Some(v) = stack.pop() {
                for &h in &self.vertices[v] {
                    if let Some(p) = self.partner[h] {
                        let w = self.vertex_of[p];
                        if comp_of_vertex[w] == usize::MAX {
                            comp_of_vertex[w] = next;
                            stack.push(w);
                        }
                    }
                }
            }
            next += 1;
        }
        (0..next)
            .map(|c| {
                let hs: Vec<usize> = (0..self.half_edges).filter(|&h| comp_of_vertex[self.vertex_of[h]] == c).collect();
                let mut map = vec![usize::MAX; self.half_edges];
                for (k, &h) in hs.iter().enumerate() {
                    map[h] = k;
                }
                let vertices = self
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(v, _)| comp_of_vertex[*v] == c)
                    .map(|(_, b)| b.iter().map(|&h| map[h]).collect())
                    .collect();
                let leaves = self.leaves.iter().filter(|&&h| map[h] != usize::MAX).map(|&h| map[h]).collect();
                let edges = self.edges.iter().filter(|&&(a, _)| map[a] != usize::MAX).map(|&(a, b)| (map[a], map[b])).collect();
                let types = self.types.as_ref().map(|t| hs.iter().map(|&h| t[h]).collect());
                Graph::new(hs.len(), vertices, leaves, edges, types).expect("component is a valid graph")
            })
            .collect()
    }

    /// Disjoint union, `other`'s half-edges shifted after `self`'s.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.half_edges;
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().map(|b| b.iter().map(|h| h + off).collect()));
        let mut leaves = self.leaves.clone();
        leaves.extend(other.leaves.iter().map(|h| h + off));
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (a + off, b + off)));
        let types = match (&self.types, &other.types) {
            (None, None) => None,
            _ => {
                let mut t: Vec<HalfEdgeType> = (0..self.half_edges).map(|h| self.type_of(h)).collect();
                t.extend((0..other.half_edges).map(|h| other.type_of(h)));
                Some(t)
            }
        };
        Graph::new(off + other.half_edges, vertices, leaves, edges, types).expect("union is valid")
    }

    /// The theta graph: two trivalent vertices joined by three edges.
    pub fn theta() -> Self {
        Graph::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]], vec![], vec![(0, 3), (1, 4), (2, 5)], None).unwrap()
    }

    /// Two self-loops joined by a bridge.
    pub fn dumbbell() -> Self {
        Graph::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]], vec![], vec![(0, 1), (2, 3), (4, 5)], None).unwrap()
    }

    /// One four-valent vertex with two self-loops.
    pub fn figure_eight() -> Self {
        Graph::new(4, vec![vec![0, 1, 2, 3]], vec![], vec![(0, 1), (2, 3)], None).unwrap()
    }

    /// Two trivalent vertices with a double edge and one leaf each.
    pub fn double_edge_with_leaves() -> Self {
        Graph::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]], vec![2, 5], vec![(0, 3), (1, 4)], None).unwrap()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(H={}, V={:?}, L={:?}, E={:?}", self.half_edges, self.vertices, self.leaves, self.edges)?;
        if let Some(t) = &self.types {
            write!(f, ", T={t:?}")?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    half_edges: usize,
    vertices: Vec<Vec<usize>>,
    #[serde(default)]
    leaves: Vec<usize>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    types: Option<BTreeMap<String, HalfEdgeType>>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphWire {
            half_edges: self.half_edges,
            vertices: self.vertices.clone(),
            leaves: self.leaves.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            types: self.types.as_ref().map(|t| t.iter().enumerate().map(|(h, ty)| (h.to_string(), *ty)).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = GraphWire::deserialize(d)?;
        let types = match w.types {
            None => None,
            Some(m) => {
                let mut t = vec![None; w.half_edges];
                for (k, ty) in m {
                    let h: usize = k.parse().map_err(|_| serde::de::Error::custom(format!("bad half-edge key {k:?}")))?;
                    if h >= w.half_edges {
                        return Err(serde::de::Error::custom(format!("type for unknown half-edge {h}")));
                    }
                    t[h] = Some(ty);
                }
                Some(t.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| serde::de::Error::custom("types do not cover every half-edge"))?)
            }
        };
        Graph::new(w.half_edges, w.vertices, w.leaves, w.edges.into_iter().map(|[a, b]| (a, b)).collect(), types)
            .map_err(serde::de::Error::custom)
    }
}

/// Isomorphism class with cached invariants.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GraphClass {
    #[serde(with = "hex_bytes")]
    pub canonical_key: Vec<u8>,
    pub representative: Graph,
    pub aut_order: u64,
    pub excess: i64,
    pub loop_count: i64,
}

impl GraphClass {
    pub fn from_graph(g: Graph) -> Result<Self, GraphError> {
        Ok(GraphClass {
            canonical_key: canonical_key(&g)?,
            aut_order: aut_order(&g)?,
            excess: g.excess(),
            loop_count: g.loop_count(),
            representative: g,
        })
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&b.iter().map(|x| format!("{x:02x}")).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let t = String::deserialize(d)?;
        if t.len() % 2 != 0 {
            return Err(serde::de::Error::custom("odd-length hex"));
        }
        (0..t.len())
            .step_by(2)
            .map(|k| u8::from_str_radix(&t[k..k + 2], 16).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_input() {
        assert!(matches!(Graph::new(2, vec![vec![0]], vec![], vec![], None), Err(GraphError::BadPartition(_))));
        assert!(matches!(Graph::new(2, vec![vec![0, 1]], vec![], vec![], None), Err(GraphError::BadMatching(_))));
        let t = Some(vec![HalfEdgeType::Ghost, HalfEdgeType::Ghost]);
        assert_eq!(Graph::new(2, vec![vec![0, 1]], vec![], vec![(0, 1)], t), Err(GraphError::InadmissibleEdge(0, 1)));
        let t = Some(vec![HalfEdgeType::Lagrange, HalfEdgeType::Lagrange]);
        assert_eq!(Graph::new(2, vec![vec![0], vec![1]], vec![], vec![(0, 1)], t), Err(GraphError::InadmissibleEdge(0, 1)));
    }

    #[test]
    fn loop_count_is_excess_plus_components() {
        for g in [Graph::theta(), Graph::dumbbell(), Graph::figure_eight(), Graph::double_edge_with_leaves()] {
            assert_eq!(g.loop_count(), g.excess() + g.components() as i64);
        }
        let two = Graph::theta().disjoint_union(&Graph::figure_eight());
        assert_eq!(two.components(), 2);
        assert_eq!(two.loop_count(), 4);
        assert_eq!(two.split_components().len(), 2);
    }

    #[test]
    fn json_equality_is_order_insensitive() {
        let a: Graph = serde_json::from_str(r#"{"half_edges":6,"vertices":[[5,4,3],[0,1,2]],"edges":[[3,0],[1,4],[5,2]]}"#).unwrap();
        assert_eq!(a, Graph::theta());
        let text = serde_json::to_string(&a).unwrap();
        let b: Graph = serde_json::from_str(&text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn typed_json_round_trip() {
        use HalfEdgeType::*;
        let g = Graph::new(2, vec![vec![0, 1]], vec![], vec![(0, 1)], Some(vec![Ghost, Antighost])).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("antighost"));
        assert_eq!(serde_json::from_str::<Graph>(&text).unwrap(), g);
    }
}
