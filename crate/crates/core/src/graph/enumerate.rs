use std::collections::{BTreeMap, BTreeSet};

use super::{canonical_key, Graph, GraphClass, GraphError, HalfEdgeType, BRUTE_FORCE_BOUND};

/// Vertex shapes allowed in typed enumeration, as multisets of half-edge types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSystem {
    pub vertex_signatures: Vec<Vec<HalfEdgeType>>,
}

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    pub max_excess: i64,
    pub degrees: BTreeSet<usize>,
    pub allow_leaves: bool,
    pub max_leaves: usize,
    pub allow_tadpoles: bool,
    pub connected_only: bool,
    /// Needed when some allowed valence is below three; otherwise derived from the excess bound.
    pub max_vertices: Option<usize>,
    pub typed: Option<TypeSystem>,
}

impl EnumerateOptions {
    pub fn new(max_excess: i64, degrees: &[usize]) -> Self {
        EnumerateOptions {
            max_excess,
            degrees: degrees.iter().copied().collect(),
            allow_leaves: false,
            max_leaves: 0,
            allow_tadpoles: true,
            connected_only: false,
            max_vertices: None,
            typed: None,
        }
    }

    pub fn tadpoles(mut self, allow: bool) -> Self {
        self.allow_tadpoles = allow;
        self
    }

    pub fn leaves(mut self, max_leaves: usize) -> Self {
        self.allow_leaves = max_leaves > 0;
        self.max_leaves = max_leaves;
        self
    }

    pub fn connected(mut self, yes: bool) -> Self {
        self.connected_only = yes;
        self
    }

    pub fn vertex_limit(mut self, v: usize) -> Self {
        self.max_vertices = Some(v);
        self
    }

    pub fn typed(mut self, ts: TypeSystem) -> Self {
        self.typed = Some(ts);
        self
    }

    fn leaf_budget(&self) -> usize {
        if self.allow_leaves {
            self.max_leaves
        } else {
            0
        }
    }

    fn vertex_bound(&self, min_valence: usize) -> usize {
        if let Some(v) = self.max_vertices {
            return v;
        }
        assert!(min_valence >= 3, "a vertex limit is required when valences below three are allowed");
        // excess ≥ (V − leaves)/2 for valences ≥ 3
        (2 * self.max_excess.max(0) as usize) + self.leaf_budget()
    }

    fn admits(&self, g: &Graph) -> bool {
        (self.allow_tadpoles || !g.has_tadpole()) && (!self.connected_only || g.is_connected()) && g.excess() <= self.max_excess
    }
}

fn multisets<T: Clone>(items: &[T], size: usize) -> Vec<Vec<T>> {
    fn rec<T: Clone>(items: &[T], start: usize, size: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for k in start..items.len() {
            cur.push(items[k].clone());
            rec(items, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, 0, size, &mut Vec::new(), &mut out);
    out
}

/// All vectors `l` with `l[v] ≤ caps[v]` and `Σ l ≤ budget`.
fn leaf_vectors(caps: &[usize], budget: usize) -> Vec<Vec<usize>> {
    fn rec(caps: &[usize], budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == caps.len() {
            out.push(cur.clone());
            return;
        }
        let cap = caps[cur.len()].min(budget);
        for l in 0..=cap {
            cur.push(l);
            rec(caps, budget - l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(caps, budget, &mut Vec::new(), &mut out);
    out
}

/// Calls `f` on every perfect matching of `items` admitted by `ok`.
fn for_each_matching<F: FnMut(&[(usize, usize)]), P: Fn(usize, usize) -> bool>(items: &[usize], ok: &P, f: &mut F) {
    fn rec<F: FnMut(&[(usize, usize)]), P: Fn(usize, usize) -> bool>(
        rest: &mut Vec<usize>,
        cur: &mut Vec<(usize, usize)>,
        ok: &P,
        f: &mut F,
    ) {
        if rest.is_empty() {
            f(cur);
            return;
        }
        let a = rest.remove(0);
        for k in 0..rest.len() {
            let b = rest[k];
            if !ok(a, b) {
                continue;
            }
            rest.remove(k);
            cur.push((a, b));
            rec(rest, cur, ok, f);
            cur.pop();
            rest.insert(k, b);
        }
        rest.insert(0, a);
    }
    let mut rest = items.to_vec();
    rec(&mut rest, &mut Vec::new(), ok, f);
}

fn finish(found: BTreeMap<Vec<u8>, Graph>) -> Result<Vec<GraphClass>, GraphError> {
    let mut classes = found.into_values().map(GraphClass::from_graph).collect::<Result<Vec<_>, _>>()?;
    classes.sort_by(|a, b| {
        (a.excess, a.representative.vertices().len(), &a.canonical_key).cmp(&(
            b.excess,
            b.representative.vertices().len(),
            &b.canonical_key,
        ))
    });
    Ok(classes)
}

/// Isomorphism classes of nonempty graphs obeying `opts`, generated from perfect matchings.
pub fn enumerate_graphs(opts: &EnumerateOptions) -> Result<Vec<GraphClass>, GraphError> {
    if let Some(ts) = &opts.typed {
        return enumerate_typed(opts, ts);
    }
    let degrees: Vec<usize> = opts.degrees.iter().copied().collect();
    let Some(&min_deg) = degrees.first() else {
        return Ok(Vec::new());
    };
    let vmax = opts.vertex_bound(min_deg);
    let mut found = BTreeMap::new();
    for nv in 1..=vmax {
        for seq in multisets(&degrees, nv) {
            let h: usize = seq.iter().sum();
            for leaves in leaf_vectors(&seq, opts.leaf_budget()) {
                let nl: usize = leaves.iter().sum();
                if (h - nl) % 2 != 0 || ((h - nl) / 2) as i64 - nv as i64 > opts.max_excess {
                    continue;
                }
                if h > BRUTE_FORCE_BOUND {
                    return Err(GraphError::TooLarge(h));
                }
                let mut blocks = Vec::with_capacity(nv);
                let mut leaf_set = Vec::new();
                let mut inner = Vec::new();
                let mut next = 0;
                for (d, l) in seq.iter().zip(&leaves) {
                    let b: Vec<usize> = (next..next + d).collect();
                    leaf_set.extend(&b[..*l]);
                    inner.extend(&b[*l..]);
                    blocks.push(b);
                    next += d;
                }
                let mut err = None;
                for_each_matching(&inner, &|_, _| true, &mut |m| {
                    if err.is_some() {
                        return;
                    }
                    let g = Graph::new(h, blocks.clone(), leaf_set.clone(), m.to_vec(), None).expect("valid by construction");
                    if !opts.admits(&g) {
                        return;
                    }
                    match canonical_key(&g) {
                        Ok(k) => {
                            found.entry(k).or_insert(g);
                        }
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
    }
    finish(found)
}

fn enumerate_typed(opts: &EnumerateOptions, ts: &TypeSystem) -> Result<Vec<GraphClass>, GraphError> {
    let sigs: Vec<Vec<HalfEdgeType>> = ts
        .vertex_signatures
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort();
            s
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let Some(min_val) = sigs.iter().map(Vec::len).min() else {
        return Ok(Vec::new());
    };
    let vmax = opts.vertex_bound(min_val);
    let mut found = BTreeMap::new();
    for nv in 1..=vmax {
        for combo in multisets(&sigs, nv) {
            let h: usize = combo.iter().map(Vec::len).sum();
            if h % 2 != 0 || (h / 2) as i64 - nv as i64 > opts.max_excess {
                continue;
            }
            if h > BRUTE_FORCE_BOUND {
                return Err(GraphError::TooLarge(h));
            }
            let types: Vec<HalfEdgeType> = combo.iter().flatten().copied().collect();
            let ghosts = types.iter().filter(|t| **t == HalfEdgeType::Ghost).count();
            let antighosts = types.iter().filter(|t| **t == HalfEdgeType::Antighost).count();
            if ghosts != antighosts {
                continue;
            }
            let mut blocks = Vec::with_capacity(nv);
            let mut next = 0;
            for s in &combo {
                blocks.push((next..next + s.len()).collect::<Vec<_>>());
                next += s.len();
            }
            let all: Vec<usize> = (0..h).collect();
            let mut err = None;
            for_each_matching(&all, &|a, b| types[a].pairs_with(types[b]), &mut |m| {
                if err.is_some() {
                    return;
                }
                let g = Graph::new(h, blocks.clone(), vec![], m.to_vec(), Some(types.clone())).expect("valid by construction");
                if !opts.admits(&g) {
                    return;
                }
                match canonical_key(&g) {
                    Ok(k) => {
                        found.entry(k).or_insert(g);
                    }
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    finish(found)
}

/// Untyped enumeration through vertex-level multigraph adjacency matrices; an independent
/// generation strategy used to cross-check [`enumerate_graphs`].
pub fn enumerate_by_adjacency(opts: &EnumerateOptions) -> Result<Vec<GraphClass>, GraphError> {
    assert!(opts.typed.is_none(), "adjacency strategy is untyped");
    let degrees: Vec<usize> = opts.degrees.iter().copied().collect();
    let Some(&min_deg) = degrees.first() else {
        return Ok(Vec::new());
    };
    let vmax = opts.vertex_bound(min_deg);
    let mut found = BTreeMap::new();
    for nv in 1..=vmax {
        for seq in multisets(&degrees, nv) {
            let h: usize = seq.iter().sum();
            for leaves in leaf_vectors(&seq, opts.leaf_budget()) {
                let nl: usize = leaves.iter().sum();
                if (h - nl) % 2 != 0 || ((h - nl) / 2) as i64 - nv as i64 > opts.max_excess {
                    continue;
                }
                if h > BRUTE_FORCE_BOUND {
                    return Err(GraphError::TooLarge(h));
                }
                let free: Vec<usize> = seq.iter().zip(&leaves).map(|(d, l)| d - l).collect();
                let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|i| (i..nv).map(move |j| (i, j))).collect();
                let mut mult = vec![0usize; pairs.len()];
                let mut out = Vec::new();
                fill(&pairs, 0, &mut free.clone(), &mut mult, &mut out);
                for m in out {
                    let g = from_adjacency(&seq, &leaves, &pairs, &m);
                    if opts.admits(&g) {
                        found.entry(canonical_key(&g)?).or_insert(g);
                    }
                }
            }
        }
    }
    finish(found)
}

fn fill(pairs: &[(usize, usize)], k: usize, free: &mut Vec<usize>, mult: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == pairs.len() {
        if free.iter().all(|&f| f == 0) {
            out.push(mult.clone());
        }
        return;
    }
    let (i, j) = pairs[k];
    // once all pairs touching vertex i are done its remaining degree must be zero
    let max = if i == j { free[i] / 2 } else { free[i].min(free[j]) };
    for c in 0..=max {
        if i == j {
            free[i] -= 2 * c;
        } else {
            free[i] -= c;
            free[j] -= c;
        }
        mult[k] = c;
        let last_for_i = pairs.get(k + 1).is_none_or(|&(a, _)| a != i);
        if !last_for_i || free[i] == 0 {
            fill(pairs, k + 1, free, mult, out);
        }
        if i == j {
            free[i] += 2 * c;
        } else {
            free[i] += c;
            free[j] += c;
        }
    }
    mult[k] = 0;
}

fn from_adjacency(seq: &[usize], leaves: &[usize], pairs: &[(usize, usize)], mult: &[usize]) -> Graph {
    let mut blocks = Vec::new();
    let mut cursor = Vec::new();
    let mut next = 0;
    let mut leaf_set = Vec::new();
    for (d, l) in seq.iter().zip(leaves) {
        let b: Vec<usize> = (next..next + d).collect();
        leaf_set.extend(&b[..*l]);
        cursor.push(next + l);
        blocks.push(b);
        next += d;
    }
    let mut edges = Vec::new();
    for (&(i, j), &c) in pairs.iter().zip(mult) {
        for _ in 0..c {
            let a = cursor[i];
            cursor[i] += 1;
            let b = cursor[j];
            cursor[j] += 1;
            edges.push((a, b));
        }
    }
    Graph::new(next, blocks, leaf_set, edges, None).expect("valid by construction")
}
