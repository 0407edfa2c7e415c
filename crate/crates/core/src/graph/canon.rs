use std::cmp::Ordering;

use super::{Graph, GraphError, BRUTE_FORCE_BOUND};

// Key layout: [|V|, sorted degrees..., then per labelled half-edge (type, link)],
// link = 0 for a leaf, 1 if the partner is labelled later, 2 + partner label otherwise.
// Half-edges are labelled vertex by vertex in nondecreasing degree order; the key is the
// lexicographic minimum over all such labellings.

struct Canon<'a> {
    g: &'a Graph,
    degrees: Vec<usize>,
    label: Vec<Option<u8>>,
    vertex_done: Vec<bool>,
    code: Vec<u8>,
    best: Option<Vec<u8>>,
}

impl Canon<'_> {
    fn prefix_cmp(&self) -> Ordering {
        match &self.best {
            None => Ordering::Less,
            Some(b) => self.code.as_slice().cmp(&b[..self.code.len()]),
        }
    }

    fn next_vertex(&mut self, slot: usize) {
        if slot == self.degrees.len() {
            if self.prefix_cmp() == Ordering::Less {
                self.best = Some(self.code.clone());
            }
            return;
        }
        for v in 0..self.g.vertices().len() {
            if self.vertex_done[v] || self.g.degree(v) != self.degrees[slot] {
                continue;
            }
            self.vertex_done[v] = true;
            let remaining = self.g.vertices()[v].clone();
            self.place(slot, remaining);
            self.vertex_done[v] = false;
        }
    }

    fn place(&mut self, slot: usize, remaining: Vec<usize>) {
        if remaining.is_empty() {
            self.next_vertex(slot + 1);
            return;
        }
        let pos = self.code.len();
        let next_label = ((pos - 1 - self.degrees.len()) / 2) as u8;
        let mut tried: Vec<(u8, u8)> = Vec::new();
        for k in 0..remaining.len() {
            let h = remaining[k];
            let link = match self.g.partner(h) {
                None => 0,
                Some(p) => match self.label[p] {
                    Some(lp) => 2 + lp,
                    None => 1,
                },
            };
            let sym = (self.g.type_of(h).code(), link);
            // leaves of one vertex with equal type are interchangeable
            if link == 0 && tried.contains(&sym) {
                continue;
            }
            tried.push(sym);
            self.code.push(sym.0);
            self.code.push(sym.1);
            if self.prefix_cmp() != Ordering::Greater {
                self.label[h] = Some(next_label);
                let mut rest = remaining.clone();
                rest.remove(k);
                self.place(slot, rest);
                self.label[h] = None;
            }
            self.code.pop();
            self.code.pop();
        }
    }
}

/// Canonical byte key: equal keys exactly for isomorphic graphs (types and leaves included).
pub fn canonical_key(g: &Graph) -> Result<Vec<u8>, GraphError> {
    let n = g.half_edge_count();
    if n > BRUTE_FORCE_BOUND {
        return Err(GraphError::TooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut degrees: Vec<usize> = (0..g.vertices().len()).map(|v| g.degree(v)).collect();
    degrees.sort_unstable();
    let mut code = vec![degrees.len() as u8];
    code.extend(degrees.iter().map(|&d| d as u8));
    let mut c = Canon {
        g,
        degrees,
        label: vec![None; n],
        vertex_done: vec![false; g.vertices().len()],
        code,
        best: None,
    };
    c.next_vertex(0);
    Ok(c.best.expect("at least one labelling exists"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabelled_theta_has_same_key() {
        let g = Graph::theta();
        let h = g.relabel(&[4, 0, 5, 2, 1, 3]);
        assert_eq!(canonical_key(&g).unwrap(), canonical_key(&h).unwrap());
    }

    #[test]
    fn theta_and_dumbbell_differ() {
        assert_ne!(canonical_key(&Graph::theta()).unwrap(), canonical_key(&Graph::dumbbell()).unwrap());
    }

    #[test]
    fn empty_graph_has_empty_key() {
        assert!(canonical_key(&Graph::empty()).unwrap().is_empty());
    }
}
