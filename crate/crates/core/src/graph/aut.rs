use super::{Graph, GraphError, BRUTE_FORCE_BOUND};

fn signature(g: &Graph, h: usize) -> (usize, bool, u8, bool) {
    let self_loop = g.partner(h).is_some_and(|p| g.vertex_of(p) == g.vertex_of(h));
    (g.degree(g.vertex_of(h)), g.is_leaf(h), g.type_of(h).code(), self_loop)
}

struct Search<'a> {
    g: &'a Graph,
    order: Vec<usize>,
    sig: Vec<(usize, bool, u8, bool)>,
    image: Vec<Option<usize>>,
    preimage: Vec<Option<usize>>,
    vmap: Vec<Option<usize>>,
    vused: Vec<bool>,
    count: u64,
}

impl Search<'_> {
    fn run(&mut self, pos: usize) {
        if pos == self.order.len() {
            self.count += 1;
            return;
        }
        let h = self.order[pos];
        let v = self.g.vertex_of(h);
        for t in 0..self.g.half_edge_count() {
            if self.preimage[t].is_some() || self.sig[t] != self.sig[h] {
                continue;
            }
            let w = self.g.vertex_of(t);
            let fresh_vertex = match self.vmap[v] {
                Some(m) if m != w => continue,
                Some(_) => false,
                None => {
                    if self.vused[w] {
                        continue;
                    }
                    true
                }
            };
            // matching compatibility in both directions
            if let Some(p) = self.g.partner(h) {
                if let Some(ip) = self.image[p] {
                    if self.g.partner(t) != Some(ip) {
                        continue;
                    }
                }
            }
            if let Some(pt) = self.g.partner(t) {
                if let Some(q) = self.preimage[pt] {
                    if self.g.partner(h) != Some(q) {
                        continue;
                    }
                }
            }
            self.image[h] = Some(t);
            self.preimage[t] = Some(h);
            if fresh_vertex {
                self.vmap[v] = Some(w);
                self.vused[w] = true;
            }
            self.run(pos + 1);
            if fresh_vertex {
                self.vmap[v] = None;
                self.vused[w] = false;
            }
            self.image[h] = None;
            self.preimage[t] = None;
        }
    }
}

/// Order of the group of half-edge permutations preserving vertices, edges, leaves and types.
pub fn aut_order(g: &Graph) -> Result<u64, GraphError> {
    let n = g.half_edge_count();
    if n > BRUTE_FORCE_BOUND {
        return Err(GraphError::TooLarge(n));
    }
    let order: Vec<usize> = g.vertices().iter().flatten().copied().collect();
    let mut s = Search {
        g,
        order,
        sig: (0..n).map(|h| signature(g, h)).collect(),
        image: vec![None; n],
        preimage: vec![None; n],
        vmap: vec![None; g.vertices().len()],
        vused: vec![false; g.vertices().len()],
        count: 0,
    };
    s.run(0);
    Ok(s.count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_orders() {
        assert_eq!(aut_order(&Graph::theta()).unwrap(), 12);
        assert_eq!(aut_order(&Graph::double_edge_with_leaves()).unwrap(), 4);
        assert_eq!(aut_order(&Graph::figure_eight()).unwrap(), 8);
        assert_eq!(aut_order(&Graph::dumbbell()).unwrap(), 8);
        assert_eq!(aut_order(&Graph::empty()).unwrap(), 1);
    }

    #[test]
    fn too_large_is_reported() {
        let n = 18;
        let g = Graph::new(n, vec![(0..n).collect()], vec![], (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect(), None).unwrap();
        assert_eq!(aut_order(&g), Err(GraphError::TooLarge(18)));
    }
}
