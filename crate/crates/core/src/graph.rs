//! Undirected simple graphs, used for superstructures.

use crate::instance::VarId;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<VarId>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (VarId, VarId)>) -> Self {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Adds the edge `uv`; self-loops and duplicates are ignored.
    pub fn add_edge(&mut self, u: VarId, v: VarId) {
        if u == v || self.has_edge(u, v) {
            return;
        }
        let pos = self.adj[u].binary_search(&v).unwrap_err();
        self.adj[u].insert(pos, v);
        let pos = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(pos, u);
    }

    pub fn remove_edge(&mut self, u: VarId, v: VarId) {
        if let Ok(p) = self.adj[u].binary_search(&v) {
            self.adj[u].remove(p);
        }
        if let Ok(p) = self.adj[v].binary_search(&u) {
            self.adj[v].remove(p);
        }
    }

    pub fn has_edge(&self, u: VarId, v: VarId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn neighbors(&self, v: VarId) -> &[VarId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VarId) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for (u, nb) in self.adj.iter().enumerate() {
            for &v in nb {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<VarId>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Subgraph induced by `vars`; vertex `i` of the result is `vars[i]`.
    pub fn induced(&self, vars: &[VarId]) -> Graph {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vars.iter().enumerate() {
            local[v] = i;
        }
        let mut g = Graph::new(vars.len());
        for (i, &v) in vars.iter().enumerate() {
            for &w in &self.adj[v] {
                if local[w] != usize::MAX && i < local[w] {
                    g.add_edge(i, local[w]);
                }
            }
        }
        g
    }

    pub fn is_forest(&self) -> bool {
        self.num_edges() + self.components().len() == self.n()
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_and_forest() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]);
        assert_eq!(g.components(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert!(g.is_forest());
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        assert!(!g.is_forest());
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn union_find_detects_cycle() {
        let mut uf = UnionFind::new(3);
        assert!(uf.union(0, 1));
        assert!(uf.union(1, 2));
        assert!(!uf.union(0, 2));
    }
}
