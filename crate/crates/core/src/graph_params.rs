//! Spanning forests, (local) feedback edge numbers and nice tree decompositions.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::instance::VarId;

/// A spanning forest of a graph together with its non-tree edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningForest {
    n: usize,
    tree_edges: Vec<(VarId, VarId)>,
    feedback: Vec<(VarId, VarId)>,
}

fn norm(e: (VarId, VarId)) -> (VarId, VarId) {
    (e.0.min(e.1), e.0.max(e.1))
}

impl SpanningForest {
    /// Checks that `tree_edges` is a spanning forest of `g`.
    pub fn new(g: &Graph, tree_edges: impl IntoIterator<Item = (VarId, VarId)>) -> Result<Self> {
        let mut edges: Vec<_> = tree_edges.into_iter().map(norm).collect();
        edges.sort_unstable();
        edges.dedup();
        let mut uf = UnionFind::new(g.n());
        for &(u, v) in &edges {
            if u >= g.n() || v >= g.n() || !g.has_edge(u, v) {
                return Err(Error::Invalid(format!("tree edge {u}-{v} is not a graph edge")));
            }
            if !uf.union(u, v) {
                return Err(Error::Invalid("tree edges contain a cycle".into()));
            }
        }
        if edges.len() + g.components().len() != g.n() {
            return Err(Error::Invalid("tree does not span every component".into()));
        }
        let feedback = g
            .edges()
            .into_iter()
            .filter(|e| edges.binary_search(e).is_err())
            .collect();
        Ok(SpanningForest {
            n: g.n(),
            tree_edges: edges,
            feedback,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tree_edges(&self) -> &[(VarId, VarId)] {
        &self.tree_edges
    }

    /// Non-tree edges E_F.
    pub fn feedback_edges(&self) -> &[(VarId, VarId)] {
        &self.feedback
    }

    pub fn tree_graph(&self) -> Graph {
        Graph::from_edges(self.n, self.tree_edges.iter().copied())
    }

    /// Roots every tree at its smallest vertex.
    pub fn rooted(&self) -> RootedForest {
        RootedForest::new(&self.tree_graph())
    }
}

/// Parent pointers and a preorder of a forest.
#[derive(Clone, Debug)]
pub struct RootedForest {
    pub parent: Vec<Option<VarId>>,
    pub children: Vec<Vec<VarId>>,
    pub depth: Vec<usize>,
    /// Preorder; every vertex appears after its parent.
    pub order: Vec<VarId>,
    pub roots: Vec<VarId>,
}

impl RootedForest {
    pub fn new(tree: &Graph) -> Self {
        let n = tree.n();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut roots = Vec::new();
        for r in 0..n {
            if seen[r] {
                continue;
            }
            roots.push(r);
            seen[r] = true;
            let mut stack = vec![r];
            while let Some(u) = stack.pop() {
                order.push(u);
                for &w in tree.neighbors(u).iter().rev() {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(u);
                        depth[w] = depth[u] + 1;
                        children[u].push(w);
                        stack.push(w);
                    }
                }
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        RootedForest {
            parent,
            children,
            depth,
            order,
            roots,
        }
    }

    /// Vertices on the tree path between `u` and `w`, inclusive.
    pub fn path(&self, mut u: VarId, mut w: VarId) -> Vec<VarId> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        while u != w {
            if self.depth[u] >= self.depth[w] {
                left.push(u);
                u = self.parent[u].expect("vertices share a tree");
            } else {
                right.push(w);
                w = self.parent[w].expect("vertices share a tree");
            }
        }
        left.push(u);
        left.extend(right.into_iter().rev());
        left
    }
}

/// BFS spanning forest; its non-tree edges form a minimum feedback edge set.
pub fn feedback_edge_set(g: &Graph) -> SpanningForest {
    SpanningForest::new(g, bfs_tree(g, None)).expect("BFS forest spans the graph")
}

/// fen = |E| − |V| + #components.
pub fn fen(g: &Graph) -> usize {
    g.num_edges() + g.components().len() - g.n()
}

fn bfs_tree(g: &Graph, start: Option<VarId>) -> Vec<(VarId, VarId)> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut edges = Vec::new();
    let starts = start.into_iter().chain(0..n);
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    edges.push((u, w));
                    queue.push_back(w);
                }
            }
        }
    }
    edges
}

fn dfs_tree(g: &Graph, start: VarId) -> Vec<(VarId, VarId)> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut edges = Vec::new();
    for s in std::iter::once(start).chain(0..n) {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if let Some(&w) = g.neighbors(u).get(*i) {
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    edges.push((u, w));
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
            }
        }
    }
    edges
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LfenWitness {
    pub tree: SpanningForest,
    /// Number of non-tree edges whose tree path passes through each vertex.
    pub local_counts: Vec<usize>,
    pub value: usize,
    /// True when the value is known to be the minimum over all spanning forests.
    pub exact: bool,
}

pub fn lfen_of_tree(tree: &SpanningForest) -> LfenWitness {
    let rooted = tree.rooted();
    let mut counts = vec![0usize; tree.n()];
    for &(u, w) in tree.feedback_edges() {
        for v in rooted.path(u, w) {
            counts[v] += 1;
        }
    }
    LfenWitness {
        tree: tree.clone(),
        value: counts.iter().copied().max().unwrap_or(0),
        local_counts: counts,
        exact: false,
    }
}

/// Effort limits for [`lfen_search`].
#[derive(Clone, Copy, Debug)]
pub struct LfenBudget {
    /// Maximum number of spanning trees enumerated per component.
    pub max_trees: u64,
    /// Maximum number of accepted swaps per local-search run.
    pub max_swaps: usize,
    /// Additional DFS-tree starting points for local search.
    pub restarts: usize,
}

impl Default for LfenBudget {
    fn default() -> Self {
        LfenBudget {
            max_trees: 20_000,
            max_swaps: 200,
            restarts: 4,
        }
    }
}

/// Finds a spanning forest with small lfen: exhaustive per component when the
/// number of spanning trees fits the budget, local search otherwise.
pub fn lfen_search(g: &Graph, budget: LfenBudget) -> LfenWitness {
    let mut tree_edges = Vec::new();
    let mut exact = true;
    for comp in g.components() {
        if comp.len() == 1 {
            continue;
        }
        let sub = g.induced(&comp);
        let (edges, ex) = match enumerate_best_tree(&sub, budget.max_trees) {
            Some(edges) => (edges, true),
            None => (local_search_tree(&sub, budget), false),
        };
        exact &= ex;
        tree_edges.extend(edges.into_iter().map(|(u, v)| (comp[u], comp[v])));
    }
    let tree = SpanningForest::new(g, tree_edges).expect("search yields a spanning forest");
    let mut w = lfen_of_tree(&tree);
    w.exact = exact;
    w
}

/// Objective for comparing trees: (max local count, sum of local counts).
fn tree_cost(g: &Graph, edges: &[(VarId, VarId)]) -> (usize, usize) {
    let t = SpanningForest::new(g, edges.iter().copied()).expect("valid tree");
    let w = lfen_of_tree(&t);
    (w.value, w.local_counts.iter().sum())
}

/// Exhaustive contraction/deletion enumeration of the spanning trees of a
/// connected graph. Returns None if more than `max_trees` leaves are visited.
fn enumerate_best_tree(g: &Graph, max_trees: u64) -> Option<Vec<(VarId, VarId)>> {
    struct Enum<'a> {
        g: &'a Graph,
        edges: Vec<(VarId, VarId)>,
        chosen: Vec<(VarId, VarId)>,
        visited: u64,
        max: u64,
        best: Option<((usize, usize), Vec<(VarId, VarId)>)>,
    }
    impl Enum<'_> {
        fn connected_without(&self, i: usize) -> bool {
            let mut uf = UnionFind::new(self.g.n());
            let mut joined = 0;
            for &(u, v) in self.chosen.iter().chain(&self.edges[i + 1..]) {
                if uf.union(u, v) {
                    joined += 1;
                }
            }
            joined + 1 == self.g.n()
        }

        fn go(&mut self, i: usize, uf: &UnionFind) -> bool {
            if self.chosen.len() + 1 == self.g.n() {
                self.visited += 1;
                if self.visited > self.max {
                    return false;
                }
                let cost = tree_cost(self.g, &self.chosen);
                if self.best.as_ref().map_or(true, |b| cost < b.0) {
                    self.best = Some((cost, self.chosen.clone()));
                }
                return true;
            }
            if i == self.edges.len() {
                return true;
            }
            let (u, v) = self.edges[i];
            let mut with = uf.clone();
            if with.union(u, v) {
                self.chosen.push((u, v));
                let ok = self.go(i + 1, &with);
                self.chosen.pop();
                if !ok {
                    return false;
                }
            }
            if self.connected_without(i) {
                return self.go(i + 1, uf);
            }
            true
        }
    }
    let mut e = Enum {
        g,
        edges: g.edges(),
        chosen: Vec::new(),
        visited: 0,
        max: max_trees,
        best: None,
    };
    if e.go(0, &UnionFind::new(g.n())) {
        e.best.map(|b| b.1)
    } else {
        None
    }
}

/// Edge-swap local search from BFS and DFS starting trees of a connected graph.
fn local_search_tree(g: &Graph, budget: LfenBudget) -> Vec<(VarId, VarId)> {
    let mut starts = vec![bfs_tree(g, None)];
    let step = (g.n() / (budget.restarts + 1)).max(1);
    for r in 0..budget.restarts {
        starts.push(dfs_tree(g, (r * step) % g.n()));
    }
    let mut best: Option<((usize, usize), Vec<(VarId, VarId)>)> = None;
    for start in starts {
        let mut tree: Vec<_> = start.into_iter().map(norm).collect();
        tree.sort_unstable();
        let mut cost = tree_cost(g, &tree);
        for _ in 0..budget.max_swaps {
            let forest = SpanningForest::new(g, tree.iter().copied()).expect("valid tree");
            let rooted = forest.rooted();
            let mut improved = None;
            'search: for &(u, w) in forest.feedback_edges() {
                let path = rooted.path(u, w);
                let mut cycle_edges: Vec<_> = path.windows(2).map(|p| norm((p[0], p[1]))).collect();
                cycle_edges.sort_unstable();
                for f in cycle_edges {
                    let mut cand: Vec<_> = tree.iter().copied().filter(|&e| e != f).collect();
                    cand.push((u, w));
                    cand.sort_unstable();
                    let c = tree_cost(g, &cand);
                    if c < cost {
                        improved = Some((c, cand));
                        break 'search;
                    }
                }
            }
            match improved {
                Some((c, cand)) => {
                    cost = c;
                    tree = cand;
                }
                None => break,
            }
        }
        if best.as_ref().map_or(true, |b| (cost, &tree) < (b.0, &b.1)) {
            best = Some((cost, tree));
        }
    }
    best.expect("at least one start").1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Introduce(VarId),
    Forget(VarId),
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NodeKind,
    /// Sorted bag.
    pub bag: Vec<VarId>,
    pub children: Vec<usize>,
}

/// Nice tree decomposition; nodes are stored children-first, so processing in
/// index order is a valid bottom-up traversal. The last node is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    pub fn root(&self) -> Option<usize> {
        self.nodes.len().checked_sub(1)
    }

    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Builds a nice decomposition from an arbitrary tree decomposition
    /// given as bags plus tree edges. Components are joined under an empty root.
    pub fn from_bags(n: usize, bags: &[Vec<VarId>], edges: &[(usize, usize)]) -> Result<Self> {
        let mut bags: Vec<Vec<VarId>> = bags.to_vec();
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
            if b.iter().any(|&v| v >= n) {
                return Err(Error::Invalid("bag vertex out of range".into()));
            }
        }
        let t = Graph::from_edges(bags.len(), edges.iter().copied());
        if !t.is_forest() || t.num_edges() != edges.len() {
            return Err(Error::Invalid("decomposition tree has a cycle or repeated edge".into()));
        }
        let rooted = RootedForest::new(&t);
        let mut b = Builder {
            nodes: Vec::new(),
            bags: &bags,
            children: &rooted.children,
        };
        let mut tops = Vec::new();
        for &r in &rooted.roots {
            if let Some(top) = b.build(r) {
                tops.push(b.forget_all(top));
            }
        }
        let mut covered = vec![false; n];
        for bag in &bags {
            for &v in bag {
                covered[v] = true;
            }
        }
        // vertices missing from every bag become singleton components
        for (v, &c) in covered.iter().enumerate() {
            if !c {
                let leaf = b.push(NodeKind::Leaf, vec![v], vec![]);
                tops.push(b.forget_all(leaf));
            }
        }
        let mut acc = tops.first().copied();
        for &t in tops.iter().skip(1) {
            acc = Some(b.push(NodeKind::Join, vec![], vec![acc.unwrap(), t]));
        }
        let _ = acc;
        Ok(NiceTreeDecomposition { nodes: b.nodes })
    }

    /// Checks coverage, the subtree property and nice shape.
    pub fn check(&self, g: &Graph) -> std::result::Result<(), String> {
        let Some(root) = self.root() else {
            return if g.n() == 0 { Ok(()) } else { Err("no nodes".into()) };
        };
        if !self.nodes[root].bag.is_empty() {
            return Err("root bag not empty".into());
        }
        let mut parent = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                if c >= i {
                    return Err(format!("node {i} has a later child {c}"));
                }
                if parent[c].replace(i).is_some() {
                    return Err(format!("node {c} has two parents"));
                }
            }
            let child_bag = |k: usize| &self.nodes[node.children[k]].bag;
            let ok = match node.kind {
                NodeKind::Leaf => node.children.is_empty() && node.bag.len() == 1,
                NodeKind::Introduce(v) => {
                    node.children.len() == 1 && {
                        let mut b = child_bag(0).clone();
                        b.push(v);
                        b.sort_unstable();
                        !child_bag(0).contains(&v) && b == node.bag
                    }
                }
                NodeKind::Forget(v) => {
                    node.children.len() == 1 && {
                        let mut b = node.bag.clone();
                        b.push(v);
                        b.sort_unstable();
                        !node.bag.contains(&v) && &b == child_bag(0)
                    }
                }
                NodeKind::Join => {
                    node.children.len() == 2 && child_bag(0) == &node.bag && child_bag(1) == &node.bag
                }
            };
            if !ok {
                return Err(format!("node {i} is malformed"));
            }
        }
        if (0..root).any(|i| parent[i].is_none()) {
            return Err("decomposition is not a single tree".into());
        }
        for (u, v) in g.edges() {
            if !self.nodes.iter().any(|nd| nd.bag.contains(&u) && nd.bag.contains(&v)) {
                return Err(format!("edge {u}-{v} not covered"));
            }
        }
        // subtree property: within the tree, each vertex's occurrence set is connected,
        // i.e. exactly one occurrence node has a parent not containing the vertex
        for v in 0..g.n() {
            let tops = self
                .nodes
                .iter()
                .enumerate()
                .filter(|(i, nd)| {
                    nd.bag.contains(&v) && parent[*i].map_or(true, |p| !self.nodes[p].bag.contains(&v))
                })
                .count();
            if tops != 1 {
                return Err(format!("vertex {v} occurs in {tops} disconnected parts"));
            }
        }
        Ok(())
    }
}

struct Builder<'a> {
    nodes: Vec<NiceNode>,
    bags: &'a [Vec<VarId>],
    children: &'a [Vec<usize>],
}

impl Builder<'_> {
    fn push(&mut self, kind: NodeKind, bag: Vec<VarId>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { kind, bag, children });
        self.nodes.len() - 1
    }

    fn introduce(&mut self, mut at: usize, v: VarId) -> usize {
        let mut bag = self.nodes[at].bag.clone();
        let pos = bag.binary_search(&v).unwrap_err();
        bag.insert(pos, v);
        at = self.push(NodeKind::Introduce(v), bag, vec![at]);
        at
    }

    fn forget(&mut self, at: usize, v: VarId) -> usize {
        let bag: Vec<_> = self.nodes[at].bag.iter().copied().filter(|&x| x != v).collect();
        self.push(NodeKind::Forget(v), bag, vec![at])
    }

    fn forget_all(&mut self, mut at: usize) -> usize {
        for v in self.nodes[at].bag.clone() {
            at = self.forget(at, v);
        }
        at
    }

    /// Moves from node `at` to a node with exactly `target` as bag.
    fn transform(&mut self, mut at: usize, target: &[VarId]) -> usize {
        for v in self.nodes[at].bag.clone() {
            if target.binary_search(&v).is_err() {
                at = self.forget(at, v);
            }
        }
        for &v in target {
            if self.nodes[at].bag.binary_search(&v).is_err() {
                at = self.introduce(at, v);
            }
        }
        at
    }

    /// Nice subtree whose top node has the bag of raw node `r`, or None for
    /// an empty subtree.
    fn build(&mut self, r: usize) -> Option<usize> {
        let bag = self.bags[r].clone();
        let mut subs = Vec::new();
        for &c in &self.children[r] {
            if let Some(top) = self.build(c) {
                subs.push(top);
            }
        }
        let mut tops: Vec<usize> = subs.into_iter().map(|s| self.transform(s, &bag)).collect();
        if tops.is_empty() {
            if bag.is_empty() {
                return None;
            }
            let mut at = self.push(NodeKind::Leaf, vec![bag[0]], vec![]);
            for &v in &bag[1..] {
                at = self.introduce(at, v);
            }
            tops.push(at);
        }
        let mut acc = tops[0];
        for &t in &tops[1..] {
            acc = self.push(NodeKind::Join, bag.clone(), vec![acc, t]);
        }
        Some(acc)
    }
}

/// Greedy min-fill elimination ordering (ties: min degree, then smallest id).
pub fn min_fill_ordering(g: &Graph) -> Vec<VarId> {
    let n = g.n();
    let mut h = g.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<((usize, usize), VarId)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let nb = h.neighbors(v);
            let mut fill = 0;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if !h.has_edge(a, b) {
                        fill += 1;
                    }
                }
            }
            let key = (fill, nb.len());
            if best.map_or(true, |(k, _)| key < k) {
                best = Some((key, v));
            }
        }
        let v = best.expect("vertex left").1;
        let nb = h.neighbors(v).to_vec();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                h.add_edge(a, b);
            }
        }
        for &a in &nb {
            h.remove_edge(v, a);
        }
        alive[v] = false;
        order.push(v);
    }
    order
}

pub const EXACT_TREEWIDTH_MAX_VARS: usize = 12;

/// Optimal elimination ordering by dynamic programming over vertex subsets.
pub fn exact_ordering(g: &Graph) -> Result<Vec<VarId>> {
    let n = g.n();
    if n > EXACT_TREEWIDTH_MAX_VARS {
        return Err(Error::TooLarge {
            what: "variables for exact treewidth",
            limit: EXACT_TREEWIDTH_MAX_VARS,
            actual: n,
        });
    }
    // q(s, v): vertices outside s ∪ {v} reachable from v through s
    let q = |s: usize, v: VarId| -> usize {
        let mut seen = 1usize << v;
        let mut stack = vec![v];
        let mut count = 0;
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if seen >> w & 1 == 1 {
                    continue;
                }
                seen |= 1 << w;
                if s >> w & 1 == 1 {
                    stack.push(w);
                } else {
                    count += 1;
                }
            }
        }
        count
    };
    let full = (1usize << n) - 1;
    let mut tw = vec![usize::MAX; full + 1];
    let mut last = vec![0usize; full + 1];
    tw[0] = 0;
    for s in 1..=full {
        for v in 0..n {
            if s >> v & 1 == 0 {
                continue;
            }
            let rest = s ^ (1 << v);
            let val = tw[rest].max(q(rest, v));
            if val < tw[s] {
                tw[s] = val;
                last[s] = v;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        order.push(last[s]);
        s ^= 1 << last[s];
    }
    order.reverse();
    Ok(order)
}

/// Tree decomposition induced by an elimination ordering.
pub fn decomposition_from_ordering(g: &Graph, order: &[VarId]) -> NiceTreeDecomposition {
    let n = g.n();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut h = g.clone();
    let mut bags = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for &v in order {
        let later: Vec<VarId> = h.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        for (i, &a) in later.iter().enumerate() {
            for &b in &later[i + 1..] {
                h.add_edge(a, b);
            }
        }
        if let Some(&p) = later.iter().min_by_key(|&&w| pos[w]) {
            edges.push((pos[v], pos[p]));
        }
        let mut bag = later;
        bag.push(v);
        bags.push(bag);
    }
    NiceTreeDecomposition::from_bags(n, &bags, &edges).expect("elimination yields a decomposition")
}

/// Nice decomposition from the min-fill heuristic.
pub fn tree_decomposition(g: &Graph) -> NiceTreeDecomposition {
    decomposition_from_ordering(g, &min_fill_ordering(g))
}

/// Nice decomposition of minimum width (small graphs only).
pub fn exact_tree_decomposition(g: &Graph) -> Result<NiceTreeDecomposition> {
    Ok(decomposition_from_ordering(g, &exact_ordering(g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{figure_example, LocalScore};

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    #[test]
    fn example_fen_and_lfen() {
        let g = figure_example().superstructure();
        assert_eq!(feedback_edge_set(&g).feedback_edges().len(), 2);
        assert_eq!(fen(&g), 2);
        let t = SpanningForest::new(&g, [(0, 1), (1, 3), (3, 2)]).unwrap();
        assert_eq!(lfen_of_tree(&t).value, 2);
        let w = lfen_search(&g, LfenBudget::default());
        assert_eq!(w.value, 2);
        assert!(w.exact);
    }

    #[test]
    fn tree_has_zero_lfen() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)]);
        assert!(feedback_edge_set(&g).feedback_edges().is_empty());
        let w = lfen_search(&g, LfenBudget::default());
        assert_eq!((w.value, w.exact), (0, true));
    }

    #[test]
    fn cycle_counts_every_vertex_once() {
        let g = cycle(6);
        let t = SpanningForest::new(&g, (0..5).map(|i| (i, i + 1))).unwrap();
        assert_eq!(lfen_of_tree(&t).local_counts, vec![1; 6]);
    }

    #[test]
    fn rejects_non_spanning_tree() {
        let g = cycle(4);
        assert!(SpanningForest::new(&g, [(0, 1), (1, 2)]).is_err());
        assert!(SpanningForest::new(&g, [(0, 1), (1, 2), (2, 3), (3, 0)]).is_err());
        assert!(SpanningForest::new(&g, [(0, 2), (1, 2), (2, 3)]).is_err());
    }

    #[test]
    fn local_search_fallback_is_an_upper_bound() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (0, 4)]);
        let budget = LfenBudget {
            max_trees: 1,
            ..LfenBudget::default()
        };
        let w = lfen_search(&g, budget);
        assert!(!w.exact);
        assert!(w.value <= fen(&g));
    }

    #[test]
    fn example_decomposition_width_two() {
        let g = figure_example().superstructure();
        let td = tree_decomposition(&g);
        td.check(&g).unwrap();
        assert_eq!(td.width(), 2);
        assert_eq!(exact_tree_decomposition(&g).unwrap().width(), 2);
    }

    #[test]
    fn edgeless_graph_width_zero() {
        let g = Graph::new(3);
        let td = tree_decomposition(&g);
        td.check(&g).unwrap();
        assert_eq!(td.width(), 0);
        let empty = tree_decomposition(&Graph::new(0));
        assert!(empty.nodes.is_empty());
    }

    #[test]
    fn decomposition_from_supplied_bags() {
        let g = cycle(4);
        let td = NiceTreeDecomposition::from_bags(4, &[vec![0, 1, 2], vec![0, 2, 3]], &[(0, 1)]).unwrap();
        td.check(&g).unwrap();
        assert_eq!(td.width(), 2);
        let bad = NiceTreeDecomposition::from_bags(4, &[vec![0, 1], vec![2, 3]], &[(0, 1)]).unwrap();
        assert!(bad.check(&g).is_err());
    }
}
