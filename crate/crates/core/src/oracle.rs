//! Exponential-time reference solvers for small instances.

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::instance::{LocalScore, NonZeroInstance, Network, VarId};

pub const EXACT_BNSL_MAX_VARS: usize = 20;
pub const EXACT_PL_MAX_EDGES: usize = 16;
pub const EXACT_INTERSECTION_MAX_ELEMENTS: usize = 14;

const NO_ENTRY: u32 = u32::MAX;

/// Subset DP over sink orderings.
pub fn exact_bnsl(inst: &NonZeroInstance) -> Result<(u64, Network)> {
    let n = inst.n();
    if n > EXACT_BNSL_MAX_VARS {
        return Err(Error::TooLarge {
            what: "variables for the subset oracle",
            limit: EXACT_BNSL_MAX_VARS,
            actual: n,
        });
    }
    let g = inst.superstructure();
    // best_local[v][mask over neighbors of v] = (score, entry index)
    let mut best_local: Vec<Vec<(u64, u32)>> = Vec::with_capacity(n);
    for v in 0..n {
        let nb = g.neighbors(v);
        let mut table = vec![(0u64, NO_ENTRY); 1 << nb.len()];
        for (i, e) in inst.family(v).iter().enumerate() {
            let mut m = 0usize;
            for p in &e.parents {
                m |= 1 << nb.binary_search(p).expect("parent is a neighbor");
            }
            if e.score > table[m].0 || (e.parents.is_empty() && table[m].1 == NO_ENTRY) {
                table[m] = (e.score, i as u32);
            }
        }
        for bit in 0..nb.len() {
            for m in 0..table.len() {
                if m >> bit & 1 == 1 && table[m ^ (1 << bit)].0 > table[m].0 {
                    table[m] = table[m ^ (1 << bit)];
                }
            }
        }
        best_local.push(table);
    }
    let full = (1usize << n) - 1;
    let mut best = vec![0u64; full + 1];
    let mut sink = vec![0u8; full + 1];
    for w in 1..=full {
        let mut top = None;
        for v in 0..n {
            if w >> v & 1 == 0 {
                continue;
            }
            let rest = w ^ (1 << v);
            let mut m = 0usize;
            for (i, &u) in g.neighbors(v).iter().enumerate() {
                if rest >> u & 1 == 1 {
                    m |= 1 << i;
                }
            }
            let s = best[rest] + best_local[v][m].0;
            if top.map_or(true, |(t, _)| s > t) {
                top = Some((s, v));
            }
        }
        let (s, v) = top.expect("non-empty set");
        best[w] = s;
        sink[w] = v as u8;
    }
    let mut net = Network::empty(n);
    let mut w = full;
    while w != 0 {
        let v = sink[w] as usize;
        let rest = w ^ (1 << v);
        let mut m = 0usize;
        for (i, &u) in g.neighbors(v).iter().enumerate() {
            if rest >> u & 1 == 1 {
                m |= 1 << i;
            }
        }
        let idx = best_local[v][m].1;
        if idx != NO_ENTRY {
            net.set_parents(v, inst.family(v)[idx as usize].parents.clone());
        }
        w = rest;
    }
    Ok((best[full], net))
}

/// Exhaustive search over skeleton forests and their orientations.
pub fn exact_pl(inst: &impl LocalScore, q: Option<usize>) -> Result<(u64, Network)> {
    let n = inst.n();
    let edges = inst.superstructure().edges();
    if edges.len() > EXACT_PL_MAX_EDGES {
        return Err(Error::TooLarge {
            what: "superstructure edges for the polytree oracle",
            limit: EXACT_PL_MAX_EDGES,
            actual: edges.len(),
        });
    }
    struct Search<'a, I: LocalScore> {
        inst: &'a I,
        edges: Vec<(VarId, VarId)>,
        q: usize,
        parents: Vec<Vec<VarId>>,
        best: Option<(u64, Vec<Vec<VarId>>)>,
    }
    impl<I: LocalScore> Search<'_, I> {
        fn go(&mut self, i: usize, uf: &UnionFind) {
            if i == self.edges.len() {
                let s: u64 = (0..self.parents.len())
                    .map(|v| {
                        let mut p = self.parents[v].clone();
                        p.sort_unstable();
                        self.inst.local_score(v, &p)
                    })
                    .sum();
                if self.best.as_ref().map_or(true, |b| s > b.0) {
                    self.best = Some((s, self.parents.clone()));
                }
                return;
            }
            self.go(i + 1, uf);
            let (a, b) = self.edges[i];
            let mut next = uf.clone();
            if !next.union(a, b) {
                return;
            }
            for (p, c) in [(a, b), (b, a)] {
                if self.parents[c].len() < self.q {
                    self.parents[c].push(p);
                    self.go(i + 1, &next);
                    self.parents[c].pop();
                }
            }
        }
    }
    let mut search = Search {
        inst,
        edges,
        q: q.unwrap_or(usize::MAX),
        parents: vec![Vec::new(); n],
        best: None,
    };
    search.go(0, &UnionFind::new(n));
    let (s, parents) = search.best.expect("empty network is always feasible");
    let mut net = Network::empty(n);
    for (v, p) in parents.into_iter().enumerate() {
        net.set_parents(v, p);
    }
    Ok((s, net))
}

/// Local feedback edge number of `g` with respect to the spanning forest `tree`,
/// by walking each non-tree edge's tree path.
pub fn naive_lfen(g: &Graph, tree: &[(VarId, VarId)]) -> usize {
    let t = Graph::from_edges(g.n(), tree.iter().copied());
    let mut count = vec![0usize; g.n()];
    for (u, w) in g.edges() {
        if t.has_edge(u, w) {
            continue;
        }
        let mut prev = vec![usize::MAX; g.n()];
        prev[u] = u;
        let mut queue = std::collections::VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for &y in t.neighbors(x) {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut x = w;
        count[x] += 1;
        while x != u {
            x = prev[x];
            count[x] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

/// Minimum lfen over all spanning forests, by scanning all edge subsets of the
/// right size. Returns None when the number of subsets exceeds `budget`.
pub fn exact_lfen(g: &Graph, budget: u64) -> Option<(usize, Vec<(VarId, VarId)>)> {
    let edges = g.edges();
    let need = g.n() - g.components().len();
    if binomial(edges.len() as u64, need as u64).map_or(true, |c| c > budget) {
        return None;
    }
    let mut best: Option<(usize, Vec<(VarId, VarId)>)> = None;
    let mut pick: Vec<usize> = (0..need).collect();
    loop {
        let mut uf = UnionFind::new(g.n());
        if pick.iter().all(|&i| uf.union(edges[i].0, edges[i].1)) {
            let tree: Vec<_> = pick.iter().map(|&i| edges[i]).collect();
            let val = naive_lfen(g, &tree);
            if best.as_ref().map_or(true, |b| val < b.0) {
                best = Some((val, tree));
            }
        }
        // next combination
        let mut i = need;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < edges.len() - need + i {
                break;
            }
        }
        pick[i] += 1;
        for j in i + 1..need {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let mut r: u64 = 1;
    for i in 0..k.min(n - k) {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// Maximum-weight set independent in both matroids, by scanning every subset.
/// Also returns the best weight per cardinality (None when no common
/// independent set of that size exists).
pub fn exact_common_independent(
    weights: &[u64],
    indep1: &dyn Fn(&[usize]) -> bool,
    indep2: &dyn Fn(&[usize]) -> bool,
) -> Result<(u64, Vec<usize>, Vec<Option<u64>>)> {
    let m = weights.len();
    if m > EXACT_INTERSECTION_MAX_ELEMENTS {
        return Err(Error::TooLarge {
            what: "ground set for the intersection oracle",
            limit: EXACT_INTERSECTION_MAX_ELEMENTS,
            actual: m,
        });
    }
    let mut best = (0u64, Vec::new());
    let mut per_card = vec![None; m + 1];
    for mask in 0u32..(1 << m) {
        let set: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        if !indep1(&set) || !indep2(&set) {
            continue;
        }
        let w: u64 = set.iter().map(|&i| weights[i]).sum();
        let slot: &mut Option<u64> = &mut per_card[set.len()];
        if slot.map_or(true, |x| w > x) {
            *slot = Some(w);
        }
        if w > best.0 {
            best = (w, set);
        }
    }
    Ok((best.0, best.1, per_card))
}
