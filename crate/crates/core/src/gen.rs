//! Seeded random graphs and instances.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::instance::{default_names, AdditiveInstance, NonZeroInstance, ParentSet, VarId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random labelled tree on `n` vertices plus up to `extra` additional edges,
/// so the feedback edge number is `extra` whenever enough non-edges exist.
pub fn graph_with_fen(rng: &mut impl Rng, n: usize, extra: usize) -> Graph {
    let mut labels: Vec<VarId> = (0..n).collect();
    labels.shuffle(rng);
    let mut g = Graph::new(n);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        g.add_edge(labels[i], labels[j]);
    }
    let mut missing = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) {
                missing.push((u, v));
            }
        }
    }
    missing.shuffle(rng);
    for &(u, v) in missing.iter().take(extra) {
        g.add_edge(u, v);
    }
    g
}

/// A small core graph whose edges are subdivided into paths of random length,
/// producing long chains of degree-2 vertices. At most `max_n` vertices.
pub fn subdivided_graph(rng: &mut impl Rng, core: usize, extra: usize, max_sub: usize, max_n: usize) -> Graph {
    let base = graph_with_fen(rng, core, extra);
    let mut edges = Vec::new();
    let mut n = core;
    for (u, v) in base.edges() {
        let k = rng.gen_range(0..=max_sub).min(max_n.saturating_sub(n));
        let mut prev = u;
        for _ in 0..k {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, v));
    }
    let mut labels: Vec<VarId> = (0..n).collect();
    labels.shuffle(rng);
    Graph::from_edges(n, edges.into_iter().map(|(a, b)| (labels[a], labels[b])))
}

#[derive(Clone, Copy, Debug)]
pub struct NonZeroParams {
    pub max_score: u64,
    /// Upper bound on listed non-empty parent sets per vertex.
    pub max_sets: usize,
    pub max_parents: usize,
    /// Probability of listing an explicit empty-set score.
    pub empty_prob: f64,
}

impl Default for NonZeroParams {
    fn default() -> Self {
        NonZeroParams {
            max_score: 10,
            max_sets: 3,
            max_parents: 3,
            empty_prob: 0.2,
        }
    }
}

/// Random non-zero scores whose superstructure is exactly `g`.
pub fn nonzero_on(rng: &mut impl Rng, g: &Graph, p: NonZeroParams) -> NonZeroInstance {
    let n = g.n();
    let mut sets: Vec<Vec<Vec<VarId>>> = vec![Vec::new(); n];
    for v in 0..n {
        let nb = g.neighbors(v);
        if nb.is_empty() {
            continue;
        }
        let count = rng.gen_range(0..=p.max_sets);
        for _ in 0..count {
            let size = rng.gen_range(1..=p.max_parents.min(nb.len()).max(1));
            let mut ps: Vec<VarId> = nb.choose_multiple(rng, size).copied().collect();
            ps.sort_unstable();
            if !sets[v].contains(&ps) {
                sets[v].push(ps);
            }
        }
    }
    for (u, v) in g.edges() {
        let covered = sets[v].iter().any(|s| s.contains(&u)) || sets[u].iter().any(|s| s.contains(&v));
        if !covered {
            let (c, p) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
            sets[c].push(vec![p]);
        }
    }
    let families = sets
        .into_iter()
        .map(|fam| {
            let mut out: Vec<ParentSet> = fam
                .into_iter()
                .map(|ps| ParentSet::new(ps, rng.gen_range(1..=p.max_score)))
                .collect();
            if rng.gen_bool(p.empty_prob) {
                out.push(ParentSet::new(vec![], rng.gen_range(0..=p.max_score)));
            }
            out
        })
        .collect();
    NonZeroInstance::new(default_names(n), families).expect("generated instance is valid")
}

/// Random additive scores on `g`: every edge gets at least one positive orientation.
pub fn additive_on(rng: &mut impl Rng, g: &Graph, max_score: u64, q: Option<usize>) -> AdditiveInstance {
    let mut arcs = Vec::new();
    for (u, v) in g.edges() {
        let both = rng.gen_bool(0.5);
        let first = rng.gen_bool(0.5);
        if both || first {
            arcs.push(((u, v), rng.gen_range(1..=max_score)));
        }
        if both || !first {
            arcs.push(((v, u), rng.gen_range(1..=max_score)));
        }
    }
    AdditiveInstance::new(default_names(g.n()), arcs, q).expect("generated instance is valid")
}

/// Random DAG on `n` vertices with arc probability `p`.
pub fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> crate::instance::Network {
    let mut order: Vec<VarId> = (0..n).collect();
    order.shuffle(rng);
    let mut net = crate::instance::Network::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                net.add_arc(order[i], order[j]);
            }
        }
    }
    net
}
