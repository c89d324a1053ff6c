//! Exhaustive checkers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use bnsl_core::gen::{graph_with_fen, nonzero_on, NonZeroParams};
use bnsl_core::graph::{Graph, UnionFind};
use bnsl_core::instance::{validate, Mode, Network, NonZeroInstance, VarId};
use bnsl_core::lfen_dp::{LfenDp, Variant};
use bnsl_core::LocalScore;
use rand::Rng;

/// Random connected instance with n vertices, `extra` non-tree edges and max degree <= `max_deg`.
pub fn connected_instance(rng: &mut impl Rng, n: usize, extra: usize, max_deg: usize) -> NonZeroInstance {
    loop {
        let g = graph_with_fen(rng, n, extra);
        if (0..n).all(|v| g.degree(v) <= max_deg) {
            return nonzero_on(rng, &g, NonZeroParams::default());
        }
    }
}

fn subtree(children: &[Vec<VarId>], v: VarId) -> Vec<VarId> {
    let mut out = vec![v];
    let mut i = 0;
    while i < out.len() {
        out.extend_from_slice(&children[out[i]]);
        i += 1;
    }
    out.sort_unstable();
    out
}

fn reach_pairs(net: &Network, among: &[VarId]) -> Vec<(VarId, VarId)> {
    let n = net.n();
    let mut children = vec![Vec::new(); n];
    for (p, c) in net.arcs() {
        children[p].push(c);
    }
    let mut out = Vec::new();
    for &a in among {
        let mut seen = vec![false; n];
        let mut stack = children[a].clone();
        while let Some(x) = stack.pop() {
            if !seen[x] {
                seen[x] = true;
                stack.extend_from_slice(&children[x]);
            }
        }
        for &b in among {
            if seen[b] {
                out.push((a, b));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Max score per key over all partial solutions below `v`, where each vertex of
/// the subtree picks a listed parent set or the empty set.
pub fn enumerate_records(inst: &NonZeroInstance, dp: &LfenDp, v: VarId) -> BTreeMap<Vec<(VarId, VarId)>, u64> {
    let sub = subtree(&dp.forest().children, v);
    let b = &dp.boundaries()[v];
    let mut cands: Vec<Vec<(Vec<VarId>, u64)>> = Vec::new();
    for &u in &sub {
        let mut c: Vec<(Vec<VarId>, u64)> = inst.family(u).iter().map(|e| (e.parents.clone(), e.score)).collect();
        if !c.iter().any(|x| x.0.is_empty()) {
            c.push((vec![], 0));
        }
        cands.push(c);
    }
    let mut out: BTreeMap<Vec<(VarId, VarId)>, u64> = BTreeMap::new();
    let mut pick = vec![0usize; sub.len()];
    loop {
        let mut net = Network::empty(inst.n());
        let mut score = 0;
        for (i, &u) in sub.iter().enumerate() {
            let (p, s) = &cands[i][pick[i]];
            net.set_parents(u, p.clone());
            score += s;
        }
        let key = match dp.variant() {
            Variant::Dag => validate(&net, Mode::Dag, None).is_ok().then(|| reach_pairs(&net, &b.delta)),
            Variant::Polytree => validate(&net, Mode::Polytree, None).is_ok().then(|| {
                let mut uf = UnionFind::new(inst.n());
                for (p, c) in net.arcs() {
                    if sub.binary_search(&p).is_ok() {
                        uf.union(p, c);
                    }
                }
                let mut key = Vec::new();
                for &x in &b.delta_in {
                    for &y in &b.delta_in {
                        if uf.find(x) == uf.find(y) {
                            key.push((x, y));
                        }
                    }
                }
                for (p, c) in net.arcs() {
                    if sub.binary_search(&p).is_err() {
                        key.push((p, c));
                    }
                }
                key.sort_unstable();
                key
            }),
        };
        if let Some(key) = key {
            let slot = out.entry(key).or_insert(0);
            *slot = (*slot).max(score);
        }
        let mut i = 0;
        while i < sub.len() {
            pick[i] += 1;
            if pick[i] < cands[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == sub.len() {
            return out;
        }
    }
}

/// Checks every stored record at every vertex against exhaustive enumeration.
pub fn check_all_records(inst: &NonZeroInstance, dp: &LfenDp) -> Result<usize, String> {
    let mut checked = 0;
    for v in 0..inst.n() {
        let expect = enumerate_records(inst, dp, v);
        let mut got: Vec<(Vec<(VarId, VarId)>, u64)> = dp
            .records(v)
            .into_iter()
            .map(|(mut k, s)| {
                k.sort_unstable();
                (k, s)
            })
            .collect();
        got.sort();
        let want: Vec<_> = expect.into_iter().collect();
        if got != want {
            return Err(format!("vertex {v}: stored {got:?}, enumerated {want:?}"));
        }
        checked += got.len();
    }
    Ok(checked)
}

pub fn graph_of(inst: &NonZeroInstance) -> Graph {
    inst.superstructure()
}

/// Vertices in bags of the subtree of `node`.
pub fn chi_down(td: &bnsl_core::graph_params::NiceTreeDecomposition, node: usize) -> Vec<VarId> {
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(i) = stack.pop() {
        out.extend_from_slice(&td.nodes[i].bag);
        stack.extend_from_slice(&td.nodes[i].children);
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub type Snapshot = (Vec<(VarId, VarId)>, Vec<(VarId, VarId)>, Vec<(VarId, usize)>);

/// Max score per snapshot at `node` over all DAGs (or polytrees) on the vertices
/// below it using positive-score arcs.
pub fn enumerate_snapshots(
    inst: &bnsl_core::AdditiveInstance,
    dp: &bnsl_core::tw_dp::TwDp,
    node: usize,
) -> BTreeMap<Snapshot, u64> {
    use bnsl_core::tw_dp::TwVariant;
    let td = dp.decomposition();
    let down = chi_down(td, node);
    let bag = &td.nodes[node].bag;
    let q = dp.max_in_degree();
    let mut edges = Vec::new();
    for (i, &a) in down.iter().enumerate() {
        for &b in &down[i + 1..] {
            let opts: Vec<(VarId, VarId)> =
                [(a, b), (b, a)].into_iter().filter(|&(x, y)| inst.arc_score(x, y) > 0).collect();
            if !opts.is_empty() {
                edges.push(opts);
            }
        }
    }
    let mut out = BTreeMap::new();
    let mut pick = vec![0usize; edges.len()];
    loop {
        let mut net = Network::empty(inst.n());
        let mut score = 0;
        for (e, &p) in edges.iter().zip(&pick) {
            if p > 0 {
                let (a, b) = e[p - 1];
                net.add_arc(a, b);
                score += inst.arc_score(a, b);
            }
        }
        let mode = match dp.variant() {
            TwVariant::Dag => Mode::Dag,
            TwVariant::Polytree => Mode::Polytree,
        };
        if validate(&net, mode, q).is_ok() {
            let loc: Vec<(VarId, VarId)> = net
                .arcs()
                .into_iter()
                .filter(|(a, b)| bag.contains(a) && bag.contains(b))
                .collect();
            let con = match dp.variant() {
                TwVariant::Dag => reach_pairs(&net, bag),
                TwVariant::Polytree => {
                    let mut uf = UnionFind::new(inst.n());
                    for (a, b) in net.arcs() {
                        uf.union(a, b);
                    }
                    let mut c = Vec::new();
                    for &x in bag {
                        for &y in bag {
                            if uf.find(x) == uf.find(y) {
                                c.push((x, y));
                            }
                        }
                    }
                    c
                }
            };
            let inn = if q.is_some() {
                bag.iter().map(|&x| (x, net.parents(x).len())).collect()
            } else {
                vec![]
            };
            let mut loc = loc;
            loc.sort_unstable();
            let slot = out.entry((loc, con, inn)).or_insert(0);
            *slot = (*slot).max(score);
        }
        let mut i = 0;
        while i < edges.len() {
            pick[i] += 1;
            if pick[i] <= edges[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == edges.len() {
            return out;
        }
    }
}

pub fn check_all_snapshots(inst: &bnsl_core::AdditiveInstance, dp: &bnsl_core::tw_dp::TwDp) -> Result<usize, String> {
    let mut checked = 0;
    for node in 0..dp.decomposition().nodes.len() {
        let want: Vec<(Snapshot, u64)> = enumerate_snapshots(inst, dp, node).into_iter().collect();
        let mut got: Vec<(Snapshot, u64)> = dp
            .snapshots(node)
            .into_iter()
            .map(|(mut l, mut c, i, s)| {
                l.sort_unstable();
                c.sort_unstable();
                ((l, c, i), s)
            })
            .collect();
        got.sort();
        if got != want {
            return Err(format!("node {node}: stored {got:?}, enumerated {want:?}"));
        }
        checked += got.len();
    }
    Ok(checked)
}

/// Random additive instance on a random connected graph.
pub fn additive_instance(rng: &mut impl Rng, n: usize, extra: usize, q: Option<usize>) -> bnsl_core::AdditiveInstance {
    let g = graph_with_fen(rng, n, extra);
    bnsl_core::gen::additive_on(rng, &g, 9, q)
}

/// Random instance on n vertices where only `k` vertices list non-empty parent sets.
pub fn few_dependent_instance(rng: &mut impl Rng, n: usize, k: usize) -> NonZeroInstance {
    use bnsl_core::ParentSet;
    use rand::seq::SliceRandom;
    let mut vs: Vec<VarId> = (0..n).collect();
    vs.shuffle(rng);
    let mut families: Vec<Vec<ParentSet>> = vec![Vec::new(); n];
    for &x in &vs[..k.min(n)] {
        let others: Vec<VarId> = (0..n).filter(|&u| u != x).collect();
        if others.is_empty() {
            continue;
        }
        let count = rng.gen_range(1..=4);
        for _ in 0..count {
            let size = rng.gen_range(1..=3.min(others.len()));
            let ps: Vec<VarId> = others.choose_multiple(rng, size).copied().collect();
            let e = ParentSet::new(ps, rng.gen_range(1..=10));
            if !families[x].iter().any(|f| f.parents == e.parents) {
                families[x].push(e);
            }
        }
    }
    for fam in families.iter_mut() {
        if rng.gen_bool(0.3) {
            fam.push(ParentSet::new(vec![], rng.gen_range(0..=5)));
        }
    }
    NonZeroInstance::with_default_names(families).unwrap()
}
