//! Dynamic programs over a spanning forest of the superstructure, with state
//! size bounded in the local feedback edge number of the forest.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::graph_params::{lfen_search, LfenBudget, RootedForest, SpanningForest};
use crate::instance::{LocalScore, Network, NonZeroInstance, VarId};
use crate::relation::Rel;

/// Boundary of the subtree below a tree vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundary {
    pub vertex: VarId,
    /// Endpoints of edges with exactly one endpoint in the subtree, sorted.
    pub delta: Vec<VarId>,
    pub delta_in: Vec<VarId>,
    pub delta_out: Vec<VarId>,
    pub open_children: Vec<VarId>,
    pub closed_children: Vec<VarId>,
}

/// Subtree membership via preorder intervals.
#[derive(Clone, Debug)]
struct Intervals {
    tin: Vec<usize>,
    size: Vec<usize>,
}

impl Intervals {
    fn new(f: &RootedForest) -> Self {
        let n = f.parent.len();
        let mut tin = vec![0; n];
        for (i, &v) in f.order.iter().enumerate() {
            tin[v] = i;
        }
        let mut size = vec![1; n];
        for &v in f.order.iter().rev() {
            if let Some(p) = f.parent[v] {
                size[p] += size[v];
            }
        }
        Intervals { tin, size }
    }

    /// Whether `x` lies in the subtree of `v`.
    fn inside(&self, v: VarId, x: VarId) -> bool {
        self.tin[x] >= self.tin[v] && self.tin[x] < self.tin[v] + self.size[v]
    }
}

pub fn boundaries(g: &Graph, f: &RootedForest) -> Vec<Boundary> {
    let iv = Intervals::new(f);
    let n = g.n();
    let mut delta: Vec<Vec<VarId>> = vec![Vec::new(); n];
    for &v in f.order.iter().rev() {
        let mut cand: Vec<VarId> = vec![v];
        cand.extend_from_slice(g.neighbors(v));
        for &c in &f.children[v] {
            cand.extend_from_slice(&delta[c]);
        }
        cand.sort_unstable();
        cand.dedup();
        delta[v] = cand
            .into_iter()
            .filter(|&x| {
                let side = iv.inside(v, x);
                g.neighbors(x).iter().any(|&y| iv.inside(v, y) != side)
            })
            .collect();
    }
    (0..n)
        .map(|v| {
            let (delta_in, delta_out) = delta[v].iter().partition(|&&x| iv.inside(v, x));
            let (closed_children, open_children) = f.children[v].iter().partition(|&&c| delta[c].len() <= 2);
            Boundary {
                vertex: v,
                delta: delta[v].clone(),
                delta_in,
                delta_out,
                open_children,
                closed_children,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
struct Back {
    parent_set: usize,
    /// Record index chosen for each open child.
    picks: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Record {
    key: Rel,
    score: u64,
    back: Back,
}

/// Which acyclicity notion the program enforces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Dag,
    Polytree,
}

/// Computed record tables together with what is needed to rebuild a solution.
#[derive(Clone, Debug)]
pub struct LfenDp {
    variant: Variant,
    forest: RootedForest,
    boundaries: Vec<Boundary>,
    /// Candidate parent sets per vertex: listed sets plus the empty set.
    cands: Vec<Vec<(Vec<VarId>, u64)>>,
    tables: Vec<Vec<Record>>,
}

fn candidates(inst: &NonZeroInstance, v: VarId) -> Vec<(Vec<VarId>, u64)> {
    let mut out: Vec<(Vec<VarId>, u64)> = inst.family(v).iter().map(|e| (e.parents.clone(), e.score)).collect();
    if !out.iter().any(|(p, _)| p.is_empty()) {
        out.push((vec![], 0));
    }
    out
}

fn pos(list: &[VarId], x: VarId) -> Option<usize> {
    list.binary_search(&x).ok()
}

/// Closed-child contribution: (score of the record without the arc from `v`,
/// score of the record with it, their indices).
fn closed_records(table: &[Record], with_arc: impl Fn(&Rel) -> bool) -> ((u64, usize), Option<(u64, usize)>) {
    let mut without = None;
    let mut with = None;
    for (i, r) in table.iter().enumerate() {
        if with_arc(&r.key) {
            with = Some((r.score, i));
        } else {
            without = Some((r.score, i));
        }
    }
    (without.expect("record without the parent arc always exists"), with)
}

impl LfenDp {
    pub fn run(inst: &NonZeroInstance, tree: &SpanningForest, variant: Variant) -> Result<Self> {
        let g = inst.superstructure();
        if tree.n() != g.n() {
            return Err(Error::Invalid("tree has the wrong number of vertices".into()));
        }
        // re-validate: the tree must span the superstructure
        let tree = SpanningForest::new(&g, tree.tree_edges().iter().copied())?;
        let forest = tree.rooted();
        let boundaries = boundaries(&g, &forest);
        let iv = Intervals::new(&forest);
        let cands: Vec<_> = (0..g.n()).map(|v| candidates(inst, v)).collect();
        for (v, cs) in cands.iter().enumerate() {
            for (p, _) in cs {
                assert!(p.iter().all(|&x| g.has_edge(v, x)), "parent outside superstructure");
            }
        }
        let mut dp = LfenDp {
            variant,
            forest,
            boundaries,
            cands,
            tables: vec![Vec::new(); g.n()],
        };
        for &v in dp.forest.order.clone().iter().rev() {
            let t = match variant {
                Variant::Dag => dp.combine_dag(v)?,
                Variant::Polytree => dp.combine_pl(v, &iv)?,
            };
            dp.tables[v] = t;
        }
        Ok(dp)
    }

    fn closed_info(&self, v: VarId) -> Vec<(VarId, (u64, usize), Option<(u64, usize)>)> {
        self.boundaries[v]
            .closed_children
            .iter()
            .map(|&c| {
                let d = &self.boundaries[c].delta;
                let (vi, ci) = (pos(d, v).unwrap(), pos(d, c).unwrap());
                let (a, b) = closed_records(&self.tables[c], |k| k.contains(vi, ci));
                (c, a, b)
            })
            .collect()
    }

    fn closed_score(info: &[(VarId, (u64, usize), Option<(u64, usize)>)], p: &[VarId]) -> u64 {
        info.iter()
            .map(|&(c, (s0, _), sx)| {
                if p.contains(&c) {
                    s0
                } else {
                    s0.max(sx.map_or(0, |x| x.0))
                }
            })
            .sum()
    }

    fn combine_dag(&self, v: VarId) -> Result<Vec<Record>> {
        let b = &self.boundaries[v];
        let mut universe: Vec<VarId> = vec![v];
        universe.extend_from_slice(&b.delta);
        for &c in &b.open_children {
            universe.extend_from_slice(&self.boundaries[c].delta);
        }
        universe.sort_unstable();
        universe.dedup();
        let u = universe.len();
        if u > 64 {
            return Err(Error::TooLarge {
                what: "local boundary union",
                limit: 64,
                actual: u,
            });
        }
        let child_maps: Vec<Vec<usize>> = b
            .open_children
            .iter()
            .map(|&c| self.boundaries[c].delta.iter().map(|&x| pos(&universe, x).unwrap()).collect())
            .collect();
        let keep: Vec<usize> = b.delta.iter().map(|&x| pos(&universe, x).unwrap()).collect();
        let vi = pos(&universe, v).unwrap();
        let closed = self.closed_info(v);
        let mut out: BTreeMap<Rel, (u64, Back)> = BTreeMap::new();
        for (pi, (p, fp)) in self.cands[v].iter().enumerate() {
            let mut r0 = Rel::empty(u);
            for &x in p {
                if let Some(xi) = pos(&universe, x) {
                    r0.insert(xi, vi);
                } else {
                    debug_assert!(b.closed_children.contains(&x));
                }
            }
            let base = fp + Self::closed_score(&closed, p);
            let mut partial: BTreeMap<Rel, (u64, Vec<usize>)> = BTreeMap::new();
            partial.insert(r0, (base, Vec::new()));
            for (ci, &c) in b.open_children.iter().enumerate() {
                let mut next: BTreeMap<Rel, (u64, Vec<usize>)> = BTreeMap::new();
                for (rel, (s, picks)) in &partial {
                    for (ri, rec) in self.tables[c].iter().enumerate() {
                        let mut un = rel.clone();
                        un.union_with(&rec.key.remap(&child_maps[ci], u));
                        if !un.closure().is_irreflexive() {
                            continue;
                        }
                        let ns = s + rec.score;
                        match next.get(&un) {
                            Some((old, _)) if *old >= ns => {}
                            _ => {
                                let mut np = picks.clone();
                                np.push(ri);
                                next.insert(un, (ns, np));
                            }
                        }
                    }
                }
                partial = next;
            }
            for (rel, (s, picks)) in partial {
                let cl = rel.closure();
                if !cl.is_irreflexive() {
                    continue;
                }
                let key = cl.restrict(&keep);
                match out.get(&key) {
                    Some((old, _)) if *old >= s => {}
                    _ => {
                        out.insert(key, (s, Back { parent_set: pi, picks }));
                    }
                }
            }
        }
        Ok(out
            .into_iter()
            .map(|(key, (score, back))| Record { key, score, back })
            .collect())
    }

    fn combine_pl(&self, v: VarId, iv: &Intervals) -> Result<Vec<Record>> {
        let b = &self.boundaries[v];
        let dl = b.delta.len();
        if dl > 64 {
            return Err(Error::TooLarge {
                what: "boundary",
                limit: 64,
                actual: dl,
            });
        }
        let closed = self.closed_info(v);
        let open = &b.open_children;
        // decoded child records: per open child, per record: (class of each inner
        // boundary vertex, arcs as (tail, head) VarIds)
        let decoded: Vec<Vec<(Vec<(VarId, usize)>, Vec<(VarId, VarId)>)>> = open
            .iter()
            .map(|&c| {
                let bc = &self.boundaries[c];
                self.tables[c]
                    .iter()
                    .map(|rec| {
                        let mut class = Vec::new();
                        for &x in &bc.delta_in {
                            let xi = pos(&bc.delta, x).unwrap();
                            let rep = bc
                                .delta_in
                                .iter()
                                .map(|&y| pos(&bc.delta, y).unwrap())
                                .find(|&yi| rec.key.contains(xi, yi))
                                .unwrap_or(xi);
                            class.push((x, rep));
                        }
                        let arcs = rec
                            .key
                            .pairs()
                            .map(|(a, b2)| (bc.delta[a], bc.delta[b2]))
                            .filter(|(a, _)| !iv.inside(c, *a))
                            .collect();
                        (class, arcs)
                    })
                    .collect()
            })
            .collect();
        let mut out: BTreeMap<Rel, (u64, Back)> = BTreeMap::new();
        let mut picks = vec![0usize; open.len()];
        for (pi, (p, fp)) in self.cands[v].iter().enumerate() {
            let base = fp + Self::closed_score(&closed, p);
            if open.iter().any(|&c| self.tables[c].is_empty()) {
                continue;
            }
            picks.iter_mut().for_each(|x| *x = 0);
            loop {
                if let Some((key, s)) = self.pl_branch(v, iv, p, &decoded, &picks) {
                    let s = s + base;
                    match out.get(&key) {
                        Some((old, _)) if *old >= s => {}
                        _ => {
                            out.insert(
                                key,
                                (
                                    s,
                                    Back {
                                        parent_set: pi,
                                        picks: picks.clone(),
                                    },
                                ),
                            );
                        }
                    }
                }
                // odometer over open-child records
                let mut i = 0;
                loop {
                    if i == open.len() {
                        break;
                    }
                    picks[i] += 1;
                    if picks[i] < self.tables[open[i]].len() {
                        break;
                    }
                    picks[i] = 0;
                    i += 1;
                }
                if i == open.len() {
                    break;
                }
            }
        }
        Ok(out
            .into_iter()
            .map(|(key, (score, back))| Record { key, score, back })
            .collect())
    }

    /// One branch of the polytree combination; None if the union has a skeleton cycle.
    #[allow(clippy::type_complexity)]
    fn pl_branch(
        &self,
        v: VarId,
        iv: &Intervals,
        p: &[VarId],
        decoded: &[Vec<(Vec<(VarId, usize)>, Vec<(VarId, VarId)>)>],
        picks: &[usize],
    ) -> Option<(Rel, u64)> {
        let b = &self.boundaries[v];
        let open = &b.open_children;
        // node ids: 0 = v, then one per (child, class representative), then outside vertices
        let mut node_of_inner: Vec<(VarId, usize)> = Vec::new();
        let mut next_id = 1;
        let mut score = 0;
        for (ci, &c) in open.iter().enumerate() {
            let (class, _) = &decoded[ci][picks[ci]];
            score += self.tables[c][picks[ci]].score;
            let mut reps: Vec<(usize, usize)> = Vec::new();
            for &(x, rep) in class {
                let id = match reps.iter().find(|r| r.0 == rep) {
                    Some(r) => r.1,
                    None => {
                        reps.push((rep, next_id));
                        next_id += 1;
                        next_id - 1
                    }
                };
                node_of_inner.push((x, id));
            }
        }
        let mut outside: Vec<VarId> = Vec::new();
        let inner_count = next_id;
        let mut node = |x: VarId| -> usize {
            if x == v {
                return 0;
            }
            if let Some(&(_, id)) = node_of_inner.iter().find(|e| e.0 == x) {
                return id;
            }
            debug_assert!(!iv.inside(v, x));
            match outside.iter().position(|&y| y == x) {
                Some(i) => inner_count + i,
                None => {
                    outside.push(x);
                    inner_count + outside.len() - 1
                }
            }
        };
        let mut edges: Vec<(usize, usize, bool, Option<(VarId, VarId)>)> = Vec::new();
        for &x in p {
            if b.closed_children.contains(&x) {
                continue;
            }
            let inside = iv.inside(v, x);
            edges.push((node(x), 0, inside, (!inside).then_some((x, v))));
        }
        for (ci, _) in open.iter().enumerate() {
            for &(x, y) in &decoded[ci][picks[ci]].1 {
                let inside = iv.inside(v, x);
                edges.push((node(x), node(y), inside, (!inside).then_some((x, y))));
            }
        }
        let din: Vec<(usize, usize)> = b
            .delta_in
            .iter()
            .map(|&x| (pos(&b.delta, x).unwrap(), node(x)))
            .collect();
        let total = inner_count + outside.len();
        let mut uf_all = UnionFind::new(total);
        let mut uf_in = UnionFind::new(inner_count);
        for &(a, c, inside, _) in &edges {
            if !uf_all.union(a, c) {
                return None;
            }
            if inside {
                uf_in.union(a, c);
            }
        }
        let mut key = Rel::empty(b.delta.len());
        for &(xi, xn) in &din {
            for &(yi, yn) in &din {
                if uf_in.find(xn) == uf_in.find(yn) {
                    key.insert(xi, yi);
                }
            }
        }
        for &(_, _, _, arc) in &edges {
            if let Some((x, y)) = arc {
                key.insert(pos(&b.delta, x).unwrap(), pos(&b.delta, y).unwrap());
            }
        }
        Some((key, score))
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn forest(&self) -> &RootedForest {
        &self.forest
    }

    /// Optimal score: the sum of the single root records.
    pub fn optimum(&self) -> u64 {
        self.forest.roots.iter().map(|&r| self.tables[r][0].score).sum()
    }

    /// Records at `v` as (pairs over the boundary, in variable ids; score).
    /// For the polytree variant the pairs hold the equivalence on the inner
    /// boundary and the incoming arcs from the outer boundary.
    pub fn records(&self, v: VarId) -> Vec<(Vec<(VarId, VarId)>, u64)> {
        let d = &self.boundaries[v].delta;
        self.tables[v]
            .iter()
            .map(|r| (r.key.pairs().map(|(a, b)| (d[a], d[b])).collect(), r.score))
            .collect()
    }

    pub fn table_size(&self, v: VarId) -> usize {
        self.tables[v].len()
    }

    pub fn witness(&self) -> Network {
        let n = self.boundaries.len();
        let mut net = Network::empty(n);
        let mut stack: Vec<(VarId, usize)> = self.forest.roots.iter().map(|&r| (r, 0)).collect();
        while let Some((v, ri)) = stack.pop() {
            let rec = &self.tables[v][ri];
            let p = &self.cands[v][rec.back.parent_set].0;
            net.set_parents(v, p.clone());
            let b = &self.boundaries[v];
            for (ci, &c) in b.open_children.iter().enumerate() {
                stack.push((c, rec.back.picks[ci]));
            }
            for &(c, (s0, i0), sx) in &self.closed_info(v) {
                let pick = match sx {
                    Some((s, i)) if !p.contains(&c) && s > s0 => i,
                    _ => i0,
                };
                stack.push((c, pick));
            }
        }
        net
    }
}

fn default_tree(inst: &NonZeroInstance) -> SpanningForest {
    lfen_search(&inst.superstructure(), LfenBudget::default()).tree
}

/// Optimal DAG via the record DP; uses a searched low-lfen tree when none is given.
pub fn solve_bnsl_lfen(inst: &NonZeroInstance, tree: Option<&SpanningForest>) -> Result<(u64, Network)> {
    let t = tree.cloned().unwrap_or_else(|| default_tree(inst));
    let dp = LfenDp::run(inst, &t, Variant::Dag)?;
    Ok((dp.optimum(), dp.witness()))
}

/// Optimal polytree via the record DP.
pub fn solve_pl_lfen(inst: &NonZeroInstance, tree: Option<&SpanningForest>) -> Result<(u64, Network)> {
    let t = tree.cloned().unwrap_or_else(|| default_tree(inst));
    let dp = LfenDp::run(inst, &t, Variant::Polytree)?;
    Ok((dp.optimum(), dp.witness()))
}
