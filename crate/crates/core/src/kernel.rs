//! Data reduction by pruning pendant vertices and contracting long induced paths.
//!
//! A [`KernelMap`] records every rule application so that any network of the
//! reduced instance can be lifted back to the original one.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::instance::{LocalScore, Mode, Network, NonZeroInstance, ParentSet, VarId};

/// Orientation of one path edge `x_{i-1} x_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeState {
    /// `x_{i-1} -> x_i`
    Fwd,
    /// `x_i -> x_{i-1}`
    Bwd,
    Absent,
}

use EdgeState::*;

const ALL: [EdgeState; 3] = [Fwd, Bwd, Absent];

/// Scores of the internal vertices of a path `a, b_1 .. b_m, c`, each as
/// `[f(∅), f({left}), f({right}), f({left, right})]`.
#[derive(Clone, Debug)]
pub struct PathProblem {
    pub inner: Vec<[u64; 4]>,
}

/// Constraints on path configurations.
#[derive(Clone, Copy, Debug)]
pub struct PathConstraint<'a> {
    pub first: &'a [EdgeState],
    pub last: &'a [EdgeState],
    /// Forbid the directed path `a -> b_1 -> .. -> b_m`.
    pub no_fwd_chain: bool,
    /// Forbid the directed path `c -> b_m -> .. -> b_1`.
    pub no_bwd_chain: bool,
    /// Require (true) or forbid (false) all internal edges `b_i b_{i+1}`.
    pub connected: Option<bool>,
}

impl PathProblem {
    pub fn new(inst_score: impl Fn(VarId, &[VarId]) -> u64, path: &[VarId]) -> Self {
        let m = path.len() - 2;
        let inner = (1..=m)
            .map(|i| {
                let (l, v, r) = (path[i - 1], path[i], path[i + 1]);
                let mut both = vec![l, r];
                both.sort_unstable();
                [inst_score(v, &[]), inst_score(v, &[l]), inst_score(v, &[r]), inst_score(v, &both)]
            })
            .collect();
        PathProblem { inner }
    }

    pub fn m(&self) -> usize {
        self.inner.len()
    }

    /// Score of `b_i` (1-based) given its two incident edges.
    fn vertex_score(&self, i: usize, left: EdgeState, right: EdgeState) -> u64 {
        let idx = usize::from(left == Fwd) | usize::from(right == Bwd) << 1;
        self.inner[i - 1][idx]
    }

    /// Total inner score of a full configuration of the `m + 1` edges.
    pub fn evaluate(&self, cfg: &[EdgeState]) -> u64 {
        (1..=self.m()).map(|i| self.vertex_score(i, cfg[i - 1], cfg[i])).sum()
    }

    /// Maximum inner score and an optimal configuration, or None if no
    /// configuration satisfies the constraint.
    pub fn best(&self, c: PathConstraint) -> Option<(u64, Vec<EdgeState>)> {
        let m = self.m();
        assert!(m >= 1);
        // state: (edge state, fwd chain intact, bwd chain intact, internal edges all present)
        type Key = (EdgeState, bool, bool, bool);
        let mut layers: Vec<BTreeMap<Key, (u64, Option<Key>)>> = Vec::with_capacity(m + 1);
        let mut first = BTreeMap::new();
        for &e in c.first {
            first.insert((e, e == Fwd, true, true), (0u64, None));
        }
        layers.push(first);
        for i in 2..=m + 1 {
            let allowed: &[EdgeState] = if i == m + 1 { c.last } else { &ALL };
            let mut next: BTreeMap<Key, (u64, Option<Key>)> = BTreeMap::new();
            for (&key, &(s, _)) in &layers[i - 2] {
                let (prev, fwd, bwd, present) = key;
                for &e in allowed {
                    let nk = (
                        e,
                        if i <= m { fwd && e == Fwd } else { fwd },
                        bwd && e == Bwd,
                        if i <= m { present && e != Absent } else { present },
                    );
                    let ns = s + self.vertex_score(i - 1, prev, e);
                    let slot = next.entry(nk).or_insert((0, None));
                    if slot.1.is_none() || ns > slot.0 {
                        *slot = (ns, Some(key));
                    }
                }
            }
            layers.push(next);
        }
        let mut best: Option<(u64, Key)> = None;
        for (&key, &(s, _)) in layers.last().unwrap() {
            let (_, fwd, bwd, present) = key;
            if (c.no_fwd_chain && fwd) || (c.no_bwd_chain && bwd) {
                continue;
            }
            if c.connected.is_some_and(|p| p != present) {
                continue;
            }
            if best.map_or(true, |b| s > b.0) {
                best = Some((s, key));
            }
        }
        let (score, mut key) = best?;
        let mut cfg = vec![Absent; m + 1];
        for i in (0..=m).rev() {
            cfg[i] = key.0;
            if let Some(prev) = layers[i][&key].1 {
                key = prev;
            }
        }
        Some((score, cfg))
    }
}

/// `B ⊆ {a, c}` encoded as bit 0 = a, bit 1 = c.
fn b_constraint(bset: usize) -> (&'static [EdgeState], &'static [EdgeState]) {
    let first: &'static [EdgeState] = if bset & 1 == 1 { &[Fwd] } else { &[Absent] };
    let last: &'static [EdgeState] = if bset & 2 == 2 { &[Bwd] } else { &[Absent] };
    (first, last)
}

/// The six values for the DAG gadget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathScores {
    pub l_max: [(u64, Vec<EdgeState>); 4],
    pub no_path_a: (u64, Vec<EdgeState>),
    pub no_path_c: (u64, Vec<EdgeState>),
}

pub fn path_scores(p: &PathProblem) -> PathScores {
    let l = |b: usize| {
        let (first, last) = b_constraint(b);
        p.best(PathConstraint {
            first,
            last,
            no_fwd_chain: false,
            no_bwd_chain: false,
            connected: None,
        })
        .expect("always feasible")
    };
    PathScores {
        l_max: [l(0), l(1), l(2), l(3)],
        no_path_a: p
            .best(PathConstraint {
                first: &[Fwd],
                last: &[Absent],
                no_fwd_chain: true,
                no_bwd_chain: false,
                connected: None,
            })
            .expect("feasible for m >= 1"),
        no_path_c: p
            .best(PathConstraint {
                first: &[Absent],
                last: &[Bwd],
                no_fwd_chain: false,
                no_bwd_chain: true,
                connected: None,
            })
            .expect("feasible for m >= 1"),
    }
}

/// `l[p][B]` for the polytree gadget.
pub fn pl_path_scores(p: &PathProblem) -> [[(u64, Vec<EdgeState>); 4]; 2] {
    let l = |conn: bool, b: usize| {
        let (first, last) = b_constraint(b);
        // with a single inner vertex connectivity is vacuous
        let connected = (p.m() > 1).then_some(conn);
        p.best(PathConstraint {
            first,
            last,
            no_fwd_chain: false,
            no_bwd_chain: false,
            connected,
        })
        .expect("always feasible")
    };
    [[l(false, 0), l(false, 1), l(false, 2), l(false, 3)], [l(true, 0), l(true, 1), l(true, 2), l(true, 3)]]
}

/// One rule application, in working ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Step {
    Prune {
        v: VarId,
        /// Removed neighbours and whether each prefers `v` as its parent.
        leaves: Vec<(VarId, bool)>,
        /// Reduced parent set of `v` -> removed neighbours that become its parents.
        table: Vec<(Vec<VarId>, Vec<VarId>)>,
    },
    Contract {
        a: VarId,
        c: VarId,
        /// `b_1 .. b_m`; the first and last stay in the reduced instance.
        path: Vec<VarId>,
        b: VarId,
        l_max: Vec<Vec<EdgeState>>,
        no_path_a: Vec<EdgeState>,
        no_path_c: Vec<EdgeState>,
    },
    ContractPolytree {
        a: VarId,
        c: VarId,
        path: Vec<VarId>,
        /// `[b_1', b_1'', b, b_m', b_m'']`
        gadget: [VarId; 5],
        /// `configs[p][B]`
        configs: Vec<Vec<Vec<EdgeState>>>,
    },
    MergeIsolated {
        carrier: VarId,
        merged: Vec<VarId>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelMap {
    pub mode: KernelMode,
    pub original_n: usize,
    pub working_n: usize,
    /// Working id of every reduced vertex.
    pub reduced_to_working: Vec<VarId>,
    pub reduced_names: Vec<String>,
    pub steps: Vec<Step>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMode {
    Bnsl,
    Polytree,
}

impl From<KernelMode> for Mode {
    fn from(m: KernelMode) -> Mode {
        match m {
            KernelMode::Bnsl => Mode::Dag,
            KernelMode::Polytree => Mode::Polytree,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelResult {
    pub reduced: NonZeroInstance,
    pub map: KernelMap,
}

impl KernelMap {
    /// Original vertex -> reduced vertex, None for removed vertices.
    pub fn vertex_map(&self) -> Vec<Option<VarId>> {
        let mut out = vec![None; self.original_n];
        for (r, &w) in self.reduced_to_working.iter().enumerate() {
            if w < self.original_n {
                out[w] = Some(r);
            }
        }
        out
    }

    /// Maps a network of the reduced instance to one of the original instance.
    /// The lifted score is at least the reduced score, with equality for
    /// optimal reduced networks.
    pub fn lift(&self, reduced: &Network) -> Result<Network> {
        if reduced.n() != self.reduced_to_working.len() {
            return Err(Error::Invalid(format!(
                "network has {} vertices, reduced instance has {}",
                reduced.n(),
                self.reduced_to_working.len()
            )));
        }
        let w = &self.reduced_to_working;
        let mut net = Network::from_arcs(self.working_n, reduced.arcs().into_iter().map(|(p, c)| (w[p], w[c])));
        for step in self.steps.iter().rev() {
            undo(step, &mut net)?;
        }
        Ok(net.resized(self.original_n))
    }
}

fn contains_all(set: &[VarId], xs: &[VarId]) -> bool {
    xs.iter().all(|x| set.contains(x))
}

fn apply_path_config(net: &mut Network, a: VarId, path: &[VarId], c: VarId, cfg: &[EdgeState]) {
    let m = path.len();
    let x = |i: usize| -> VarId {
        if i == 0 {
            a
        } else if i == m + 1 {
            c
        } else {
            path[i - 1]
        }
    };
    for (i, &e) in cfg.iter().enumerate() {
        let (l, r) = (x(i), x(i + 1));
        match e {
            Fwd => net.add_arc(l, r),
            Bwd => net.add_arc(r, l),
            Absent => {}
        }
    }
}

fn undo(step: &Step, net: &mut Network) -> Result<()> {
    match step {
        Step::Prune { v, leaves, table } => {
            let pv = net.parents(*v).to_vec();
            let extra = table
                .iter()
                .find(|(k, _)| *k == pv)
                .map(|(_, e)| e.clone())
                .unwrap_or_default();
            let mut all = pv;
            all.extend(&extra);
            net.set_parents(*v, all);
            for &(q, prefers) in leaves {
                net.set_parents(q, vec![]);
                if !extra.contains(&q) && prefers {
                    net.add_arc(*v, q);
                }
            }
        }
        Step::Contract {
            a,
            c,
            path,
            b,
            l_max,
            no_path_a,
            no_path_c,
        } => {
            let (a, c, b) = (*a, *c, *b);
            let b1 = path[0];
            let bm = *path.last().unwrap();
            let pb = net.parents(b).to_vec();
            let p1 = net.parents(b1).to_vec();
            let pm = net.parents(bm).to_vec();
            let fix_end = |net: &mut Network, end: VarId, inner: VarId| -> bool {
                let pe = net.parents(end).to_vec();
                let back = pe.contains(&b) && pe.contains(&inner);
                let kept = pe.into_iter().filter(|&x| x != b && (back || x != inner)).collect();
                net.set_parents(end, kept);
                back
            };
            let a_back = fix_end(net, a, b1);
            let c_back = fix_end(net, c, bm);
            let mut sorted_1 = vec![a, b, bm];
            sorted_1.sort_unstable();
            let mut sorted_m = vec![c, b, b1];
            sorted_m.sort_unstable();
            let gadget_b = contains_all(&pb, &[b1, bm]) && pb.iter().all(|x| [a, c, b1, bm].contains(x));
            let cfg = if gadget_b {
                let bset = usize::from(pb.contains(&a)) | usize::from(pb.contains(&c)) << 1;
                if (bset & 1 == 1 && a_back) || (bset & 2 == 2 && c_back) {
                    &l_max[0]
                } else {
                    &l_max[bset]
                }
            } else if p1 == sorted_1 && !a_back {
                no_path_a
            } else if pm == sorted_m && !c_back {
                no_path_c
            } else {
                &l_max[0]
            };
            for &x in path.iter().chain([b].iter()) {
                net.set_parents(x, vec![]);
            }
            for u in 0..net.n() {
                net.remove_arc(b, u);
                for &x in path {
                    net.remove_arc(x, u);
                }
            }
            apply_path_config(net, a, path, c, cfg);
            if a_back {
                net.add_arc(b1, a);
            }
            if c_back {
                net.add_arc(bm, c);
            }
        }
        Step::ContractPolytree {
            a,
            c,
            path,
            gadget,
            configs,
        } => {
            let (a, c) = (*a, *c);
            let [b1p, b1pp, b, bmp, bmpp] = *gadget;
            let fix_end = |net: &mut Network, end: VarId, p1: VarId, p2: VarId| -> bool {
                let pe = net.parents(end).to_vec();
                let back = pe.contains(&p1) && pe.contains(&p2);
                let kept = pe.into_iter().filter(|x| !gadget.contains(x)).collect();
                net.set_parents(end, kept);
                back
            };
            let pb = net.parents(b).to_vec();
            let a_back = fix_end(net, a, b1p, b1pp);
            let c_back = fix_end(net, c, bmp, bmpp);
            let canonical = canonical_pl_sets(a, c, gadget);
            let mut choice = canonical
                .iter()
                .find(|(_, _, set)| *set == pb)
                .map(|&(p, bset, _)| (p, bset));
            if let Some((_, bset)) = choice {
                if (bset & 1 == 1 && a_back) || (bset & 2 == 2 && c_back) {
                    choice = None;
                }
            }
            let (p, bset) = choice.unwrap_or_else(|| {
                let mut bset = 0;
                if pb.contains(&a) && !a_back {
                    bset |= 1;
                }
                if pb.contains(&c) && !c_back {
                    bset |= 2;
                }
                (0, bset)
            });
            for &x in gadget.iter().chain(path.iter()) {
                net.set_parents(x, vec![]);
            }
            for u in 0..net.n() {
                for &x in gadget.iter().chain(path.iter()) {
                    net.remove_arc(x, u);
                }
            }
            apply_path_config(net, a, path, c, &configs[p][bset]);
            if a_back {
                net.add_arc(path[0], a);
            }
            if c_back {
                net.add_arc(*path.last().unwrap(), c);
            }
        }
        Step::MergeIsolated { carrier, merged } => {
            net.set_parents(*carrier, vec![]);
            for &x in merged {
                net.set_parents(x, vec![]);
            }
        }
    }
    Ok(())
}

/// The eight parent sets of the polytree gadget's middle vertex as `(p, B, set)`.
fn canonical_pl_sets(a: VarId, c: VarId, g: &[VarId; 5]) -> Vec<(usize, usize, Vec<VarId>)> {
    let [b1p, b1pp, _, bmp, bmpp] = *g;
    let raw: [(usize, usize, Vec<VarId>); 8] = [
        (1, 3, vec![a, c, b1p, b1pp, bmp, bmpp]),
        (0, 3, vec![b1p, b1pp, bmp, bmpp]),
        (1, 0, vec![b1p, bmp]),
        (0, 0, vec![]),
        (1, 1, vec![a, b1p, b1pp, bmp]),
        (0, 1, vec![b1p, b1pp]),
        (1, 2, vec![c, bmp, bmpp, b1p]),
        (0, 2, vec![bmp, bmpp]),
    ];
    raw.into_iter()
        .map(|(p, b, mut s)| {
            s.sort_unstable();
            (p, b, s)
        })
        .collect()
}

struct Work {
    mode: KernelMode,
    original_n: usize,
    names: Vec<String>,
    used_names: HashSet<String>,
    fam: Vec<Vec<ParentSet>>,
    alive: Vec<bool>,
    steps: Vec<Step>,
}

impl Work {
    fn new(inst: &NonZeroInstance, mode: KernelMode) -> Self {
        Work {
            mode,
            original_n: inst.n(),
            names: inst.names().to_vec(),
            used_names: inst.names().iter().cloned().collect(),
            fam: inst.families().to_vec(),
            alive: vec![true; inst.n()],
            steps: Vec::new(),
        }
    }

    fn score(&self, v: VarId, parents: &[VarId]) -> u64 {
        self.fam[v].iter().find(|e| e.parents == parents).map_or(0, |e| e.score)
    }

    fn graph(&self) -> Graph {
        let mut g = Graph::new(self.fam.len());
        for (v, fam) in self.fam.iter().enumerate() {
            for e in fam {
                for &p in &e.parents {
                    g.add_edge(v, p);
                }
            }
        }
        g
    }

    fn add_vertex(&mut self, hint: &str) -> VarId {
        let mut name = format!("_{hint}");
        let mut k = 0;
        while self.used_names.contains(&name) {
            k += 1;
            name = format!("_{hint}_{k}");
        }
        self.used_names.insert(name.clone());
        self.names.push(name);
        self.fam.push(Vec::new());
        self.alive.push(true);
        self.fam.len() - 1
    }

    fn kill(&mut self, v: VarId) {
        self.alive[v] = false;
        self.fam[v].clear();
    }

    fn prune(&mut self, v: VarId, leaves: &[VarId]) {
        let gain: u64 = leaves
            .iter()
            .map(|&q| self.score(q, &[]).max(self.score(q, &[v])))
            .sum();
        let mut cands: BTreeMap<Vec<VarId>, (u64, Vec<VarId>)> = BTreeMap::new();
        let mut keys: Vec<Vec<VarId>> = vec![vec![]];
        keys.extend(
            self.fam[v]
                .iter()
                .map(|e| e.parents.iter().copied().filter(|p| !leaves.contains(p)).collect()),
        );
        for k in keys {
            let own = self.score(v, &k);
            cands.entry(k).or_insert((own + gain, vec![]));
        }
        for e in &self.fam[v] {
            let (inq, outq): (Vec<VarId>, Vec<VarId>) = e.parents.iter().partition(|p| leaves.contains(p));
            if inq.is_empty() {
                continue;
            }
            let val = e.score
                + inq.iter().map(|&q| self.score(q, &[])).sum::<u64>()
                + leaves
                    .iter()
                    .filter(|q| !inq.contains(q))
                    .map(|&q| self.score(q, &[]).max(self.score(q, &[v])))
                    .sum::<u64>();
            let slot = cands.get_mut(&outq).expect("key inserted above");
            if val > slot.0 {
                *slot = (val, inq);
            }
        }
        let leaf_info = leaves
            .iter()
            .map(|&q| (q, self.score(q, &[v]) > self.score(q, &[])))
            .collect();
        let mut table = Vec::new();
        let mut fam = Vec::new();
        for (k, (s, extra)) in cands {
            if s > 0 {
                fam.push(ParentSet::new(k.clone(), s));
            }
            table.push((k, extra));
        }
        self.fam[v] = fam;
        for &q in leaves {
            self.kill(q);
        }
        self.steps.push(Step::Prune {
            v,
            leaves: leaf_info,
            table,
        });
    }

    fn path_problem(&self, a: VarId, path: &[VarId], c: VarId) -> PathProblem {
        let mut full = vec![a];
        full.extend_from_slice(path);
        full.push(c);
        PathProblem::new(|v, p| self.score(v, p), &full)
    }

    fn contract(&mut self, a: VarId, path: &[VarId], c: VarId) {
        let scores = path_scores(&self.path_problem(a, path, c));
        let b1 = path[0];
        let bm = *path.last().unwrap();
        let b = self.add_vertex(&format!("{}~{}", self.names[b1], self.names[bm]));
        for &x in &path[1..path.len() - 1] {
            self.kill(x);
        }
        let mut fb = Vec::new();
        for (bset, (s, _)) in scores.l_max.iter().enumerate() {
            let mut ps = vec![b1, bm];
            if bset & 1 == 1 {
                ps.push(a);
            }
            if bset & 2 == 2 {
                ps.push(c);
            }
            if *s > 0 {
                fb.push(ParentSet::new(ps, *s));
            }
        }
        self.fam[b] = fb;
        self.fam[b1] = (scores.no_path_a.0 > 0)
            .then(|| ParentSet::new(vec![a, b, bm], scores.no_path_a.0))
            .into_iter()
            .collect();
        self.fam[bm] = (scores.no_path_c.0 > 0)
            .then(|| ParentSet::new(vec![c, b, b1], scores.no_path_c.0))
            .into_iter()
            .collect();
        for (end, inner) in [(a, b1), (c, bm)] {
            for e in &mut self.fam[end] {
                if e.parents.contains(&inner) {
                    e.parents.push(b);
                    e.parents.sort_unstable();
                }
            }
        }
        self.steps.push(Step::Contract {
            a,
            c,
            path: path.to_vec(),
            b,
            l_max: scores.l_max.iter().map(|x| x.1.clone()).collect(),
            no_path_a: scores.no_path_a.1,
            no_path_c: scores.no_path_c.1,
        });
    }

    fn contract_polytree(&mut self, a: VarId, path: &[VarId], c: VarId) {
        let l = pl_path_scores(&self.path_problem(a, path, c));
        let (n1, nm) = (self.names[path[0]].clone(), self.names[*path.last().unwrap()].clone());
        let gadget = [
            self.add_vertex(&format!("{n1}'")),
            self.add_vertex(&format!("{n1}''")),
            self.add_vertex(&format!("{n1}~{nm}")),
            self.add_vertex(&format!("{nm}'")),
            self.add_vertex(&format!("{nm}''")),
        ];
        let [b1p, b1pp, b, bmp, bmpp] = gadget;
        for &x in path {
            self.kill(x);
        }
        let mut fb = Vec::new();
        for (p, bset, set) in canonical_pl_sets(a, c, &gadget) {
            let s = l[p][bset].0;
            if s > 0 {
                fb.push(ParentSet::new(set, s));
            }
        }
        self.fam[b] = fb;
        for (end, inner, r1, r2) in [(a, path[0], b1p, b1pp), (c, *path.last().unwrap(), bmp, bmpp)] {
            for e in &mut self.fam[end] {
                if let Some(pos) = e.parents.iter().position(|&x| x == inner) {
                    e.parents.remove(pos);
                    e.parents.extend([r1, r2]);
                    e.parents.sort_unstable();
                }
            }
        }
        self.steps.push(Step::ContractPolytree {
            a,
            c,
            path: path.to_vec(),
            gadget,
            configs: l.iter().map(|row| row.iter().map(|x| x.1.clone()).collect()).collect(),
        });
    }

    /// Applies one rule if possible.
    fn step(&mut self) -> bool {
        let g = self.graph();
        for v in 0..g.n() {
            if !self.alive[v] {
                continue;
            }
            let leaves: Vec<VarId> = g.neighbors(v).iter().copied().filter(|&q| g.degree(q) == 1).collect();
            if !leaves.is_empty() {
                self.prune(v, &leaves);
                return true;
            }
        }
        let threshold = match self.mode {
            KernelMode::Bnsl => 4,
            KernelMode::Polytree => 6,
        };
        if let Some((a, path, c)) = find_long_path(&g, &self.alive, threshold) {
            match self.mode {
                KernelMode::Bnsl => self.contract(a, &path, c),
                KernelMode::Polytree => self.contract_polytree(a, &path, c),
            }
            return true;
        }
        false
    }

    fn merge_isolated(&mut self) {
        let g = self.graph();
        let isolated: Vec<VarId> = (0..g.n()).filter(|&v| self.alive[v] && g.degree(v) == 0).collect();
        if isolated.len() < 2 {
            return;
        }
        let carrier = isolated[0];
        let total: u64 = isolated.iter().map(|&v| self.score(v, &[])).sum();
        for &v in &isolated[1..] {
            self.kill(v);
        }
        self.fam[carrier] = if total > 0 { vec![ParentSet::new(vec![], total)] } else { vec![] };
        self.steps.push(Step::MergeIsolated {
            carrier,
            merged: isolated[1..].to_vec(),
        });
    }

    fn finish(self) -> KernelResult {
        let keep: Vec<VarId> = (0..self.fam.len()).filter(|&v| self.alive[v]).collect();
        let mut local = vec![usize::MAX; self.fam.len()];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let names: Vec<String> = keep.iter().map(|&v| self.names[v].clone()).collect();
        let families = keep
            .iter()
            .map(|&v| {
                self.fam[v]
                    .iter()
                    .map(|e| ParentSet::new(e.parents.iter().map(|&p| local[p]).collect(), e.score))
                    .collect()
            })
            .collect();
        let reduced = NonZeroInstance::new(names.clone(), families).expect("reduction keeps instances valid");
        KernelResult {
            reduced,
            map: KernelMap {
                mode: self.mode,
                original_n: self.original_n,
                working_n: self.fam.len(),
                reduced_to_working: keep,
                reduced_names: names,
                steps: self.steps,
            },
        }
    }
}

/// A path `a, b_1 .. b_m, c` with all `b_i` of degree 2 and `m >= threshold`,
/// oriented so that `a != c`.
fn find_long_path(g: &Graph, alive: &[bool], threshold: usize) -> Option<(VarId, Vec<VarId>, VarId)> {
    let n = g.n();
    let mut seen = vec![false; n];
    for s in 0..n {
        if !alive[s] || seen[s] || g.degree(s) != 2 {
            continue;
        }
        // walk to one end of the chain
        let mut chain = vec![s];
        seen[s] = true;
        let mut ends = [usize::MAX; 2];
        let mut is_cycle = false;
        for dir in 0..2 {
            let mut prev = s;
            let mut cur = g.neighbors(s)[dir];
            loop {
                if cur == s {
                    is_cycle = true;
                    break;
                }
                if g.degree(cur) != 2 {
                    ends[dir] = cur;
                    break;
                }
                seen[cur] = true;
                if dir == 0 {
                    chain.push(cur);
                } else {
                    chain.insert(0, cur);
                }
                let nb = g.neighbors(cur);
                let next = if nb[0] == prev { nb[1] } else { nb[0] };
                prev = cur;
                cur = next;
            }
            if is_cycle {
                break;
            }
        }
        if is_cycle {
            // rotate so the smallest vertex plays a, its cycle neighbour plays c
            let pos = chain.iter().enumerate().min_by_key(|x| x.1).unwrap().0;
            chain.rotate_left(pos);
            let a = chain[0];
            let c = *chain.last().unwrap();
            let inner = chain[1..chain.len() - 1].to_vec();
            if inner.len() >= threshold {
                return Some((a, inner, c));
            }
            continue;
        }
        // chain is ordered from ends[1] to ends[0]
        let (a, c) = (ends[1], ends[0]);
        if a != c {
            if chain.len() >= threshold {
                return Some((a, chain, c));
            }
        } else if chain.len() > threshold {
            let c = chain.pop().unwrap();
            return Some((a, chain, c));
        }
    }
    None
}

fn kernelize(inst: &NonZeroInstance, mode: KernelMode) -> KernelResult {
    let mut w = Work::new(inst, mode);
    while w.step() {}
    w.merge_isolated();
    w.finish()
}

/// Exhaustive reduction preserving the optimal DAG score.
pub fn kernelize_bnsl(inst: &NonZeroInstance) -> KernelResult {
    kernelize(inst, KernelMode::Bnsl)
}

/// Exhaustive reduction preserving the optimal polytree score.
pub fn kernelize_pl(inst: &NonZeroInstance) -> KernelResult {
    kernelize(inst, KernelMode::Polytree)
}

/// Applies only the pendant-vertex rule at `v` (for testing single applications).
pub fn prune_once(inst: &NonZeroInstance, v: VarId) -> Result<KernelResult> {
    let g = inst.superstructure();
    let leaves: Vec<VarId> = g.neighbors(v).iter().copied().filter(|&q| g.degree(q) == 1).collect();
    if leaves.is_empty() {
        return Err(Error::Invalid("no degree-1 neighbour".into()));
    }
    let mut w = Work::new(inst, KernelMode::Bnsl);
    w.prune(v, &leaves);
    Ok(w.finish())
}

/// Applies only the path contraction to `a, path.., c` (for testing single applications).
pub fn contract_once(inst: &NonZeroInstance, a: VarId, path: &[VarId], c: VarId, mode: KernelMode) -> Result<KernelResult> {
    let g = inst.superstructure();
    if path.iter().any(|&x| g.degree(x) != 2) || a == c {
        return Err(Error::Invalid("not an induced path of degree-2 vertices".into()));
    }
    let mut w = Work::new(inst, mode);
    match mode {
        KernelMode::Bnsl => w.contract(a, path, c),
        KernelMode::Polytree => w.contract_polytree(a, path, c),
    }
    Ok(w.finish())
}

/// Sanity helper used by the CLI: the lifted network must score at least the reduced one.
pub fn check_lift(original: &NonZeroInstance, result: &KernelResult, reduced_net: &Network) -> Result<Network> {
    let lifted = result.map.lift(reduced_net)?;
    let before = crate::instance::score_of(&result.reduced, reduced_net);
    let after = crate::instance::score_of(original, &lifted);
    if after < before || original.n() != lifted.n() {
        return Err(Error::Invalid("lifted network scores below the reduced one".into()));
    }
    Ok(lifted)
}

impl LocalScore for KernelResult {
    fn n(&self) -> usize {
        self.reduced.n()
    }
    fn local_score(&self, child: VarId, parents: &[VarId]) -> u64 {
        self.reduced.local_score(child, parents)
    }
    fn superstructure(&self) -> Graph {
        self.reduced.superstructure()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{default_names, figure_example, score_of, validate};
    use crate::oracle::{exact_bnsl, exact_pl};

    fn brute(p: &PathProblem, c: PathConstraint) -> Option<u64> {
        let m = p.m();
        let mut best = None;
        let total = 3usize.pow(m as u32 + 1);
        for code in 0..total {
            let mut x = code;
            let cfg: Vec<EdgeState> = (0..=m)
                .map(|_| {
                    let e = ALL[x % 3];
                    x /= 3;
                    e
                })
                .collect();
            if !c.first.contains(&cfg[0]) || !c.last.contains(&cfg[m]) {
                continue;
            }
            if c.no_fwd_chain && cfg[..m].iter().all(|&e| e == Fwd) {
                continue;
            }
            if c.no_bwd_chain && cfg[1..].iter().all(|&e| e == Bwd) {
                continue;
            }
            if let Some(conn) = c.connected {
                if cfg[1..m].iter().all(|&e| e != Absent) != conn {
                    continue;
                }
            }
            let s = p.evaluate(&cfg);
            if best.map_or(true, |b| s > b) {
                best = Some(s);
            }
        }
        best
    }

    #[test]
    fn single_inner_vertex_scores() {
        let p = PathProblem {
            inner: vec![[0, 3, 2, 4]],
        };
        let pl = pl_path_scores(&p);
        let vals: Vec<u64> = pl[1].iter().map(|x| x.0).collect();
        assert_eq!(vals, vec![0, 3, 2, 4]);
        assert_eq!(pl[0][1].0, 3);
    }

    #[test]
    fn zero_path_scores_zero() {
        let p = PathProblem {
            inner: vec![[0; 4]; 5],
        };
        let s = path_scores(&p);
        assert!(s.l_max.iter().all(|x| x.0 == 0));
        assert_eq!((s.no_path_a.0, s.no_path_c.0), (0, 0));
        assert!(pl_path_scores(&p).iter().flatten().all(|x| x.0 == 0));
    }

    #[test]
    fn path_dp_matches_enumeration() {
        use rand::Rng;
        let mut rng = crate::gen::rng(5);
        for _ in 0..300 {
            let m = rng.gen_range(1..=6);
            let p = PathProblem {
                inner: (0..m)
                    .map(|_| [rng.gen_range(0..3), rng.gen_range(0..6), rng.gen_range(0..6), rng.gen_range(0..9)])
                    .collect(),
            };
            for first in [&[Fwd][..], &[Absent][..], &ALL[..]] {
                for last in [&[Bwd][..], &[Absent][..], &ALL[..]] {
                    for (nf, nb) in [(false, false), (true, false), (false, true)] {
                        for connected in [None, Some(true), Some(false)] {
                            let c = PathConstraint {
                                first,
                                last,
                                no_fwd_chain: nf,
                                no_bwd_chain: nb,
                                connected,
                            };
                            let got = p.best(c);
                            assert_eq!(got.as_ref().map(|x| x.0), brute(&p, c));
                            if let Some((s, cfg)) = got {
                                assert_eq!(p.evaluate(&cfg), s);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn example_is_already_reduced() {
        let inst = figure_example();
        let k = kernelize_bnsl(&inst);
        assert_eq!(k.reduced, inst);
        assert!(k.map.steps.is_empty());
    }

    #[test]
    fn star_collapses_to_one_vertex() {
        let v = 0;
        let fams = vec![
            vec![],
            vec![ParentSet::new(vec![v], 1)],
            vec![ParentSet::new(vec![v], 1)],
            vec![ParentSet::new(vec![v], 1)],
        ];
        let inst = NonZeroInstance::with_default_names(fams).unwrap();
        let k = prune_once(&inst, v).unwrap();
        assert_eq!(k.reduced.n(), 1);
        assert_eq!(k.reduced.empty_score(0), 3);
        assert_eq!(exact_bnsl(&inst).unwrap().0, 3);
    }

    #[test]
    fn pendant_with_parent_score() {
        let inst = NonZeroInstance::with_default_names(vec![vec![ParentSet::new(vec![1], 5)], vec![]]).unwrap();
        let k = prune_once(&inst, 0).unwrap();
        assert_eq!(k.reduced.n(), 1);
        assert_eq!(k.reduced.empty_score(0), 5);
        let lifted = k.map.lift(&Network::empty(1)).unwrap();
        assert_eq!(score_of(&inst, &lifted), 5);
    }

    fn cycle_instance(n: usize, s: u64) -> NonZeroInstance {
        let fams = (0..n).map(|v| vec![ParentSet::new(vec![(v + n - 1) % n], s)]).collect();
        NonZeroInstance::with_default_names(fams).unwrap()
    }

    #[test]
    fn long_cycle_is_contracted() {
        let inst = cycle_instance(10, 2);
        let k = kernelize_bnsl(&inst);
        assert!(k.reduced.n() <= 16);
        assert!(k.reduced.n() < 10);
        let (opt, _) = exact_bnsl(&inst).unwrap();
        assert_eq!(opt, 18);
        let (ropt, rnet) = exact_bnsl(&k.reduced).unwrap();
        assert_eq!(ropt, opt);
        let lifted = k.map.lift(&rnet).unwrap();
        assert!(validate(&lifted, Mode::Dag, None).is_ok());
        assert_eq!(score_of(&inst, &lifted), opt);
    }

    #[test]
    fn zero_score_path_keeps_optimum() {
        // a - b1..b4 - c with a-c joined by a second route so that degrees work out
        let mut fams = vec![vec![]; 7];
        fams[0] = vec![ParentSet::new(vec![1], 1), ParentSet::new(vec![6], 2)];
        fams[5] = vec![ParentSet::new(vec![4], 1)];
        fams[6] = vec![ParentSet::new(vec![5], 3)];
        fams[2] = vec![ParentSet::new(vec![1, 3], 1)];
        fams[4] = vec![ParentSet::new(vec![3], 1)];
        let inst = NonZeroInstance::with_default_names(fams).unwrap();
        let (opt, _) = exact_bnsl(&inst).unwrap();
        let k = contract_once(&inst, 0, &[1, 2, 3, 4], 5, KernelMode::Bnsl).unwrap();
        let (ropt, rnet) = exact_bnsl(&k.reduced).unwrap();
        assert_eq!(opt, ropt);
        let lifted = k.map.lift(&rnet).unwrap();
        assert!(validate(&lifted, Mode::Dag, None).is_ok());
        assert_eq!(score_of(&inst, &lifted), opt);
    }

    #[test]
    fn polytree_cycle_is_contracted() {
        let inst = cycle_instance(9, 1);
        let k = kernelize_pl(&inst);
        assert!(k.reduced.n() <= 24);
        let (opt, _) = exact_pl(&inst, None).unwrap();
        assert_eq!(opt, 8);
        let (ropt, rnet) = exact_pl(&k.reduced, None).unwrap();
        assert_eq!(ropt, opt);
        let lifted = k.map.lift(&rnet).unwrap();
        assert!(validate(&lifted, Mode::Polytree, None).is_ok());
        assert_eq!(score_of(&inst, &lifted), opt);
    }

    #[test]
    fn kernel_map_round_trips_through_json() {
        let inst = cycle_instance(10, 2);
        let k = kernelize_bnsl(&inst);
        let text = serde_json::to_string(&k.map).unwrap();
        let back: KernelMap = serde_json::from_str(&text).unwrap();
        let (_, rnet) = exact_bnsl(&k.reduced).unwrap();
        assert_eq!(back.lift(&rnet).unwrap(), k.map.lift(&rnet).unwrap());
        assert_eq!(default_names(0).len(), 0);
    }
}
