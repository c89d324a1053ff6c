//! Dynamic programs over nice tree decompositions for additive scores.
//!
//! A snapshot at a node records the arcs inside the bag (`loc`), the
//! reachability (DAG) or same-component relation (polytree) on the bag
//! (`con`), and, for bounded in-degree, the number of parents each bag
//! vertex already has (`inn`).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::UnionFind;
use crate::graph_params::{tree_decomposition, NiceTreeDecomposition, NodeKind};
use crate::instance::{AdditiveInstance, LocalScore, Network, VarId};
use crate::relation::Rel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwVariant {
    Dag,
    Polytree,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub loc: Rel,
    pub con: Rel,
    /// Empty when the in-degree is unbounded.
    pub inn: Vec<u8>,
}

#[derive(Clone, Debug)]
enum Back {
    Leaf,
    Introduce { child: Key, arcs: Vec<(VarId, VarId)> },
    Forget { child: Key },
    Join { left: Key, right: Key },
}

/// Computed snapshot tables over a decomposition.
#[derive(Clone, Debug)]
pub struct TwDp {
    variant: TwVariant,
    q: Option<usize>,
    td: NiceTreeDecomposition,
    tables: Vec<BTreeMap<Key, (u64, Back)>>,
}

fn idx(bag: &[VarId], x: VarId) -> usize {
    bag.binary_search(&x).expect("vertex in bag")
}

/// Equivalence classes of a reflexive symmetric relation.
fn class_count(con: &Rel) -> usize {
    (0..con.len())
        .filter(|&i| (0..i).all(|j| !con.contains(j, i)))
        .count()
}

fn equivalence(len: usize, uf: &mut UnionFind) -> Rel {
    let mut r = Rel::empty(len);
    for i in 0..len {
        for j in 0..len {
            if uf.find(i) == uf.find(j) {
                r.insert(i, j);
            }
        }
    }
    r
}

fn insert_max(table: &mut BTreeMap<Key, (u64, Back)>, key: Key, score: u64, back: Back) {
    match table.get(&key) {
        Some((old, _)) if *old >= score => {}
        _ => {
            table.insert(key, (score, back));
        }
    }
}

impl TwDp {
    pub fn run(inst: &AdditiveInstance, td: &NiceTreeDecomposition, variant: TwVariant, q: Option<usize>) -> Result<Self> {
        let g = inst.superstructure();
        td.check(&g).map_err(|e| Error::Invalid(format!("bad tree decomposition: {e}")))?;
        if td.width() + 1 > 64 {
            return Err(Error::TooLarge {
                what: "bag size",
                limit: 64,
                actual: td.width() + 1,
            });
        }
        // in-degrees above n - 1 are impossible anyway
        let q = q.map(|q| q.min(inst.n().saturating_sub(1)).min(u8::MAX as usize));
        let mut dp = TwDp {
            variant,
            q,
            td: td.clone(),
            tables: Vec::with_capacity(td.nodes.len()),
        };
        for i in 0..td.nodes.len() {
            let t = match td.nodes[i].kind {
                NodeKind::Leaf => dp.leaf(i),
                NodeKind::Introduce(v) => dp.introduce(inst, i, v),
                NodeKind::Forget(v) => dp.forget(i, v),
                NodeKind::Join => dp.join(inst, i),
            };
            dp.tables.push(t);
        }
        Ok(dp)
    }

    fn bounded(&self) -> bool {
        self.q.is_some()
    }

    fn leaf(&self, i: usize) -> BTreeMap<Key, (u64, Back)> {
        let mut con = Rel::empty(1);
        if self.variant == TwVariant::Polytree {
            con.insert(0, 0);
        }
        let key = Key {
            loc: Rel::empty(1),
            con,
            inn: if self.bounded() { vec![0] } else { vec![] },
        };
        debug_assert_eq!(self.td.nodes[i].bag.len(), 1);
        BTreeMap::from([(key, (0, Back::Leaf))])
    }

    fn introduce(&self, inst: &AdditiveInstance, i: usize, v: VarId) -> BTreeMap<Key, (u64, Back)> {
        let node = &self.td.nodes[i];
        let bag = &node.bag;
        let child = node.children[0];
        let old_bag = &self.td.nodes[child].bag;
        let map: Vec<usize> = old_bag.iter().map(|&x| idx(bag, x)).collect();
        let len = bag.len();
        let vi = idx(bag, v);
        let mut cand: Vec<(VarId, VarId, u64)> = Vec::new();
        for &x in bag {
            if x == v {
                continue;
            }
            for (a, b) in [(x, v), (v, x)] {
                let s = inst.arc_score(a, b);
                if s > 0 {
                    cand.push((a, b, s));
                }
            }
        }
        let mut out = BTreeMap::new();
        for (key, &(score, _)) in &self.tables[child] {
            let loc0 = key.loc.remap(&map, len);
            let con0 = key.con.remap(&map, len);
            let mut inn0 = vec![0u8; if self.bounded() { len } else { 0 }];
            for (k, &c) in key.inn.iter().enumerate() {
                inn0[map[k]] = c;
            }
            for mask in 0u64..(1 << cand.len()) {
                let chosen: Vec<&(VarId, VarId, u64)> =
                    (0..cand.len()).filter(|b| mask >> b & 1 == 1).map(|b| &cand[b]).collect();
                let mut loc = loc0.clone();
                let mut inn = inn0.clone();
                let mut gain = 0;
                let mut ok = true;
                for &&(a, b, s) in &chosen {
                    loc.insert(idx(bag, a), idx(bag, b));
                    gain += s;
                    if let Some(q) = self.q {
                        let bi = idx(bag, b);
                        inn[bi] += 1;
                        if inn[bi] as usize > q {
                            ok = false;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let con = match self.variant {
                    TwVariant::Dag => {
                        let mut c = con0.clone();
                        for &&(a, b, _) in &chosen {
                            c.insert(idx(bag, a), idx(bag, b));
                        }
                        let c = c.closure();
                        if !c.is_irreflexive() {
                            continue;
                        }
                        c
                    }
                    TwVariant::Polytree => {
                        let mut uf = UnionFind::new(len);
                        for (a, b) in con0.pairs() {
                            uf.union(a, b);
                        }
                        if chosen
                            .iter()
                            .any(|&&(a, b, _)| !uf.union(idx(bag, a), idx(bag, b)))
                        {
                            continue;
                        }
                        let mut c = equivalence(len, &mut uf);
                        c.insert(vi, vi);
                        c
                    }
                };
                let arcs = chosen.iter().map(|&&(a, b, _)| (a, b)).collect();
                insert_max(
                    &mut out,
                    Key { loc, con, inn },
                    score + gain,
                    Back::Introduce {
                        child: key.clone(),
                        arcs,
                    },
                );
            }
        }
        out
    }

    fn forget(&self, i: usize, v: VarId) -> BTreeMap<Key, (u64, Back)> {
        let node = &self.td.nodes[i];
        let child = node.children[0];
        let old_bag = &self.td.nodes[child].bag;
        let keep: Vec<usize> = (0..old_bag.len()).filter(|&k| old_bag[k] != v).collect();
        let mut out = BTreeMap::new();
        for (key, &(score, _)) in &self.tables[child] {
            let nk = Key {
                loc: key.loc.restrict(&keep),
                con: key.con.restrict(&keep),
                inn: if self.bounded() { keep.iter().map(|&k| key.inn[k]).collect() } else { vec![] },
            };
            insert_max(&mut out, nk, score, Back::Forget { child: key.clone() });
        }
        out
    }

    fn join(&self, inst: &AdditiveInstance, i: usize) -> BTreeMap<Key, (u64, Back)> {
        let node = &self.td.nodes[i];
        let bag = &node.bag;
        let len = bag.len();
        let (c1, c2) = (node.children[0], node.children[1]);
        let mut by_loc: BTreeMap<&Rel, Vec<(&Key, u64)>> = BTreeMap::new();
        for (key, &(s, _)) in &self.tables[c2] {
            by_loc.entry(&key.loc).or_default().push((key, s));
        }
        let mut out = BTreeMap::new();
        for (k1, &(s1, _)) in &self.tables[c1] {
            let Some(partners) = by_loc.get(&k1.loc) else { continue };
            let doublecount: u64 = k1.loc.pairs().map(|(a, b)| inst.arc_score(bag[a], bag[b])).sum();
            let mut loc_in = vec![0u8; len];
            for (_, b) in k1.loc.pairs() {
                loc_in[b] += 1;
            }
            for &(k2, s2) in partners {
                let mut inn = Vec::new();
                if let Some(q) = self.q {
                    inn = (0..len).map(|b| k1.inn[b] + k2.inn[b] - loc_in[b]).collect();
                    if inn.iter().any(|&x| x as usize > q) {
                        continue;
                    }
                }
                let mut un = k1.con.clone();
                un.union_with(&k2.con);
                let con = un.closure();
                match self.variant {
                    TwVariant::Dag => {
                        if !con.is_irreflexive() {
                            continue;
                        }
                    }
                    TwVariant::Polytree => {
                        // forests glued along the bag: count components on both sides
                        let lhs = class_count(&con) + len;
                        let rhs = class_count(&k1.con) + class_count(&k2.con) + k1.loc.count();
                        if lhs != rhs {
                            continue;
                        }
                    }
                }
                let key = Key {
                    loc: k1.loc.clone(),
                    con,
                    inn,
                };
                insert_max(
                    &mut out,
                    key,
                    s1 + s2 - doublecount,
                    Back::Join {
                        left: k1.clone(),
                        right: k2.clone(),
                    },
                );
            }
        }
        out
    }

    pub fn decomposition(&self) -> &NiceTreeDecomposition {
        &self.td
    }

    pub fn variant(&self) -> TwVariant {
        self.variant
    }

    pub fn max_in_degree(&self) -> Option<usize> {
        self.q
    }

    pub fn optimum(&self) -> u64 {
        match self.td.root() {
            None => 0,
            Some(r) => self.tables[r].values().map(|x| x.0).max().unwrap_or(0),
        }
    }

    /// Stored snapshots at `node`: (loc arcs, con pairs, in-degrees, score), in variable ids.
    #[allow(clippy::type_complexity)]
    pub fn snapshots(&self, node: usize) -> Vec<(Vec<(VarId, VarId)>, Vec<(VarId, VarId)>, Vec<(VarId, usize)>, u64)> {
        let bag = &self.td.nodes[node].bag;
        self.tables[node]
            .iter()
            .map(|(k, &(s, _))| {
                (
                    k.loc.pairs().map(|(a, b)| (bag[a], bag[b])).collect(),
                    k.con.pairs().map(|(a, b)| (bag[a], bag[b])).collect(),
                    k.inn.iter().enumerate().map(|(i, &c)| (bag[i], c as usize)).collect(),
                    s,
                )
            })
            .collect()
    }

    pub fn table_size(&self, node: usize) -> usize {
        self.tables[node].len()
    }

    pub fn witness(&self, n: usize) -> Network {
        let mut net = Network::empty(n);
        let Some(root) = self.td.root() else { return net };
        let Some((key, _)) = self.tables[root].iter().max_by_key(|(_, v)| v.0) else {
            return net;
        };
        let mut stack = vec![(root, key.clone())];
        while let Some((i, key)) = stack.pop() {
            let node = &self.td.nodes[i];
            match &self.tables[i][&key].1 {
                Back::Leaf => {}
                Back::Introduce { child, arcs } => {
                    for &(a, b) in arcs {
                        if !net.has_arc(a, b) {
                            net.add_arc(a, b);
                        }
                    }
                    stack.push((node.children[0], child.clone()));
                }
                Back::Forget { child } => stack.push((node.children[0], child.clone())),
                Back::Join { left, right } => {
                    stack.push((node.children[0], left.clone()));
                    stack.push((node.children[1], right.clone()));
                }
            }
        }
        net
    }
}

fn decomposition_for(inst: &AdditiveInstance, td: Option<&NiceTreeDecomposition>) -> NiceTreeDecomposition {
    td.cloned().unwrap_or_else(|| tree_decomposition(&inst.superstructure()))
}

/// Optimal DAG for additive scores, respecting the instance's in-degree bound if any.
pub fn solve_bnsl_additive(inst: &AdditiveInstance, td: Option<&NiceTreeDecomposition>) -> Result<(u64, Network)> {
    let dp = TwDp::run(inst, &decomposition_for(inst, td), TwVariant::Dag, inst.max_in_degree())?;
    Ok((dp.optimum(), dp.witness(inst.n())))
}

/// Optimal polytree with in-degree at most the instance bound, which must be set.
pub fn solve_pl_additive_tw(inst: &AdditiveInstance, td: Option<&NiceTreeDecomposition>) -> Result<(u64, Network)> {
    let Some(q) = inst.max_in_degree() else {
        return Err(Error::Invalid(
            "the treewidth polytree solver needs an in-degree bound; use the spanning-tree solver".into(),
        ));
    };
    let dp = TwDp::run(inst, &decomposition_for(inst, td), TwVariant::Polytree, Some(q))?;
    Ok((dp.optimum(), dp.witness(inst.n())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{default_names, score_of, validate, Mode};

    fn inst(n: usize, arcs: &[((VarId, VarId), u64)], q: Option<usize>) -> AdditiveInstance {
        AdditiveInstance::new(default_names(n), arcs.iter().copied(), q).unwrap()
    }

    #[test]
    fn three_cycle_drops_one_arc() {
        let i = inst(3, &[((0, 1), 1), ((1, 2), 1), ((2, 0), 1)], None);
        let (s, net) = solve_bnsl_additive(&i, None).unwrap();
        assert_eq!(s, 2);
        assert!(validate(&net, Mode::Dag, None).is_ok());
        assert_eq!(score_of(&i, &net), 2);
    }

    #[test]
    fn single_arc() {
        let i = inst(2, &[((0, 1), 7)], Some(1));
        assert_eq!(solve_bnsl_additive(&i, None).unwrap().0, 7);
        assert_eq!(solve_pl_additive_tw(&i, None).unwrap().0, 7);
    }

    #[test]
    fn triangle_polytree() {
        let arcs: Vec<_> = [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)].iter().map(|&a| (a, 1)).collect();
        let i = inst(3, &arcs, Some(2));
        let (s, net) = solve_pl_additive_tw(&i, None).unwrap();
        assert_eq!(s, 2);
        assert!(validate(&net, Mode::Polytree, Some(2)).is_ok());
    }

    #[test]
    fn pl_needs_bound() {
        let i = inst(2, &[((0, 1), 7)], None);
        assert!(solve_pl_additive_tw(&i, None).is_err());
    }

    #[test]
    fn leaf_table() {
        let i = inst(1, &[], None);
        let td = tree_decomposition(&i.superstructure());
        let dp = TwDp::run(&i, &td, TwVariant::Dag, None).unwrap();
        assert_eq!(dp.snapshots(0), vec![(vec![], vec![], vec![], 0)]);
    }

    #[test]
    fn forgotten_hub_joins_three_bag_vertices() {
        // w points to x, y, z; a valid polytree that must survive joins
        let (w, x, y, z) = (0, 1, 2, 3);
        let arcs = [((w, x), 1), ((w, y), 1), ((w, z), 1), ((x, y), 1), ((y, z), 1)];
        let i = inst(4, &arcs, Some(3));
        let (s, net) = solve_pl_additive_tw(&i, None).unwrap();
        assert_eq!(s, 3);
        assert!(validate(&net, Mode::Polytree, Some(3)).is_ok());
    }
}
