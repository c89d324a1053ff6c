//! Polynomial-time polytree learning for additive scores.

use crate::error::{Error, Result};
use crate::graph::UnionFind;
use crate::instance::{AdditiveInstance, LocalScore, Network, VarId};

/// A candidate arc with its additive score.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundElement {
    pub parent: VarId,
    pub child: VarId,
    pub weight: u64,
}

impl GroundElement {
    pub fn skeleton_edge(&self) -> (VarId, VarId) {
        (self.parent.min(self.child), self.parent.max(self.child))
    }
}

/// Positive-score arcs of the instance, ordered by (child, parent).
pub fn ground_set(inst: &AdditiveInstance) -> Vec<GroundElement> {
    let mut out: Vec<GroundElement> = inst
        .arcs()
        .iter()
        .filter(|(_, &w)| w > 0)
        .map(|(&(parent, child), &weight)| GroundElement { parent, child, weight })
        .collect();
    out.sort_by_key(|e| (e.child, e.parent));
    out
}

/// Graphic matroid on the skeleton: the chosen arcs form a forest.
pub fn graphic_independent(n: usize, elems: &[GroundElement], set: &[usize]) -> bool {
    let mut uf = UnionFind::new(n);
    set.iter().all(|&i| uf.union(elems[i].parent, elems[i].child))
}

/// Partition matroid: every child receives at most `q` arcs.
pub fn partition_independent(n: usize, q: usize, elems: &[GroundElement], set: &[usize]) -> bool {
    let mut indeg = vec![0usize; n];
    set.iter().all(|&i| {
        indeg[elems[i].child] += 1;
        indeg[elems[i].child] <= q
    })
}

/// Maximum spanning forest of the skeleton weighted by the better orientation.
pub fn solve_pl_additive_mst(inst: &AdditiveInstance) -> Result<(u64, Network)> {
    let n = inst.n();
    if inst.max_in_degree().is_some_and(|q| q + 1 < n) {
        return Err(Error::Invalid(
            "in-degree bound present; use the matroid intersection solver".into(),
        ));
    }
    let mut edges: Vec<(u64, VarId, VarId)> = inst
        .superstructure()
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let (fu, fv) = (inst.arc_score(v, u), inst.arc_score(u, v));
            // (weight, parent, child); ties go to the smaller parent
            if fv >= fu {
                (fv, u, v)
            } else {
                (fu, v, u)
            }
        })
        .filter(|e| e.0 > 0)
        .collect();
    edges.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.min(a.2).cmp(&b.1.min(b.2))).then(a.1.max(a.2).cmp(&b.1.max(b.2))));
    let mut uf = UnionFind::new(n);
    let mut net = Network::empty(n);
    let mut total = 0;
    for (w, p, c) in edges {
        if uf.union(p, c) {
            net.add_arc(p, c);
            total += w;
        }
    }
    Ok((total, net))
}

/// Result of weighted matroid intersection.
#[derive(Clone, Debug)]
pub struct Intersection {
    pub best: Vec<usize>,
    pub weight: u64,
    /// The set after each augmentation; stage k has k elements and maximum
    /// weight among common independent sets of that size.
    pub stages: Vec<(Vec<usize>, u64)>,
}

/// Maximum-weight common independent set by shortest augmenting paths.
pub fn weighted_matroid_intersection(
    weights: &[u64],
    indep1: &dyn Fn(&[usize]) -> bool,
    indep2: &dyn Fn(&[usize]) -> bool,
) -> Intersection {
    let m = weights.len();
    let mut in_set = vec![false; m];
    let mut cur: Vec<usize> = Vec::new();
    let mut cur_w: u64 = 0;
    let mut stages = vec![(Vec::new(), 0)];
    loop {
        let outside: Vec<usize> = (0..m).filter(|&y| !in_set[y]).collect();
        let with = |set: &[usize], y: usize| -> Vec<usize> {
            let mut s = set.to_vec();
            s.push(y);
            s
        };
        let swap = |x: usize, y: usize| -> Vec<usize> {
            let mut s: Vec<usize> = cur.iter().copied().filter(|&e| e != x).collect();
            s.push(y);
            s
        };
        let sources: Vec<usize> = outside.iter().copied().filter(|&y| indep1(&with(&cur, y))).collect();
        let sinks: Vec<bool> = {
            let mut s = vec![false; m];
            for &y in &outside {
                s[y] = indep2(&with(&cur, y));
            }
            s
        };
        // exchange graph
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
        for &x in &cur {
            for &y in &outside {
                let s = swap(x, y);
                if indep1(&s) {
                    adj[x].push(y);
                }
                if indep2(&s) {
                    adj[y].push(x);
                }
            }
        }
        let len = |e: usize| -> i128 {
            if in_set[e] {
                weights[e] as i128
            } else {
                -(weights[e] as i128)
            }
        };
        // Bellman-Ford on vertex lengths, lexicographic (length, hops)
        let mut dist: Vec<Option<(i128, usize)>> = vec![None; m];
        let mut prev = vec![usize::MAX; m];
        for &s in &sources {
            dist[s] = Some((len(s), 0));
        }
        for _ in 0..m {
            let mut changed = false;
            for u in 0..m {
                let Some((du, hu)) = dist[u] else { continue };
                for &w in &adj[u] {
                    let cand = (du + len(w), hu + 1);
                    if dist[w].map_or(true, |d| cand < d) {
                        dist[w] = Some(cand);
                        prev[w] = u;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let end = (0..m)
            .filter(|&y| sinks[y] && dist[y].is_some())
            .min_by_key(|&y| (dist[y].unwrap(), y));
        let Some(mut y) = end else { break };
        let mut path = vec![y];
        while prev[y] != usize::MAX {
            y = prev[y];
            path.push(y);
        }
        for &e in &path {
            in_set[e] = !in_set[e];
        }
        cur = (0..m).filter(|&e| in_set[e]).collect();
        cur_w = cur.iter().map(|&e| weights[e]).sum();
        stages.push((cur.clone(), cur_w));
    }
    let _ = cur_w;
    let (best, weight) = stages
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.len().cmp(&a.0.len())))
        .cloned()
        .unwrap_or_default();
    Intersection { best, weight, stages }
}

/// Optimal polytree with in-degree at most q (unbounded if the instance has no bound).
pub fn solve_pl_additive_bounded(inst: &AdditiveInstance) -> Result<(u64, Network)> {
    let n = inst.n();
    let q = inst.max_in_degree().unwrap_or(n);
    let elems = ground_set(inst);
    let weights: Vec<u64> = elems.iter().map(|e| e.weight).collect();
    let g1 = |s: &[usize]| graphic_independent(n, &elems, s);
    let g2 = |s: &[usize]| partition_independent(n, q, &elems, s);
    let res = weighted_matroid_intersection(&weights, &g1, &g2);
    let mut net = Network::empty(n);
    for &i in &res.best {
        net.add_arc(elems[i].parent, elems[i].child);
    }
    Ok((res.weight, net))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{default_names, score_of, validate, Mode};

    fn inst(n: usize, arcs: &[((VarId, VarId), u64)], q: Option<usize>) -> AdditiveInstance {
        AdditiveInstance::new(default_names(n), arcs.iter().copied(), q).unwrap()
    }

    #[test]
    fn mst_triangle() {
        let i = inst(3, &[((0, 1), 3), ((0, 2), 2), ((1, 2), 1)], None);
        let (s, net) = solve_pl_additive_mst(&i).unwrap();
        assert_eq!(s, 5);
        assert_eq!(net.arcs(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn all_zero_is_empty() {
        let i = inst(3, &[], None);
        assert_eq!(solve_pl_additive_mst(&i).unwrap(), (0, Network::empty(3)));
        let b = inst(3, &[], Some(1));
        assert_eq!(solve_pl_additive_bounded(&b).unwrap().0, 0);
    }

    #[test]
    fn single_and_parallel_elements() {
        let yes = |_: &[usize]| true;
        let r = weighted_matroid_intersection(&[4], &yes, &yes);
        assert_eq!((r.best, r.weight), (vec![0], 4));
        let i = inst(2, &[((0, 1), 2), ((1, 0), 3)], Some(1));
        let (s, net) = solve_pl_additive_bounded(&i).unwrap();
        assert_eq!(s, 3);
        assert_eq!(net.arcs(), vec![(1, 0)]);
    }

    #[test]
    fn star_with_unit_bound() {
        // leaves 1..4 want the centre as child; centre can take only one parent
        let arcs = [((1, 0), 5), ((2, 0), 4), ((3, 0), 3), ((0, 2), 1), ((0, 3), 2)];
        let i = inst(4, &arcs, Some(1));
        let (s, net) = solve_pl_additive_bounded(&i).unwrap();
        assert_eq!(s, 8);
        assert!(validate(&net, Mode::Polytree, Some(1)).is_ok());
        assert_eq!(score_of(&i, &net), 8);
    }
}
