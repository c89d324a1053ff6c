//! Branching over arc sets among the dependent vertices.

use crate::error::{Error, Result};
use crate::instance::{LocalScore, Network, NonZeroInstance, VarId};

pub const DEFAULT_MAX_DEPENDENT: usize = 5;
/// Beyond this the branch count 3^(k choose 2) no longer fits comfortably in memory or time.
pub const HARD_MAX_DEPENDENT: usize = 8;

/// Vertices with at least one non-empty candidate parent set.
pub fn dependent_vertices(inst: &NonZeroInstance) -> Vec<VarId> {
    inst.dependent_vertices()
}

/// Number of branches before the acyclicity filter.
pub fn branch_count(k: usize) -> u128 {
    3u128.pow((k * k.saturating_sub(1) / 2) as u32)
}

fn acyclic(in_mask: &[u32]) -> bool {
    let k = in_mask.len();
    let mut done = 0u32;
    for _ in 0..k {
        match (0..k).find(|&i| done >> i & 1 == 0 && in_mask[i] & !done == 0) {
            Some(i) => done |= 1 << i,
            None => return false,
        }
    }
    true
}

/// Exact optimum when few vertices have candidate parents.
pub fn solve_bnsl_depset(inst: &NonZeroInstance, max_dependent: usize) -> Result<(u64, Network)> {
    let n = inst.n();
    let xs = dependent_vertices(inst);
    let k = xs.len();
    let limit = max_dependent.min(HARD_MAX_DEPENDENT);
    if k > limit {
        return Err(Error::Invalid(format!(
            "{k} dependent vertices exceed the limit of {limit}; use the lfen or oracle algorithm instead"
        )));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in xs.iter().enumerate() {
        pos[x] = i;
    }
    // table[i][mask] = best listed score whose parents inside X are exactly mask, with its entry
    let mut table: Vec<Vec<(u64, Option<usize>)>> = Vec::with_capacity(k);
    for &x in &xs {
        let mut t = vec![(0u64, None); 1 << k];
        for (e_idx, e) in inst.family(x).iter().enumerate() {
            let m = e.parents.iter().filter(|&&p| pos[p] != usize::MAX).fold(0usize, |m, &p| m | 1 << pos[p]);
            if e.score > t[m].0 {
                t[m] = (e.score, Some(e_idx));
            }
        }
        table.push(t);
    }
    let base: u64 = (0..n).filter(|&v| pos[v] == usize::MAX).map(|v| inst.empty_score(v)).sum();

    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let mut state = vec![0u8; pairs.len()];
    let mut best: Option<(u64, Vec<u32>)> = None;
    loop {
        let mut in_mask = vec![0u32; k];
        for (&(i, j), &s) in pairs.iter().zip(&state) {
            match s {
                1 => in_mask[j] |= 1 << i,
                2 => in_mask[i] |= 1 << j,
                _ => {}
            }
        }
        if acyclic(&in_mask) {
            let s: u64 = (0..k).map(|i| table[i][in_mask[i] as usize].0).sum();
            if best.as_ref().map_or(true, |b| s > b.0) {
                best = Some((s, in_mask));
            }
        }
        // odometer
        let mut d = 0;
        while d < state.len() && state[d] == 2 {
            state[d] = 0;
            d += 1;
        }
        if d == state.len() {
            break;
        }
        state[d] += 1;
    }
    let (s, in_mask) = best.expect("the empty arc set is acyclic");
    let mut net = Network::empty(n);
    for (i, &x) in xs.iter().enumerate() {
        match table[i][in_mask[i] as usize].1 {
            // parents outside X have no parents themselves, so any listed set extends the branch
            Some(e) => net.set_parents(x, inst.family(x)[e].parents.clone()),
            // unlisted exact parent set: score 0
            None => net.set_parents(x, (0..k).filter(|&j| in_mask[i] >> j & 1 == 1).map(|j| xs[j]).collect()),
        }
    }
    Ok((s + base, net))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{figure_example, score_of, validate, Mode, ParentSet};

    #[test]
    fn example() {
        let inst = figure_example();
        assert_eq!(dependent_vertices(&inst), vec![0, 1, 2, 3]);
        let (s, net) = solve_bnsl_depset(&inst, DEFAULT_MAX_DEPENDENT).unwrap();
        assert_eq!(s, 7);
        assert_eq!(score_of(&inst, &net), 7);
        assert!(validate(&net, Mode::Dag, None).is_ok());
    }

    #[test]
    fn no_dependent_vertices() {
        let inst = NonZeroInstance::with_default_names(vec![
            vec![ParentSet::new(vec![], 4)],
            vec![],
            vec![ParentSet::new(vec![], 1)],
        ])
        .unwrap();
        assert!(dependent_vertices(&inst).is_empty());
        assert_eq!(solve_bnsl_depset(&inst, 0).unwrap(), (5, Network::empty(3)));
    }

    #[test]
    fn over_limit_is_refused() {
        assert!(solve_bnsl_depset(&figure_example(), 3).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(branch_count(0), 1);
        assert_eq!(branch_count(4), 729);
        assert!(!acyclic(&[0b10, 0b01]));
        assert!(acyclic(&[0b10, 0b00]));
    }
}
