//! Binary relations over a small local universe, stored as row bitmasks.

/// Relation over `0..len` with `len <= 64`; row `i` has bit `j` set iff `(i, j)` is related.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rel {
    rows: Vec<u64>,
}

impl Rel {
    pub fn empty(len: usize) -> Self {
        assert!(len <= 64, "relation universe too large");
        Rel { rows: vec![0; len] }
    }

    pub fn from_pairs(len: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Rel::empty(len);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        self.rows[a] |= 1 << b;
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    pub fn row(&self, a: usize) -> u64 {
        self.rows[a]
    }

    pub fn union_with(&mut self, other: &Rel) {
        for (x, y) in self.rows.iter_mut().zip(&other.rows) {
            *x |= y;
        }
    }

    pub fn intersection(&self, other: &Rel) -> Rel {
        Rel {
            rows: self.rows.iter().zip(&other.rows).map(|(x, y)| x & y).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(a, &row)| {
            (0..64).filter(move |b| row >> b & 1 == 1).map(move |b| (a, b))
        })
    }

    /// Transitive closure (Warshall).
    pub fn closure(&self) -> Rel {
        let mut rows = self.rows.clone();
        for k in 0..rows.len() {
            let rk = rows[k];
            let bit = 1u64 << k;
            for r in rows.iter_mut() {
                if *r & bit != 0 {
                    *r |= rk;
                }
            }
        }
        Rel { rows }
    }

    pub fn is_irreflexive(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| r >> i & 1 == 0)
    }

    /// Symmetric closure.
    pub fn symmetric(&self) -> Rel {
        let mut r = self.clone();
        for (a, b) in self.pairs().collect::<Vec<_>>() {
            r.insert(b, a);
        }
        r
    }

    /// Restriction to the elements listed in `keep`, re-indexed by position.
    pub fn restrict(&self, keep: &[usize]) -> Rel {
        let mut r = Rel::empty(keep.len());
        for (i, &a) in keep.iter().enumerate() {
            let row = self.rows[a];
            if row == 0 {
                continue;
            }
            for (j, &b) in keep.iter().enumerate() {
                if row >> b & 1 == 1 {
                    r.insert(i, j);
                }
            }
        }
        r
    }

    /// Image under an index map into a universe of size `len`.
    pub fn remap(&self, map: &[usize], len: usize) -> Rel {
        let mut r = Rel::empty(len);
        for (a, b) in self.pairs() {
            r.insert(map[a], map[b]);
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_of_chain() {
        let r = Rel::from_pairs(4, [(0, 1), (1, 2), (2, 3)]).closure();
        assert!(r.contains(0, 3));
        assert!(r.is_irreflexive());
        assert_eq!(r.count(), 6);
        let c = Rel::from_pairs(3, [(0, 1), (1, 2), (2, 0)]).closure();
        assert!(!c.is_irreflexive());
    }

    #[test]
    fn restrict_and_remap() {
        let r = Rel::from_pairs(4, [(0, 3), (3, 1)]);
        let s = r.restrict(&[3, 1]);
        assert_eq!(s, Rel::from_pairs(2, [(0, 1)]));
        let t = s.remap(&[2, 0], 3);
        assert_eq!(t, Rel::from_pairs(3, [(2, 0)]));
    }
}
