//! Score representations, networks, and the text formats for both.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{parse_err, Error, Result};
use crate::graph::{Graph, UnionFind};

pub type VarId = usize;

/// Candidate parent set of one child together with its local score.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParentSet {
    pub parents: Vec<VarId>,
    pub score: u64,
}

impl ParentSet {
    pub fn new(mut parents: Vec<VarId>, score: u64) -> Self {
        parents.sort_unstable();
        ParentSet { parents, score }
    }
}

/// Anything that assigns a local score to a (child, parent set) pair.
pub trait LocalScore {
    fn n(&self) -> usize;
    /// `parents` must be sorted ascending.
    fn local_score(&self, child: VarId, parents: &[VarId]) -> u64;
    fn superstructure(&self) -> Graph;
}

/// Scores listed only for parent sets with a non-zero value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonZeroInstance {
    names: Vec<String>,
    families: Vec<Vec<ParentSet>>,
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) || name.starts_with('#') {
        return Err(Error::Invalid(format!("bad variable name {name:?}")));
    }
    Ok(())
}

fn check_unique_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        check_name(name)?;
        if !seen.insert(name.as_str()) {
            return Err(Error::Invalid(format!("duplicate variable name {name}")));
        }
    }
    Ok(())
}

pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

impl NonZeroInstance {
    /// Builds an instance, sorting each parent list and rejecting malformed entries.
    pub fn new(names: Vec<String>, families: Vec<Vec<ParentSet>>) -> Result<Self> {
        let n = names.len();
        if families.len() != n {
            return Err(Error::Invalid("one family per variable required".into()));
        }
        check_unique_names(&names)?;
        let mut families = families;
        let mut total: u64 = 0;
        for (v, fam) in families.iter_mut().enumerate() {
            let mut seen = HashSet::new();
            let mut best = 0u64;
            for entry in fam.iter_mut() {
                entry.parents.sort_unstable();
                if entry.parents.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Invalid(format!("repeated parent for {}", names[v])));
                }
                if entry.parents.iter().any(|&p| p >= n) {
                    return Err(Error::Invalid("parent index out of range".into()));
                }
                if entry.parents.contains(&v) {
                    return Err(Error::Invalid(format!("{} in its own parent set", names[v])));
                }
                if !entry.parents.is_empty() && entry.score == 0 {
                    return Err(Error::Invalid(format!(
                        "zero score for a non-empty parent set of {}",
                        names[v]
                    )));
                }
                if !seen.insert(entry.parents.clone()) {
                    return Err(Error::Invalid(format!(
                        "duplicate parent set for {}",
                        names[v]
                    )));
                }
                best = best.max(entry.score);
            }
            total = total.checked_add(best).ok_or(Error::ScoreOverflow)?;
        }
        Ok(NonZeroInstance { names, families })
    }

    pub fn with_default_names(families: Vec<Vec<ParentSet>>) -> Result<Self> {
        Self::new(default_names(families.len()), families)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v]
    }

    pub fn family(&self, v: VarId) -> &[ParentSet] {
        &self.families[v]
    }

    pub fn families(&self) -> &[Vec<ParentSet>] {
        &self.families
    }

    pub fn num_entries(&self) -> usize {
        self.families.iter().map(Vec::len).sum()
    }

    /// f_v(∅): the listed empty-set score, or 0.
    pub fn empty_score(&self, v: VarId) -> u64 {
        self.local_score(v, &[])
    }

    /// Upper bound on any network score: sum of per-child maxima.
    pub fn score_bound(&self) -> u64 {
        self.families
            .iter()
            .map(|f| f.iter().map(|e| e.score).max().unwrap_or(0))
            .sum()
    }

    /// Vertices with at least one non-empty candidate parent set.
    pub fn dependent_vertices(&self) -> Vec<VarId> {
        (0..self.n())
            .filter(|&v| self.families[v].iter().any(|e| !e.parents.is_empty()))
            .collect()
    }

    /// Drops every parent set larger than `q`.
    pub fn restrict_in_degree(&self, q: usize) -> NonZeroInstance {
        let families = self
            .families
            .iter()
            .map(|f| f.iter().filter(|e| e.parents.len() <= q).cloned().collect())
            .collect();
        NonZeroInstance {
            names: self.names.clone(),
            families,
        }
    }

    /// Removes entries dominated by a subset with at least the same score.
    pub fn drop_dominated(&self) -> NonZeroInstance {
        let families = self
            .families
            .iter()
            .map(|fam| {
                fam.iter()
                    .filter(|e| {
                        !fam.iter().any(|o| {
                            o.parents.len() < e.parents.len()
                                && o.score >= e.score
                                && o.parents.iter().all(|p| e.parents.contains(p))
                        }) && !(e.score == 0 && !e.parents.is_empty())
                    })
                    .cloned()
                    .collect()
            })
            .collect();
        NonZeroInstance {
            names: self.names.clone(),
            families,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = content_lines(text);
        let mut it = lines.iter();
        let Some(&(hl, header)) = it.next() else {
            return parse_err(0, "empty file");
        };
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 1 {
            return parse_err(hl, "expected variable count");
        }
        let n: usize = toks[0]
            .parse()
            .or_else(|_| parse_err(hl, "variable count is not a number"))?;

        struct RawEntry<'a> {
            line: usize,
            score: u64,
            parents: Vec<&'a str>,
        }
        let mut blocks: Vec<(usize, &str, Vec<RawEntry>)> = Vec::new();
        while let Some(&(ln, line)) = it.next() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return parse_err(ln, "expected `<name> <entry-count>`");
            }
            let count: usize = toks[1]
                .parse()
                .or_else(|_| parse_err(ln, "entry count is not a number"))?;
            let mut entries = Vec::with_capacity(count);
            for _ in 0..count {
                let Some(&(el, eline)) = it.next() else {
                    return parse_err(ln, format!("missing entries for {}", toks[0]));
                };
                let et: Vec<&str> = eline.split_whitespace().collect();
                if et.len() < 2 {
                    return parse_err(el, "expected `<score> <k> <parents...>`");
                }
                let score: u64 = et[0].parse().or_else(|_| {
                    parse_err(el, "score is not a non-negative integer (or overflows)")
                })?;
                let k: usize = et[1]
                    .parse()
                    .or_else(|_| parse_err(el, "parent count is not a number"))?;
                if et.len() != k + 2 {
                    return parse_err(el, format!("expected {k} parents, found {}", et.len() - 2));
                }
                entries.push(RawEntry {
                    line: el,
                    score,
                    parents: et[2..].to_vec(),
                });
            }
            blocks.push((ln, toks[0], entries));
        }
        if blocks.len() != n {
            return parse_err(hl, format!("declared {n} variables, found {}", blocks.len()));
        }
        let mut index = HashMap::new();
        for (i, (ln, name, _)) in blocks.iter().enumerate() {
            if check_name(name).is_err() {
                return parse_err(*ln, format!("bad variable name {name}"));
            }
            if index.insert(*name, i).is_some() {
                return parse_err(*ln, format!("variable {name} declared twice"));
            }
        }
        let mut families = Vec::with_capacity(n);
        let mut total: u64 = 0;
        for (v, (_, name, entries)) in blocks.iter().enumerate() {
            let mut fam = Vec::with_capacity(entries.len());
            let mut seen = HashSet::new();
            let mut best = 0u64;
            for e in entries {
                let mut ps = Vec::with_capacity(e.parents.len());
                for p in &e.parents {
                    let Some(&pi) = index.get(p) else {
                        return parse_err(e.line, format!("unknown variable {p}"));
                    };
                    if pi == v {
                        return parse_err(e.line, format!("{name} in its own parent set"));
                    }
                    ps.push(pi);
                }
                ps.sort_unstable();
                if ps.windows(2).any(|w| w[0] == w[1]) {
                    return parse_err(e.line, "repeated parent");
                }
                if !ps.is_empty() && e.score == 0 {
                    return parse_err(e.line, "zero score listed for a non-empty parent set");
                }
                if !seen.insert(ps.clone()) {
                    return parse_err(e.line, format!("duplicate parent set for {name}"));
                }
                best = best.max(e.score);
                fam.push(ParentSet {
                    parents: ps,
                    score: e.score,
                });
            }
            total = total.checked_add(best).ok_or(Error::ScoreOverflow)?;
            families.push(fam);
        }
        let names = blocks.iter().map(|b| b.1.to_string()).collect();
        Ok(NonZeroInstance { names, families })
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.n()).unwrap();
        for (v, fam) in self.families.iter().enumerate() {
            writeln!(out, "{} {}", self.names[v], fam.len()).unwrap();
            for e in fam {
                write!(out, "{} {}", e.score, e.parents.len()).unwrap();
                for &p in &e.parents {
                    write!(out, " {}", self.names[p]).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    /// One sub-instance per superstructure component.
    pub fn split_components(&self) -> Vec<Component<NonZeroInstance>> {
        let g = self.superstructure();
        g.components()
            .into_iter()
            .map(|vars| {
                let local = local_index(self.n(), &vars);
                let names = vars.iter().map(|&v| self.names[v].clone()).collect();
                let families = vars
                    .iter()
                    .map(|&v| {
                        self.families[v]
                            .iter()
                            .map(|e| ParentSet {
                                parents: e.parents.iter().map(|&p| local[p]).collect(),
                                score: e.score,
                            })
                            .collect()
                    })
                    .collect();
                Component {
                    instance: NonZeroInstance { names, families },
                    vars,
                }
            })
            .collect()
    }
}

fn local_index(n: usize, vars: &[VarId]) -> Vec<usize> {
    let mut local = vec![usize::MAX; n];
    for (i, &v) in vars.iter().enumerate() {
        local[v] = i;
    }
    local
}

/// A sub-instance plus the original id of each of its variables.
#[derive(Clone, Debug)]
pub struct Component<I> {
    pub instance: I,
    pub vars: Vec<VarId>,
}

impl LocalScore for NonZeroInstance {
    fn n(&self) -> usize {
        self.names.len()
    }

    fn local_score(&self, child: VarId, parents: &[VarId]) -> u64 {
        self.families[child]
            .iter()
            .find(|e| e.parents == parents)
            .map_or(0, |e| e.score)
    }

    fn superstructure(&self) -> Graph {
        let mut g = Graph::new(self.n());
        for (v, fam) in self.families.iter().enumerate() {
            for e in fam {
                for &p in &e.parents {
                    g.add_edge(v, p);
                }
            }
        }
        g
    }
}

/// Per-arc scores; the score of a parent set is the sum over its members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveInstance {
    names: Vec<String>,
    /// (parent, child) -> score, only positive values.
    arcs: BTreeMap<(VarId, VarId), u64>,
    max_in_degree: Option<usize>,
}

impl AdditiveInstance {
    pub fn new(
        names: Vec<String>,
        arcs: impl IntoIterator<Item = ((VarId, VarId), u64)>,
        max_in_degree: Option<usize>,
    ) -> Result<Self> {
        check_unique_names(&names)?;
        let n = names.len();
        if max_in_degree == Some(0) {
            return Err(Error::Invalid("in-degree bound must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for ((p, c), s) in arcs {
            if p >= n || c >= n {
                return Err(Error::Invalid("arc endpoint out of range".into()));
            }
            if p == c {
                return Err(Error::Invalid("self-arc".into()));
            }
            if s > 0 && map.insert((p, c), s).is_some() {
                return Err(Error::Invalid("duplicate arc".into()));
            }
        }
        let inst = AdditiveInstance {
            names,
            arcs: map,
            max_in_degree,
        };
        inst.check_overflow()?;
        Ok(inst)
    }

    fn check_overflow(&self) -> Result<()> {
        let mut total: u64 = 0;
        for &s in self.arcs.values() {
            total = total.checked_add(s).ok_or(Error::ScoreOverflow)?;
        }
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v]
    }

    pub fn arcs(&self) -> &BTreeMap<(VarId, VarId), u64> {
        &self.arcs
    }

    /// f_child({parent}).
    pub fn arc_score(&self, parent: VarId, child: VarId) -> u64 {
        self.arcs.get(&(parent, child)).copied().unwrap_or(0)
    }

    pub fn max_in_degree(&self) -> Option<usize> {
        self.max_in_degree
    }

    pub fn with_max_in_degree(&self, q: Option<usize>) -> AdditiveInstance {
        AdditiveInstance {
            max_in_degree: q,
            ..self.clone()
        }
    }

    /// Parents with a positive arc score into `child`.
    pub fn positive_parents(&self, child: VarId) -> Vec<VarId> {
        self.arcs
            .keys()
            .filter(|&&(_, c)| c == child)
            .map(|&(p, _)| p)
            .collect()
    }

    /// Equivalent non-zero instance: every non-empty subset of positive parents
    /// of size at most q. Exponential in the in-degree, so it is capped.
    pub fn to_nonzero(&self, max_parents_considered: usize) -> Result<NonZeroInstance> {
        let q = self.max_in_degree.unwrap_or(usize::MAX);
        let mut families = Vec::with_capacity(self.n());
        for v in 0..self.n() {
            let pp = self.positive_parents(v);
            if pp.len() > max_parents_considered {
                return Err(Error::TooLarge {
                    what: "positive in-degree for expansion",
                    limit: max_parents_considered,
                    actual: pp.len(),
                });
            }
            let mut fam = Vec::new();
            for mask in 1u32..(1u32 << pp.len()) {
                if mask.count_ones() as usize > q {
                    continue;
                }
                let parents: Vec<VarId> = (0..pp.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| pp[i])
                    .collect();
                let score = parents.iter().map(|&p| self.arc_score(p, v)).sum();
                fam.push(ParentSet { parents, score });
            }
            families.push(fam);
        }
        NonZeroInstance::new(self.names.clone(), families)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut declared: Option<Vec<String>> = None;
        for (ln, raw) in text.lines().enumerate() {
            let t = raw.trim();
            if let Some(rest) = t.strip_prefix("# vars:") {
                if declared.is_some() {
                    return parse_err(ln + 1, "variable names declared twice");
                }
                declared = Some(rest.split_whitespace().map(str::to_string).collect());
            }
        }
        let lines = content_lines(text);
        let mut it = lines.iter();
        let Some(&(hl, header)) = it.next() else {
            return parse_err(0, "empty file");
        };
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.is_empty() || toks[0] != "additive" || toks.len() > 3 || toks.len() < 2 {
            return parse_err(hl, "expected `additive <n> [q]`");
        }
        let n: usize = toks[1]
            .parse()
            .or_else(|_| parse_err(hl, "variable count is not a number"))?;
        let q = match toks.get(2) {
            None => None,
            Some(s) => {
                let q: i64 = s
                    .parse()
                    .or_else(|_| parse_err(hl, "in-degree bound is not a number"))?;
                if q <= 0 {
                    return parse_err(hl, "in-degree bound must be positive");
                }
                Some(q as usize)
            }
        };
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        if let Some(d) = declared {
            if d.len() != n {
                return parse_err(hl, format!("declared {n} variables, named {}", d.len()));
            }
            for name in d {
                if check_name(&name).is_err() || index.contains_key(&name) {
                    return parse_err(hl, format!("bad or repeated variable name {name}"));
                }
                index.insert(name.clone(), names.len());
                names.push(name);
            }
        }
        let fixed = !names.is_empty() || n == 0;
        let mut arcs = BTreeMap::new();
        let mut total: u64 = 0;
        for &(ln, line) in it {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return parse_err(ln, "expected `<child> <parent> <score>`");
            }
            let mut id = |name: &str| -> Result<usize> {
                if let Some(&i) = index.get(name) {
                    return Ok(i);
                }
                if fixed || names.len() == n || check_name(name).is_err() {
                    return parse_err(ln, format!("unknown variable {name}"));
                }
                index.insert(name.to_string(), names.len());
                names.push(name.to_string());
                Ok(names.len() - 1)
            };
            let c = id(t[0])?;
            let p = id(t[1])?;
            if c == p {
                return parse_err(ln, "self-arc");
            }
            let s: u64 = t[2]
                .parse()
                .or_else(|_| parse_err(ln, "score is not a non-negative integer (or overflows)"))?;
            if s == 0 {
                continue;
            }
            if arcs.insert((p, c), s).is_some() {
                return parse_err(ln, "duplicate arc");
            }
            total = total.checked_add(s).ok_or(Error::ScoreOverflow)?;
        }
        let mut k = 0;
        while names.len() < n {
            let cand = format!("v{k}");
            k += 1;
            if !index.contains_key(&cand) {
                index.insert(cand.clone(), names.len());
                names.push(cand);
            }
        }
        Ok(AdditiveInstance {
            names,
            arcs,
            max_in_degree: q,
        })
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        match self.max_in_degree {
            Some(q) => writeln!(out, "additive {} {q}", self.n()).unwrap(),
            None => writeln!(out, "additive {}", self.n()).unwrap(),
        }
        writeln!(out, "# vars: {}", self.names.join(" ")).unwrap();
        let mut lines: Vec<_> = self.arcs.iter().collect();
        lines.sort_by_key(|(&(p, c), _)| (c, p));
        for (&(p, c), s) in lines {
            writeln!(out, "{} {} {s}", self.names[c], self.names[p]).unwrap();
        }
        out
    }

    pub fn split_components(&self) -> Vec<Component<AdditiveInstance>> {
        let g = self.superstructure();
        g.components()
            .into_iter()
            .map(|vars| {
                let local = local_index(self.n(), &vars);
                let names = vars.iter().map(|&v| self.names[v].clone()).collect();
                let arcs = self
                    .arcs
                    .iter()
                    .filter(|(&(p, _), _)| local[p] != usize::MAX)
                    .map(|(&(p, c), &s)| ((local[p], local[c]), s))
                    .collect();
                Component {
                    instance: AdditiveInstance {
                        names,
                        arcs,
                        max_in_degree: self.max_in_degree,
                    },
                    vars,
                }
            })
            .collect()
    }
}

impl LocalScore for AdditiveInstance {
    fn n(&self) -> usize {
        self.names.len()
    }

    fn local_score(&self, child: VarId, parents: &[VarId]) -> u64 {
        parents.iter().map(|&p| self.arc_score(p, child)).sum()
    }

    fn superstructure(&self) -> Graph {
        Graph::from_edges(self.n(), self.arcs.keys().copied())
    }
}

/// Non-empty, non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// A directed graph given by one sorted parent list per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Network {
    parents: Vec<Vec<VarId>>,
}

impl Network {
    pub fn empty(n: usize) -> Self {
        Network {
            parents: vec![Vec::new(); n],
        }
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (VarId, VarId)>) -> Self {
        let mut net = Network::empty(n);
        for (p, c) in arcs {
            net.add_arc(p, c);
        }
        net
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn add_arc(&mut self, parent: VarId, child: VarId) {
        if let Err(pos) = self.parents[child].binary_search(&parent) {
            self.parents[child].insert(pos, parent);
        }
    }

    pub fn remove_arc(&mut self, parent: VarId, child: VarId) {
        if let Ok(pos) = self.parents[child].binary_search(&parent) {
            self.parents[child].remove(pos);
        }
    }

    pub fn has_arc(&self, parent: VarId, child: VarId) -> bool {
        self.parents[child].binary_search(&parent).is_ok()
    }

    pub fn parents(&self, v: VarId) -> &[VarId] {
        &self.parents[v]
    }

    pub fn set_parents(&mut self, v: VarId, mut parents: Vec<VarId>) {
        parents.sort_unstable();
        parents.dedup();
        self.parents[v] = parents;
    }

    /// Arcs as (parent, child), ordered by child then parent.
    pub fn arcs(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                out.push((p, c));
            }
        }
        out
    }

    pub fn num_arcs(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Copy of this network on `n` vertices; arcs touching vertices >= n are dropped.
    pub fn resized(&self, n: usize) -> Network {
        let mut net = Network::empty(n);
        for (p, c) in self.arcs() {
            if p < n && c < n {
                net.add_arc(p, c);
            }
        }
        net
    }

    pub fn write(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (c, ps) in self.parents.iter().enumerate() {
            if ps.is_empty() {
                continue;
            }
            write!(out, "{} <-", names[c]).unwrap();
            for &p in ps {
                write!(out, " {}", names[p]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, names: &[String]) -> Result<Network> {
        let index: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut net = Network::empty(names.len());
        let mut seen = HashSet::new();
        for (ln, line) in content_lines(text) {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() < 2 || t[1] != "<-" {
                return parse_err(ln, "expected `<child> <- <parents...>`");
            }
            let Some(&c) = index.get(t[0]) else {
                return parse_err(ln, format!("unknown variable {}", t[0]));
            };
            if !seen.insert(c) {
                return parse_err(ln, format!("parents of {} given twice", t[0]));
            }
            for p in &t[2..] {
                let Some(&pi) = index.get(p) else {
                    return parse_err(ln, format!("unknown variable {p}"));
                };
                if pi == c {
                    return parse_err(ln, "self-loop");
                }
                net.add_arc(pi, c);
            }
        }
        Ok(net)
    }
}

pub fn score_of(inst: &impl LocalScore, net: &Network) -> u64 {
    (0..inst.n()).map(|v| inst.local_score(v, net.parents(v))).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Dag,
    Polytree,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Directed cycle, listed in arc order.
    Cycle(Vec<VarId>),
    /// Cycle in the skeleton (or an arc present in both orientations).
    SkeletonCycle(Vec<VarId>),
    InDegree { vertex: VarId, degree: usize, bound: usize },
    WrongSize { expected: usize, actual: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Cycle(c) => write!(f, "directed cycle through {c:?}"),
            Violation::SkeletonCycle(c) => write!(f, "skeleton cycle through {c:?}"),
            Violation::InDegree {
                vertex,
                degree,
                bound,
            } => write!(f, "vertex {vertex} has {degree} parents, bound {bound}"),
            Violation::WrongSize { expected, actual } => {
                write!(f, "network has {actual} vertices, expected {expected}")
            }
        }
    }
}

/// Finds a directed cycle, if any.
pub fn find_cycle(net: &Network) -> Option<Vec<VarId>> {
    let n = net.n();
    let mut children = vec![Vec::new(); n];
    for (p, c) in net.arcs() {
        children[p].push(c);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut pred = vec![usize::MAX; n];
    for s in 0..n {
        if state[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        state[s] = 1;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < children[u].len() {
                let w = children[u][*i];
                *i += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        pred[w] = u;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cyc = vec![u];
                        let mut x = u;
                        while x != w {
                            x = pred[x];
                            cyc.push(x);
                        }
                        cyc.reverse();
                        return Some(cyc);
                    }
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    }
    None
}

fn skeleton_cycle(net: &Network) -> Option<Vec<VarId>> {
    let n = net.n();
    let mut uf = UnionFind::new(n);
    let mut tree = Graph::new(n);
    for (p, c) in net.arcs() {
        if net.has_arc(c, p) {
            return Some(vec![p.min(c), p.max(c)]);
        }
        if !uf.union(p, c) {
            // path p .. c in the forest so far, closed by the arc
            let mut prev = vec![usize::MAX; n];
            let mut queue = std::collections::VecDeque::from([p]);
            prev[p] = p;
            while let Some(u) = queue.pop_front() {
                for &w in tree.neighbors(u) {
                    if prev[w] == usize::MAX {
                        prev[w] = u;
                        queue.push_back(w);
                    }
                }
            }
            let mut path = vec![c];
            let mut x = c;
            while x != p {
                x = prev[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        tree.add_edge(p, c);
    }
    None
}

pub fn validate(net: &Network, mode: Mode, q: Option<usize>) -> std::result::Result<(), Violation> {
    if let Some(bound) = q {
        for v in 0..net.n() {
            let degree = net.parents(v).len();
            if degree > bound {
                return Err(Violation::InDegree {
                    vertex: v,
                    degree,
                    bound,
                });
            }
        }
    }
    match mode {
        Mode::Dag => find_cycle(net).map_or(Ok(()), |c| Err(Violation::Cycle(c))),
        Mode::Polytree => skeleton_cycle(net).map_or(Ok(()), |c| Err(Violation::SkeletonCycle(c))),
    }
}

/// Validates against an instance's variable count before checking structure.
pub fn validate_for(
    inst: &impl LocalScore,
    net: &Network,
    mode: Mode,
    q: Option<usize>,
) -> std::result::Result<(), Violation> {
    if net.n() != inst.n() {
        return Err(Violation::WrongSize {
            expected: inst.n(),
            actual: net.n(),
        });
    }
    validate(net, mode, q)
}

/// Either score representation, as read from a file.
#[derive(Clone, Debug)]
pub enum AnyInstance {
    NonZero(NonZeroInstance),
    Additive(AdditiveInstance),
}

impl AnyInstance {
    /// Detects the representation from the header line.
    pub fn parse(text: &str) -> Result<AnyInstance> {
        let first = content_lines(text).first().map(|l| l.1);
        match first {
            Some(l) if l.starts_with("additive") => Ok(AnyInstance::Additive(AdditiveInstance::parse(text)?)),
            _ => Ok(AnyInstance::NonZero(NonZeroInstance::parse(text)?)),
        }
    }

    pub fn names(&self) -> &[String] {
        match self {
            AnyInstance::NonZero(i) => i.names(),
            AnyInstance::Additive(i) => i.names(),
        }
    }
}

impl LocalScore for AnyInstance {
    fn n(&self) -> usize {
        self.names().len()
    }

    fn local_score(&self, child: VarId, parents: &[VarId]) -> u64 {
        match self {
            AnyInstance::NonZero(i) => i.local_score(child, parents),
            AnyInstance::Additive(i) => i.local_score(child, parents),
        }
    }

    fn superstructure(&self) -> Graph {
        match self {
            AnyInstance::NonZero(i) => i.superstructure(),
            AnyInstance::Additive(i) => i.superstructure(),
        }
    }
}

/// The four-variable example used throughout the tests and docs.
pub fn figure_example() -> NonZeroInstance {
    let (a, b, c) = (0, 1, 2);
    let fam = |v: &[(&[VarId], u64)]| {
        v.iter()
            .map(|(p, s)| ParentSet::new(p.to_vec(), *s))
            .collect::<Vec<_>>()
    };
    NonZeroInstance::new(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec![
            fam(&[(&[b], 1), (&[c], 1), (&[b, c], 2)]),
            fam(&[(&[a], 1), (&[c], 1), (&[a, c], 3)]),
            fam(&[(&[a], 3), (&[b], 2)]),
            fam(&[(&[b, c], 1)]),
        ],
    )
    .expect("example instance is valid")
}

pub const FIGURE_EXAMPLE_TEXT: &str = "\
# four variables a, b, c, d
4
a 3
1 1 b
1 1 c
2 2 b c
b 3
1 1 a
1 1 c
3 2 a c
c 2
3 1 a
2 1 b
d 1
1 2 b c
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example_file() {
        let inst = NonZeroInstance::parse(FIGURE_EXAMPLE_TEXT).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.num_entries(), 9);
        assert_eq!(inst, figure_example());
        assert_eq!(inst.local_score(0, &[1]), 1);
        assert_eq!(inst.empty_score(0), 0);
    }

    #[test]
    fn single_variable_without_entries() {
        let inst = NonZeroInstance::parse("1\nx 0\n").unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.num_entries(), 0);
    }

    #[test]
    fn example_superstructure() {
        let g = figure_example().superstructure();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn example_network_scores_seven() {
        let inst = figure_example();
        let net = Network::from_arcs(4, [(0, 1), (2, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(score_of(&inst, &net), 7);
        assert!(validate(&net, Mode::Dag, None).is_ok());
        match validate(&net, Mode::Polytree, None) {
            Err(Violation::SkeletonCycle(c)) => {
                let mut c = c;
                c.sort_unstable();
                assert_eq!(c, vec![0, 1, 2]);
            }
            other => panic!("expected skeleton cycle, got {other:?}"),
        }
    }

    #[test]
    fn cycle_reported() {
        let net = Network::from_arcs(3, [(0, 1), (1, 2), (2, 0)]);
        assert_eq!(validate(&net, Mode::Dag, None), Err(Violation::Cycle(vec![0, 1, 2])));
        assert!(validate(&Network::empty(3), Mode::Dag, None).is_ok());
        assert!(validate(&Network::empty(3), Mode::Polytree, None).is_ok());
    }

    #[test]
    fn in_degree_violation() {
        let net = Network::from_arcs(3, [(0, 2), (1, 2)]);
        assert!(matches!(
            validate(&net, Mode::Dag, Some(1)),
            Err(Violation::InDegree { vertex: 2, degree: 2, bound: 1 })
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("2\na 1\n1 1 a\nb 0\n", 3),  // own parent
            ("2\na 2\n1 1 b\n2 1 b\nb 0\n", 4), // duplicate set
            ("2\na 1\n1 1 z\nb 0\n", 3),  // unknown
            ("2\na 1\n0 1 b\nb 0\n", 3),  // zero score
            ("2\na 1\n1 2 b\nb 0\n", 3),  // count mismatch
        ];
        for (text, line) in cases {
            match NonZeroInstance::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let text = format!("2\na 1\n{} 1 b\nb 1\n{} 1 a\n", u64::MAX, 1);
        assert!(matches!(NonZeroInstance::parse(&text), Err(Error::ScoreOverflow)));
        let text = "2\na 1\n99999999999999999999999 1 b\nb 0\n";
        assert!(matches!(NonZeroInstance::parse(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn additive_parse() {
        let inst = AdditiveInstance::parse("additive 4\nb a 2\na b 1\n").unwrap();
        assert_eq!(inst.n(), 4);
        let (a, b) = (1, 0);
        assert_eq!(inst.names()[..2], ["b".to_string(), "a".to_string()]);
        assert_eq!(inst.arc_score(a, b), 2);
        assert_eq!(inst.arc_score(b, a), 1);
        assert_eq!(inst.max_in_degree(), None);
        assert_eq!(inst.superstructure().edges(), vec![(0, 1)]);
        let inst = AdditiveInstance::parse("additive 3 3\nb a 2\n").unwrap();
        assert_eq!(inst.max_in_degree(), Some(3));
        assert!(AdditiveInstance::parse("additive 3 0\n").is_err());
        assert!(AdditiveInstance::parse("additive 3 -1\n").is_err());
    }

    #[test]
    fn additive_round_trip_keeps_names() {
        let inst = AdditiveInstance::new(
            vec!["x".into(), "y".into(), "z".into()],
            [((2, 0), 4), ((0, 1), 1)],
            Some(2),
        )
        .unwrap();
        assert_eq!(AdditiveInstance::parse(&inst.write()).unwrap(), inst);
    }

    #[test]
    fn solution_file_round_trip() {
        let inst = figure_example();
        let net = Network::from_arcs(4, [(0, 1), (2, 1), (0, 2), (1, 3), (2, 3)]);
        let text = net.write(inst.names());
        assert_eq!(text, "b <- a c\nc <- a\nd <- b c\n");
        assert_eq!(Network::parse(&text, inst.names()).unwrap(), net);
    }

    #[test]
    fn split_disjoint_copies() {
        let a = figure_example();
        let mut fams = a.families().to_vec();
        for f in a.families() {
            fams.push(
                f.iter()
                    .map(|e| ParentSet::new(e.parents.iter().map(|p| p + 4).collect(), e.score))
                    .collect(),
            );
        }
        let two = NonZeroInstance::with_default_names(fams).unwrap();
        let comps = two.split_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[1].vars, vec![4, 5, 6, 7]);
        assert_eq!(comps[0].instance.families(), a.families());
        assert_eq!(figure_example().split_components().len(), 1);
    }

    #[test]
    fn additive_expansion_scores_match() {
        let inst = AdditiveInstance::new(default_names(3), [((0, 2), 2), ((1, 2), 3), ((2, 0), 1)], Some(1)).unwrap();
        let nz = inst.to_nonzero(6).unwrap();
        assert_eq!(nz.family(2).len(), 2);
        assert_eq!(nz.superstructure(), inst.superstructure());
        let full = inst.with_max_in_degree(None).to_nonzero(6).unwrap();
        assert_eq!(full.local_score(2, &[0, 1]), 5);
    }

    #[test]
    fn drop_dominated_keeps_better_supersets() {
        let inst = NonZeroInstance::with_default_names(vec![
            vec![ParentSet::new(vec![1], 3), ParentSet::new(vec![1, 2], 2), ParentSet::new(vec![2], 1)],
            vec![],
            vec![],
        ])
        .unwrap();
        let d = inst.drop_dominated();
        assert_eq!(d.family(0).len(), 2);
    }
}
