//! Command-line front end. `run` returns the text for stdout and the exit code
//! so the binary stays a thin wrapper and tests can drive it in-process.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::depset::{solve_bnsl_depset, DEFAULT_MAX_DEPENDENT};
use crate::error::{Error, Result};
use crate::gen::{additive_on, graph_with_fen, nonzero_on, rng, NonZeroParams};
use crate::graph::Graph;
use crate::graph_params::{
    exact_tree_decomposition, fen, lfen_of_tree, lfen_search, tree_decomposition, LfenBudget, NiceTreeDecomposition,
    SpanningForest,
};
use crate::instance::{score_of, validate, AdditiveInstance, AnyInstance, LocalScore, Mode, Network, NonZeroInstance, VarId};
use crate::kernel::{kernelize_bnsl, kernelize_pl, KernelMap, KernelMode};
use crate::lfen_dp::{solve_bnsl_lfen, solve_pl_lfen};
use crate::oracle::{exact_bnsl, exact_pl};
use crate::polytree::{solve_pl_additive_bounded, solve_pl_additive_mst};
use crate::tw_dp::{solve_bnsl_additive, solve_pl_additive_tw};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "bnsl", version, about = "Exact Bayesian network and polytree structure learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute an optimal network.
    Solve(SolveArgs),
    /// Reduce a non-zero instance and write the reduced file plus its lift table.
    Kernelize(KernelizeArgs),
    /// Print structural parameters of the superstructure.
    Params(ParamsArgs),
    /// Check a solution file against an instance.
    Verify(VerifyArgs),
    /// Generate a random instance.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Bnsl,
    Polytree,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bnsl => Mode::Dag,
            ModeArg::Polytree => Mode::Polytree,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RepArg {
    Nonzero,
    Additive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Auto,
    KernelLfen,
    Lfen,
    Twdp,
    Mst,
    Matroid,
    Depset,
    Oracle,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::KernelLfen => "kernel-lfen",
            Algo::Lfen => "lfen",
            Algo::Twdp => "twdp",
            Algo::Mst => "mst",
            Algo::Matroid => "matroid",
            Algo::Depset => "depset",
            Algo::Oracle => "oracle",
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct SolveArgs {
    /// Score file.
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "bnsl")]
    pub mode: ModeArg,
    /// Expected representation; must match the file.
    #[arg(long, value_enum)]
    pub rep: Option<RepArg>,
    #[arg(long, value_enum, default_value = "auto")]
    pub algo: Algo,
    /// Bound on parent-set size.
    #[arg(long = "max-parents")]
    pub max_parents: Option<usize>,
    /// Decision threshold; answer YES when the optimum reaches it.
    #[arg(long)]
    pub target: Option<u64>,
    /// Write the optimal network here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spanning tree (edge list) for the lfen algorithm.
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Tree decomposition (bags and edges) for the twdp algorithm.
    #[arg(long)]
    pub td: Option<PathBuf>,
    #[arg(long = "max-dependent", default_value_t = DEFAULT_MAX_DEPENDENT)]
    pub max_dependent: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(clap::Args, Debug)]
pub struct KernelizeArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "bnsl")]
    pub mode: ModeArg,
    /// Reduced score file.
    #[arg(long)]
    pub out: PathBuf,
    /// Lift table (JSON); defaults to `<out>.map.json`.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ParamsArgs {
    pub instance: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
    #[arg(long, value_enum, default_value = "bnsl")]
    pub mode: ModeArg,
    #[arg(long = "max-parents")]
    pub max_parents: Option<usize>,
    /// Lift table from `kernelize`; the solution is then read over the reduced instance.
    #[arg(long)]
    pub lift: Option<PathBuf>,
    /// Also write the lifted network here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub n: usize,
    /// Number of non-tree edges planted on a random spanning tree.
    #[arg(long, default_value_t = 0)]
    pub fen: usize,
    #[arg(long, value_enum, default_value = "nonzero")]
    pub rep: RepArg,
    #[arg(long = "max-score", default_value_t = 10)]
    pub max_score: u64,
    /// In-degree bound written into additive files.
    #[arg(long = "max-parents")]
    pub max_parents: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String, code: i32) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            code,
        }
    }

    fn error(msg: impl std::fmt::Display) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
            code: EXIT_ERROR,
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text, EXIT_OK)
            } else {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_ERROR,
                }
            };
        }
    };
    let res = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Kernelize(a) => cmd_kernelize(&a),
        Command::Params(a) => cmd_params(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Gen(a) => cmd_gen(&a),
    };
    match res {
        Ok((s, code)) => Outcome::ok(s, code),
        Err(e) => Outcome::error(e),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn name_index(names: &[String]) -> HashMap<&str, VarId> {
    names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
}

fn lookup(index: &HashMap<&str, VarId>, name: &str, line: usize) -> Result<VarId> {
    index.get(name).copied().ok_or_else(|| Error::Parse {
        line,
        msg: format!("unknown variable {name}"),
    })
}

fn content(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Spanning tree file: one `<u> <v>` edge per line.
pub fn parse_tree(text: &str, names: &[String], g: &Graph) -> Result<SpanningForest> {
    let index = name_index(names);
    let mut edges = Vec::new();
    for (ln, line) in content(text) {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 2 {
            return Err(Error::Parse {
                line: ln,
                msg: "expected `<u> <v>`".into(),
            });
        }
        edges.push((lookup(&index, t[0], ln)?, lookup(&index, t[1], ln)?));
    }
    SpanningForest::new(g, edges)
}

/// Decomposition file: `bag <names...>` lines (numbered from 0 in order) and
/// `edge <i> <j>` lines between bag numbers.
pub fn parse_td(text: &str, names: &[String], g: &Graph) -> Result<NiceTreeDecomposition> {
    let index = name_index(names);
    let mut bags = Vec::new();
    let mut edges = Vec::new();
    for (ln, line) in content(text) {
        let t: Vec<&str> = line.split_whitespace().collect();
        match t[0] {
            "bag" => bags.push(t[1..].iter().map(|s| lookup(&index, s, ln)).collect::<Result<Vec<_>>>()?),
            "edge" if t.len() == 3 => {
                let p = |s: &str| {
                    s.parse::<usize>().map_err(|_| Error::Parse {
                        line: ln,
                        msg: format!("bad bag number {s}"),
                    })
                };
                edges.push((p(t[1])?, p(t[2])?));
            }
            _ => {
                return Err(Error::Parse {
                    line: ln,
                    msg: "expected `bag <names...>` or `edge <i> <j>`".into(),
                })
            }
        }
    }
    if edges.iter().any(|&(a, b)| a >= bags.len() || b >= bags.len()) {
        return Err(Error::Invalid("edge refers to a missing bag".into()));
    }
    let td = NiceTreeDecomposition::from_bags(names.len(), &bags, &edges)?;
    td.check(g).map_err(Error::Invalid)?;
    Ok(td)
}

fn load(path: &Path, rep: Option<RepArg>) -> Result<AnyInstance> {
    let inst = AnyInstance::parse(&read(path)?)?;
    match (rep, &inst) {
        (Some(RepArg::Nonzero), AnyInstance::Additive(_)) => {
            Err(Error::Invalid("--rep nonzero given but the file is additive".into()))
        }
        (Some(RepArg::Additive), AnyInstance::NonZero(_)) => {
            Err(Error::Invalid("--rep additive given but the file is non-zero".into()))
        }
        _ => Ok(inst),
    }
}

fn mismatch(algo: Algo, what: &str) -> Error {
    Error::Invalid(format!("algorithm {} does not apply to {what}", algo.name()))
}

struct Solved {
    score: u64,
    net: Network,
    algo: Algo,
    params: Vec<(&'static str, String)>,
}

fn solve_nonzero(inst: &NonZeroInstance, a: &SolveArgs) -> Result<Solved> {
    let mode = a.mode;
    let inst = match a.max_parents {
        Some(q) => inst.restrict_in_degree(q),
        None => inst.clone(),
    };
    let g = inst.superstructure();
    let algo = if a.algo == Algo::Auto { Algo::KernelLfen } else { a.algo };
    if a.tree.is_some() && algo != Algo::Lfen {
        return Err(Error::Invalid("--tree applies only to --algo lfen".into()));
    }
    if a.td.is_some() {
        return Err(Error::Invalid("--td applies only to additive instances with --algo twdp".into()));
    }
    let mut params = vec![("fen", fen(&g).to_string())];
    let (score, net) = match algo {
        Algo::Lfen => {
            let tree = match &a.tree {
                Some(p) => parse_tree(&read(p)?, inst.names(), &g)?,
                None => lfen_search(&g, LfenBudget::default()).tree,
            };
            params.push(("lfen", lfen_of_tree(&tree).value.to_string()));
            match mode {
                ModeArg::Bnsl => solve_bnsl_lfen(&inst, Some(&tree))?,
                ModeArg::Polytree => solve_pl_lfen(&inst, Some(&tree))?,
            }
        }
        Algo::KernelLfen => {
            let k = match mode {
                ModeArg::Bnsl => kernelize_bnsl(&inst),
                ModeArg::Polytree => kernelize_pl(&inst),
            };
            let rg = k.reduced.superstructure();
            let tree = lfen_search(&rg, LfenBudget::default()).tree;
            params.push(("kernel_n", k.reduced.n().to_string()));
            params.push(("lfen", lfen_of_tree(&tree).value.to_string()));
            let (s, rnet) = match mode {
                ModeArg::Bnsl => solve_bnsl_lfen(&k.reduced, Some(&tree))?,
                ModeArg::Polytree => solve_pl_lfen(&k.reduced, Some(&tree))?,
            };
            let lifted = k.map.lift(&rnet)?;
            let ls = score_of(&inst, &lifted);
            if ls != s {
                return Err(Error::Invalid(format!("lifted score {ls} differs from reduced optimum {s}")));
            }
            (s, lifted)
        }
        Algo::Depset => {
            if mode != ModeArg::Bnsl {
                return Err(mismatch(algo, "polytree mode"));
            }
            params.push(("dependent", inst.dependent_vertices().len().to_string()));
            solve_bnsl_depset(&inst, a.max_dependent)?
        }
        Algo::Oracle => match mode {
            ModeArg::Bnsl => exact_bnsl(&inst)?,
            ModeArg::Polytree => exact_pl(&inst, a.max_parents)?,
        },
        Algo::Twdp | Algo::Mst | Algo::Matroid => return Err(mismatch(algo, "non-zero instances")),
        Algo::Auto => unreachable!(),
    };
    Ok(Solved { score, net, algo, params })
}

fn solve_additive(inst: &AdditiveInstance, a: &SolveArgs) -> Result<Solved> {
    let inst = match a.max_parents {
        Some(q) => inst.with_max_in_degree(Some(q)),
        None => inst.clone(),
    };
    let n = inst.n();
    let g = inst.superstructure();
    let unbounded = inst.max_in_degree().map_or(true, |q| q + 1 >= n);
    let algo = match (a.algo, a.mode) {
        (Algo::Auto, ModeArg::Polytree) if unbounded => Algo::Mst,
        (Algo::Auto, ModeArg::Polytree) => Algo::Matroid,
        (Algo::Auto, ModeArg::Bnsl) => Algo::Twdp,
        (x, _) => x,
    };
    if a.tree.is_some() {
        return Err(Error::Invalid("--tree applies only to non-zero instances with --algo lfen".into()));
    }
    if a.td.is_some() && algo != Algo::Twdp {
        return Err(Error::Invalid("--td applies only to --algo twdp".into()));
    }
    let mut params = vec![("fen", fen(&g).to_string())];
    let (score, net) = match algo {
        Algo::Twdp => {
            let td = match &a.td {
                Some(p) => parse_td(&read(p)?, inst.names(), &g)?,
                None => tree_decomposition(&g),
            };
            params.push(("tw", td.width().to_string()));
            match a.mode {
                ModeArg::Bnsl => solve_bnsl_additive(&inst, Some(&td))?,
                ModeArg::Polytree => solve_pl_additive_tw(&inst, Some(&td))?,
            }
        }
        Algo::Mst | Algo::Matroid if a.mode == ModeArg::Bnsl => return Err(mismatch(algo, "bnsl mode")),
        Algo::Mst => solve_pl_additive_mst(&inst)?,
        Algo::Matroid => solve_pl_additive_bounded(&inst)?,
        Algo::Oracle => match a.mode {
            ModeArg::Bnsl => exact_bnsl(&inst.to_nonzero(inst.max_in_degree().unwrap_or(n))?)?,
            ModeArg::Polytree => exact_pl(&inst, inst.max_in_degree())?,
        },
        Algo::KernelLfen | Algo::Lfen | Algo::Depset => return Err(mismatch(algo, "additive instances")),
        Algo::Auto => unreachable!(),
    };
    Ok(Solved { score, net, algo, params })
}

fn cmd_solve(a: &SolveArgs) -> Result<(String, i32)> {
    let inst = load(&a.instance, a.rep)?;
    let solved = match &inst {
        AnyInstance::NonZero(i) => solve_nonzero(i, a)?,
        AnyInstance::Additive(i) => solve_additive(i, a)?,
    };
    let q = a.max_parents.or(match &inst {
        AnyInstance::Additive(i) => i.max_in_degree(),
        AnyInstance::NonZero(_) => None,
    });
    if let Err(v) = validate(&solved.net, a.mode.into(), q) {
        return Err(Error::Invalid(format!("solver produced an invalid network: {v}")));
    }
    if let Some(p) = &a.out {
        write(p, &solved.net.write(inst.names()))?;
    }
    let mut line = format!("max_score={}", solved.score);
    let mut code = EXIT_OK;
    if let Some(t) = a.target {
        let yes = solved.score >= t;
        write!(line, " answer={}", if yes { "YES" } else { "NO" }).unwrap();
        if !yes {
            code = EXIT_NO;
        }
    }
    write!(line, " algo={} n={}", solved.algo.name(), inst.n()).unwrap();
    for (k, v) in &solved.params {
        write!(line, " {k}={v}").unwrap();
    }
    line.push('\n');
    Ok((line, code))
}

fn cmd_kernelize(a: &KernelizeArgs) -> Result<(String, i32)> {
    let inst = match load(&a.instance, Some(RepArg::Nonzero))? {
        AnyInstance::NonZero(i) => i,
        AnyInstance::Additive(_) => unreachable!(),
    };
    let k = match a.mode {
        ModeArg::Bnsl => kernelize_bnsl(&inst),
        ModeArg::Polytree => kernelize_pl(&inst),
    };
    let map_path = a.map.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".map.json");
        PathBuf::from(p)
    });
    write(&a.out, &k.reduced.write())?;
    write(&map_path, &serde_json::to_string_pretty(&k.map)?)?;
    Ok((
        format!(
            "n={} reduced_n={} fen={} reduced_fen={} steps={}\n",
            inst.n(),
            k.reduced.n(),
            fen(&inst.superstructure()),
            fen(&k.reduced.superstructure()),
            k.map.steps.len()
        ),
        EXIT_OK,
    ))
}

fn cmd_params(a: &ParamsArgs) -> Result<(String, i32)> {
    let inst = load(&a.instance, None)?;
    let g = inst.superstructure();
    let lf = lfen_search(&g, LfenBudget::default());
    let (tw, tw_exact) = match exact_tree_decomposition(&g) {
        Ok(td) => (td.width(), true),
        Err(_) => (tree_decomposition(&g).width(), false),
    };
    Ok((
        format!(
            "n={} edges={} fen={} lfen={} lfen_exact={} tw={} tw_exact={}\n",
            g.n(),
            g.num_edges(),
            fen(&g),
            lf.value,
            lf.exact,
            tw,
            tw_exact
        ),
        EXIT_OK,
    ))
}

fn cmd_verify(a: &VerifyArgs) -> Result<(String, i32)> {
    let inst = load(&a.instance, None)?;
    let sol = read(&a.solution)?;
    let net = match &a.lift {
        Some(p) => {
            let map: KernelMap = serde_json::from_str(&read(p)?)?;
            if map.original_n != inst.n() {
                return Err(Error::Invalid("lift table does not belong to this instance".into()));
            }
            let want = match a.mode {
                ModeArg::Bnsl => KernelMode::Bnsl,
                ModeArg::Polytree => KernelMode::Polytree,
            };
            if map.mode != want {
                return Err(Error::Invalid("lift table was built for the other mode".into()));
            }
            map.lift(&Network::parse(&sol, &map.reduced_names)?)?
        }
        None => Network::parse(&sol, inst.names())?,
    };
    if let Some(p) = &a.out {
        write(p, &net.write(inst.names()))?;
    }
    let q = a.max_parents.or(match &inst {
        AnyInstance::Additive(i) => i.max_in_degree(),
        AnyInstance::NonZero(_) => None,
    });
    match validate(&net, a.mode.into(), q) {
        Ok(()) => Ok((format!("valid score={}\n", score_of(&inst, &net)), EXIT_OK)),
        Err(v) => Ok((format!("invalid reason=\"{v}\"\n"), EXIT_NO)),
    }
}

fn cmd_gen(a: &GenArgs) -> Result<(String, i32)> {
    if a.n == 0 {
        return Err(Error::Invalid("--n must be positive".into()));
    }
    let max_extra = a.n * a.n.saturating_sub(1) / 2 - (a.n - 1);
    if a.fen > max_extra {
        return Err(Error::Invalid(format!("--fen {} impossible on {} vertices", a.fen, a.n)));
    }
    if a.max_score == 0 {
        return Err(Error::Invalid("--max-score must be positive".into()));
    }
    let mut r = rng(a.seed);
    let g = graph_with_fen(&mut r, a.n, a.fen);
    let text = match a.rep {
        RepArg::Nonzero => {
            if a.max_parents.is_some() {
                return Err(Error::Invalid("--max-parents applies to additive files".into()));
            }
            let p = NonZeroParams {
                max_score: a.max_score,
                ..NonZeroParams::default()
            };
            nonzero_on(&mut r, &g, p).write()
        }
        RepArg::Additive => additive_on(&mut r, &g, a.max_score, a.max_parents).write(),
    };
    match &a.out {
        Some(p) => {
            write(p, &text)?;
            Ok((format!("wrote n={} fen={} to {}\n", a.n, a.fen, p.display()), EXIT_OK))
        }
        None => Ok((text, EXIT_OK)),
    }
}
