use std::path::Path;

use bnsl_core::cli::{run, Outcome};
use bnsl_core::instance::FIGURE_EXAMPLE_TEXT;

fn bnsl(args: &[&str]) -> Outcome {
    run(std::iter::once("bnsl").chain(args.iter().copied()))
}

fn field(out: &str, key: &str) -> String {
    out.split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {out:?}"))
        .to_string()
}

fn figure_file(dir: &Path) -> String {
    let p = dir.join("figure.txt");
    std::fs::write(&p, FIGURE_EXAMPLE_TEXT).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn decision_answers_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = figure_file(dir.path());
    let yes = bnsl(&["solve", &f, "--target", "6"]);
    assert_eq!(yes.code, 0);
    assert!(yes.stdout.starts_with("max_score=7 answer=YES"), "{}", yes.stdout);
    let no = bnsl(&["solve", &f, "--target", "8"]);
    assert_eq!(no.code, 1);
    assert!(no.stdout.contains("answer=NO"));
    let plain = bnsl(&["solve", &f]);
    assert_eq!(plain.code, 0);
    assert!(!plain.stdout.contains("answer="));
}

#[test]
fn every_nonzero_algorithm_on_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let f = figure_file(dir.path());
    for algo in ["auto", "kernel-lfen", "lfen", "depset", "oracle"] {
        let o = bnsl(&["solve", &f, "--algo", algo]);
        assert_eq!((o.code, field(&o.stdout, "max_score")), (0, "7".into()), "{algo}: {o:?}");
    }
}

#[test]
fn representation_mismatches_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let f = figure_file(dir.path());
    for args in [
        vec!["solve", f.as_str(), "--algo", "twdp"],
        vec!["solve", f.as_str(), "--algo", "mst"],
        vec!["solve", f.as_str(), "--rep", "additive"],
        vec!["solve", f.as_str(), "--mode", "polytree", "--algo", "depset"],
        vec!["solve", f.as_str(), "--algo", "bogus"],
        vec!["solve", "/nonexistent/file"],
    ] {
        let o = bnsl(&args);
        assert_eq!(o.code, 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let add = dir.path().join("add.txt");
    std::fs::write(&add, "additive 2\nv0 v1 3\n").unwrap();
    let a = add.to_str().unwrap();
    assert_eq!(bnsl(&["solve", a, "--algo", "lfen"]).code, 2);
    assert_eq!(bnsl(&["solve", a, "--algo", "mst"]).code, 2);
    assert_eq!(field(&bnsl(&["solve", a]).stdout, "max_score"), "3");
}

#[test]
fn oracle_and_lfen_agree_on_generated_files() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..50 {
        let p = dir.path().join(format!("g{seed}.txt"));
        let p = p.to_str().unwrap();
        let n = (4 + seed % 7).to_string();
        let k = (seed % 4).to_string();
        let g = bnsl(&["gen", "--seed", &seed.to_string(), "--n", &n, "--fen", &k, "--out", p]);
        assert_eq!(g.code, 0, "{g:?}");
        let a = bnsl(&["solve", p, "--algo", "oracle"]);
        let b = bnsl(&["solve", p, "--algo", "lfen"]);
        assert_eq!(field(&a.stdout, "max_score"), field(&b.stdout, "max_score"));
        let pa = bnsl(&["solve", p, "--mode", "polytree", "--algo", "oracle"]);
        let pb = bnsl(&["solve", p, "--mode", "polytree"]);
        assert_eq!(field(&pa.stdout, "max_score"), field(&pb.stdout, "max_score"));
    }
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--seed", "17", "--n", "9", "--fen", "3"];
    assert_eq!(bnsl(&args), bnsl(&args));
    let add = ["gen", "--seed", "17", "--n", "9", "--fen", "3", "--rep", "additive", "--max-parents", "2"];
    let o = bnsl(&add);
    assert_eq!(o, bnsl(&add));
    assert!(o.stdout.starts_with("additive 9 2"));
    assert_ne!(bnsl(&args).stdout, bnsl(&["gen", "--seed", "18", "--n", "9", "--fen", "3"]).stdout);
    assert_eq!(bnsl(&["gen", "--n", "3", "--fen", "5"]).code, 2);
}

#[test]
fn verify_example_solution() {
    let dir = tempfile::tempdir().unwrap();
    let f = figure_file(dir.path());
    let sol = dir.path().join("sol.txt");
    std::fs::write(&sol, "# optimal\nb <- a c\nc <- a\nd <- b c\n").unwrap();
    let o = bnsl(&["verify", &f, sol.to_str().unwrap()]);
    assert_eq!((o.code, o.stdout.as_str()), (0, "valid score=7\n"));
    std::fs::write(&sol, "a <- b\nb <- a\n").unwrap();
    let bad = bnsl(&["verify", &f, sol.to_str().unwrap()]);
    assert_eq!(bad.code, 1);
    assert!(bad.stdout.starts_with("invalid"));
    let out = dir.path().join("best.txt");
    bnsl(&["solve", &f, "--out", out.to_str().unwrap()]);
    assert_eq!(bnsl(&["verify", &f, out.to_str().unwrap()]).stdout, "valid score=7\n");
}

#[test]
fn kernelize_then_verify_lift() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..50u64 {
        let orig = dir.path().join(format!("o{seed}.txt"));
        let red = dir.path().join(format!("r{seed}.txt"));
        let sol = dir.path().join(format!("s{seed}.txt"));
        let (o, r, s) = (orig.to_str().unwrap(), red.to_str().unwrap(), sol.to_str().unwrap());
        let n = (5 + seed % 8).to_string();
        let k = (1 + seed % 3).to_string();
        bnsl(&["gen", "--seed", &seed.to_string(), "--n", &n, "--fen", &k, "--out", o]);
        let mode = if seed % 2 == 0 { "bnsl" } else { "polytree" };
        let kr = bnsl(&["kernelize", o, "--mode", mode, "--out", r]);
        assert_eq!(kr.code, 0, "{kr:?}");
        let reduced = bnsl(&["solve", r, "--mode", mode, "--algo", "oracle", "--out", s]);
        let best = field(&reduced.stdout, "max_score");
        let map = format!("{r}.map.json");
        let v = bnsl(&["verify", o, s, "--mode", mode, "--lift", &map]);
        assert_eq!(v.stdout, format!("valid score={best}\n"), "seed {seed}");
        let direct = bnsl(&["solve", o, "--mode", mode, "--algo", "oracle"]);
        assert_eq!(field(&direct.stdout, "max_score"), best);
    }
}

#[test]
fn tree_and_decomposition_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = figure_file(dir.path());
    let tree = dir.path().join("tree.txt");
    std::fs::write(&tree, "a b\nb d\nc d\n").unwrap();
    let o = bnsl(&["solve", &f, "--algo", "lfen", "--tree", tree.to_str().unwrap()]);
    assert_eq!((field(&o.stdout, "max_score"), field(&o.stdout, "lfen")), ("7".into(), "2".into()));
    std::fs::write(&tree, "a b\nb d\n").unwrap();
    assert_eq!(bnsl(&["solve", &f, "--algo", "lfen", "--tree", tree.to_str().unwrap()]).code, 2);

    let add = dir.path().join("add.txt");
    std::fs::write(&add, "additive 3\nv0 v1 2\nv1 v2 2\nv2 v0 2\n").unwrap();
    let td = dir.path().join("td.txt");
    std::fs::write(&td, "bag v0 v1 v2\n").unwrap();
    let (a, t) = (add.to_str().unwrap(), td.to_str().unwrap());
    let o = bnsl(&["solve", a, "--algo", "twdp", "--td", t]);
    assert_eq!((field(&o.stdout, "max_score"), field(&o.stdout, "tw")), ("4".into(), "2".into()));
    std::fs::write(&td, "bag v0 v1\nbag v1 v2\nedge 0 1\n").unwrap();
    assert_eq!(bnsl(&["solve", a, "--algo", "twdp", "--td", t]).code, 2);
}

#[test]
fn params_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = figure_file(dir.path());
    let o = bnsl(&["params", &f]);
    assert_eq!(o.stdout, "n=4 edges=5 fen=2 lfen=2 lfen_exact=true tw=2 tw_exact=true\n");
}

#[test]
fn help_exits_zero() {
    let o = bnsl(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("solve"));
}
