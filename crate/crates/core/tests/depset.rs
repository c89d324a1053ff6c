mod common;

use bnsl_core::depset::{dependent_vertices, solve_bnsl_depset, DEFAULT_MAX_DEPENDENT};
use bnsl_core::gen::rng;
use bnsl_core::instance::{score_of, validate, Mode};
use bnsl_core::lfen_dp::solve_bnsl_lfen;
use bnsl_core::oracle::exact_bnsl;
use bnsl_core::LocalScore;
use rand::Rng;

#[test]
fn matches_subset_oracle() {
    let mut r = rng(41);
    for _ in 0..200 {
        let n = r.gen_range(1..=9);
        let k = r.gen_range(0..=4);
        let inst = common::few_dependent_instance(&mut r, n, k);
        assert!(dependent_vertices(&inst).len() <= k);
        let (s, net) = solve_bnsl_depset(&inst, DEFAULT_MAX_DEPENDENT).unwrap();
        assert_eq!(s, exact_bnsl(&inst).unwrap().0);
        assert!(validate(&net, Mode::Dag, None).is_ok());
        assert_eq!(score_of(&inst, &net), s);
    }
}

#[test]
fn dependent_count_matches_rescan() {
    let mut r = rng(42);
    for _ in 0..50 {
        let n = r.gen_range(2..=9);
        let inst = common::connected_instance(&mut r, n, 2, 5);
        let direct: Vec<_> = (0..inst.n())
            .filter(|&v| inst.family(v).iter().any(|e| !e.parents.is_empty()))
            .collect();
        assert_eq!(dependent_vertices(&inst), direct);
    }
}

#[test]
fn agrees_with_lfen_dp() {
    let mut r = rng(43);
    let mut checked = 0;
    while checked < 40 {
        let n = r.gen_range(2..=7);
        let inst = common::connected_instance(&mut r, n, 1, 4);
        if dependent_vertices(&inst).len() > 5 {
            continue;
        }
        let a = solve_bnsl_depset(&inst, 5).unwrap().0;
        assert_eq!(a, solve_bnsl_lfen(&inst, None).unwrap().0);
        checked += 1;
    }
}
