//! One-off bulk campaign (run explicitly with --ignored) hunting rare
//! disagreements between the solvers and the brute-force oracles.

mod common;

use common::{lattice_enumeration_opt, random_lp, random_mip, rng, vertex_enumeration_opt};
use ibranch::bandit::ActionSet;
use ibranch::bnb::{solve, Action, SearchParams, SolveStatus};
use ibranch::lp::{solve_lp, LpSolution};

#[test]
#[ignore = "bulk campaign; run with --ignored --release"]
fn bulk_lp_vs_vertex_oracle() {
    let mut rng = rng(0xB111);
    let mut optimal = 0;
    let mut infeasible = 0;
    for case in 0..4000 {
        let inst = random_lp(&mut rng, 6, 6);
        let oracle = vertex_enumeration_opt(&inst);
        let sol = solve_lp(&inst, &inst.var_lower, &inst.var_upper)
            .unwrap_or_else(|e| panic!("case {case}: {e}"));
        match (&sol, oracle) {
            (LpSolution::Optimal(opt), Some(want)) => {
                optimal += 1;
                assert!(
                    (opt.objective - want).abs() <= 1e-6 * (1.0 + want.abs()),
                    "case {case}: {} vs {want}",
                    opt.objective
                );
            }
            (LpSolution::Infeasible, None) => infeasible += 1,
            (got, want) => panic!(
                "case {case}: {:?} vs oracle feasible = {}",
                got.status(),
                want.is_some()
            ),
        }
    }
    println!("bulk lp: {optimal} optimal, {infeasible} infeasible");
}

#[test]
#[ignore = "bulk campaign; run with --ignored --release"]
fn bulk_bnb_vs_lattice_oracle() {
    let mut rng = rng(0xB222);
    let set = ActionSet::default_set();
    let mut actions = vec![Action::Baseline];
    actions.extend_from_slice(set.arms());
    let params = SearchParams::default();
    for case in 0..800 {
        let inst = random_mip(&mut rng, 11, 9, 30_000);
        let oracle = lattice_enumeration_opt(&inst);
        for action in &actions {
            let out = solve(&inst, action, &params)
                .unwrap_or_else(|e| panic!("case {case} action {action}: {e}"));
            match (&out.incumbent, oracle) {
                (Some(inc), Some(want)) => assert!(
                    (inc.objective - want).abs() <= 1e-6 * (1.0 + want.abs()),
                    "case {case} action {action}: {} vs {want}",
                    inc.objective
                ),
                (None, None) => assert_eq!(out.status, SolveStatus::Infeasible),
                (got, want) => panic!(
                    "case {case} action {action}: {:?} vs {:?}",
                    got.as_ref().map(|i| i.objective),
                    want
                ),
            }
        }
    }
}
