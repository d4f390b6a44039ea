//! Branch and bound vs. exhaustive lattice enumeration, for every action
//! in the default set plus the baseline.

mod common;

use common::{lattice_enumeration_opt, random_mip, rng};
use ibranch::bandit::ActionSet;
use ibranch::bnb::{solve, Action, SearchParams, SolveStatus};

#[test]
fn matches_lattice_enumeration_for_all_actions() {
    let mut rng = rng(0xBB);
    let set = ActionSet::default_set();
    let mut actions: Vec<Action> = vec![Action::Baseline];
    actions.extend_from_slice(set.arms());
    let params = SearchParams::default();

    let mut solved = 0;
    let mut infeasible = 0;
    for case in 0..40 {
        let inst = random_mip(&mut rng, 10, 8, 20_000);
        let oracle = lattice_enumeration_opt(&inst);
        for action in &actions {
            let out = solve(&inst, action, &params)
                .unwrap_or_else(|e| panic!("case {case} action {action}: {e}"));
            match (&out.incumbent, oracle) {
                (Some(inc), Some(reference)) => {
                    solved += 1;
                    assert_eq!(out.status, SolveStatus::Optimal);
                    assert!(
                        (inc.objective - reference).abs() <= 1e-6 * (1.0 + reference.abs()),
                        "case {case} action {action}: {} vs oracle {reference}",
                        inc.objective
                    );
                }
                (None, None) => {
                    infeasible += 1;
                    assert_eq!(out.status, SolveStatus::Infeasible);
                    assert_eq!(out.score.gap, 0.0);
                    assert_eq!(out.score.nofeas, 0);
                }
                (got, want) => panic!(
                    "case {case} action {action}: incumbent {:?} vs oracle {:?}",
                    got.as_ref().map(|i| i.objective),
                    want
                ),
            }
        }
    }
    assert!(solved >= 60, "only {solved} solved action-instance pairs");
    assert!(infeasible > 0, "generator produced no infeasible case");
}

#[test]
fn incumbent_and_bound_stay_consistent_under_node_limit() {
    let mut rng = rng(0x51);
    for _ in 0..15 {
        let inst = random_mip(&mut rng, 10, 6, 50_000);
        let full = solve(&inst, &Action::Baseline, &SearchParams::default()).unwrap();
        let limited = solve(
            &inst,
            &Action::Baseline,
            &SearchParams {
                node_limit: Some(3),
                ..SearchParams::default()
            },
        )
        .unwrap();
        if let (Some(reference), Some(partial)) = (&full.incumbent, &limited.incumbent) {
            // Any incumbent under a node limit is a valid feasible value.
            assert!(partial.objective >= reference.objective - 1e-6);
        }
        if limited.status == SolveStatus::NodeLimit {
            let dual = limited.dual_bound.expect("limit stop records a bound");
            if let Some(reference) = &full.incumbent {
                assert!(dual <= reference.objective + 1e-6, "dual bound not valid");
            }
            assert!(limited.score.gap >= 0.0 && limited.score.gap <= 1.0);
        }
    }
}

/// Best-bound selection makes the proven bound climb toward the optimum
/// and the incumbent descend as the node budget grows.
#[test]
fn dual_bound_and_incumbent_monotone_in_node_budget() {
    let mut rng = rng(0x90);
    for _ in 0..6 {
        let inst = random_mip(&mut rng, 10, 6, 20_000);
        let full = solve(&inst, &Action::Baseline, &SearchParams::default()).unwrap();
        if full.status != SolveStatus::Optimal {
            continue;
        }
        let mut prev_dual = f64::NEG_INFINITY;
        let mut prev_incumbent = f64::INFINITY;
        for limit in 1..=full.score.tree_size + 1 {
            let out = solve(
                &inst,
                &Action::Baseline,
                &SearchParams {
                    node_limit: Some(limit),
                    ..SearchParams::default()
                },
            )
            .unwrap();
            if let Some(dual) = out.dual_bound {
                assert!(
                    dual >= prev_dual - 1e-9,
                    "dual bound regressed: {prev_dual} -> {dual} at limit {limit}"
                );
                prev_dual = prev_dual.max(dual);
            }
            if let Some(inc) = &out.incumbent {
                assert!(
                    inc.objective <= prev_incumbent + 1e-9,
                    "incumbent regressed: {prev_incumbent} -> {} at limit {limit}",
                    inc.objective
                );
                prev_incumbent = prev_incumbent.min(inc.objective);
            }
        }
        let reference = full.incumbent.unwrap().objective;
        assert!((prev_incumbent - reference).abs() <= 1e-9);
    }
}

#[test]
fn tree_size_deterministic_across_repeats() {
    let mut rng = rng(0x71);
    let set = ActionSet::default_set();
    for _ in 0..8 {
        let inst = random_mip(&mut rng, 9, 6, 20_000);
        for action in set.arms() {
            let a = solve(&inst, action, &SearchParams::default()).unwrap();
            let b = solve(&inst, action, &SearchParams::default()).unwrap();
            assert_eq!(a.score.tree_size, b.score.tree_size);
            assert_eq!(
                a.incumbent.map(|i| i.objective.to_bits()),
                b.incumbent.map(|i| i.objective.to_bits())
            );
        }
    }
}
