//! Offline replay of bandit algorithms against recorded rewards.
//!
//! No branch-and-bound tree is built here: each run shuffles the instance
//! order, walks the bandit through the series drawing rewards from the
//! table, and scores the resulting trajectory against the empirical oracle
//! arm and the baseline column.

use super::{fork_rng, run_rng, BanditAlgo, BanditState, RewardTable};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Aggregates over shuffled replay runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayReport {
    pub algo: String,
    pub runs: usize,
    pub seed: u64,
    /// Mean convergence score; degenerate runs (zero oracle speedup) enter
    /// as the 1.0 sentinel so the mean stays total.
    pub mean_cs: f64,
    pub undefined_cs_runs: usize,
    /// Arm of the empirical oracle used in the convergence score.
    pub oracle_arm: usize,
    /// `per_step_histograms[step][arm]` counts selections across runs.
    pub per_step_histograms: Vec<Vec<u64>>,
    /// Selection frequency per arm at the final step.
    pub final_step_frequencies: Vec<f64>,
}

/// Convergence score of one trajectory: realized speedup over baseline
/// divided by the oracle's speedup, with recorded scores as the mean
/// estimates. `None` when the oracle speedup is degenerate (|den| < 1e-12).
pub fn convergence_score(
    trajectory: &[(usize, usize)],
    table: &RewardTable,
    oracle_arm: usize,
) -> Option<f64> {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for &(instance, arm) in trajectory {
        numerator += table.rewards[instance][arm] - table.baseline[instance];
        denominator += table.rewards[instance][oracle_arm] - table.baseline[instance];
    }
    if denominator.abs() < 1e-12 {
        None
    } else {
        Some(numerator / denominator)
    }
}

/// Replays `runs` shuffled passes over the table and aggregates.
pub fn replay(
    table: &RewardTable,
    algo: BanditAlgo,
    runs: usize,
    seed: u64,
    sigma: f64,
    alpha: f64,
) -> ReplayReport {
    assert!(runs > 0, "at least one replay run");
    let steps = table.num_instances();
    let arms = table.num_arms();
    let oracle_arm = table.best_mean_arm();

    let mut histograms = vec![vec![0u64; arms]; steps];
    let mut cs_sum = 0.0;
    let mut undefined = 0usize;
    let mut trajectory = Vec::with_capacity(steps);

    for run in 0..runs {
        let mut rng = run_rng(seed, run as u64);
        let mut order: Vec<usize> = (0..steps).collect();
        order.shuffle(&mut rng);
        let mut bandit = BanditState::new(algo, arms, sigma, alpha, fork_rng(&mut rng));
        trajectory.clear();
        for (step, &instance) in order.iter().enumerate() {
            let arm = bandit.select();
            bandit.update(arm, table.rewards[instance][arm]);
            histograms[step][arm] += 1;
            trajectory.push((instance, arm));
        }
        match convergence_score(&trajectory, table, oracle_arm) {
            Some(cs) => cs_sum += cs,
            None => {
                undefined += 1;
                cs_sum += 1.0;
            }
        }
    }

    let final_step_frequencies = histograms
        .last()
        .map(|h| h.iter().map(|&c| c as f64 / runs as f64).collect())
        .unwrap_or_default();

    ReplayReport {
        algo: algo.as_str().to_string(),
        runs,
        seed,
        mean_cs: cs_sum / runs as f64,
        undefined_cs_runs: undefined,
        oracle_arm,
        per_step_histograms: histograms,
        final_step_frequencies,
    }
}

/// Per-step histogram CSV (`step,arm_0,...,arm_K`), 1-based steps.
pub fn histogram_csv(report: &ReplayReport) -> String {
    let arms = report.final_step_frequencies.len();
    let mut out = String::from("step");
    for a in 0..arms {
        out.push_str(&format!(",arm_{a}"));
    }
    out.push('\n');
    for (step, hist) in report.per_step_histograms.iter().enumerate() {
        out.push_str(&format!("{}", step + 1));
        for &c in hist {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}
