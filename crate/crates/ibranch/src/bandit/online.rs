//! Online series runs: select an arm, solve the instance, feed the score
//! back, and aggregate into a report.

use super::{fork_rng, run_rng, ActionSet, BanditAlgo, BanditState, RewardTable};
use crate::bnb::{solve, Action, SearchParams};
use crate::instance::MipInstance;
use crate::report::{
    overall_from_records, weighted_objective, windows_from_records, RunReport, SeriesRecord,
    SeriesReport, SolveRecord,
};

#[derive(Debug, Clone)]
pub struct OnlineConfig {
    pub series_name: String,
    pub algo: BanditAlgo,
    pub sigma: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Repetitions of the whole online loop (seeds vary per run; the
    /// instance order stays the series order).
    pub runs: usize,
    pub with_baseline: bool,
    /// Worker threads for baseline precomputation.
    pub jobs: usize,
    pub params: SearchParams,
}

impl OnlineConfig {
    pub fn new(series_name: impl Into<String>, algo: BanditAlgo, params: SearchParams) -> Self {
        OnlineConfig {
            series_name: series_name.into(),
            algo,
            sigma: super::DEFAULT_OBS_SIGMA,
            alpha: super::DEFAULT_UCB2_ALPHA,
            seed: 0,
            runs: 1,
            with_baseline: false,
            jobs: 1,
            params,
        }
    }
}

fn solve_record(inst: &MipInstance, action: &Action, params: &SearchParams) -> SolveRecord {
    match solve(inst, action, params) {
        Ok(out) => SolveRecord::from_outcome(&inst.name, action, &out),
        Err(e) => SolveRecord::failure(&inst.name, action, &e.to_string()),
    }
}

/// Fans `worker(i)` out over `jobs` threads; results keep index order.
fn fan_out<T: Send>(len: usize, jobs: usize, worker: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let jobs = jobs.max(1).min(len.max(1));
    if jobs <= 1 {
        return (0..len).map(worker).collect();
    }
    let mut slots: Vec<Option<T>> = (0..len).map(|_| None).collect();
    let worker = &worker;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..jobs {
            handles.push(scope.spawn(move || {
                let mut mine = Vec::new();
                let mut i = w;
                while i < len {
                    mine.push((i, worker(i)));
                    i += jobs;
                }
                mine
            }));
        }
        for handle in handles {
            for (i, value) in handle.join().expect("worker panicked") {
                slots[i] = Some(value);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("all indices filled"))
        .collect()
}

/// Runs the bandit online over `series` in order, solving the selected
/// action per instance; per-instance solver failures are recorded with a
/// worst-case score and the run continues.
pub fn run_series_online(
    series: &[MipInstance],
    set: &ActionSet,
    cfg: &OnlineConfig,
) -> SeriesReport {
    assert!(!series.is_empty(), "empty series");
    assert!(cfg.runs > 0, "at least one run");

    let baseline: Option<Vec<SolveRecord>> = cfg.with_baseline.then(|| {
        fan_out(series.len(), cfg.jobs, |i| {
            solve_record(&series[i], &Action::Baseline, &cfg.params)
        })
    });

    let mut per_run = Vec::with_capacity(cfg.runs);
    let mut all_records = Vec::with_capacity(cfg.runs * series.len());
    for run in 0..cfg.runs {
        let mut rng = run_rng(cfg.seed, run as u64);
        let mut bandit = BanditState::new(
            cfg.algo,
            set.len(),
            cfg.sigma,
            cfg.alpha,
            fork_rng(&mut rng),
        );
        let mut records = Vec::with_capacity(series.len());
        let mut trajectory = Vec::with_capacity(series.len());
        let mut fs = Vec::with_capacity(series.len());
        for (idx, inst) in series.iter().enumerate() {
            let arm = bandit.select();
            let record = solve_record(inst, &set.arms()[arm], &cfg.params);
            bandit.update(arm, record.f);
            trajectory.push(arm);
            fs.push(record.f);
            let baseline_f = baseline.as_ref().map(|b| b[idx].f);
            records.push(SeriesRecord {
                run,
                position: idx + 1,
                speedup: baseline_f.map(|b| record.f - b),
                baseline_f,
                solve: record,
            });
        }
        all_records.extend(records.iter().cloned());
        per_run.push(RunReport {
            run,
            weighted_objective: weighted_objective(&fs),
            arm_trajectory: trajectory,
            records,
        });
    }

    let weighted_objective_mean =
        per_run.iter().map(|r| r.weighted_objective).sum::<f64>() / cfg.runs as f64;
    SeriesReport {
        series: cfg.series_name.clone(),
        bandit: cfg.algo.as_str().to_string(),
        sigma: cfg.sigma,
        alpha: cfg.alpha,
        seed: cfg.seed,
        time_limit: cfg
            .params
            .time_limit
            .is_finite()
            .then_some(cfg.params.time_limit),
        node_limit: cfg.params.node_limit,
        runs: cfg.runs,
        actions: set.labels(),
        weighted_objective_mean,
        overall: overall_from_records(&all_records, cfg.runs),
        windows: windows_from_records(&all_records, series.len()),
        per_run,
    }
}

/// Solves every arm and the baseline on every instance, yielding the
/// complete reward table that offline replays consume.
pub fn full_reward_table(
    series: &[MipInstance],
    set: &ActionSet,
    params: &SearchParams,
    jobs: usize,
) -> RewardTable {
    assert!(!series.is_empty(), "empty series");
    let rows = fan_out(series.len(), jobs, |i| {
        let inst = &series[i];
        let rewards: Vec<f64> = set
            .arms()
            .iter()
            .map(|action| solve_record(inst, action, params).f)
            .collect();
        let baseline = solve_record(inst, &Action::Baseline, params).f;
        (inst.name.clone(), rewards, baseline)
    });
    let mut names = Vec::with_capacity(rows.len());
    let mut rewards = Vec::with_capacity(rows.len());
    let mut baseline = Vec::with_capacity(rows.len());
    for (name, r, b) in rows {
        names.push(name);
        rewards.push(r);
        baseline.push(b);
    }
    RewardTable::new(names, rewards, baseline).expect("scores are finite and nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::influence::InfluenceModel;

    fn small_series(count: usize) -> Vec<MipInstance> {
        use crate::instance::{generate_series, SeriesMode, SeriesSpec};
        let base = MipInstance {
            name: "s".into(),
            objective: vec![-3.0, -5.0, -4.0, -1.0],
            rows: vec![
                vec![(0, 2.0), (1, 3.0), (2, 4.0), (3, 1.0)],
                vec![(0, 1.0), (1, 2.0), (2, 1.0)],
            ],
            row_lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            row_upper: vec![6.0, 4.0],
            var_lower: vec![0.0; 4],
            var_upper: vec![2.0; 4],
            integer: vec![true; 4],
        };
        generate_series(&SeriesSpec {
            base,
            mode: SeriesMode::Obj,
            count,
            epsilon: 0.2,
            seed: 5,
        })
        .unwrap()
    }

    #[test]
    fn one_arm_set_objective_matches_direct_sum() {
        let series = small_series(6);
        let set =
            ActionSet::new(vec![Action::influence(InfluenceModel::Count, 1).unwrap()]).unwrap();
        let cfg = OnlineConfig::new("one", BanditAlgo::Thompson, SearchParams::default());
        let report = run_series_online(&series, &set, &cfg);
        let fs: Vec<f64> = report.per_run[0]
            .records
            .iter()
            .map(|r| r.solve.f)
            .collect();
        assert!((report.per_run[0].weighted_objective - weighted_objective(&fs)).abs() < 1e-12);
        assert!(report.per_run[0].arm_trajectory.iter().all(|&a| a == 0));
    }

    #[test]
    fn same_seed_same_trajectory() {
        let series = small_series(8);
        let set = ActionSet::default_set();
        let cfg = OnlineConfig {
            seed: 42,
            ..OnlineConfig::new("det", BanditAlgo::Thompson, SearchParams::default())
        };
        let a = run_series_online(&series, &set, &cfg);
        let b = run_series_online(&series, &set, &cfg);
        assert_eq!(a.per_run[0].arm_trajectory, b.per_run[0].arm_trajectory);
        assert_eq!(
            a.weighted_objective_mean.to_bits(),
            b.weighted_objective_mean.to_bits()
        );
    }

    #[test]
    fn ucb2_is_fully_deterministic() {
        let series = small_series(7);
        let set = ActionSet::default_set();
        let cfg = OnlineConfig {
            seed: 1,
            ..OnlineConfig::new("ucb", BanditAlgo::Ucb2, SearchParams::default())
        };
        let a = run_series_online(&series, &set, &cfg);
        let b = run_series_online(&series, &set, &cfg);
        assert_eq!(a.per_run[0].arm_trajectory, b.per_run[0].arm_trajectory);
        for (x, y) in a.per_run[0].records.iter().zip(&b.per_run[0].records) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn baseline_fanout_matches_sequential() {
        let series = small_series(5);
        let set = ActionSet::default_set();
        let mut cfg = OnlineConfig {
            with_baseline: true,
            jobs: 3,
            ..OnlineConfig::new("par", BanditAlgo::Ucb2, SearchParams::default())
        };
        let parallel = run_series_online(&series, &set, &cfg);
        cfg.jobs = 1;
        let sequential = run_series_online(&series, &set, &cfg);
        for (p, s) in parallel.per_run[0]
            .records
            .iter()
            .zip(&sequential.per_run[0].records)
        {
            assert_eq!(p.baseline_f, s.baseline_f);
            assert_eq!(p.speedup, s.speedup);
            assert!(p.speedup.is_some());
        }
    }

    #[test]
    fn full_table_covers_all_arms() {
        let series = small_series(4);
        let set = ActionSet::default_set();
        let table = full_reward_table(&series, &set, &SearchParams::default(), 2);
        assert_eq!(table.num_instances(), 4);
        assert_eq!(table.num_arms(), 5);
        for row in &table.rewards {
            for &v in row {
                assert!(v.is_finite() && v >= 0.0);
            }
        }
    }
}
