//! Command-line harness: solve single instances, generate instance series,
//! run the online bandit over a series, replay recorded rewards, and
//! recompute reports from their per-instance records.
//!
//! Exit codes: 0 on success, 1 on runtime failures, 2 on usage errors
//! (bad flags, unreadable or malformed inputs).

mod manifest;

use clap::{Parser, Subcommand};
use ibranch::bandit::{
    full_reward_table, histogram_csv, replay, run_series_online, ActionSet, BanditAlgo,
    OnlineConfig, RewardTable, DEFAULT_OBS_SIGMA, DEFAULT_UCB2_ALPHA,
};
use ibranch::bnb::{solve, Action, SearchParams};
use ibranch::influence::InfluenceModel;
use ibranch::instance::SeriesMode;
use ibranch::report::{
    overall_from_records, records_from_csv, records_to_csv, weighted_objective,
    windows_from_records, SeriesRecord, SolveRecord,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Runtime(String),
}

impl AppError {
    fn usage(msg: impl Into<String>) -> AppError {
        AppError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> AppError {
        AppError::Runtime(msg.into())
    }
}

#[derive(Parser)]
#[command(name = "ibranch", version, about = "Influence-branching MIP toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

fn parse_time_limit(s: &str) -> Result<f64, String> {
    if s == "inf" || s == "none" {
        return Ok(f64::INFINITY);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(v),
        _ => Err(format!(
            "expected a positive number of seconds or `inf`, got `{s}`"
        )),
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one MPS instance and print the solve record as JSON.
    Solve {
        file: PathBuf,
        /// Influence model (count, binary, dual, countdual, auxiliary,
        /// adversarial) or `baseline`.
        #[arg(long, default_value = "baseline")]
        model: String,
        /// Maximum depth for influence branching; 0 means baseline.
        #[arg(long, default_value_t = 0)]
        depth: u32,
        /// Wall-clock limit in seconds, or `inf`.
        #[arg(long, value_parser = parse_time_limit)]
        time_limit: f64,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Write the root influence graph as a sparse triplet CSV (i,j,w).
        #[arg(long)]
        dump_graph: Option<PathBuf>,
    },
    /// Generate a series of perturbed instances plus a manifest sidecar.
    GenSeries {
        base: PathBuf,
        /// Which inputs vary: bnd, obj, rhs, mat or combined.
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (defaults to `<base>_<mode>` under the default
        /// output dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the online bandit over a series, solving instances in order.
    RunSeries {
        /// Manifest directory or an explicit ordered list of MPS files.
        #[arg(required = true)]
        manifest: Vec<PathBuf>,
        #[arg(long, default_value = "thompson")]
        bandit: String,
        /// Thompson observation noise.
        #[arg(long, default_value_t = DEFAULT_OBS_SIGMA)]
        sigma: f64,
        /// UCB2 epoch parameter.
        #[arg(long, default_value_t = DEFAULT_UCB2_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock limit per solve in seconds, or `inf`.
        #[arg(long, value_parser = parse_time_limit)]
        time_limit: f64,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Also solve every instance with the baseline to fill the speedup
        /// column.
        #[arg(long)]
        with_baseline: bool,
        /// Additionally solve every (instance, arm) pair and write the
        /// full reward table CSV for offline replay.
        #[arg(long)]
        full_table: bool,
        /// Repetitions of the online loop (bandit seeds vary per run).
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Worker threads for baseline/full-table solves.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a bandit against a recorded reward table (no solving).
    Replay {
        #[arg(long)]
        rewards: PathBuf,
        #[arg(long, default_value = "thompson")]
        bandit: String,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_OBS_SIGMA)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_UCB2_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute batch windows and overall stats from a records CSV.
    Report {
        /// Path to a records.csv or to a run directory containing one.
        records: PathBuf,
    },
}

/// Default output directory: `IBRANCH_OUT_DIR` or the working directory.
fn default_out_dir() -> PathBuf {
    std::env::var_os("IBRANCH_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| AppError::runtime(format!("cannot create `{}`: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    std::fs::write(path, contents)
        .map_err(|e| AppError::runtime(format!("cannot write `{}`: {e}", path.display())))
}

fn parse_action(model: &str, depth: u32) -> Result<Action, AppError> {
    // Depth 0 disables influence branching whatever the model.
    if model == "baseline" || depth == 0 {
        return Ok(Action::Baseline);
    }
    let model: InfluenceModel = model.parse().map_err(AppError::Usage)?;
    Action::influence(model, depth).map_err(|e| AppError::usage(e.to_string()))
}

fn cmd_solve(
    file: &Path,
    model: &str,
    depth: u32,
    time_limit: f64,
    node_limit: Option<u64>,
    dump_graph: Option<&Path>,
) -> Result<(), AppError> {
    let inst = manifest::load_instance(file)?;
    let action = parse_action(model, depth)?;
    if let Some(path) = dump_graph {
        dump_root_graph(&inst, &action, path)?;
    }
    let params = SearchParams {
        time_limit,
        node_limit,
        ..SearchParams::default()
    };
    let out = solve(&inst, &action, &params)
        .map_err(|e| AppError::runtime(format!("`{}`: {e}", file.display())))?;
    let record = SolveRecord::from_outcome(&inst.name, &action, &out);
    println!(
        "{}",
        serde_json::to_string_pretty(&record).expect("record serializes")
    );
    Ok(())
}

/// Writes the action's influence graph at the root LP as triplet CSV.
fn dump_root_graph(
    inst: &ibranch::instance::MipInstance,
    action: &Action,
    path: &Path,
) -> Result<(), AppError> {
    use ibranch::influence::{build_graph, normalize, NodeLp};
    use ibranch::lp::{solve_lp, LpSolution};

    let Action::Influence { model, .. } = action else {
        return Err(AppError::usage(
            "--dump-graph needs an influence action (pass --model and a nonzero --depth)",
        ));
    };
    let norm = normalize(inst);
    let graph = if model.needs_lp() {
        let sol = solve_lp(inst, &inst.var_lower, &inst.var_upper)
            .map_err(|e| AppError::runtime(format!("root LP failed: {e}")))?;
        let LpSolution::Optimal(opt) = sol else {
            return Err(AppError::runtime(format!(
                "root LP is {:?}; model `{model}` has no duals to read",
                sol.status()
            )));
        };
        let view = NodeLp {
            x: &opt.x,
            y: &opt.y,
            lower: &inst.var_lower,
            upper: &inst.var_upper,
        };
        build_graph(*model, &norm, Some(&view)).expect("lp supplied")
    } else {
        build_graph(*model, &norm, None).expect("static model")
    };
    write_file(path, &graph.to_triplet_csv())
}

fn cmd_gen_series(
    base: &Path,
    mode: &str,
    count: usize,
    epsilon: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), AppError> {
    let mode: SeriesMode = mode.parse().map_err(AppError::Usage)?;
    let inst = manifest::load_instance(base)?;
    let dir =
        out.unwrap_or_else(|| default_out_dir().join(format!("{}_{}", inst.name, mode.as_str())));
    let sidecar = manifest::write_series(&dir, inst, mode, count, epsilon, seed)?;
    println!(
        "wrote {} instances + {} + {} to {}",
        sidecar.files.len(),
        manifest::BASE_NAME,
        manifest::SIDECAR_NAME,
        dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run_series(
    paths: &[PathBuf],
    bandit: &str,
    sigma: f64,
    alpha: f64,
    seed: u64,
    time_limit: f64,
    node_limit: Option<u64>,
    with_baseline: bool,
    full_table: bool,
    runs: usize,
    jobs: usize,
    out: Option<PathBuf>,
) -> Result<(), AppError> {
    let algo: BanditAlgo = bandit.parse().map_err(AppError::Usage)?;
    if runs == 0 {
        return Err(AppError::usage("--runs must be at least 1"));
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(AppError::usage(format!(
            "--sigma must be positive, got {sigma}"
        )));
    }
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(AppError::usage(format!(
            "--alpha must be in (0, 1), got {alpha}"
        )));
    }
    let (series_name, series) = manifest::load_series(paths)?;
    let set = ActionSet::default_set();
    let params = SearchParams {
        time_limit,
        node_limit,
        seed,
        ..SearchParams::default()
    };
    let cfg = OnlineConfig {
        series_name: series_name.clone(),
        algo,
        sigma,
        alpha,
        seed,
        runs,
        with_baseline,
        jobs,
        params: params.clone(),
    };
    let report = run_series_online(&series, &set, &cfg);

    let dir = out.unwrap_or_else(default_out_dir);
    ensure_dir(&dir)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&dir.join("report.json"), &(json + "\n"))?;
    let all_records: Vec<SeriesRecord> = report
        .per_run
        .iter()
        .flat_map(|r| r.records.iter().cloned())
        .collect();
    write_file(&dir.join("records.csv"), &records_to_csv(&all_records))?;
    if full_table {
        let table = full_reward_table(&series, &set, &params, jobs);
        write_file(&dir.join("rewards.csv"), &table.to_csv())?;
    }

    println!(
        "series {series_name}: {} instances, bandit {algo}, {runs} run(s)",
        series.len()
    );
    for w in &report.windows {
        println!(
            "  positions {:>3}-{:<3} mean f = {:.4}",
            w.start, w.end, w.f
        );
    }
    println!(
        "  weighted objective (mean over runs) = {:.4}",
        report.weighted_objective_mean
    );
    if let Some(s) = report.overall.speedup_mean {
        println!("  mean speedup vs baseline = {s:+.4} (negative is better)");
    }
    println!("report written to {}", dir.join("report.json").display());
    Ok(())
}

fn cmd_replay(
    rewards: &Path,
    bandit: &str,
    runs: usize,
    seed: u64,
    sigma: f64,
    alpha: f64,
    out: Option<PathBuf>,
) -> Result<(), AppError> {
    let algo: BanditAlgo = bandit.parse().map_err(AppError::Usage)?;
    if runs == 0 {
        return Err(AppError::usage("--runs must be at least 1"));
    }
    let text = std::fs::read_to_string(rewards)
        .map_err(|e| AppError::usage(format!("cannot read `{}`: {e}", rewards.display())))?;
    let table = RewardTable::from_csv(&text)
        .map_err(|e| AppError::usage(format!("`{}`: {e}", rewards.display())))?;
    let report = replay(&table, algo, runs, seed, sigma, alpha);

    let dir = out.unwrap_or_else(default_out_dir);
    ensure_dir(&dir)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&dir.join("replay.json"), &(json + "\n"))?;
    write_file(&dir.join("step_histogram.csv"), &histogram_csv(&report))?;

    println!(
        "replayed {} over {} runs: mean convergence score = {:.4} (oracle arm {})",
        algo, report.runs, report.mean_cs, report.oracle_arm
    );
    if report.undefined_cs_runs > 0 {
        println!(
            "  {} run(s) had a degenerate oracle speedup; reported as 1.0",
            report.undefined_cs_runs
        );
    }
    println!(
        "  final-step arm frequencies: {}",
        report
            .final_step_frequencies
            .iter()
            .enumerate()
            .map(|(a, f)| format!("arm_{a}={f:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("replay written to {}", dir.join("replay.json").display());
    Ok(())
}

fn cmd_report(records_path: &Path) -> Result<(), AppError> {
    let path = if records_path.is_dir() {
        records_path.join("records.csv")
    } else {
        records_path.to_path_buf()
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| AppError::usage(format!("cannot read `{}`: {e}", path.display())))?;
    let records = records_from_csv(&text)
        .map_err(|e| AppError::usage(format!("`{}`: {e}", path.display())))?;
    if records.is_empty() {
        return Err(AppError::usage(format!(
            "`{}` holds no records",
            path.display()
        )));
    }
    let runs = records.iter().map(|r| r.run).max().unwrap() + 1;
    let series_len = records.iter().map(|r| r.position).max().unwrap();
    let windows = windows_from_records(&records, series_len);
    let overall = overall_from_records(&records, runs);

    println!(
        "{} records, {} run(s), {} positions",
        records.len(),
        runs,
        series_len
    );
    println!("positions   count  f        reltime  gap      nofeas   tree_size");
    for w in &windows {
        println!(
            "{:>4}-{:<6} {:>5}  {:<8.4} {:<8.4} {:<8.4} {:<8.4} {:<10.1}",
            w.start, w.end, w.count, w.f, w.reltime, w.gap, w.nofeas, w.tree_size
        );
    }
    println!(
        "overall mean f = {:.4} +- {:.4} (stderr over runs)",
        overall.f_mean, overall.f_stderr
    );
    if let (Some(s), Some(e)) = (overall.speedup_mean, overall.speedup_stderr) {
        println!("overall speedup vs baseline = {s:+.4} +- {e:.4} (negative is better)");
    }
    for run in 0..runs {
        let mut fs: Vec<(usize, f64)> = records
            .iter()
            .filter(|r| r.run == run)
            .map(|r| (r.position, r.solve.f))
            .collect();
        fs.sort_by_key(|&(p, _)| p);
        let fs: Vec<f64> = fs.into_iter().map(|(_, f)| f).collect();
        println!(
            "run {run}: weighted objective = {:.4}",
            weighted_objective(&fs)
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Cmd::Solve {
            file,
            model,
            depth,
            time_limit,
            node_limit,
            dump_graph,
        } => cmd_solve(
            &file,
            &model,
            depth,
            time_limit,
            node_limit,
            dump_graph.as_deref(),
        ),
        Cmd::GenSeries {
            base,
            mode,
            count,
            epsilon,
            seed,
            out,
        } => cmd_gen_series(&base, &mode, count, epsilon, seed, out),
        Cmd::RunSeries {
            manifest,
            bandit,
            sigma,
            alpha,
            seed,
            time_limit,
            node_limit,
            with_baseline,
            full_table,
            runs,
            jobs,
            out,
        } => cmd_run_series(
            &manifest,
            &bandit,
            sigma,
            alpha,
            seed,
            time_limit,
            node_limit,
            with_baseline,
            full_table,
            runs,
            jobs,
            out,
        ),
        Cmd::Replay {
            rewards,
            bandit,
            runs,
            seed,
            sigma,
            alpha,
            out,
        } => cmd_replay(&rewards, &bandit, runs, seed, sigma, alpha, out),
        Cmd::Report { records } => cmd_report(&records),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
