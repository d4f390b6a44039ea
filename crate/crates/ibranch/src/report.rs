//! Per-solve records, aggregation into batch windows, and the CSV record
//! format shared between the library and the command-line harness.
//!
//! Every aggregate a report carries can be recomputed from its flat record
//! list; the harness's `report` command does exactly that.

use crate::bnb::{Action, SolveOutcome};
use serde::{Deserialize, Serialize};
use std::fmt;

/// One solve, as emitted on stdout by the harness's `solve` command and
/// embedded in series reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub instance: String,
    pub action: String,
    pub reltime: f64,
    pub gap: f64,
    pub nofeas: u8,
    pub tree_size: u64,
    pub f: f64,
    pub status: String,
    pub incumbent_value: Option<f64>,
}

impl SolveRecord {
    pub fn from_outcome(instance: &str, action: &Action, out: &SolveOutcome) -> SolveRecord {
        SolveRecord {
            instance: instance.to_string(),
            action: action.label(),
            reltime: out.score.reltime,
            gap: out.score.gap,
            nofeas: out.score.nofeas,
            tree_size: out.score.tree_size,
            f: out.score.f,
            status: out.status.as_str().to_string(),
            incumbent_value: out.incumbent.as_ref().map(|i| i.objective),
        }
    }

    /// Sentinel for a solver failure inside a series run: worst possible
    /// score components so the bandit is maximally discouraged.
    pub fn failure(instance: &str, action: &Action, detail: &str) -> SolveRecord {
        SolveRecord {
            instance: instance.to_string(),
            action: action.label(),
            reltime: 1.0,
            gap: 1.0,
            nofeas: 1,
            tree_size: 0,
            f: 3.0,
            status: format!("error: {detail}"),
            incumbent_value: None,
        }
    }
}

/// A [`SolveRecord`] in the context of one series run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    /// Which repetition of the online loop this belongs to (0-based).
    pub run: usize,
    /// 1-based position in the series order.
    pub position: usize,
    #[serde(flatten)]
    pub solve: SolveRecord,
    /// Baseline score of the same instance, when precomputed.
    pub baseline_f: Option<f64>,
    /// `f(chosen) - f(baseline)`; negative is better.
    pub speedup: Option<f64>,
}

/// Mean score components over one window of series positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    /// 1-based inclusive position range.
    pub start: usize,
    pub end: usize,
    pub count: usize,
    pub f: f64,
    pub reltime: f64,
    pub gap: f64,
    pub nofeas: f64,
    pub tree_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallStats {
    pub f_mean: f64,
    /// Standard error of the per-run mean f across runs (zero for a single
    /// run).
    pub f_stderr: f64,
    pub speedup_mean: Option<f64>,
    pub speedup_stderr: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub run: usize,
    pub weighted_objective: f64,
    pub arm_trajectory: Vec<usize>,
    pub records: Vec<SeriesRecord>,
}

/// Full output of an online series run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesReport {
    pub series: String,
    pub bandit: String,
    pub sigma: f64,
    pub alpha: f64,
    pub seed: u64,
    /// `None` when the run had no time limit.
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub runs: usize,
    pub actions: Vec<String>,
    pub weighted_objective_mean: f64,
    pub overall: OverallStats,
    pub windows: Vec<WindowStats>,
    pub per_run: Vec<RunReport>,
}

/// The position-weighted series objective: `sum_i (1 + 0.1 i) f_i` with
/// `i` the 1-based series position.
pub fn weighted_objective(fs: &[f64]) -> f64 {
    fs.iter()
        .enumerate()
        .map(|(idx, f)| (1.0 + 0.1 * (idx + 1) as f64) * f)
        .sum()
}

/// Splits `len` positions into five equal consecutive windows (the last
/// windows are empty when `len < 5`). Returned ranges are 0-based,
/// half-open.
pub fn five_windows(len: usize) -> [(usize, usize); 5] {
    let mut out = [(0, 0); 5];
    for (w, slot) in out.iter_mut().enumerate() {
        *slot = (w * len / 5, (w + 1) * len / 5);
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Recomputes the five batch windows from flat records, pooling across
/// runs by series position.
pub fn windows_from_records(records: &[SeriesRecord], series_len: usize) -> Vec<WindowStats> {
    five_windows(series_len)
        .iter()
        .map(|&(lo, hi)| {
            let in_window = || {
                records
                    .iter()
                    .filter(move |r| r.position > lo && r.position <= hi)
            };
            WindowStats {
                start: lo + 1,
                end: hi,
                count: in_window().count(),
                f: mean(in_window().map(|r| r.solve.f)),
                reltime: mean(in_window().map(|r| r.solve.reltime)),
                gap: mean(in_window().map(|r| r.solve.gap)),
                nofeas: mean(in_window().map(|r| f64::from(r.solve.nofeas))),
                tree_size: mean(in_window().map(|r| r.solve.tree_size as f64)),
            }
        })
        .collect()
}

/// Recomputes the overall mean and across-run standard errors.
pub fn overall_from_records(records: &[SeriesRecord], runs: usize) -> OverallStats {
    let per_run_mean = |metric: &dyn Fn(&SeriesRecord) -> Option<f64>| -> Vec<f64> {
        (0..runs)
            .map(|run| mean(records.iter().filter(|r| r.run == run).filter_map(metric)))
            .collect()
    };
    let stderr = |means: &[f64]| -> f64 {
        if means.len() < 2 {
            return 0.0;
        }
        let m = mean(means.iter().copied());
        let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (means.len() - 1) as f64;
        (var / means.len() as f64).sqrt()
    };

    let f_runs = per_run_mean(&|r| Some(r.solve.f));
    let has_speedup = records.iter().any(|r| r.speedup.is_some());
    let (speedup_mean, speedup_stderr) = if has_speedup {
        let s_runs = per_run_mean(&|r| r.speedup);
        (Some(mean(s_runs.iter().copied())), Some(stderr(&s_runs)))
    } else {
        (None, None)
    };
    OverallStats {
        f_mean: mean(records.iter().map(|r| r.solve.f)),
        f_stderr: stderr(&f_runs),
        speedup_mean,
        speedup_stderr,
    }
}

const CSV_HEADER: &str =
    "run,position,instance,action,reltime,gap,nofeas,tree_size,f,status,incumbent_value,baseline_f,speedup";

/// Flat CSV of all records of a report, one line per solve.
pub fn records_to_csv(records: &[SeriesRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.run,
            r.position,
            r.solve.instance,
            r.solve.action,
            r.solve.reltime,
            r.solve.gap,
            r.solve.nofeas,
            r.solve.tree_size,
            r.solve.f,
            r.solve.status.replace(',', ";"),
            opt(r.solve.incumbent_value),
            opt(r.baseline_f),
            opt(r.speedup),
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "csv line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for CsvError {}

pub fn records_from_csv(text: &str) -> Result<Vec<SeriesRecord>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        _ => {
            return Err(CsvError {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 13 {
            return Err(CsvError {
                line,
                message: format!("expected 13 fields, found {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64, CsvError> {
            fields[i].parse::<f64>().map_err(|_| CsvError {
                line,
                message: format!("column {}: invalid number `{}`", i + 1, fields[i]),
            })
        };
        let opt_num = |i: usize| -> Result<Option<f64>, CsvError> {
            if fields[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let int = |i: usize| -> Result<u64, CsvError> {
            fields[i].parse::<u64>().map_err(|_| CsvError {
                line,
                message: format!("column {}: invalid integer `{}`", i + 1, fields[i]),
            })
        };
        records.push(SeriesRecord {
            run: int(0)? as usize,
            position: int(1)? as usize,
            solve: SolveRecord {
                instance: fields[2].to_string(),
                action: fields[3].to_string(),
                reltime: num(4)?,
                gap: num(5)?,
                nofeas: int(6)? as u8,
                tree_size: int(7)?,
                f: num(8)?,
                status: fields[9].to_string(),
                incumbent_value: opt_num(10)?,
            },
            baseline_f: opt_num(11)?,
            speedup: opt_num(12)?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(run: usize, position: usize, f: f64) -> SeriesRecord {
        SeriesRecord {
            run,
            position,
            solve: SolveRecord {
                instance: format!("i{position}"),
                action: "count_1".into(),
                reltime: 0.5,
                gap: 0.0,
                nofeas: 0,
                tree_size: 3,
                f,
                status: "optimal".into(),
                incumbent_value: Some(-5.0),
            },
            baseline_f: Some(1.0),
            speedup: Some(f - 1.0),
        }
    }

    #[test]
    fn weighted_objective_arithmetic_series() {
        let fs = vec![1.0; 50];
        assert!((weighted_objective(&fs) - 177.5).abs() < 1e-12);
    }

    #[test]
    fn five_windows_partition_fifty() {
        assert_eq!(
            five_windows(50),
            [(0, 10), (10, 20), (20, 30), (30, 40), (40, 50)]
        );
    }

    #[test]
    fn five_windows_partition_twenty() {
        assert_eq!(
            five_windows(20),
            [(0, 4), (4, 8), (8, 12), (12, 16), (16, 20)]
        );
    }

    #[test]
    fn windows_pool_across_runs() {
        let mut records = Vec::new();
        for run in 0..2 {
            for pos in 1..=10 {
                records.push(record(run, pos, pos as f64 + run as f64));
            }
        }
        let windows = windows_from_records(&records, 10);
        assert_eq!(windows.len(), 5);
        assert_eq!(windows[0].start, 1);
        assert_eq!(windows[0].end, 2);
        assert_eq!(windows[0].count, 4);
        // positions 1,2 over runs 0,1: f = 1,2,2,3 -> mean 2.
        assert!((windows[0].f - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overall_stderr_zero_for_single_run() {
        let records: Vec<_> = (1..=10).map(|p| record(0, p, 1.0)).collect();
        let overall = overall_from_records(&records, 1);
        assert_eq!(overall.f_stderr, 0.0);
        assert!((overall.f_mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let records: Vec<_> = (1..=7).map(|p| record(p % 2, p, 0.25 * p as f64)).collect();
        let csv = records_to_csv(&records);
        let back = records_from_csv(&csv).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn csv_diagnostics_name_row_and_column() {
        let records = vec![record(0, 1, 1.0)];
        let csv = records_to_csv(&records);
        let broken = csv.replace("0.5", "zap");
        let err = records_from_csv(&broken).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("column"), "{}", err.message);
    }
}
