//! Recorded reward tables for offline replay.

use std::fmt;

/// Scores `f` recorded for every (instance, arm) pair of a series, plus a
/// baseline column. Replays draw from this table instead of solving.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    pub instance_names: Vec<String>,
    /// `rewards[instance][arm]`.
    pub rewards: Vec<Vec<f64>>,
    pub baseline: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "reward table: {}", self.message)
        } else {
            write!(f, "reward table line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for TableError {}

impl RewardTable {
    pub fn new(
        instance_names: Vec<String>,
        rewards: Vec<Vec<f64>>,
        baseline: Vec<f64>,
    ) -> Result<RewardTable, TableError> {
        let err = |message: String| Err(TableError { line: 0, message });
        if rewards.is_empty() {
            return err("no instances".into());
        }
        if instance_names.len() != rewards.len() || baseline.len() != rewards.len() {
            return err("instance, reward and baseline counts differ".into());
        }
        let arms = rewards[0].len();
        if arms == 0 {
            return err("no arms".into());
        }
        for (i, row) in rewards.iter().enumerate() {
            if row.len() != arms {
                return err(format!(
                    "instance {i} has {} arm entries, expected {arms}",
                    row.len()
                ));
            }
            for (a, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return err(format!(
                        "instance {i}, arm {a}: score {v} not finite and >= 0"
                    ));
                }
            }
            if !baseline[i].is_finite() || baseline[i] < 0.0 {
                return err(format!(
                    "instance {i}: baseline score {} invalid",
                    baseline[i]
                ));
            }
        }
        Ok(RewardTable {
            instance_names,
            rewards,
            baseline,
        })
    }

    pub fn num_instances(&self) -> usize {
        self.rewards.len()
    }

    pub fn num_arms(&self) -> usize {
        self.rewards[0].len()
    }

    /// Mean score of each arm over the series.
    pub fn arm_means(&self) -> Vec<f64> {
        let n = self.num_instances() as f64;
        let mut means = vec![0.0; self.num_arms()];
        for row in &self.rewards {
            for (a, &v) in row.iter().enumerate() {
                means[a] += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        means
    }

    pub fn baseline_mean(&self) -> f64 {
        self.baseline.iter().sum::<f64>() / self.num_instances() as f64
    }

    /// The empirical oracle: the arm with minimal series-mean score,
    /// lowest index on ties.
    pub fn best_mean_arm(&self) -> usize {
        let means = self.arm_means();
        let mut best = 0;
        for (a, &m) in means.iter().enumerate() {
            if m < means[best] {
                best = a;
            }
        }
        best
    }

    /// CSV with header `instance,arm_0,...,arm_K,baseline`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance");
        for a in 0..self.num_arms() {
            out.push_str(&format!(",arm_{a}"));
        }
        out.push_str(",baseline\n");
        for i in 0..self.num_instances() {
            out.push_str(&self.instance_names[i].replace(',', ";"));
            for &v in &self.rewards[i] {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.baseline[i]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<RewardTable, TableError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| TableError {
            line: 1,
            message: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 3 || cols[0] != "instance" || *cols.last().unwrap() != "baseline" {
            return Err(TableError {
                line: 1,
                message: "expected header `instance,arm_0,...,baseline`".into(),
            });
        }
        for (a, col) in cols[1..cols.len() - 1].iter().enumerate() {
            if *col != format!("arm_{a}") {
                return Err(TableError {
                    line: 1,
                    message: format!("expected column `arm_{a}`, found `{col}`"),
                });
            }
        }
        let arms = cols.len() - 2;
        let mut names = Vec::new();
        let mut rewards = Vec::new();
        let mut baseline = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            if fields.len() != arms + 2 {
                return Err(TableError {
                    line,
                    message: format!("expected {} fields, found {}", arms + 2, fields.len()),
                });
            }
            let parse = |i: usize| -> Result<f64, TableError> {
                fields[i].parse::<f64>().map_err(|_| TableError {
                    line,
                    message: format!("column `{}`: invalid number `{}`", cols[i], fields[i]),
                })
            };
            names.push(fields[0].to_string());
            let row: Result<Vec<f64>, _> = (1..=arms).map(parse).collect();
            rewards.push(row?);
            baseline.push(parse(arms + 1)?);
        }
        RewardTable::new(names, rewards, baseline)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RewardTable {
        RewardTable::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0], vec![3.0, 0.5]],
            vec![1.5, 1.5],
        )
        .unwrap()
    }

    #[test]
    fn means_and_oracle() {
        let t = small();
        let means = t.arm_means();
        assert_eq!(means, vec![2.0, 1.25]);
        assert_eq!(t.best_mean_arm(), 1);
        assert_eq!(t.baseline_mean(), 1.5);
    }

    #[test]
    fn csv_roundtrip() {
        let t = small();
        let back = RewardTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_negative_scores() {
        let err = RewardTable::new(vec!["a".into()], vec![vec![-0.1]], vec![0.0]).unwrap_err();
        assert!(err.message.contains("not finite and >= 0"));
    }

    #[test]
    fn csv_diagnostics() {
        let t = small();
        let broken = t.to_csv().replace("3,0.5", "3,oops");
        let err = RewardTable::from_csv(&broken).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("arm_1"), "{}", err.message);
    }

    #[test]
    fn csv_header_checked() {
        let err = RewardTable::from_csv("foo,bar\n1,2\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
