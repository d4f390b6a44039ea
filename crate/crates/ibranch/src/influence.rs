//! Influence graphs over MIP variables.
//!
//! Variable `i` exerts local influence on variable `j` through row `l`
//! whenever both appear in the row's sparsity pattern; six models turn
//! that co-occurrence into a weight, optionally consuming the node LP's
//! dual vector. Summing local influences over rows gives the direct
//! influence `w_ij`, and scaling each variable's out-weight by
//! `sqrt(1 + c_i)` gives the total-influence branching score.
//!
//! All weights are computed on a normalized copy of the problem so the
//! graph is invariant to row and objective rescaling; the instance being
//! solved is never modified.

use crate::instance::{MipInstance, SparseRow};
use std::collections::BTreeMap;
use std::fmt;

/// Threshold below which a dual value counts as zero.
pub const DUAL_NONZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InfluenceModel {
    Count,
    Binary,
    Dual,
    CountDual,
    Auxiliary,
    Adversarial,
}

impl InfluenceModel {
    pub const ALL: [InfluenceModel; 6] = [
        InfluenceModel::Count,
        InfluenceModel::Binary,
        InfluenceModel::Dual,
        InfluenceModel::CountDual,
        InfluenceModel::Auxiliary,
        InfluenceModel::Adversarial,
    ];

    /// Whether the model consumes the node LP solution. `Count` and
    /// `Binary` are static: they depend only on the sparsity pattern.
    pub fn needs_lp(self) -> bool {
        !matches!(self, InfluenceModel::Count | InfluenceModel::Binary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InfluenceModel::Count => "count",
            InfluenceModel::Binary => "binary",
            InfluenceModel::Dual => "dual",
            InfluenceModel::CountDual => "countdual",
            InfluenceModel::Auxiliary => "auxiliary",
            InfluenceModel::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for InfluenceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InfluenceModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(InfluenceModel::Count),
            "binary" => Ok(InfluenceModel::Binary),
            "dual" => Ok(InfluenceModel::Dual),
            "countdual" => Ok(InfluenceModel::CountDual),
            "auxiliary" => Ok(InfluenceModel::Auxiliary),
            "adversarial" => Ok(InfluenceModel::Adversarial),
            other => Err(format!("unknown influence model `{other}`")),
        }
    }
}

/// Rescaling-invariant copy of an instance, used only to build graphs.
///
/// The objective is divided by its population standard deviation when that
/// is nonzero. Each row is divided by `b_k = [ru finite]·ru - [rl finite]·rl`
/// when `b_k != 0`, otherwise by the population standard deviation of the
/// dense row when that is nonzero, otherwise left unscaled.
#[derive(Debug, Clone)]
pub struct NormalizedInstance {
    pub n: usize,
    pub m: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<SparseRow>,
    /// The `b_k` values used for row scaling (kept for inspection).
    pub row_scale_base: Vec<f64>,
    /// Original variable bounds, pass-through for slack computations.
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
}

/// Population standard deviation of a dense vector of length `n` whose
/// nonzeros are given; absent entries count as zero.
fn dense_std(nonzeros: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let count = n as f64;
    let sum: f64 = nonzeros.clone().sum();
    let mean = sum / count;
    let mut acc = 0.0;
    let mut stored = 0usize;
    for v in nonzeros {
        acc += (v - mean) * (v - mean);
        stored += 1;
    }
    acc += (n - stored) as f64 * mean * mean;
    (acc / count).sqrt()
}

/// Builds the normalized copy used for influence computations.
pub fn normalize(inst: &MipInstance) -> NormalizedInstance {
    let n = inst.num_vars();
    let m = inst.num_rows();
    let mut objective = inst.objective.clone();
    let sigma_c = dense_std(objective.iter().copied(), n);
    if sigma_c != 0.0 {
        for c in &mut objective {
            *c /= sigma_c;
        }
    }
    let mut rows = inst.rows.clone();
    let mut row_scale_base = Vec::with_capacity(m);
    for (k, row) in rows.iter_mut().enumerate() {
        let ru = inst.row_upper[k];
        let rl = inst.row_lower[k];
        let b = if ru.is_finite() { ru } else { 0.0 } - if rl.is_finite() { rl } else { 0.0 };
        row_scale_base.push(b);
        let divisor = if b != 0.0 {
            b
        } else {
            let sigma = dense_std(row.iter().map(|&(_, v)| v), n);
            if sigma != 0.0 {
                sigma
            } else {
                1.0
            }
        };
        if divisor != 1.0 {
            for entry in row.iter_mut() {
                entry.1 /= divisor;
            }
        }
    }
    NormalizedInstance {
        n,
        m,
        objective,
        rows,
        row_scale_base,
        var_lower: inst.var_lower.clone(),
        var_upper: inst.var_upper.clone(),
    }
}

/// Node LP data consumed by the dual-dependent models: the primal point,
/// the row duals, and the bounds that were active at the node.
#[derive(Debug, Clone, Copy)]
pub struct NodeLp<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

impl<'a> NodeLp<'a> {
    /// Minimal distance from `x_i` to one of its finite bounds; 1 when the
    /// variable has no finite bound. Clamped at zero (the LP may rest an
    /// epsilon outside a bound).
    pub fn slack(&self, i: usize) -> f64 {
        let lo = self.lower[i];
        let hi = self.upper[i];
        let down = if lo.is_finite() {
            Some(self.x[i] - lo)
        } else {
            None
        };
        let up = if hi.is_finite() {
            Some(hi - self.x[i])
        } else {
            None
        };
        match (down, up) {
            (Some(a), Some(b)) => a.min(b).max(0.0),
            (Some(a), None) => a.max(0.0),
            (None, Some(b)) => b.max(0.0),
            (None, None) => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InfluenceError {
    /// A dual-dependent model was requested without an LP solution.
    MissingLp(InfluenceModel),
}

impl fmt::Display for InfluenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfluenceError::MissingLp(model) => {
                write!(f, "influence model `{model}` requires a node LP solution")
            }
        }
    }
}

impl std::error::Error for InfluenceError {}

/// Weighted directed graph of direct influences; the diagonal is zero and
/// an edge can only connect variables sharing at least one row.
#[derive(Debug, Clone)]
pub struct InfluenceGraph {
    pub n: usize,
    pub model: InfluenceModel,
    weights: BTreeMap<(usize, usize), f64>,
}

impl InfluenceGraph {
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Nonzero entries in deterministic `(i, j)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    /// Out-weight sums `sum_j w_ij`, the graph part of the branching score.
    pub fn out_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for (&(i, _), &w) in &self.weights {
            sums[i] += w;
        }
        sums
    }

    /// Sparse triplet CSV (`i,j,w`) for debugging and inspection.
    pub fn to_triplet_csv(&self) -> String {
        let mut out = String::from("i,j,w\n");
        for (i, j, w) in self.entries() {
            out.push_str(&format!("{i},{j},{w}\n"));
        }
        out
    }
}

fn find_coeff(row: &SparseRow, var: usize) -> Option<f64> {
    row.binary_search_by_key(&var, |&(j, _)| j)
        .ok()
        .map(|pos| row[pos].1)
}

/// Number of rows whose pattern contains both `i` and `j`.
fn co_occurrence(norm: &NormalizedInstance, i: usize, j: usize) -> usize {
    norm.rows
        .iter()
        .filter(|row| find_coeff(row, i).is_some() && find_coeff(row, j).is_some())
        .count()
}

/// Local influence of `i` on `j` through row `l`, exactly per model:
///
/// * count: `1`
/// * binary: `1 / #rows containing both i and j`
/// * dual: `|y_l|`
/// * countdual: `[y_l != 0]`
/// * auxiliary: `s_i * |A_li * y_l|`
/// * adversarial: `s_i * |A_li / A_lj| * [y_l != 0]`
///
/// each multiplied by the pattern indicator of the pair in row `l`. `A`
/// entries are the normalized ones and `s_i` is [`NodeLp::slack`].
pub fn local_influence(
    model: InfluenceModel,
    norm: &NormalizedInstance,
    row: usize,
    i: usize,
    j: usize,
    lp: Option<&NodeLp<'_>>,
) -> Result<f64, InfluenceError> {
    debug_assert_ne!(i, j);
    if model.needs_lp() && lp.is_none() {
        return Err(InfluenceError::MissingLp(model));
    }
    let r = &norm.rows[row];
    let (a_li, a_lj) = match (find_coeff(r, i), find_coeff(r, j)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(0.0),
    };
    let w = match model {
        InfluenceModel::Count => 1.0,
        InfluenceModel::Binary => 1.0 / co_occurrence(norm, i, j) as f64,
        InfluenceModel::Dual => lp.unwrap().y[row].abs(),
        InfluenceModel::CountDual => {
            if lp.unwrap().y[row].abs() > DUAL_NONZERO_TOL {
                1.0
            } else {
                0.0
            }
        }
        InfluenceModel::Auxiliary => {
            let lp = lp.unwrap();
            lp.slack(i) * (a_li * lp.y[row]).abs()
        }
        InfluenceModel::Adversarial => {
            let lp = lp.unwrap();
            if lp.y[row].abs() > DUAL_NONZERO_TOL {
                lp.slack(i) * (a_li / a_lj).abs()
            } else {
                0.0
            }
        }
    };
    Ok(w)
}

/// Builds the influence graph by streaming each row's support pairwise;
/// the dense variable-by-variable product is never materialized.
pub fn build_graph(
    model: InfluenceModel,
    norm: &NormalizedInstance,
    lp: Option<&NodeLp<'_>>,
) -> Result<InfluenceGraph, InfluenceError> {
    if model.needs_lp() && lp.is_none() {
        return Err(InfluenceError::MissingLp(model));
    }
    // The binary model's row sum telescopes: summing 1/count over the
    // count co-occurring rows gives exactly one per connected pair, so the
    // graph is the pair adjacency indicator. Building it that way keeps
    // the invariant exact instead of accumulating 1/count round-off.
    if model == InfluenceModel::Binary {
        let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for row in &norm.rows {
            for (a, &(i, _)) in row.iter().enumerate() {
                for &(j, _) in &row[a + 1..] {
                    weights.insert((i, j), 1.0);
                    weights.insert((j, i), 1.0);
                }
            }
        }
        return Ok(InfluenceGraph {
            n: norm.n,
            model,
            weights,
        });
    }

    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (l, row) in norm.rows.iter().enumerate() {
        let y_l = lp.map(|s| s.y[l]);
        // Row-level factors shared by every pair in the row.
        let row_factor = match model {
            InfluenceModel::Dual => {
                let y = y_l.unwrap().abs();
                if y == 0.0 {
                    continue;
                }
                y
            }
            InfluenceModel::CountDual | InfluenceModel::Adversarial => {
                if y_l.unwrap().abs() > DUAL_NONZERO_TOL {
                    1.0
                } else {
                    continue;
                }
            }
            InfluenceModel::Auxiliary => {
                let y = y_l.unwrap().abs();
                if y == 0.0 {
                    continue;
                }
                y
            }
            InfluenceModel::Count => 1.0,
            InfluenceModel::Binary => unreachable!("handled above"),
        };
        for &(i, a_li) in row {
            for &(j, a_lj) in row {
                if i == j {
                    continue;
                }
                let w = match model {
                    InfluenceModel::Count => 1.0,
                    InfluenceModel::Binary => unreachable!("handled above"),
                    InfluenceModel::Dual => row_factor,
                    InfluenceModel::CountDual => 1.0,
                    InfluenceModel::Auxiliary => lp.unwrap().slack(i) * (a_li).abs() * row_factor,
                    InfluenceModel::Adversarial => lp.unwrap().slack(i) * (a_li / a_lj).abs(),
                };
                if w != 0.0 {
                    *weights.entry((i, j)).or_insert(0.0) += w;
                }
            }
        }
    }
    weights.retain(|_, w| *w != 0.0);
    Ok(InfluenceGraph {
        n: norm.n,
        model,
        weights,
    })
}

/// Total influence per variable: `sqrt(1 + c_i) * sum_j w_ij` with the
/// normalized objective. A radicand below zero is clamped to zero, which
/// zeroes the score of variables with strongly negative normalized cost.
pub fn total_influence(graph: &InfluenceGraph, norm: &NormalizedInstance) -> Vec<f64> {
    let sums = graph.out_sums();
    norm.objective
        .iter()
        .zip(sums)
        .map(|(&c, s)| (1.0 + c).max(0.0).sqrt() * s)
        .collect()
}

/// Argmax of `scores` over `candidates`, ties broken by lowest index.
/// Returns `None` on an empty candidate set.
pub fn select_branch_var(scores: &[f64], candidates: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &i in candidates {
        let s = scores[i];
        let better = match best {
            None => true,
            Some((bi, bs)) => s > bs || (s == bs && i < bi),
        };
        if better {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::MipInstance;

    fn inst(
        rows: Vec<SparseRow>,
        row_lower: Vec<f64>,
        row_upper: Vec<f64>,
        n: usize,
    ) -> MipInstance {
        MipInstance {
            name: "t".into(),
            objective: vec![0.0; n],
            rows,
            row_lower,
            row_upper,
            var_lower: vec![0.0; n],
            var_upper: vec![1.0; n],
            integer: vec![false; n],
        }
    }

    #[test]
    fn objective_with_zero_variance_unchanged() {
        let mut i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        i.objective = vec![1.0, 1.0];
        let norm = normalize(&i);
        assert_eq!(norm.objective, vec![1.0, 1.0]);
    }

    #[test]
    fn row_scaled_by_finite_upper_bound() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        let norm = normalize(&i);
        assert_eq!(norm.row_scale_base, vec![4.0]);
        assert_eq!(norm.rows[0], vec![(0, 0.25), (1, 0.5)]);
    }

    #[test]
    fn equality_row_falls_back_to_std() {
        // b = 2 - 2 = 0, dense row (1, 2): mean 1.5, sigma 0.5.
        let i = inst(vec![vec![(0, 1.0), (1, 2.0)]], vec![2.0], vec![2.0], 2);
        let norm = normalize(&i);
        assert_eq!(norm.row_scale_base, vec![0.0]);
        assert!((norm.rows[0][0].1 - 2.0).abs() < 1e-12);
        assert!((norm.rows[0][1].1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn count_local_influence_is_indicator() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        let norm = normalize(&i);
        let w = local_influence(InfluenceModel::Count, &norm, 0, 0, 1, None).unwrap();
        assert_eq!(w, 1.0);
    }

    #[test]
    fn binary_single_row_pair_is_one() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        let norm = normalize(&i);
        let w = local_influence(InfluenceModel::Binary, &norm, 0, 0, 1, None).unwrap();
        assert_eq!(w, 1.0);
    }

    #[test]
    fn countdual_zero_dual_kills_term() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        let norm = normalize(&i);
        let x = [0.0, 0.0];
        let y = [0.0];
        let lp = NodeLp {
            x: &x,
            y: &y,
            lower: &norm.var_lower,
            upper: &norm.var_upper,
        };
        let w = local_influence(InfluenceModel::CountDual, &norm, 0, 0, 1, Some(&lp)).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn dual_model_without_lp_errors() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        let norm = normalize(&i);
        assert_eq!(
            build_graph(InfluenceModel::Dual, &norm, None).unwrap_err(),
            InfluenceError::MissingLp(InfluenceModel::Dual)
        );
    }

    #[test]
    fn single_row_count_graph() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        let norm = normalize(&i);
        let g = build_graph(InfluenceModel::Count, &norm, None).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
        assert_eq!(g.weight(0, 0), 0.0);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn empty_matrix_graph_is_zero() {
        let i = inst(vec![], vec![], vec![], 3);
        let norm = normalize(&i);
        let g = build_graph(InfluenceModel::Count, &norm, None).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(total_influence(&g, &norm), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_shared_rows_count_two_binary_one() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)], vec![(0, 3.0), (1, 1.0)]],
            vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            vec![4.0, 5.0],
            2,
        );
        let norm = normalize(&i);
        let count = build_graph(InfluenceModel::Count, &norm, None).unwrap();
        assert_eq!(count.weight(0, 1), 2.0);
        let binary = build_graph(InfluenceModel::Binary, &norm, None).unwrap();
        assert_eq!(binary.weight(0, 1), 1.0);
    }

    #[test]
    fn total_influence_weights_by_objective() {
        let mut i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        i.objective = vec![1.0, 1.0]; // sigma 0 => unchanged
        let norm = normalize(&i);
        let g = build_graph(InfluenceModel::Count, &norm, None).unwrap();
        let w = total_influence(&g, &norm);
        assert!((w[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((w[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn radicand_clamped_at_zero() {
        let mut i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        i.objective = vec![-1.0, -1.0]; // sigma 0 => stays (-1, -1)
        let norm = normalize(&i);
        let g = build_graph(InfluenceModel::Count, &norm, None).unwrap();
        assert_eq!(total_influence(&g, &norm), vec![0.0, 0.0]);
    }

    #[test]
    fn select_breaks_ties_by_lowest_index() {
        let s = [2f64.sqrt(), 2f64.sqrt()];
        assert_eq!(select_branch_var(&s, &[0, 1]), Some(0));
    }

    #[test]
    fn select_plain_argmax() {
        let s = [0.0, 5.0, 3.0];
        assert_eq!(select_branch_var(&s, &[1, 2]), Some(1));
    }

    #[test]
    fn select_singleton_and_empty() {
        let s = [0.0, 5.0, 3.0];
        assert_eq!(select_branch_var(&s, &[2]), Some(2));
        assert_eq!(select_branch_var(&s, &[]), None);
    }

    #[test]
    fn auxiliary_graph_can_be_asymmetric() {
        // x0 sits mid-box (slack 0.5), x1 on its bound (slack 0).
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)]],
            vec![f64::NEG_INFINITY],
            vec![4.0],
            2,
        );
        let norm = normalize(&i);
        let x = [0.5, 0.0];
        let y = [1.5];
        let lp = NodeLp {
            x: &x,
            y: &y,
            lower: &norm.var_lower,
            upper: &norm.var_upper,
        };
        let g = build_graph(InfluenceModel::Auxiliary, &norm, Some(&lp)).unwrap();
        assert!(g.weight(0, 1) > 0.0);
        assert_eq!(g.weight(1, 0), 0.0);
    }

    #[test]
    fn triplet_csv_lists_edges_in_order() {
        let i = inst(
            vec![vec![(0, 1.0), (1, 2.0)], vec![(1, 1.0), (2, 1.0)]],
            vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            vec![4.0, 2.0],
            3,
        );
        let norm = normalize(&i);
        let g = build_graph(InfluenceModel::Count, &norm, None).unwrap();
        assert_eq!(g.to_triplet_csv(), "i,j,w\n0,1,1\n1,0,1\n1,2,1\n2,1,1\n");
    }

    #[test]
    fn slack_handles_bound_combinations() {
        let x = [2.0, -3.0, 7.0, 0.25];
        let lower = [0.0, f64::NEG_INFINITY, 5.0, 0.0];
        let upper = [10.0, -1.0, f64::INFINITY, 1.0];
        let lp = NodeLp {
            x: &x,
            y: &[],
            lower: &lower,
            upper: &upper,
        };
        assert_eq!(lp.slack(0), 2.0);
        assert_eq!(lp.slack(1), 2.0);
        assert_eq!(lp.slack(2), 2.0);
        assert_eq!(lp.slack(3), 0.25);
    }
}
