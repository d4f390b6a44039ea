//! Best-bound branch and bound with pluggable branching.
//!
//! For a non-baseline action `(model, k)`, nodes at depth `<= k` branch on
//! the variable with maximal total influence; deeper nodes, and every node
//! under the baseline action, use most-fractional branching. The root has
//! depth zero, node selection is best-bound with FIFO tie-breaking, and all
//! tie-breaks are by lowest index, so a run with a node limit and no finite
//! time limit is fully deterministic.

use crate::influence::{
    build_graph, normalize, select_branch_var, total_influence, InfluenceModel, NodeLp,
    NormalizedInstance,
};
use crate::instance::MipInstance;
use crate::lp::{solve_lp, LpError, LpSolution};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::time::Instant;

/// A bandit-selectable solver configuration: the baseline rule everywhere,
/// or influence branching with a given model down to a given depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Baseline,
    Influence { model: InfluenceModel, depth: u32 },
}

pub const MAX_INFLUENCE_DEPTH: u32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ActionError {
    pub depth: u32,
}

impl fmt::Display for ActionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "influence depth {} out of range (expected 1..={MAX_INFLUENCE_DEPTH}; \
             use the baseline action for depth 0)",
            self.depth
        )
    }
}

impl std::error::Error for ActionError {}

impl Action {
    /// Influence action with `1 <= depth <= 6`. Depth zero is the baseline
    /// by definition: influence branching would never activate.
    pub fn influence(model: InfluenceModel, depth: u32) -> Result<Action, ActionError> {
        if (1..=MAX_INFLUENCE_DEPTH).contains(&depth) {
            Ok(Action::Influence { model, depth })
        } else {
            Err(ActionError { depth })
        }
    }

    pub fn label(&self) -> String {
        match self {
            Action::Baseline => "baseline".to_string(),
            Action::Influence { model, depth } => format!("{model}_{depth}"),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    /// Wall-clock limit in seconds; `f64::INFINITY` disables the clock and
    /// makes the run (and its reltime of zero) fully deterministic.
    pub time_limit: f64,
    pub node_limit: Option<u64>,
    pub int_tol: f64,
    pub gap_tol: f64,
    /// Recorded in reports for provenance; the search itself is
    /// deterministic and never draws random numbers.
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            time_limit: f64::INFINITY,
            node_limit: None,
            int_tol: 1e-6,
            gap_tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
        }
    }
}

/// Per-instance reward components. `f = reltime + gap + nofeas` always;
/// a run solved to optimality (or proven infeasible, which is a complete
/// answer) has `gap = 0` and `nofeas = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub reltime: f64,
    pub gap: f64,
    pub nofeas: u8,
    pub tree_size: u64,
    pub f: f64,
}

#[derive(Debug, Clone)]
pub struct Incumbent {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub score: Score,
    pub status: SolveStatus,
    pub incumbent: Option<Incumbent>,
    /// Best proven lower bound at termination, when one exists.
    pub dual_bound: Option<f64>,
    /// Mid-tree LP breakdowns; those nodes were fathomed and the run
    /// flagged rather than aborted.
    pub lp_troubles: u64,
}

#[derive(Debug)]
pub enum SolveError {
    /// LP breakdown at the root node; no meaningful score exists.
    RootLp(LpError),
    BadParams(String),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::RootLp(e) => write!(f, "root LP failed: {e}"),
            SolveError::BadParams(msg) => write!(f, "invalid search parameters: {msg}"),
        }
    }
}

impl std::error::Error for SolveError {}

/// Relative primal-dual gap in `[0, 1]`; a missing primal value maps to 1.
pub fn relative_gap(primal: Option<f64>, dual_bound: f64) -> f64 {
    match primal {
        None => 1.0,
        Some(p) => {
            let denom = p.abs().max(dual_bound.abs()).max(1e-10);
            ((p - dual_bound).abs() / denom).clamp(0.0, 1.0)
        }
    }
}

struct HeapNode {
    bound: f64,
    seq: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    depth: u32,
}

impl PartialEq for HeapNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for HeapNode {}
impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapNode {
    // Reversed so the max-heap pops the smallest bound, FIFO on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct InfluenceCtx {
    norm: NormalizedInstance,
    model: InfluenceModel,
    max_depth: u32,
    /// Scores of the static models, computed once per instance.
    static_scores: Option<Vec<f64>>,
}

/// Solves `inst` under `action`, producing a [`Score`] and the incumbent.
pub fn solve(
    inst: &MipInstance,
    action: &Action,
    params: &SearchParams,
) -> Result<SolveOutcome, SolveError> {
    if params.time_limit.is_nan() || params.time_limit <= 0.0 {
        return Err(SolveError::BadParams(format!(
            "time limit must be positive, got {}",
            params.time_limit
        )));
    }
    let start = Instant::now();
    let n = inst.num_vars();

    let influence_ctx = match action {
        Action::Baseline => None,
        Action::Influence { model, depth } => {
            let norm = normalize(inst);
            let static_scores = if model.needs_lp() {
                None
            } else {
                let graph = build_graph(*model, &norm, None).expect("static model needs no LP");
                Some(total_influence(&graph, &norm))
            };
            Some(InfluenceCtx {
                norm,
                model: *model,
                max_depth: *depth,
                static_scores,
            })
        }
    };

    let mut heap = BinaryHeap::new();
    let mut seq: u64 = 0;
    heap.push(HeapNode {
        bound: f64::NEG_INFINITY,
        seq,
        lower: inst.var_lower.clone(),
        upper: inst.var_upper.clone(),
        depth: 0,
    });

    let mut incumbent: Option<Incumbent> = None;
    let mut tree_size: u64 = 0;
    let mut lp_troubles: u64 = 0;
    let mut status: Option<SolveStatus> = None;
    let mut dual_at_stop: Option<f64> = None;

    while let Some(top_bound) = heap.peek().map(|node| node.bound) {
        // Gap-based optimality: the smallest open bound is within tolerance
        // of the incumbent.
        if let Some(inc) = &incumbent {
            if top_bound >= inc.objective
                || relative_gap(Some(inc.objective), top_bound) <= params.gap_tol
            {
                status = Some(SolveStatus::Optimal);
                break;
            }
        }
        if start.elapsed().as_secs_f64() > params.time_limit {
            status = Some(SolveStatus::TimeLimit);
            dual_at_stop = Some(top_bound);
            break;
        }
        if let Some(limit) = params.node_limit {
            if tree_size >= limit {
                status = Some(SolveStatus::NodeLimit);
                dual_at_stop = Some(top_bound);
                break;
            }
        }
        let node = heap.pop().expect("peeked");

        let lp = match solve_lp(inst, &node.lower, &node.upper) {
            Ok(sol) => sol,
            Err(e) => {
                if tree_size == 0 {
                    return Err(SolveError::RootLp(e));
                }
                lp_troubles += 1;
                continue;
            }
        };
        tree_size += 1;

        let opt = match lp {
            LpSolution::Infeasible => continue,
            LpSolution::Unbounded => {
                if tree_size == 1 {
                    status = Some(SolveStatus::Unbounded);
                    break;
                }
                // A child of a bounded relaxation cannot be unbounded;
                // treat it as a numerical hiccup and fathom.
                lp_troubles += 1;
                continue;
            }
            LpSolution::Optimal(opt) => opt,
        };

        if let Some(inc) = &incumbent {
            if opt.objective >= inc.objective {
                continue;
            }
        }

        let candidates: Vec<usize> = (0..n)
            .filter(|&j| inst.integer[j] && (opt.x[j] - opt.x[j].round()).abs() > params.int_tol)
            .collect();

        if candidates.is_empty() {
            incumbent = Some(Incumbent {
                x: opt.x.clone(),
                objective: opt.objective,
            });
            continue;
        }

        let branch_var = match &influence_ctx {
            Some(ctx) if node.depth <= ctx.max_depth => {
                let node_scores;
                let scores = match &ctx.static_scores {
                    Some(s) => s.as_slice(),
                    None => {
                        let view = NodeLp {
                            x: &opt.x,
                            y: &opt.y,
                            lower: &node.lower,
                            upper: &node.upper,
                        };
                        let graph = build_graph(ctx.model, &ctx.norm, Some(&view))
                            .expect("node LP supplied");
                        node_scores = total_influence(&graph, &ctx.norm);
                        node_scores.as_slice()
                    }
                };
                select_branch_var(scores, &candidates).expect("nonempty candidates")
            }
            _ => most_fractional(&opt.x, &candidates),
        };

        let pivot = opt.x[branch_var];
        let (floor, ceil) = (pivot.floor(), pivot.ceil());

        let mut left_upper = node.upper.clone();
        left_upper[branch_var] = left_upper[branch_var].min(floor);
        if node.lower[branch_var] <= left_upper[branch_var] {
            seq += 1;
            heap.push(HeapNode {
                bound: opt.objective,
                seq,
                lower: node.lower.clone(),
                upper: left_upper,
                depth: node.depth + 1,
            });
        }

        let mut right_lower = node.lower;
        right_lower[branch_var] = right_lower[branch_var].max(ceil);
        if right_lower[branch_var] <= node.upper[branch_var] {
            seq += 1;
            heap.push(HeapNode {
                bound: opt.objective,
                seq,
                lower: right_lower,
                upper: node.upper,
                depth: node.depth + 1,
            });
        }
    }

    let status = status.unwrap_or({
        // Tree exhausted: either we proved optimality of the incumbent or
        // proved there is no feasible point.
        if incumbent.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        }
    });

    let elapsed = start.elapsed().as_secs_f64();
    let reltime = if params.time_limit.is_finite() {
        (elapsed.min(params.time_limit)) / params.time_limit
    } else {
        0.0
    };

    let (gap, nofeas, dual_bound) = match status {
        SolveStatus::Optimal => (0.0, 0u8, incumbent.as_ref().map(|i| i.objective)),
        SolveStatus::Infeasible => (0.0, 0, None),
        SolveStatus::Unbounded => (1.0, u8::from(incumbent.is_none()), None),
        SolveStatus::TimeLimit | SolveStatus::NodeLimit => {
            let dual = dual_at_stop.expect("limit stops record the open bound");
            let primal = incumbent.as_ref().map(|i| i.objective);
            (
                relative_gap(primal, dual),
                u8::from(primal.is_none()),
                Some(dual),
            )
        }
    };

    let f = reltime + gap + f64::from(nofeas);
    Ok(SolveOutcome {
        score: Score {
            reltime,
            gap,
            nofeas,
            tree_size,
            f,
        },
        status,
        incumbent,
        dual_bound,
        lp_troubles,
    })
}

/// Default rule: branch on the variable whose fractional part is closest
/// to one half, lowest index on ties.
fn most_fractional(x: &[f64], candidates: &[usize]) -> usize {
    let mut best = candidates[0];
    let mut best_dist = f64::NEG_INFINITY;
    for &j in candidates {
        let frac = x[j] - x[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist > best_dist {
            best_dist = dist;
            best = j;
        }
    }
    best
}
