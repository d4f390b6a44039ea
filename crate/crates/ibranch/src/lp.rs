//! LP relaxation solver: bounded-variable two-phase revised simplex.
//!
//! The problem `min c^T x, rl <= Ax <= ru, xl <= x <= xu` is rewritten as
//! `Ax - s = 0` with ranged slack variables `rl <= s <= ru`. Phase one
//! drives a set of artificial variables to zero starting from an arbitrary
//! bound assignment; phase two optimizes the true objective with the
//! artificials pinned at zero. The basis is refactorized (dense LU with
//! partial pivoting) every iteration, which is plenty fast at the problem
//! sizes this crate targets and keeps the basic values numerically fresh.
//!
//! Dual sign convention: the returned multiplier of a row active at its
//! upper bound is nonnegative, at its lower bound nonpositive, and zero on
//! inactive rows; equality rows carry a free-signed multiplier.

// Index loops match the linear-algebra notation here.
#![allow(clippy::needless_range_loop)]

use crate::instance::MipInstance;
use std::fmt;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Relative strong-duality / complementary-slackness tolerance.
pub const DUAL_TOL: f64 = 1e-6;
/// Reduced-cost threshold for pricing.
pub const PIVOT_TOL: f64 = 1e-9;

const RATE_TOL: f64 = 1e-10;
const DEGENERATE_STEP: f64 = 1e-12;
const STALL_THRESHOLD: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// An optimal basic solution with its dual information.
#[derive(Debug, Clone)]
pub struct LpOptimum {
    /// Primal values of the structural variables.
    pub x: Vec<f64>,
    /// One dual multiplier per row (sign convention above).
    pub y: Vec<f64>,
    /// Reduced costs of the structural variables; exactly zero for basic
    /// variables.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Indices of the basic variables (structural `j`, slack `n + k`).
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum LpSolution {
    Optimal(LpOptimum),
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal(_) => LpStatus::Optimal,
            LpSolution::Infeasible => LpStatus::Infeasible,
            LpSolution::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn optimum(&self) -> Option<&LpOptimum> {
        match self {
            LpSolution::Optimal(opt) => Some(opt),
            _ => None,
        }
    }
}

/// Numerical failure. Never reported as a wrong status: callers see either
/// a trustworthy [`LpSolution`] or this error.
#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    /// The iteration cap was exceeded.
    Breakdown { iterations: u64 },
    /// A basis matrix became numerically singular.
    Singular,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Breakdown { iterations } => {
                write!(f, "simplex did not converge within {iterations} iterations")
            }
            LpError::Singular => write!(f, "numerically singular basis"),
        }
    }
}

impl std::error::Error for LpError {}

/// Solves the LP relaxation of `inst` with variable bounds overridden by
/// `lower`/`upper` (pass the instance's own bounds for the root LP).
///
/// The result is a deterministic function of the inputs: pricing and ratio
/// tie-breaks are by lowest index, and Bland's rule takes over after a run
/// of degenerate steps, so repeated calls return bit-identical solutions.
pub fn solve_lp(inst: &MipInstance, lower: &[f64], upper: &[f64]) -> Result<LpSolution, LpError> {
    let n = inst.num_vars();
    assert_eq!(lower.len(), n, "bound override length mismatch");
    assert_eq!(upper.len(), n, "bound override length mismatch");
    for j in 0..n {
        if lower[j] > upper[j] {
            return Ok(LpSolution::Infeasible);
        }
    }
    for k in 0..inst.num_rows() {
        if inst.row_lower[k] > inst.row_upper[k] {
            return Ok(LpSolution::Infeasible);
        }
    }
    Simplex::new(inst, lower, upper).run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free variable resting at zero.
    FreeZero,
}

struct Simplex {
    m: usize,
    n_struct: usize,
    /// Structural + slack count; artificials live at indices >= this.
    n_real: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    value: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    objective_costs: Vec<f64>,
    iterations: u64,
    iteration_cap: u64,
    degenerate_run: u32,
    bland: bool,
}

impl Simplex {
    fn new(inst: &MipInstance, xl: &[f64], xu: &[f64]) -> Self {
        let n = inst.num_vars();
        let m = inst.num_rows();
        let n_real = n + m;
        let total = n_real + m;

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
        for (k, row) in inst.rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j].push((k, v));
            }
        }
        for k in 0..m {
            cols[n + k].push((k, -1.0));
        }

        let mut lower = Vec::with_capacity(total);
        let mut upper = Vec::with_capacity(total);
        lower.extend_from_slice(xl);
        upper.extend_from_slice(xu);
        lower.extend_from_slice(&inst.row_lower);
        upper.extend_from_slice(&inst.row_upper);
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));

        let mut objective_costs = vec![0.0; total];
        objective_costs[..n].copy_from_slice(&inst.objective);

        Simplex {
            m,
            n_struct: n,
            n_real,
            cols,
            lower,
            upper,
            cost: vec![0.0; total],
            value: vec![0.0; total],
            state: vec![VarState::AtLower; total],
            basis: Vec::with_capacity(m),
            objective_costs,
            iterations: 0,
            iteration_cap: 50_000 + 100 * total as u64,
            degenerate_run: 0,
            bland: false,
        }
    }

    fn run(mut self) -> Result<LpSolution, LpError> {
        // Rest every structural/slack variable on a finite bound (lower
        // preferred), or at zero when free.
        for j in 0..self.n_real {
            let (state, value) = if self.lower[j].is_finite() {
                (VarState::AtLower, self.lower[j])
            } else if self.upper[j].is_finite() {
                (VarState::AtUpper, self.upper[j])
            } else {
                (VarState::FreeZero, 0.0)
            };
            self.state[j] = state;
            self.value[j] = value;
        }

        // Residual of Ax - s = 0 at the starting point; one artificial per
        // row absorbs it so the artificials form the initial basis.
        let mut residual = vec![0.0; self.m];
        for j in 0..self.n_real {
            if self.value[j] != 0.0 {
                for &(k, v) in &self.cols[j] {
                    residual[k] += v * self.value[j];
                }
            }
        }
        let mut initial_infeasibility = 0.0;
        for k in 0..self.m {
            let a = self.n_real + k;
            let sign = if residual[k] > 0.0 { -1.0 } else { 1.0 };
            self.cols[a] = vec![(k, sign)];
            self.value[a] = residual[k].abs();
            self.state[a] = VarState::Basic;
            self.basis.push(a);
            self.cost[a] = 1.0;
            initial_infeasibility += residual[k].abs();
        }

        // Phase one: minimize the sum of artificials.
        if self.m > 0 {
            let phase1 = self.optimize()?;
            if phase1 == PhaseExit::Unbounded {
                // The phase-one objective is bounded below by zero.
                return Err(LpError::Breakdown {
                    iterations: self.iterations,
                });
            }
            let infeasibility: f64 = (0..self.m).map(|k| self.value[self.n_real + k]).sum();
            if infeasibility > FEAS_TOL * (1.0 + initial_infeasibility) {
                return Ok(LpSolution::Infeasible);
            }
        }

        // Phase two: true costs, artificials fixed at zero.
        self.cost = self.objective_costs.clone();
        for k in 0..self.m {
            let a = self.n_real + k;
            self.lower[a] = 0.0;
            self.upper[a] = 0.0;
            if self.state[a] != VarState::Basic {
                self.state[a] = VarState::AtLower;
                self.value[a] = 0.0;
            }
        }
        self.bland = false;
        self.degenerate_run = 0;
        if self.optimize()? == PhaseExit::Unbounded {
            return Ok(LpSolution::Unbounded);
        }

        Ok(LpSolution::Optimal(self.extract()))
    }

    /// Recomputes the basic values from the nonbasic bound assignment and
    /// returns the factored basis.
    fn refresh(&mut self) -> Result<Lu, LpError> {
        let lu = Lu::factor(self.m, |p, k| {
            let var = self.basis[p];
            self.cols[var]
                .iter()
                .find(|&&(row, _)| row == k)
                .map_or(0.0, |&(_, v)| v)
        })
        .ok_or(LpError::Singular)?;
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.cols.len() {
            if self.state[j] != VarState::Basic && self.value[j] != 0.0 {
                for &(k, v) in &self.cols[j] {
                    rhs[k] -= v * self.value[j];
                }
            }
        }
        lu.solve(&mut rhs);
        for (p, &var) in self.basis.iter().enumerate() {
            self.value[var] = rhs[p];
        }
        Ok(lu)
    }

    fn duals(&self, lu: &Lu) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&var| self.cost[var]).collect();
        lu.solve_transposed(&mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        for &(k, v) in &self.cols[j] {
            d -= y[k] * v;
        }
        d
    }

    fn optimize(&mut self) -> Result<PhaseExit, LpError> {
        loop {
            self.iterations += 1;
            if self.iterations > self.iteration_cap {
                return Err(LpError::Breakdown {
                    iterations: self.iterations,
                });
            }
            let lu = self.refresh()?;
            let y = self.duals(&lu);

            // Pricing: Dantzig by default, Bland while stalled.
            let mut entering: Option<(usize, f64, f64)> = None; // (var, |d|, direction)
            for j in 0..self.cols.len() {
                let dir = match self.state[j] {
                    VarState::Basic => continue,
                    VarState::AtLower | VarState::AtUpper | VarState::FreeZero => {
                        let d = self.reduced_cost(j, &y);
                        match self.state[j] {
                            VarState::AtLower if d < -PIVOT_TOL => (d.abs(), 1.0),
                            VarState::AtUpper if d > PIVOT_TOL => (d.abs(), -1.0),
                            VarState::FreeZero if d.abs() > PIVOT_TOL => {
                                (d.abs(), if d < 0.0 { 1.0 } else { -1.0 })
                            }
                            _ => continue,
                        }
                    }
                };
                let (score, direction) = dir;
                if self.bland {
                    entering = Some((j, score, direction));
                    break;
                }
                if entering.is_none_or(|(_, best, _)| score > best) {
                    entering = Some((j, score, direction));
                }
            }
            let Some((e, _, t)) = entering else {
                return Ok(PhaseExit::Optimal);
            };

            // Basic-variable change rates for a unit step of the entering
            // variable along direction t.
            let mut w = vec![0.0; self.m];
            for &(k, v) in &self.cols[e] {
                w[k] = v;
            }
            lu.solve(&mut w);

            // Ratio test; candidates are (step, blocking var, new state).
            let mut best: Option<(f64, usize, VarState)> = None;
            let span = self.upper[e] - self.lower[e];
            if span.is_finite() {
                best = Some((span, e, VarState::Basic)); // placeholder state
            }
            for (p, &var) in self.basis.iter().enumerate() {
                let rate = -t * w[p];
                let (limit, new_state) = if rate < -RATE_TOL {
                    if self.lower[var].is_finite() {
                        (
                            ((self.value[var] - self.lower[var]) / -rate).max(0.0),
                            VarState::AtLower,
                        )
                    } else {
                        continue;
                    }
                } else if rate > RATE_TOL {
                    if self.upper[var].is_finite() {
                        (
                            ((self.upper[var] - self.value[var]) / rate).max(0.0),
                            VarState::AtUpper,
                        )
                    } else {
                        continue;
                    }
                } else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some((b, bvar, _)) => limit < b || (limit == b && var < bvar),
                };
                if better {
                    best = Some((limit, var, new_state));
                }
            }

            let Some((step, blocker, new_state)) = best else {
                return Ok(PhaseExit::Unbounded);
            };

            if step <= DEGENERATE_STEP {
                self.degenerate_run += 1;
                if self.degenerate_run >= STALL_THRESHOLD {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }

            if blocker == e {
                // Bound-to-bound flip; the basis is unchanged.
                self.state[e] = match self.state[e] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    other => other,
                };
                self.value[e] = match self.state[e] {
                    VarState::AtLower => self.lower[e],
                    VarState::AtUpper => self.upper[e],
                    _ => self.value[e] + t * step,
                };
                continue;
            }

            // Pivot: `blocker` leaves at `new_state`, `e` enters.
            let pos = self
                .basis
                .iter()
                .position(|&var| var == blocker)
                .expect("blocking variable is basic");
            self.value[e] = match self.state[e] {
                VarState::AtLower => self.lower[e] + t * step,
                VarState::AtUpper => self.upper[e] + t * step,
                _ => t * step,
            };
            self.state[e] = VarState::Basic;
            self.state[blocker] = new_state;
            self.value[blocker] = match new_state {
                VarState::AtLower => self.lower[blocker],
                VarState::AtUpper => self.upper[blocker],
                _ => unreachable!(),
            };
            self.basis[pos] = e;
        }
    }

    fn extract(&mut self) -> LpOptimum {
        // Refresh once more so the reported basics match the final basis.
        let lu = self.refresh().expect("final basis is factorizable");
        let y_internal = self.duals(&lu);
        let x: Vec<f64> = self.value[..self.n_struct].to_vec();
        let objective: f64 = x
            .iter()
            .zip(&self.objective_costs[..self.n_struct])
            .map(|(xi, ci)| xi * ci)
            .sum();
        // Internal duals price the system Ax - s = 0; the slack reduced
        // cost equals y_k, so negating matches the documented convention.
        // A basic slack has reduced cost zero by definition, so inactive
        // rows get an exact zero rather than factorization noise.
        let y: Vec<f64> = y_internal
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if self.state[self.n_struct + k] == VarState::Basic {
                    0.0
                } else {
                    -v
                }
            })
            .collect();
        let mut reduced_costs = vec![0.0; self.n_struct];
        for (j, rc) in reduced_costs.iter_mut().enumerate() {
            if self.state[j] != VarState::Basic {
                *rc = self.reduced_cost(j, &y_internal);
            }
        }
        LpOptimum {
            x,
            y,
            reduced_costs,
            objective,
            basis: self.basis.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PhaseExit {
    Optimal,
    Unbounded,
}

/// Dense LU factorization with partial pivoting.
struct Lu {
    n: usize,
    data: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors the matrix given by `entry(column, row)`; returns `None` if
    /// a pivot falls below the singularity threshold.
    fn factor(n: usize, entry: impl Fn(usize, usize) -> f64) -> Option<Lu> {
        let mut data = vec![0.0; n * n];
        for col in 0..n {
            for row in 0..n {
                data[row * n + col] = entry(col, row);
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_val = data[k * n + k].abs();
            for r in k + 1..n {
                let v = data[r * n + k].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val < 1e-12 {
                return None;
            }
            if pivot_row != k {
                for c in 0..n {
                    data.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = data[k * n + k];
            for r in k + 1..n {
                let factor = data[r * n + k] / pivot;
                data[r * n + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        data[r * n + c] -= factor * data[k * n + c];
                    }
                }
            }
        }
        Some(Lu { n, data, perm })
    }

    /// Solves `A x = b` in place.
    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let permuted: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for r in 1..n {
            let mut acc = b[r];
            for c in 0..r {
                acc -= self.data[r * n + c] * b[c];
            }
            b[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = b[r];
            for c in r + 1..n {
                acc -= self.data[r * n + c] * b[c];
            }
            b[r] = acc / self.data[r * n + r];
        }
    }

    /// Solves `A^T x = b` in place.
    fn solve_transposed(&self, b: &mut [f64]) {
        let n = self.n;
        // U^T w = b (forward), then L^T z = w (backward), then undo the
        // row permutation.
        for r in 0..n {
            let mut acc = b[r];
            for c in 0..r {
                acc -= self.data[c * n + r] * b[c];
            }
            b[r] = acc / self.data[r * n + r];
        }
        for r in (0..n).rev() {
            let mut acc = b[r];
            for c in r + 1..n {
                acc -= self.data[c * n + r] * b[c];
            }
            b[r] = acc;
        }
        let mut out = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = b[i];
        }
        b.copy_from_slice(&out);
    }
}
