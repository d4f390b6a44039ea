//! Shared generators and independent oracles for the integration suites.
//!
//! The oracles here (Gauss-Jordan solve, vertex enumeration, lattice
//! enumeration) deliberately share no code with the library's simplex or
//! branch and bound.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use ibranch::instance::MipInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bounded-box LP: n in 1..=max_n, m in 0..=max_m, mixed row senses
/// biased toward feasibility but not guaranteeing it.
pub fn random_lp(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> MipInstance {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=max_m);
    let mut var_lower = Vec::with_capacity(n);
    let mut var_upper = Vec::with_capacity(n);
    for _ in 0..n {
        let lo: f64 = rng.random_range(-3.0..0.0);
        let hi = lo + rng.random_range(0.5..4.0);
        var_lower.push(lo);
        var_upper.push(hi);
    }
    let objective: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut row_lower = Vec::with_capacity(m);
    let mut row_upper = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                let mut a: f64 = rng.random_range(-3.0..3.0);
                if a.abs() < 0.1 {
                    a = if a < 0.0 { -0.1 } else { 0.1 };
                }
                row.push((j, a));
            }
        }
        if row.is_empty() {
            row.push((rng.random_range(0..n), 1.0));
        }
        let mid_activity: f64 = row
            .iter()
            .map(|&(j, a)| a * 0.5 * (var_lower[j] + var_upper[j]))
            .sum();
        let (lo, hi) = match rng.random_range(0..4) {
            0 => (
                f64::NEG_INFINITY,
                mid_activity + rng.random_range(-1.0..2.0),
            ),
            1 => (mid_activity - rng.random_range(-1.0..2.0), f64::INFINITY),
            2 => {
                let b = mid_activity + rng.random_range(-0.5..0.5);
                (b, b)
            }
            _ => {
                let lo = mid_activity - rng.random_range(0.0..1.0);
                (lo, lo + rng.random_range(0.0..2.0))
            }
        };
        rows.push(row);
        row_lower.push(lo);
        row_upper.push(hi);
    }
    let inst = MipInstance {
        name: "rand_lp".into(),
        objective,
        rows,
        row_lower,
        row_upper,
        var_lower,
        var_upper,
        integer: vec![false; n],
    };
    inst.validate().expect("generator produces valid instances");
    inst
}

/// Random pure-integer MIP with boxes inside [0, 4] and a lattice small
/// enough to enumerate (at most `max_points` points).
pub fn random_mip(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_rows: usize,
    max_points: u64,
) -> MipInstance {
    let n = rng.random_range(2..=max_vars);
    let mut var_upper = Vec::with_capacity(n);
    let mut points: u64 = 1;
    for _ in 0..n {
        let hi = match rng.random_range(0..3) {
            0 => 1u64,
            1 => 2,
            _ => 4,
        };
        let hi = if points.saturating_mul(hi + 1) > max_points {
            1
        } else {
            hi
        };
        points = points.saturating_mul(hi + 1);
        var_upper.push(hi as f64);
    }
    let m = rng.random_range(1..=max_rows);
    let mut rows = Vec::with_capacity(m);
    let mut row_lower = Vec::with_capacity(m);
    let mut row_upper = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.6) {
                let mut a: f64 = rng.random_range(-3.0..3.0);
                if a.abs() < 0.25 {
                    a = if a < 0.0 { -0.25 } else { 0.25 };
                }
                row.push((j, a));
            }
        }
        if row.is_empty() {
            row.push((rng.random_range(0..n), 1.0));
        }
        let mid: f64 = row.iter().map(|&(j, a)| a * 0.5 * var_upper[j]).sum();
        let (lo, hi) = match rng.random_range(0..10) {
            0..=6 => (f64::NEG_INFINITY, mid + rng.random_range(-0.5..2.0)),
            7 | 8 => (mid - rng.random_range(0.0..2.0), f64::INFINITY),
            _ => {
                // Ranged rows; occasionally pinned to an integer-reachable
                // equality so the feasible set is not trivially empty.
                if rng.random_bool(0.5) {
                    let lo = mid - rng.random_range(0.0..1.5);
                    (lo, lo + rng.random_range(0.0..3.0))
                } else {
                    let target: f64 = row
                        .iter()
                        .map(|&(j, a)| a * (var_upper[j] / 2.0).floor())
                        .sum();
                    (target, target)
                }
            }
        };
        rows.push(row);
        row_lower.push(lo);
        row_upper.push(hi);
    }
    let inst = MipInstance {
        name: "rand_mip".into(),
        objective: (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
        rows,
        row_lower,
        row_upper,
        var_lower: vec![0.0; n],
        var_upper,
        integer: vec![true; n],
    };
    inst.validate().expect("generator produces valid instances");
    inst
}

/// Gauss-Jordan solve of a dense square system; `None` when singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot_row][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col] / pivot;
            if factor != 0.0 {
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= factor * v;
                }
                b[r] -= factor * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn feasible(inst: &MipInstance, x: &[f64], tol: f64) -> bool {
    let n = inst.num_vars();
    for j in 0..n {
        if x[j] < inst.var_lower[j] - tol || x[j] > inst.var_upper[j] + tol {
            return false;
        }
    }
    for (k, row) in inst.rows.iter().enumerate() {
        let act: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
        if act < inst.row_lower[k] - tol || act > inst.row_upper[k] + tol {
            return false;
        }
    }
    true
}

/// Brute-force LP oracle: enumerate all vertices (choices of n active
/// constraints among finite variable and row bounds), keep the feasible
/// ones, return the minimal objective. `None` means infeasible. Correct
/// for instances with bounded boxes, where the feasible set is compact.
pub fn vertex_enumeration_opt(inst: &MipInstance) -> Option<f64> {
    let n = inst.num_vars();
    // Candidate active constraints as (coefficient row, rhs).
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if inst.var_lower[j].is_finite() {
            candidates.push((e.clone(), inst.var_lower[j]));
        }
        if inst.var_upper[j].is_finite() {
            candidates.push((e, inst.var_upper[j]));
        }
    }
    for (k, row) in inst.rows.iter().enumerate() {
        let mut dense = vec![0.0; n];
        for &(j, a) in row {
            dense[j] = a;
        }
        if inst.row_lower[k].is_finite() {
            candidates.push((dense.clone(), inst.row_lower[k]));
        }
        if inst.row_upper[k].is_finite() && inst.row_upper[k] != inst.row_lower[k] {
            candidates.push((dense, inst.row_upper[k]));
        }
    }

    let mut best: Option<f64> = None;
    let mut choice: Vec<usize> = (0..n).collect();
    if candidates.len() < n {
        return None;
    }
    loop {
        let a: Vec<Vec<f64>> = choice.iter().map(|&i| candidates[i].0.clone()).collect();
        let b: Vec<f64> = choice.iter().map(|&i| candidates[i].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            if feasible(inst, &x, 1e-7) {
                let obj: f64 = x.iter().zip(&inst.objective).map(|(xi, ci)| xi * ci).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        // Next n-combination of candidate indices, lexicographic.
        let len = candidates.len();
        let mut advance = None;
        for i in (0..n).rev() {
            if choice[i] != i + len - n {
                advance = Some(i);
                break;
            }
        }
        let Some(i) = advance else {
            return best;
        };
        choice[i] += 1;
        for k in i + 1..n {
            choice[k] = choice[k - 1] + 1;
        }
    }
}

/// Brute-force MIP oracle: enumerate every lattice point of the integer
/// box. Requires all variables integral with finite bounds.
pub fn lattice_enumeration_opt(inst: &MipInstance) -> Option<f64> {
    let n = inst.num_vars();
    assert!(
        inst.integer.iter().all(|&b| b),
        "lattice oracle needs pure-integer instances"
    );
    let lows: Vec<i64> = inst.var_lower.iter().map(|&l| l.ceil() as i64).collect();
    let highs: Vec<i64> = inst.var_upper.iter().map(|&u| u.floor() as i64).collect();
    if lows.iter().zip(&highs).any(|(l, h)| l > h) {
        return None;
    }
    let mut point: Vec<i64> = lows.clone();
    let mut best: Option<f64> = None;
    loop {
        let x: Vec<f64> = point.iter().map(|&v| v as f64).collect();
        if feasible(inst, &x, 1e-9) {
            let obj: f64 = x.iter().zip(&inst.objective).map(|(xi, ci)| xi * ci).sum();
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            if point[i] < highs[i] {
                point[i] += 1;
                break;
            }
            point[i] = lows[i];
            i += 1;
        }
    }
}
