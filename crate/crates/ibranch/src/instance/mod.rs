//! MIP instance model, MPS file I/O and series generation.
//!
//! A [`MipInstance`] is always a minimization problem of the form
//! `min c^T x` subject to `rl <= A x <= ru` and `xl <= x <= xu`, with an
//! integrality flag per variable. Equality rows are stored as `rl == ru`;
//! one-sided rows carry an infinite bound on the open side.

mod mps;

pub use mps::{parse_mps, write_mps, MpsError};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// One sparse constraint row: `(column, coefficient)` pairs sorted by
/// column, every stored coefficient nonzero.
pub type SparseRow = Vec<(usize, f64)>;

/// A mixed-integer program in two-sided row form.
#[derive(Debug, Clone, PartialEq)]
pub struct MipInstance {
    pub name: String,
    /// Dense objective vector, one entry per variable.
    pub objective: Vec<f64>,
    /// Sparse constraint matrix, row major.
    pub rows: Vec<SparseRow>,
    /// Lower row activity bounds; `-inf` when one-sided.
    pub row_lower: Vec<f64>,
    /// Upper row activity bounds; `+inf` when one-sided.
    pub row_upper: Vec<f64>,
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
    /// `true` marks a variable whose value must be integral.
    pub integer: Vec<bool>,
}

/// Violation of a [`MipInstance`] structural invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum InvalidInstance {
    DimensionMismatch(String),
    CrossedRowBounds { row: usize },
    CrossedVarBounds { var: usize },
    FreeRow { row: usize },
    ZeroEntry { row: usize, col: usize },
    BadEntry { row: usize, detail: String },
}

impl fmt::Display for InvalidInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidInstance::DimensionMismatch(what) => {
                write!(f, "dimension mismatch: {what}")
            }
            InvalidInstance::CrossedRowBounds { row } => {
                write!(f, "row {row} has lower bound above upper bound")
            }
            InvalidInstance::CrossedVarBounds { var } => {
                write!(f, "variable {var} has lower bound above upper bound")
            }
            InvalidInstance::FreeRow { row } => {
                write!(f, "row {row} has no finite bound")
            }
            InvalidInstance::ZeroEntry { row, col } => {
                write!(f, "row {row} stores an explicit zero in column {col}")
            }
            InvalidInstance::BadEntry { row, detail } => {
                write!(f, "row {row}: {detail}")
            }
        }
    }
}

impl std::error::Error for InvalidInstance {}

impl MipInstance {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Checks every structural invariant: consistent dimensions, sorted
    /// strictly increasing column indices with nonzero finite coefficients,
    /// `rl <= ru`, `xl <= xu`, and at least one finite bound per row.
    pub fn validate(&self) -> Result<(), InvalidInstance> {
        let n = self.num_vars();
        let m = self.num_rows();
        if self.var_lower.len() != n || self.var_upper.len() != n || self.integer.len() != n {
            return Err(InvalidInstance::DimensionMismatch(format!(
                "{n} variables but bounds/integrality vectors differ in length"
            )));
        }
        if self.row_lower.len() != m || self.row_upper.len() != m {
            return Err(InvalidInstance::DimensionMismatch(format!(
                "{m} rows but row bound vectors differ in length"
            )));
        }
        for (k, row) in self.rows.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(j, v) in row {
                if j >= n {
                    return Err(InvalidInstance::BadEntry {
                        row: k,
                        detail: format!("column index {j} out of range"),
                    });
                }
                if let Some(p) = prev {
                    if j <= p {
                        return Err(InvalidInstance::BadEntry {
                            row: k,
                            detail: format!("columns not strictly increasing at {j}"),
                        });
                    }
                }
                if v == 0.0 {
                    return Err(InvalidInstance::ZeroEntry { row: k, col: j });
                }
                if !v.is_finite() {
                    return Err(InvalidInstance::BadEntry {
                        row: k,
                        detail: format!("non-finite coefficient in column {j}"),
                    });
                }
                prev = Some(j);
            }
            if self.row_lower[k] > self.row_upper[k] {
                return Err(InvalidInstance::CrossedRowBounds { row: k });
            }
            if !self.row_lower[k].is_finite() && !self.row_upper[k].is_finite() {
                return Err(InvalidInstance::FreeRow { row: k });
            }
        }
        for j in 0..n {
            if self.var_lower[j] > self.var_upper[j] {
                return Err(InvalidInstance::CrossedVarBounds { var: j });
            }
        }
        Ok(())
    }
}

/// Which input components a series perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    /// Variable bounds.
    Bnd,
    /// Objective coefficients.
    Obj,
    /// Row bounds.
    Rhs,
    /// Constraint matrix coefficients.
    Mat,
    /// All of the above.
    Combined,
}

impl SeriesMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesMode::Bnd => "bnd",
            SeriesMode::Obj => "obj",
            SeriesMode::Rhs => "rhs",
            SeriesMode::Mat => "mat",
            SeriesMode::Combined => "combined",
        }
    }
}

impl std::str::FromStr for SeriesMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bnd" => Ok(SeriesMode::Bnd),
            "obj" => Ok(SeriesMode::Obj),
            "rhs" => Ok(SeriesMode::Rhs),
            "mat" => Ok(SeriesMode::Mat),
            "combined" => Ok(SeriesMode::Combined),
            other => Err(format!(
                "unknown series mode `{other}` (expected bnd, obj, rhs, mat or combined)"
            )),
        }
    }
}

impl fmt::Display for SeriesMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Recipe for a series of related instances derived from one base instance.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    pub base: MipInstance,
    pub mode: SeriesMode,
    pub count: usize,
    /// Relative half-width of the multiplicative noise `U[1-eps, 1+eps]`.
    pub epsilon: f64,
    pub seed: u64,
}

pub const DEFAULT_SERIES_COUNT: usize = 50;
pub const DEFAULT_SERIES_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesError {
    BadCount,
    BadEpsilon(f64),
    InvalidBase(InvalidInstance),
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::BadCount => write!(f, "series count must be at least 1"),
            SeriesError::BadEpsilon(e) => {
                write!(f, "epsilon {e} out of range (expected 0 <= epsilon < 1)")
            }
            SeriesError::InvalidBase(e) => write!(f, "invalid base instance: {e}"),
        }
    }
}

impl std::error::Error for SeriesError {}

impl SeriesSpec {
    pub fn validate(&self) -> Result<(), SeriesError> {
        if self.count < 1 {
            return Err(SeriesError::BadCount);
        }
        // epsilon == 0 is allowed and reproduces the base unchanged.
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(SeriesError::BadEpsilon(self.epsilon));
        }
        self.base.validate().map_err(SeriesError::InvalidBase)
    }
}

/// Generates `spec.count` perturbed copies of the base instance.
///
/// Instance `i` (1-based) only depends on `(spec.seed, i)`: each instance
/// draws from its own RNG stream, so regenerating any prefix or suffix of
/// the series yields identical instances. Multiplicative noise keeps signs
/// and the sparsity pattern intact; bound pairs are re-sorted after
/// perturbation so `rl <= ru` and `xl <= xu` always survive, and integer
/// variable bounds are rounded outward.
pub fn generate_series(spec: &SeriesSpec) -> Result<Vec<MipInstance>, SeriesError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.count);
    for i in 1..=spec.count {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64);
        let mut inst = spec.base.clone();
        inst.name = format!("{}_{}", spec.base.name, i);
        let eps = spec.epsilon;
        match spec.mode {
            SeriesMode::Obj => perturb_objective(&mut inst, eps, &mut rng),
            SeriesMode::Rhs => perturb_row_bounds(&mut inst, eps, &mut rng),
            SeriesMode::Bnd => perturb_var_bounds(&mut inst, eps, &mut rng),
            SeriesMode::Mat => perturb_matrix(&mut inst, eps, &mut rng),
            SeriesMode::Combined => {
                perturb_objective(&mut inst, eps, &mut rng);
                perturb_row_bounds(&mut inst, eps, &mut rng);
                perturb_var_bounds(&mut inst, eps, &mut rng);
                perturb_matrix(&mut inst, eps, &mut rng);
            }
        }
        debug_assert!(inst.validate().is_ok());
        out.push(inst);
    }
    Ok(out)
}

fn noise(eps: f64, rng: &mut ChaCha8Rng) -> f64 {
    if eps == 0.0 {
        1.0
    } else {
        rng.random_range(1.0 - eps..=1.0 + eps)
    }
}

fn perturb_objective(inst: &mut MipInstance, eps: f64, rng: &mut ChaCha8Rng) {
    for c in &mut inst.objective {
        if *c != 0.0 {
            *c *= noise(eps, rng);
        }
    }
}

fn perturb_row_bounds(inst: &mut MipInstance, eps: f64, rng: &mut ChaCha8Rng) {
    for k in 0..inst.num_rows() {
        let mut lo = inst.row_lower[k];
        let mut hi = inst.row_upper[k];
        if lo.is_finite() {
            lo *= noise(eps, rng);
        }
        if hi.is_finite() {
            hi *= noise(eps, rng);
        }
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        inst.row_lower[k] = lo;
        inst.row_upper[k] = hi;
    }
}

fn perturb_var_bounds(inst: &mut MipInstance, eps: f64, rng: &mut ChaCha8Rng) {
    for j in 0..inst.num_vars() {
        let mut lo = inst.var_lower[j];
        let mut hi = inst.var_upper[j];
        if lo.is_finite() {
            lo *= noise(eps, rng);
        }
        if hi.is_finite() {
            hi *= noise(eps, rng);
        }
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        if inst.integer[j] {
            // Round outward so the perturbation never manufactures an
            // empty integer box.
            if lo.is_finite() {
                lo = lo.floor();
            }
            if hi.is_finite() {
                hi = hi.ceil();
            }
        }
        inst.var_lower[j] = lo;
        inst.var_upper[j] = hi;
    }
}

fn perturb_matrix(inst: &mut MipInstance, eps: f64, rng: &mut ChaCha8Rng) {
    for row in &mut inst.rows {
        for entry in row.iter_mut() {
            entry.1 *= noise(eps, rng);
        }
    }
}
