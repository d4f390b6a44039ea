//! Mixed-integer programming toolkit built around influence branching.
//!
//! The crate bundles everything needed to study graph-based variable
//! selection on series of related MIP instances:
//!
//! * [`instance`] — the MIP data model, free-format MPS reading/writing and
//!   a perturbation-based generator for series of similar instances.
//! * [`lp`] — a bounded-variable two-phase revised simplex solver producing
//!   primal and dual solutions for every branch-and-bound node.
//! * [`influence`] — influence graphs over variables: six local-influence
//!   models, problem normalization and total-influence scoring.
//! * [`bnb`] — best-bound branch and bound with influence branching applied
//!   up to a configurable depth, falling back to most-fractional branching.
//! * [`bandit`] — online selection of (model, depth) actions over a series
//!   with Gaussian Thompson sampling or UCB2, plus offline replay against
//!   recorded reward tables.
//! * [`report`] — per-solve records, batch-window aggregation and the CSV
//!   formats shared by the command-line harness.
//!
//! Solving one instance with influence branching:
//!
//! ```
//! use ibranch::bnb::{solve, Action, SearchParams};
//! use ibranch::influence::InfluenceModel;
//! use ibranch::instance::parse_mps;
//!
//! let text = "\
//! NAME          demo
//! ROWS
//!  N  OBJ
//!  L  CAP
//! COLUMNS
//!     MARKER    'MARKER'    'INTORG'
//!     x  OBJ  -3  CAP  2
//!     y  OBJ  -5  CAP  4
//!     MARKER    'MARKER'    'INTEND'
//! RHS
//!     RHS  CAP  9
//! BOUNDS
//!  UP BND  x  3
//!  UP BND  y  3
//! ENDATA
//! ";
//! let inst = parse_mps(text)?;
//! let action = Action::influence(InfluenceModel::Count, 3)?;
//! let outcome = solve(&inst, &action, &SearchParams::default())?;
//! let incumbent = outcome.incumbent.expect("feasible");
//! assert!((incumbent.objective - (-11.0)).abs() < 1e-9); // x = 2, y = 1
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bandit;
pub mod bnb;
pub mod influence;
pub mod instance;
pub mod lp;
pub mod report;
