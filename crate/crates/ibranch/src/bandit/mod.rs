//! Online action selection over a series of instances.
//!
//! Rewards are per-instance scores `f` to be minimized. Two algorithms are
//! provided: Gaussian Thompson sampling with a known observation standard
//! deviation, and the epoch-based UCB2 rule run on negated rewards. Both
//! expose the same `select -> observe -> update` cycle, which must be
//! driven strictly sequentially per series.

mod online;
mod replay;
mod table;

pub use online::{full_reward_table, run_series_online, OnlineConfig};
pub use replay::{convergence_score, histogram_csv, replay, ReplayReport};
pub use table::{RewardTable, TableError};

use crate::bnb::Action;
use crate::influence::InfluenceModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::fmt;

/// Observation noise assumed by Thompson sampling.
pub const DEFAULT_OBS_SIGMA: f64 = 0.2;
pub const THOMPSON_PRIOR_MEAN: f64 = 1.0;
pub const THOMPSON_PRIOR_STD: f64 = 1.0;
pub const DEFAULT_UCB2_ALPHA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BanditAlgo {
    Thompson,
    Ucb2,
}

impl BanditAlgo {
    pub fn as_str(self) -> &'static str {
        match self {
            BanditAlgo::Thompson => "thompson",
            BanditAlgo::Ucb2 => "ucb2",
        }
    }
}

impl fmt::Display for BanditAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BanditAlgo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thompson" => Ok(BanditAlgo::Thompson),
            "ucb2" => Ok(BanditAlgo::Ucb2),
            other => Err(format!(
                "unknown bandit `{other}` (expected thompson or ucb2)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionSetError {
    Empty,
    Duplicate(String),
}

impl fmt::Display for ActionSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSetError::Empty => write!(f, "action set must not be empty"),
            ActionSetError::Duplicate(label) => {
                write!(f, "duplicate action `{label}` in action set")
            }
        }
    }
}

impl std::error::Error for ActionSetError {}

/// Ordered set of selectable arms. The baseline action is not an arm; it
/// serves as the reference for speedups and convergence scores.
#[derive(Debug, Clone)]
pub struct ActionSet {
    arms: Vec<Action>,
}

impl ActionSet {
    pub fn new(arms: Vec<Action>) -> Result<ActionSet, ActionSetError> {
        if arms.is_empty() {
            return Err(ActionSetError::Empty);
        }
        for (i, a) in arms.iter().enumerate() {
            if arms[..i].contains(a) {
                return Err(ActionSetError::Duplicate(a.label()));
            }
        }
        Ok(ActionSet { arms })
    }

    /// The five-arm default set.
    pub fn default_set() -> ActionSet {
        let mk = |model, depth| Action::influence(model, depth).expect("static depth in range");
        ActionSet {
            arms: vec![
                mk(InfluenceModel::Count, 1),
                mk(InfluenceModel::Count, 5),
                mk(InfluenceModel::CountDual, 2),
                mk(InfluenceModel::Binary, 3),
                mk(InfluenceModel::Dual, 3),
            ],
        }
    }

    pub fn arms(&self) -> &[Action] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.arms.iter().map(Action::label).collect()
    }
}

/// Gaussian Thompson sampling state with a known observation standard
/// deviation and a conjugate normal posterior per arm.
#[derive(Debug, Clone)]
pub struct ThompsonState {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    obs_sigma: f64,
    rng: ChaCha8Rng,
}

impl ThompsonState {
    pub fn new(num_arms: usize, obs_sigma: f64, rng: ChaCha8Rng) -> ThompsonState {
        assert!(num_arms > 0 && obs_sigma > 0.0);
        ThompsonState {
            mu: vec![THOMPSON_PRIOR_MEAN; num_arms],
            sigma: vec![THOMPSON_PRIOR_STD; num_arms],
            obs_sigma,
            rng,
        }
    }

    pub fn from_seed(num_arms: usize, obs_sigma: f64, seed: u64) -> ThompsonState {
        ThompsonState::new(num_arms, obs_sigma, ChaCha8Rng::seed_from_u64(seed))
    }

    /// Posterior `(mean, std)` of one arm.
    pub fn posterior(&self, arm: usize) -> (f64, f64) {
        (self.mu[arm], self.sigma[arm])
    }

    /// Draws one sample per arm and returns the argmin (rewards are
    /// minimized), lowest index on exact ties.
    pub fn select(&mut self) -> usize {
        let mut best = 0usize;
        let mut best_sample = f64::INFINITY;
        for arm in 0..self.mu.len() {
            let dist = Normal::new(self.mu[arm], self.sigma[arm]).expect("positive std");
            let sample = dist.sample(&mut self.rng);
            if sample < best_sample {
                best_sample = sample;
                best = arm;
            }
        }
        best
    }

    /// Conjugate normal update with known observation variance.
    pub fn update(&mut self, arm: usize, reward: f64) {
        let prior_var = self.sigma[arm] * self.sigma[arm];
        let obs_var = self.obs_sigma * self.obs_sigma;
        let precision = 1.0 / prior_var + 1.0 / obs_var;
        self.mu[arm] = (self.mu[arm] / prior_var + reward / obs_var) / precision;
        self.sigma[arm] = (1.0 / precision).sqrt();
    }
}

/// UCB2 state (epochs of geometrically growing length, parameter alpha).
///
/// Scores are minimized, so selection runs the standard rule on negated
/// rewards: pick the arm minimizing `mean - e(arm, epoch)`. A selected arm
/// is then played for `tau(r+1) - tau(r)` steps (at least one).
#[derive(Debug, Clone)]
pub struct Ucb2State {
    alpha: f64,
    means: Vec<f64>,
    counts: Vec<u64>,
    epochs: Vec<u32>,
    total: u64,
    /// Remaining plays of the epoch in progress.
    pending: Option<(usize, u64)>,
}

impl Ucb2State {
    pub fn new(num_arms: usize, alpha: f64) -> Ucb2State {
        assert!(num_arms > 0 && alpha > 0.0 && alpha < 1.0);
        Ucb2State {
            alpha,
            means: vec![0.0; num_arms],
            counts: vec![0; num_arms],
            epochs: vec![0; num_arms],
            total: 0,
            pending: None,
        }
    }

    /// Epoch length schedule `tau(r) = ceil((1 + alpha)^r)`.
    pub fn tau(alpha: f64, r: u32) -> u64 {
        (1.0 + alpha).powi(r as i32).ceil() as u64
    }

    fn exploration_bonus(&self, arm: usize) -> f64 {
        let tau = Self::tau(self.alpha, self.epochs[arm]) as f64;
        let n = self.total as f64;
        ((1.0 + self.alpha) * (std::f64::consts::E * n / tau).ln() / (2.0 * tau)).sqrt()
    }

    pub fn select(&mut self) -> usize {
        // Forced round-robin start: every arm once, in index order.
        if let Some(arm) = self.counts.iter().position(|&c| c == 0) {
            return arm;
        }
        if let Some((arm, remaining)) = self.pending {
            if remaining > 0 {
                self.pending = Some((arm, remaining - 1));
                return arm;
            }
            self.pending = None;
        }
        let mut best = 0usize;
        let mut best_score = f64::INFINITY;
        for arm in 0..self.means.len() {
            let score = self.means[arm] - self.exploration_bonus(arm);
            if score < best_score {
                best_score = score;
                best = arm;
            }
        }
        let r = self.epochs[best];
        // A literal tau(r+1) - tau(r) can be zero for small r; an epoch
        // must play at least once or selection would stall.
        let len = (Self::tau(self.alpha, r + 1) - Self::tau(self.alpha, r)).max(1);
        self.epochs[best] = r + 1;
        self.pending = Some((best, len - 1));
        best
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.total += 1;
        self.means[arm] += (reward - self.means[arm]) / self.counts[arm] as f64;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Uniform driver over the two algorithms.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum BanditState {
    Thompson(ThompsonState),
    Ucb2(Ucb2State),
}

impl BanditState {
    pub fn new(algo: BanditAlgo, num_arms: usize, sigma: f64, alpha: f64, rng: ChaCha8Rng) -> Self {
        match algo {
            BanditAlgo::Thompson => BanditState::Thompson(ThompsonState::new(num_arms, sigma, rng)),
            BanditAlgo::Ucb2 => BanditState::Ucb2(Ucb2State::new(num_arms, alpha)),
        }
    }

    pub fn select(&mut self) -> usize {
        match self {
            BanditState::Thompson(s) => s.select(),
            BanditState::Ucb2(s) => s.select(),
        }
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        match self {
            BanditState::Thompson(s) => s.update(arm, reward),
            BanditState::Ucb2(s) => s.update(arm, reward),
        }
    }
}

/// Derives an independent RNG for replay/online run number `run`.
pub(crate) fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run.wrapping_add(1));
    rng
}

/// Forks a child RNG off `rng` (used to give the bandit its own stream).
pub(crate) fn fork_rng(rng: &mut ChaCha8Rng) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(rng.random())
}
