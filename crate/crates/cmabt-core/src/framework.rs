//! Core CMAB-T abstractions: actions, environments, regret accounting, gaps,
//! and triggering-probability diagnostics.
//!
//! An environment owns the outcome distribution over `m` base arms, the
//! probabilistic triggering rule, and the reward function. Playing an action
//! triggers a random subset of arms whose outcomes are observed as feedback;
//! the expected reward of an action is a function of the action and the arm
//! mean vector alone.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum CmabError {
    #[error("invalid action for this environment: {0}")]
    InvalidAction(String),
    #[error("instance too large for exact evaluation: {0}")]
    InstanceTooLarge(String),
    #[error("invalid seed set: {0}")]
    InvalidSeedSet(String),
    #[error("observed keys do not match the triggered set")]
    KeyMismatch,
    #[error("arm {arm} has nonpositive finite gap {gap}")]
    NonpositiveGap { arm: usize, gap: f64 },
    #[error("horizon {horizon} below the minimum {min} for this bound")]
    HorizonTooSmall { horizon: f64, min: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("config error: {0}")]
    ConfigParse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// An action in an environment's action space.
///
/// The variant is interpreted by the owning environment: an ordered arm
/// sequence for cascades, a seed node set for influence maximization, a
/// single-arm probe for FTP instances.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    /// Ordered sequence of distinct arm indices.
    Sequence(Vec<usize>),
    /// Set of seed node indices.
    SeedSet(BTreeSet<usize>),
    /// Single arm index `i`, the action `S_i`.
    Probe(usize),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Sequence(seq) => {
                write!(f, "seq(")?;
                for (n, i) in seq.iter().enumerate() {
                    if n > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                }
                write!(f, ")")
            }
            Action::SeedSet(s) => {
                write!(f, "seeds{{")?;
                for (n, i) in s.iter().enumerate() {
                    if n > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                }
                write!(f, "}}")
            }
            Action::Probe(i) => write!(f, "probe({i})"),
        }
    }
}

/// The random subset of arms whose outcomes were observed in a round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriggeredSet(BTreeSet<usize>);

impl TriggeredSet {
    pub fn new() -> Self {
        TriggeredSet(BTreeSet::new())
    }

    pub fn insert(&mut self, arm: usize) {
        self.0.insert(arm);
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.contains(&arm)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for TriggeredSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        TriggeredSet(iter.into_iter().collect())
    }
}

/// Feedback from playing one action: the triggered set, the observed outcome
/// of every triggered arm, and the realized reward.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub triggered: TriggeredSet,
    /// Keyed exactly by the triggered set.
    pub observed: BTreeMap<usize, f64>,
    pub reward: f64,
}

/// A validated arm mean (or outcome) vector: every entry in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeVector(Vec<f64>);

impl OutcomeVector {
    pub fn new(values: Vec<f64>) -> Result<Self, CmabError> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(CmabError::ConfigParse(format!(
                    "mean entry {i} = {v} outside [0,1]"
                )));
            }
        }
        Ok(OutcomeVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything logged about one round, for audit.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub round: u64,
    pub action: Action,
    pub triggered: TriggeredSet,
    pub observed: BTreeMap<usize, f64>,
    pub realized_reward: f64,
    pub expected_reward: f64,
}

/// A CMAB-T environment: a sampler of arm-outcome vectors plus a
/// probabilistic triggering rule and a reward function.
///
/// All three families in this crate draw arms as independent Bernoulli
/// variables, so a mean vector determines the outcome distribution; the
/// `mu` arguments of [`Environment::expected_reward`] and
/// [`Environment::trigger_prob`] select that distribution.
pub trait Environment: Send + Sync {
    /// Number of base arms `m`.
    fn arm_count(&self) -> usize;

    /// The mean vector of the environment's actual outcome distribution.
    fn true_means(&self) -> &[f64];

    /// The full action space, when enumerable under the instance's size cap.
    fn enumerate_actions(&self) -> Result<Vec<Action>, CmabError>;

    /// Play `action` against a fresh draw from the outcome distribution.
    ///
    /// Repeated calls with an identical rng state are bit-identical.
    fn step(&self, action: &Action, rng: &mut ChaCha8Rng) -> Result<StepOutcome, CmabError>;

    /// Exact expected reward `r_S(mu)` of `action` under mean vector `mu`.
    fn expected_reward(&self, action: &Action, mu: &[f64]) -> Result<f64, CmabError>;

    /// Exact probability that `action` triggers `arm` under mean vector `mu`.
    fn trigger_prob(&self, action: &Action, arm: usize, mu: &[f64]) -> Result<f64, CmabError>;

    /// Triggering probabilities of every arm at once; environments with a
    /// shared evaluation pass override this.
    fn trigger_profile(&self, action: &Action, mu: &[f64]) -> Result<Vec<f64>, CmabError> {
        (0..self.arm_count())
            .map(|arm| self.trigger_prob(action, arm, mu))
            .collect()
    }

    /// The offline oracle: maps a mean vector estimate to an action with an
    /// `(alpha, beta)` optimality guarantee.
    fn oracle(&self, mu_bar: &[f64], rng: &mut ChaCha8Rng) -> Result<Action, CmabError>;

    /// Approximation ratio of the oracle.
    fn alpha(&self) -> f64 {
        1.0
    }

    /// Success probability of the oracle.
    fn beta(&self) -> f64 {
        1.0
    }

    /// Certified 1-norm TPM bounded-smoothness constant for this family.
    fn certified_smoothness(&self) -> f64;
}

/// Instance-level diagnostics: arm count, maximum reachable-arm-set size `K`,
/// the minimum positive triggering probability `p*`, and the full table of
/// triggering probabilities under the true means.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub arm_count: usize,
    /// `K = max_S |{i : p_i(S) > 0}|`.
    pub max_triggerable: usize,
    /// Minimum positive triggering probability over all (arm, action) pairs;
    /// 1.0 for the degenerate instance with no triggerable pair.
    pub p_star: f64,
    actions: Vec<Action>,
    index: HashMap<Action, usize>,
    probs: Vec<Vec<f64>>,
}

impl Diagnostics {
    /// Triggering probability of `(arm, action)` under the true means.
    ///
    /// Panics if the action is outside the enumerated space.
    pub fn trigger_prob(&self, arm: usize, action: &Action) -> f64 {
        let idx = self.index[action];
        self.probs[idx][arm]
    }

    pub fn trigger_profile(&self, action: &Action) -> &[f64] {
        &self.probs[self.index[action]]
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }
}

/// Enumerate the action space and tabulate triggering probabilities under the
/// environment's true means.
pub fn compute_diagnostics(env: &dyn Environment) -> Result<Diagnostics, CmabError> {
    let actions = env.enumerate_actions()?;
    let mu = env.true_means().to_vec();
    let mut probs = Vec::with_capacity(actions.len());
    let mut max_triggerable = 0usize;
    let mut p_star = f64::INFINITY;
    for action in &actions {
        let profile = env.trigger_profile(action, &mu)?;
        let reachable = profile.iter().filter(|&&p| p > 0.0).count();
        max_triggerable = max_triggerable.max(reachable);
        for &p in &profile {
            if p > 0.0 && p < p_star {
                p_star = p;
            }
        }
        probs.push(profile);
    }
    if !p_star.is_finite() {
        p_star = 1.0;
    }
    let index = actions
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();
    Ok(Diagnostics {
        arm_count: env.arm_count(),
        max_triggerable,
        p_star,
        actions,
        index,
        probs,
    })
}

/// The gap landscape of an instance under mean vector `mu`: per-action gaps
/// `Delta_S = max(0, alpha*opt - r_S(mu))`, per-arm extremes, and the optimum.
///
/// By convention, an arm that no positive-gap action can trigger gets
/// `delta_min = +inf` and `delta_max = 0`.
#[derive(Debug, Clone)]
pub struct GapProfile {
    pub alpha: f64,
    /// opt_mu, the best expected reward over the action space.
    pub opt: f64,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub gaps: Vec<f64>,
    pub delta_min_per_arm: Vec<f64>,
    pub delta_max_per_arm: Vec<f64>,
    pub delta_min: f64,
    pub delta_max: f64,
    index: HashMap<Action, usize>,
}

impl GapProfile {
    pub fn reward(&self, action: &Action) -> f64 {
        self.rewards[self.index[action]]
    }

    pub fn gap(&self, action: &Action) -> f64 {
        self.gaps[self.index[action]]
    }
}

/// Exhaustively evaluate gaps for every action in the space.
pub fn compute_gap_profile(
    env: &dyn Environment,
    mu: &[f64],
    alpha: f64,
) -> Result<GapProfile, CmabError> {
    let actions = env.enumerate_actions()?;
    let m = env.arm_count();
    let mut rewards = Vec::with_capacity(actions.len());
    for action in &actions {
        rewards.push(env.expected_reward(action, mu)?);
    }
    let opt = rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gaps: Vec<f64> = rewards.iter().map(|r| (alpha * opt - r).max(0.0)).collect();

    let mut delta_min_per_arm = vec![f64::INFINITY; m];
    let mut delta_max_per_arm = vec![0.0f64; m];
    for (action, &gap) in actions.iter().zip(&gaps) {
        if gap <= 0.0 {
            continue;
        }
        let profile = env.trigger_profile(action, mu)?;
        for (arm, &p) in profile.iter().enumerate() {
            if p > 0.0 {
                delta_min_per_arm[arm] = delta_min_per_arm[arm].min(gap);
                delta_max_per_arm[arm] = delta_max_per_arm[arm].max(gap);
            }
        }
    }
    let delta_min = delta_min_per_arm
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let delta_max = delta_max_per_arm.iter().cloned().fold(0.0, f64::max);
    let index = actions
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();
    Ok(GapProfile {
        alpha,
        opt,
        actions,
        rewards,
        gaps,
        delta_min_per_arm,
        delta_max_per_arm,
        delta_min,
        delta_max,
        index,
    })
}

/// Triggering probability group index: the unique `j >= 1` with
/// `2^-j < p <= 2^-(j-1)`, or `None` for `p = 0`.
///
/// The interval is half-open exactly as defined: a boundary probability
/// `p = 2^-(j-1)` belongs to group `j`.
pub fn tp_group(p: f64) -> Option<u32> {
    if p <= 0.0 {
        return None;
    }
    debug_assert!(p <= 1.0, "triggering probability {p} above 1");
    let mut j = 1u32;
    let mut lower = 0.5f64;
    while p <= lower {
        j += 1;
        lower /= 2.0;
    }
    Some(j)
}

/// Per-(arm, group) counters `N_{i,j}`, incremented each round for every pair
/// whose triggering probability under the played action falls in group `j`.
#[derive(Debug, Clone, Default)]
pub struct TpGroupCounters {
    counts: BTreeMap<(usize, u32), u64>,
}

impl TpGroupCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, arm: usize, group: u32) -> u64 {
        self.counts.get(&(arm, group)).copied().unwrap_or(0)
    }

    /// Record one played action given its per-arm triggering probabilities.
    pub fn record(&mut self, trigger_probs: &[f64]) {
        for (arm, &p) in trigger_probs.iter().enumerate() {
            if let Some(j) = tp_group(p) {
                *self.counts.entry((arm, j)).or_insert(0) += 1;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32, u64)> + '_ {
        self.counts.iter().map(|(&(i, j), &n)| (i, j, n))
    }
}

/// Cumulative (alpha, beta)-approximation regret series.
///
/// Per-round entries are `alpha*beta*opt - r_{S_t}(mu)` exactly as in the
/// definition's summand; they are not clamped at zero, so a round may
/// contribute negatively when the played action beats the scaled optimum.
#[derive(Debug, Clone)]
pub struct RegretLedger {
    pub alpha: f64,
    pub beta: f64,
    pub opt: f64,
    pub horizon: u64,
    pub per_round_gap: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl RegretLedger {
    pub fn new(alpha: f64, beta: f64, opt: f64, horizon: u64) -> Self {
        RegretLedger {
            alpha,
            beta,
            opt,
            horizon,
            per_round_gap: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    pub fn rounds_recorded(&self) -> u64 {
        self.per_round_gap.len() as u64
    }

    /// Append one round given the exact expected reward of the played action.
    pub fn record(&mut self, expected_reward: f64) {
        assert!(
            self.rounds_recorded() < self.horizon,
            "ledger horizon exceeded"
        );
        let gap = self.alpha * self.beta * self.opt - expected_reward;
        let total = self.cumulative.last().copied().unwrap_or(0.0) + gap;
        self.per_round_gap.push(gap);
        self.cumulative.push(total);
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Account one round: append the regret summand and bump the TP-group counter
/// of every arm the played action can trigger.
pub fn record_round(
    ledger: &mut RegretLedger,
    counters: &mut TpGroupCounters,
    diag: &Diagnostics,
    action: &Action,
    expected_reward_of_action: f64,
) {
    ledger.record(expected_reward_of_action);
    counters.record(diag.trigger_profile(action));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tp_group_boundaries() {
        // p = 1 is in (1/2, 1] -> j = 1.
        assert_eq!(tp_group(1.0), Some(1));
        // p = 0.5 sits on the boundary: (1/2, 1] excludes it, (1/4, 1/2] takes it.
        assert_eq!(tp_group(0.5), Some(2));
        assert_eq!(tp_group(0.3), Some(2));
        assert_eq!(tp_group(0.25), Some(3));
        assert_eq!(tp_group(0.7), Some(1));
        assert_eq!(tp_group(0.0), None);
    }

    #[test]
    fn tp_groups_partition_unit_interval() {
        // Every positive probability lands in exactly one group, and the
        // group interval actually contains it.
        let mut p = 1.0f64;
        for _ in 0..200 {
            let j = tp_group(p).unwrap();
            let upper = 2.0f64.powi(-(j as i32) + 1);
            let lower = 2.0f64.powi(-(j as i32));
            assert!(p > lower && p <= upper, "p={p} j={j}");
            p *= 0.83;
        }
    }

    #[test]
    fn ledger_accumulates_and_allows_negative_gaps() {
        let mut ledger = RegretLedger::new(0.5, 1.0, 1.0, 10);
        ledger.record(0.3); // gap 0.2
        ledger.record(0.9); // gap -0.4, not clamped
        assert!((ledger.per_round_gap[1] - (-0.4)).abs() < 1e-12);
        assert!((ledger.final_regret() - (-0.2)).abs() < 1e-12);
    }

    #[test]
    fn optimal_play_has_zero_regret() {
        let mut ledger = RegretLedger::new(1.0, 1.0, 0.75, 100);
        for _ in 0..100 {
            ledger.record(0.75);
        }
        for &c in &ledger.cumulative {
            assert_eq!(c, 0.0);
        }
    }

    #[test]
    #[should_panic(expected = "horizon exceeded")]
    fn ledger_rejects_overflow() {
        let mut ledger = RegretLedger::new(1.0, 1.0, 1.0, 1);
        ledger.record(1.0);
        ledger.record(1.0);
    }

    #[test]
    fn counters_skip_zero_probability_arms() {
        let mut counters = TpGroupCounters::new();
        counters.record(&[0.0, 0.5, 1.0]);
        assert_eq!(counters.count(0, 1), 0);
        assert_eq!(counters.count(1, 2), 1); // 0.5 belongs to group 2
        assert_eq!(counters.count(2, 1), 1);
        counters.record(&[0.0, 0.5, 0.0]);
        assert_eq!(counters.count(1, 2), 2);
    }

    #[test]
    fn outcome_vector_validates_range() {
        assert!(OutcomeVector::new(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(OutcomeVector::new(vec![1.1]).is_err());
        assert!(OutcomeVector::new(vec![-0.1]).is_err());
        assert!(OutcomeVector::new(vec![f64::NAN]).is_err());
    }
}
