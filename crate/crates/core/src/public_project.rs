//! Sequential public-project mechanism: reveal types one agent at a time
//! until the threshold is reached or unreachable, marking each revealer as
//! verified exactly when the revelation-order condition requires it, plus
//! the exact combinatorics and Monte Carlo statistics built on top.
//!
//! Types are binary: high (value 1) or low (value `low_value`, far below 1).
//! The project function returns 1 iff at least `threshold` agents have the
//! high type; `low_value * n < 1` is enforced so the count form and the
//! value-sum form agree.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::rng;
use crate::stats::{ln_binomial, MeanCi};

#[derive(Debug, Error)]
pub enum PublicProjectError {
    #[error("threshold {threshold} exceeds agent count {n}")]
    ThresholdTooLarge { threshold: usize, n: usize },
    #[error("low value {low_value} times n = {n} must stay below 1")]
    LowValueTooLarge { low_value: f64, n: usize },
    #[error("low value must be strictly positive, got {0}")]
    LowValueNotPositive(f64),
    #[error("type profile has {got} entries, expected {expected}")]
    ProfileSizeMismatch { got: usize, expected: usize },
    #[error("fixed order is not a permutation of the agents")]
    BadOrder,
    #[error("selection rule returned an already-revealed agent {0}")]
    RuleRepeatsAgent(usize),
    #[error("malformed rule file: {0}")]
    BadRuleFile(String),
}

/// One problem instance: `n` agents with binary values, a count threshold,
/// and the true type profile (`true` = high).
#[derive(Debug, Clone)]
pub struct PublicProjectInstance {
    pub n: usize,
    pub threshold: usize,
    pub low_value: f64,
    pub types: Vec<bool>,
}

impl PublicProjectInstance {
    pub fn new(
        n: usize,
        threshold: usize,
        low_value: f64,
        types: Vec<bool>,
    ) -> Result<PublicProjectInstance, PublicProjectError> {
        if threshold > n {
            return Err(PublicProjectError::ThresholdTooLarge { threshold, n });
        }
        if !(low_value > 0.0) {
            return Err(PublicProjectError::LowValueNotPositive(low_value));
        }
        if low_value * n as f64 >= 1.0 {
            return Err(PublicProjectError::LowValueTooLarge { low_value, n });
        }
        if types.len() != n {
            return Err(PublicProjectError::ProfileSizeMismatch { got: types.len(), expected: n });
        }
        Ok(PublicProjectInstance { n, threshold, low_value, types })
    }

    /// The conventional low value `1 / n^2`.
    pub fn default_low_value(n: usize) -> f64 {
        1.0 / (n as f64 * n as f64)
    }

    /// Total declared value `sum_i v_i(1)` under truthful types.
    pub fn sum_of_values(&self) -> f64 {
        self.types
            .iter()
            .map(|&hi| if hi { 1.0 } else { self.low_value })
            .sum()
    }
}

/// `1` iff at least `threshold` agents hold the high type.
pub fn public_project_function(types: &[bool], threshold: usize) -> bool {
    types.iter().filter(|&&t| t).count() >= threshold
}

/// Whether a revealer must be verified, given how many agents revealed
/// before her (`revealed_before`), how many of those declared high
/// (`high_before`), and what she declares. Low declarations are checked on
/// `high_before` in `[threshold + revealed_before + 1 - n, threshold - 2]`,
/// high declarations on the wider `[threshold + revealed_before - n,
/// threshold - 1]`.
pub fn must_verify(
    n: usize,
    threshold: usize,
    revealed_before: usize,
    high_before: usize,
    declared_high: bool,
) -> bool {
    let n = n as i64;
    let c = threshold as i64;
    let ni = revealed_before as i64;
    let ki = high_before as i64;
    if declared_high {
        ki >= c + ni - n && ki <= c - 1
    } else {
        ki >= c + ni + 1 - n && ki <= c - 2
    }
}

/// How the next revealer is chosen from the agents that have not yet
/// revealed.
#[derive(Debug, Clone)]
pub enum SelectionRule {
    /// Uniformly random among the unrevealed.
    Uniform,
    /// The given permutation, in order.
    FixedOrder(Vec<usize>),
    /// Lowest unrevealed index, except immediately after a high declaration
    /// the highest unrevealed index.
    Adaptive,
    /// Preference lists keyed by `(revealed so far, highs so far)`: the
    /// first unrevealed agent in the matching list, falling back to the
    /// lowest unrevealed index.
    Table(RuleTable),
}

/// Adaptive rule table; see [`SelectionRule::Table`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleTable {
    pub entries: Vec<RuleTableEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleTableEntry {
    pub revealed: usize,
    pub high: usize,
    pub preference: Vec<usize>,
}

/// On-disk selection rule: `{"kind": "uniform" | "adaptive"}`,
/// `{"kind": "fixed", "order": [...]}` or
/// `{"kind": "table", "entries": [{revealed, high, preference}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<RuleTableEntry>>,
}

impl RuleFile {
    pub fn from_json(text: &str) -> Result<RuleFile, PublicProjectError> {
        serde_json::from_str(text).map_err(|e| PublicProjectError::BadRuleFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule file serializes")
    }

    pub fn into_rule(self) -> Result<SelectionRule, PublicProjectError> {
        match self.kind.as_str() {
            "uniform" => Ok(SelectionRule::Uniform),
            "adaptive" => Ok(SelectionRule::Adaptive),
            "fixed" => Ok(SelectionRule::FixedOrder(self.order.ok_or_else(|| {
                PublicProjectError::BadRuleFile("fixed kind needs order".into())
            })?)),
            "table" => Ok(SelectionRule::Table(RuleTable {
                entries: self.entries.ok_or_else(|| {
                    PublicProjectError::BadRuleFile("table kind needs entries".into())
                })?,
            })),
            other => Err(PublicProjectError::BadRuleFile(format!("unknown kind {other:?}"))),
        }
    }
}

impl SelectionRule {
    pub fn validate(&self, n: usize) -> Result<(), PublicProjectError> {
        if let SelectionRule::FixedOrder(order) = self {
            let mut seen = vec![false; n];
            if order.len() != n {
                return Err(PublicProjectError::BadOrder);
            }
            for &a in order {
                if a >= n || seen[a] {
                    return Err(PublicProjectError::BadOrder);
                }
                seen[a] = true;
            }
        }
        Ok(())
    }

    fn next(
        &self,
        unrevealed: &mut Vec<usize>,
        record: &[RevealEntry],
        rng: &mut ChaCha8Rng,
    ) -> usize {
        debug_assert!(!unrevealed.is_empty());
        match self {
            SelectionRule::Uniform => {
                let i = rng.random_range(0..unrevealed.len());
                unrevealed.swap_remove(i)
            }
            SelectionRule::FixedOrder(order) => {
                let next = order
                    .iter()
                    .copied()
                    .find(|a| unrevealed.contains(a))
                    .expect("order covers all agents");
                unrevealed.retain(|&a| a != next);
                next
            }
            SelectionRule::Adaptive => {
                let pick_high = record.last().map(|e| e.declared_high).unwrap_or(false);
                let next = if pick_high {
                    *unrevealed.iter().max().expect("nonempty")
                } else {
                    *unrevealed.iter().min().expect("nonempty")
                };
                unrevealed.retain(|&a| a != next);
                next
            }
            SelectionRule::Table(table) => {
                let high = record.iter().filter(|e| e.declared_high).count();
                let preferred = table
                    .entries
                    .iter()
                    .find(|e| e.revealed == record.len() && e.high == high)
                    .and_then(|e| {
                        e.preference.iter().copied().find(|a| unrevealed.contains(a))
                    });
                let next = preferred
                    .unwrap_or_else(|| *unrevealed.iter().min().expect("nonempty"));
                unrevealed.retain(|&a| a != next);
                next
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Enough high declarations: the outcome is 1.
    ThresholdReached,
    /// Unrevealed agents cannot reach the threshold: the outcome is 0.
    Infeasible,
    /// Everyone revealed (only possible in degenerate configurations).
    AllRevealed,
}

#[derive(Debug, Clone)]
pub struct RevealEntry {
    pub agent: usize,
    pub declared_high: bool,
    pub verified: bool,
}

/// Transcript of one truthful run: the revelation record, the outcome, and
/// which revealers were verified.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub entries: Vec<RevealEntry>,
    pub outcome: bool,
    pub stop: StopReason,
}

impl Transcript {
    pub fn verified_agents(&self) -> Vec<usize> {
        self.entries.iter().filter(|e| e.verified).map(|e| e.agent).collect()
    }

    /// Number of verified agents.
    pub fn tau(&self) -> usize {
        self.entries.iter().filter(|e| e.verified).count()
    }
}

/// Runs the sequential mechanism truthfully: select, reveal, verify per the
/// revelation-order condition, and stop as soon as the outcome is forced.
pub fn run_sequential(
    instance: &PublicProjectInstance,
    rule: &SelectionRule,
    rng: &mut ChaCha8Rng,
) -> Transcript {
    let n = instance.n;
    let c = instance.threshold;
    let mut entries: Vec<RevealEntry> = Vec::new();
    let mut high = 0usize;
    let mut unrevealed: Vec<usize> = (0..n).collect();

    let stop = loop {
        if high >= c {
            break StopReason::ThresholdReached;
        }
        if n - entries.len() < c - high {
            break StopReason::Infeasible;
        }
        if unrevealed.is_empty() {
            break StopReason::AllRevealed;
        }
        let agent = rule.next(&mut unrevealed, &entries, rng);
        let declared_high = instance.types[agent];
        let verified = must_verify(n, c, entries.len(), high, declared_high);
        entries.push(RevealEntry { agent, declared_high, verified });
        if declared_high {
            high += 1;
        }
    };

    Transcript { entries, outcome: public_project_function(&instance.types, c), stop }
}

/// Exact value of the closed form `C(n-c-2, c-1) / C(n, c)` (zero when the
/// upper index is out of range). On a profile with exactly `c` high types
/// under the uniform rule, this is the probability that the threshold is
/// reached at exactly the `(n-c-1)`-th revelation, the event the closed
/// form's numerator counts.
pub fn prob_tau_below(n: u64, c: u64) -> f64 {
    if c == 0 || n < c + 2 {
        return 0.0;
    }
    let num_n = n - c - 2;
    let num_k = c - 1;
    if num_k > num_n {
        return 0.0;
    }
    (ln_binomial(num_n, num_k) - ln_binomial(n, c)).exp()
}

/// Monte Carlo estimate of the same quantity: fraction of truthful uniform
/// runs on exactly-`c`-highs profiles that stop at the threshold after
/// exactly `n - c - 1` revelations.
pub fn prob_tau_below_mc(n: usize, c: usize, trials: u64, seed: u64) -> f64 {
    if n < c + 2 {
        return 0.0;
    }
    let hits = exec::indexed_map(trials as usize, |t| {
        let mut rng = rng::stream(seed, 0, t as u64);
        let instance = exactly_c_instance(n, c, &mut rng);
        let transcript = run_sequential(&instance, &SelectionRule::Uniform, &mut rng);
        let stop_at = n - c - 1;
        u64::from(
            transcript.stop == StopReason::ThresholdReached
                && transcript.entries.len() == stop_at,
        )
    });
    hits.iter().sum::<u64>() as f64 / trials as f64
}

fn exactly_c_instance(n: usize, c: usize, rng: &mut ChaCha8Rng) -> PublicProjectInstance {
    let mut types = vec![false; n];
    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(rng);
    for &a in agents.iter().take(c) {
        types[a] = true;
    }
    PublicProjectInstance {
        n,
        threshold: c,
        low_value: PublicProjectInstance::default_low_value(n),
        types,
    }
}

/// Verified-count statistics over truthful runs on profiles with exactly
/// `c` high types, positions redrawn each trial.
#[derive(Debug, Clone)]
pub struct TauStats {
    pub mean: MeanCi,
    /// `histogram[k]` = number of trials with exactly `k` verified agents.
    pub histogram: Vec<u64>,
    /// Empirical fraction of trials with fewer than `n - c - 1` verified
    /// agents (the tail the expectation bound conditions on).
    pub tail_below: f64,
}

pub fn tau_statistics(
    n: usize,
    c: usize,
    rule: &SelectionRule,
    trials: u64,
    seed: u64,
) -> Result<TauStats, PublicProjectError> {
    rule.validate(n)?;
    let taus: Vec<u32> = exec::indexed_map(trials as usize, |t| {
        let mut rng = rng::stream(seed, 0, t as u64);
        let instance = exactly_c_instance(n, c, &mut rng);
        run_sequential(&instance, rule, &mut rng).tau() as u32
    });
    let sum: i128 = taus.iter().map(|&t| t as i128).sum();
    let sum_sq: i128 = taus.iter().map(|&t| (t as i128) * (t as i128)).sum();
    let mut histogram = vec![0u64; n + 1];
    for &t in &taus {
        histogram[t as usize] += 1;
    }
    let cutoff = (n as i64 - c as i64 - 1).max(0) as usize;
    let tail_below: u64 = histogram.iter().take(cutoff.min(n + 1)).sum();
    Ok(TauStats {
        mean: MeanCi::from_sums(sum, sum_sq, trials),
        histogram,
        tail_below: tail_below as f64 / trials as f64,
    })
}

/// Paired comparison of a selection rule against the uniform rule under the
/// exactly-`c`-highs prior: each trial draws one profile and runs both rules
/// on it with independent selection randomness.
#[derive(Debug, Clone)]
pub struct RuleComparison {
    pub mean_rule: f64,
    pub mean_uniform: f64,
    /// Mean of the per-trial differences `tau_rule - tau_uniform`.
    pub mean_diff: f64,
    /// Standard error of the mean difference (paired design).
    pub se_diff: f64,
}

pub fn compare_rules(
    n: usize,
    c: usize,
    rule: &SelectionRule,
    trials: u64,
    seed: u64,
) -> Result<RuleComparison, PublicProjectError> {
    rule.validate(n)?;
    let pairs: Vec<(u32, u32)> = exec::indexed_map(trials as usize, |t| {
        let mut profile_rng = rng::stream(seed, 0, t as u64);
        let instance = exactly_c_instance(n, c, &mut profile_rng);
        let mut rule_rng = rng::stream(seed, 1, t as u64);
        let tau_rule = run_sequential(&instance, rule, &mut rule_rng).tau() as u32;
        let mut uniform_rng = rng::stream(seed, 2, t as u64);
        let tau_uniform =
            run_sequential(&instance, &SelectionRule::Uniform, &mut uniform_rng).tau() as u32;
        (tau_rule, tau_uniform)
    });
    let sum_rule: i128 = pairs.iter().map(|&(a, _)| a as i128).sum();
    let sum_uniform: i128 = pairs.iter().map(|&(_, b)| b as i128).sum();
    let sum_diff: i128 = pairs.iter().map(|&(a, b)| a as i128 - b as i128).sum();
    let sum_diff_sq: i128 = pairs
        .iter()
        .map(|&(a, b)| {
            let d = a as i128 - b as i128;
            d * d
        })
        .sum();
    let diff = MeanCi::from_sums(sum_diff, sum_diff_sq, trials);
    Ok(RuleComparison {
        mean_rule: sum_rule as f64 / trials as f64,
        mean_uniform: sum_uniform as f64 / trials as f64,
        mean_diff: diff.mean,
        se_diff: diff.standard_error(),
    })
}

/// Bayesian experiment: types drawn i.i.d. high with probability
/// `g / (g + (n-c-1)^2)`, uniform selection, truthful play.
#[derive(Debug, Clone)]
pub struct BayesReport {
    pub p_high: f64,
    pub mean_tau: MeanCi,
    /// `(c-1) + (n-2c) * (1 - g/(n-c-1))`, the expectation lower bound the
    /// prior is engineered to meet.
    pub bound: f64,
    /// `mean >= bound - half_width`.
    pub bound_satisfied: bool,
}

pub fn bayes_experiment(
    n: usize,
    c: usize,
    g: f64,
    trials: u64,
    seed: u64,
) -> Result<BayesReport, PublicProjectError> {
    if c > n {
        return Err(PublicProjectError::ThresholdTooLarge { threshold: c, n });
    }
    let span = (n as f64) - (c as f64) - 1.0;
    let p_high = g / (g + span * span);
    let taus: Vec<u32> = exec::indexed_map(trials as usize, |t| {
        let mut rng = rng::stream(seed, 0, t as u64);
        let types: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < p_high).collect();
        let instance = PublicProjectInstance {
            n,
            threshold: c,
            low_value: PublicProjectInstance::default_low_value(n),
            types,
        };
        run_sequential(&instance, &SelectionRule::Uniform, &mut rng).tau() as u32
    });
    let sum: i128 = taus.iter().map(|&t| t as i128).sum();
    let sum_sq: i128 = taus.iter().map(|&t| (t as i128) * (t as i128)).sum();
    let mean_tau = MeanCi::from_sums(sum, sum_sq, trials);
    let bound = (c as f64 - 1.0) + (n as f64 - 2.0 * c as f64) * (1.0 - g / span);
    let bound_satisfied = mean_tau.mean >= bound - mean_tau.half_width;
    Ok(BayesReport { p_high, mean_tau, bound, bound_satisfied })
}

/// A deliberately broken mechanism that stops revealing after
/// `max_reveals` agents and declares "do not implement" if the threshold
/// was not reached; used to exercise the asymptotic-implementation
/// contrapositive. Returns whether the early stopper's outcome matches the
/// true project function.
pub fn early_stopping_correct(
    instance: &PublicProjectInstance,
    max_reveals: usize,
    rng: &mut ChaCha8Rng,
) -> bool {
    let c = instance.threshold;
    let mut unrevealed: Vec<usize> = (0..instance.n).collect();
    let mut high = 0usize;
    let mut revealed = 0usize;
    while revealed < max_reveals && high < c && !unrevealed.is_empty() {
        let i = rng.random_range(0..unrevealed.len());
        let agent = unrevealed.swap_remove(i);
        revealed += 1;
        if instance.types[agent] {
            high += 1;
        }
    }
    let early_outcome = high >= c;
    early_outcome == public_project_function(&instance.types, c)
}

/// Per-trial verified count on an exactly-`c`-highs profile; exposed so the
/// bench suite can drive the exact trial workload through either execution
/// path.
pub fn tau_trial(n: usize, c: usize, rule: &SelectionRule, seed: u64, trial: u64) -> u32 {
    let mut rng = rng::stream(seed, 0, trial);
    let instance = exactly_c_instance(n, c, &mut rng);
    run_sequential(&instance, rule, &mut rng).tau() as u32
}
