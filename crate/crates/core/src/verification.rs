//! Probabilistic verification schemes: per-agent miss probabilities and
//! fines indexed by (reported type, true type, others' reports), the
//! fine-adjusted utility of a lie, and verified-count accounting.
//!
//! `p` throughout is the probability that verification does *not* work: a
//! lying agent escapes the fine with probability `p` and pays `F` with
//! probability `1 - p`. Under the faultless selective reading, `1 - p` is
//! the probability the agent is selected for checking at all, which is what
//! the verified-count accounting sums. An unverifiable agent has `p = 1`
//! everywhere. Truthful agents are never fined.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::game::odometer;
use crate::rng;
use crate::stats::MeanCi;
use crate::valuation::ValuationTable;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("agent {agent}: probability {value} outside [0, 1]")]
    BadProbability { agent: usize, value: f64 },
    #[error("agent {agent}: fine {value} must be positive")]
    BadFine { agent: usize, value: f64 },
    #[error("agent {agent}: theorem-1 parameter gamma must exceed 1, got {gamma}")]
    BadGamma { agent: usize, gamma: f64 },
    #[error("agent {agent}: revealing set for type {type_idx} does not contain the type itself")]
    RevealingMissesTruth { agent: usize, type_idx: usize },
    #[error("scheme covers {got} agents, expected {expected}")]
    AgentCountMismatch { got: usize, expected: usize },
    #[error("malformed scheme file: {0}")]
    BadFile(String),
    #[error("agent {agent}: unknown kind {kind:?}")]
    UnknownKind { agent: usize, kind: String },
}

/// Miss-probability assignment for one agent. All kinds here are ex-ante
/// (they ignore the computed outcome); the ex-post convention enters through
/// the fines.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbSpec {
    Constant(f64),
    /// `p = 1 - 1/gamma`, the uniform-fine construction's probability.
    Theorem1 { gamma: f64 },
    Table(LookupTable),
}

/// Fine assignment for one agent. `value(outcome)` conventions:
/// constant/table kinds ignore the outcome; `Theorem1` is
/// `gamma * (value_max - value_min)`; `TightLowerBound` is the pointwise
/// bound `(v(truth, outcome) - floor(truth)) / (1 - p_max(truth))`, the
/// smallest fine that keeps a lie unprofitable given the probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum FineSpec {
    Constant(f64),
    Theorem1 { gamma: f64 },
    Table(LookupTable),
    TightLowerBound {
        /// Per true type: the value floor subtracted in the numerator
        /// (the global minimum, or the revealing-set infimum).
        floors: Vec<f64>,
        /// Optional additive offset on matching cells, used to probe
        /// tightness by nudging a single fine below the bound.
        perturb: Option<FinePerturbation>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinePerturbation {
    pub reported: usize,
    pub truth: usize,
    /// `None` matches every opponents-report vector.
    pub others: Option<Vec<usize>>,
    pub delta: f64,
}

/// First-match lookup on (reported, truth, others), with a default.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    pub entries: Vec<TableEntry>,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub reported: usize,
    pub truth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub others: Option<Vec<usize>>,
    pub value: f64,
}

impl LookupTable {
    fn get(&self, reported: usize, truth: usize, others: Option<&[usize]>) -> f64 {
        for e in &self.entries {
            if e.reported == reported
                && e.truth == truth
                && match (&e.others, others) {
                    (None, _) => true,
                    (Some(want), Some(have)) => want.as_slice() == have,
                    (Some(_), None) => false,
                }
            {
                return e.value;
            }
        }
        self.default
    }
}

#[derive(Debug, Clone)]
pub struct AgentScheme {
    pub verifiable: bool,
    pub prob: ProbSpec,
    pub fine: FineSpec,
    /// Per true type: the subset of the domain that verification reveals the
    /// type to lie in when a lie is caught. Must contain the type itself.
    pub revealing: Option<Vec<Vec<usize>>>,
}

impl AgentScheme {
    pub fn unverifiable() -> AgentScheme {
        AgentScheme {
            verifiable: false,
            prob: ProbSpec::Constant(1.0),
            fine: FineSpec::Constant(1.0),
            revealing: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationScheme {
    pub agents: Vec<AgentScheme>,
}

impl VerificationScheme {
    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// Scheme consistency against a valuation table: probabilities in range,
    /// declared fines positive, revealing sets containing the truth.
    pub fn validate(&self, vals: &ValuationTable) -> Result<(), SchemeError> {
        if self.agents.len() != vals.n_agents() {
            return Err(SchemeError::AgentCountMismatch {
                got: self.agents.len(),
                expected: vals.n_agents(),
            });
        }
        for (agent, spec) in self.agents.iter().enumerate() {
            match &spec.prob {
                ProbSpec::Constant(p) => {
                    if !(0.0..=1.0).contains(p) {
                        return Err(SchemeError::BadProbability { agent, value: *p });
                    }
                }
                ProbSpec::Theorem1 { gamma } => {
                    if !(*gamma > 1.0) {
                        return Err(SchemeError::BadGamma { agent, gamma: *gamma });
                    }
                }
                ProbSpec::Table(t) => {
                    for v in t.entries.iter().map(|e| e.value).chain([t.default]) {
                        if !(0.0..=1.0).contains(&v) {
                            return Err(SchemeError::BadProbability { agent, value: v });
                        }
                    }
                }
            }
            match &spec.fine {
                FineSpec::Constant(f) => {
                    if !(*f > 0.0) {
                        return Err(SchemeError::BadFine { agent, value: *f });
                    }
                }
                FineSpec::Theorem1 { gamma } => {
                    if !(*gamma > 1.0) {
                        return Err(SchemeError::BadGamma { agent, gamma: *gamma });
                    }
                }
                FineSpec::Table(t) => {
                    for v in t.entries.iter().map(|e| e.value).chain([t.default]) {
                        if !(v > 0.0) {
                            return Err(SchemeError::BadFine { agent, value: v });
                        }
                    }
                }
                // tight bounds are nonnegative by construction and may
                // legitimately be zero when the truthful value sits at the
                // floor
                FineSpec::TightLowerBound { .. } => {}
            }
            if let Some(revealing) = &spec.revealing {
                for (type_idx, subset) in revealing.iter().enumerate() {
                    if !subset.contains(&type_idx) {
                        return Err(SchemeError::RevealingMissesTruth { agent, type_idx });
                    }
                }
            }
        }
        Ok(())
    }

    /// The designed miss probability `p` at (reported, truth), before the
    /// truthful-diagonal convention. This is what verified-count accounting
    /// sums: `1 - raw_miss_prob` is the probability the agent is checked.
    pub fn raw_miss_prob(
        &self,
        agent: usize,
        reported: usize,
        truth: usize,
        others: Option<&[usize]>,
    ) -> f64 {
        let spec = &self.agents[agent];
        if !spec.verifiable {
            return 1.0;
        }
        match &spec.prob {
            ProbSpec::Constant(p) => *p,
            ProbSpec::Theorem1 { gamma } => 1.0 - 1.0 / gamma,
            ProbSpec::Table(t) => t.get(reported, truth, others),
        }
    }

    /// Miss probability with the diagonal convention `p(t, t) = 0`:
    /// verification always works on a truthful agent.
    pub fn miss_prob(
        &self,
        agent: usize,
        reported: usize,
        truth: usize,
        others: Option<&[usize]>,
    ) -> f64 {
        if reported == truth {
            0.0
        } else {
            self.raw_miss_prob(agent, reported, truth, others)
        }
    }

    /// Probability the agent is checked by the verification device.
    pub fn verification_prob(
        &self,
        agent: usize,
        reported: usize,
        truth: usize,
        others: Option<&[usize]>,
    ) -> f64 {
        1.0 - self.raw_miss_prob(agent, reported, truth, others)
    }

    /// `p_max` for the agent with true type `truth`: the maximum designed
    /// miss probability over all reports and opponents-report vectors.
    pub fn max_miss_prob(&self, agent: usize, truth: usize, vals: &ValuationTable) -> f64 {
        let spec = &self.agents[agent];
        if !spec.verifiable {
            return 1.0;
        }
        match &spec.prob {
            ProbSpec::Constant(p) => *p,
            ProbSpec::Theorem1 { gamma } => 1.0 - 1.0 / gamma,
            ProbSpec::Table(t) => {
                let other_sizes: Vec<usize> = (0..vals.n_agents())
                    .filter(|&a| a != agent)
                    .map(|a| vals.domain_size(a))
                    .collect();
                let mut best = f64::NEG_INFINITY;
                for reported in 0..vals.domain_size(agent) {
                    for others in odometer(&other_sizes) {
                        best = best.max(t.get(reported, truth, Some(&others)));
                    }
                }
                best
            }
        }
    }

    /// The fine levied on agent `agent` caught reporting `reported` when her
    /// true type is `truth` and the mechanism computed `outcome`.
    pub fn fine(
        &self,
        agent: usize,
        reported: usize,
        truth: usize,
        others: Option<&[usize]>,
        outcome: usize,
        vals: &ValuationTable,
    ) -> f64 {
        let spec = &self.agents[agent];
        match &spec.fine {
            FineSpec::Constant(f) => *f,
            FineSpec::Theorem1 { gamma } => gamma * vals.range(),
            FineSpec::Table(t) => t.get(reported, truth, others),
            FineSpec::TightLowerBound { floors, perturb } => {
                let p_max = self.max_miss_prob(agent, truth, vals);
                let base = (vals.value(agent, truth, outcome) - floors[truth]) / (1.0 - p_max);
                let delta = match perturb {
                    Some(p)
                        if p.reported == reported
                            && p.truth == truth
                            && match (&p.others, others) {
                                (None, _) => true,
                                (Some(want), Some(have)) => want.as_slice() == have,
                                (Some(_), None) => false,
                            } =>
                    {
                        p.delta
                    }
                    _ => 0.0,
                };
                base + delta
            }
        }
    }

    /// Extrema of the agent's fines over every (truth, reported, others)
    /// tuple; outcome-dependent fines are resolved through `outcome_of`.
    pub fn fine_extrema(
        &self,
        agent: usize,
        vals: &ValuationTable,
        outcome_of: &dyn Fn(usize, &[usize]) -> usize,
    ) -> (f64, f64) {
        let other_sizes: Vec<usize> = (0..vals.n_agents())
            .filter(|&a| a != agent)
            .map(|a| vals.domain_size(a))
            .collect();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for truth in 0..vals.domain_size(agent) {
            for reported in 0..vals.domain_size(agent) {
                for others in odometer(&other_sizes) {
                    let outcome = outcome_of(reported, &others);
                    let f = self.fine(agent, reported, truth, Some(&others), outcome, vals);
                    lo = lo.min(f);
                    hi = hi.max(f);
                }
            }
        }
        (lo, hi)
    }
}

/// Utility of agent `agent` with true type `truth` after reporting
/// `reported`, once `outcome` has been computed: her valuation of the
/// outcome minus the expected fine. Truthful reports carry no fine term.
pub fn lying_utility(
    scheme: &VerificationScheme,
    agent: usize,
    truth: usize,
    reported: usize,
    others: Option<&[usize]>,
    outcome: usize,
    vals: &ValuationTable,
) -> f64 {
    let value = vals.value(agent, truth, outcome);
    if reported == truth {
        return value;
    }
    let p = scheme.raw_miss_prob(agent, reported, truth, others);
    let fine = scheme.fine(agent, reported, truth, others, outcome, vals);
    value - (1.0 - p) * fine
}

fn others_of(reports: &[usize], agent: usize) -> Vec<usize> {
    reports
        .iter()
        .enumerate()
        .filter(|(a, _)| *a != agent)
        .map(|(_, &r)| r)
        .collect()
}

/// Exact expected number of checked agents: the sum over agents of the
/// probability that verification is applied, `sum_i (1 - p_i(b_i, t_i))`.
pub fn expected_verified_count(
    scheme: &VerificationScheme,
    truths: &[usize],
    reports: &[usize],
) -> f64 {
    (0..scheme.n_agents())
        .map(|i| {
            let others = others_of(reports, i);
            scheme.verification_prob(i, reports[i], truths[i], Some(&others))
        })
        .sum()
}

/// One draw of the caught-lying set: agent `i` is included with probability
/// `1 - p_i(b_i, t_i)` when she lied; truthful agents are never caught.
pub fn sample_verification(
    scheme: &VerificationScheme,
    truths: &[usize],
    reports: &[usize],
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    (0..scheme.n_agents())
        .filter(|&i| {
            if reports[i] == truths[i] {
                // consume no randomness for agents that cannot be caught
                return false;
            }
            let others = others_of(reports, i);
            let catch = 1.0 - scheme.raw_miss_prob(i, reports[i], truths[i], Some(&others));
            rng.random::<f64>() < catch
        })
        .collect()
}

/// Monte Carlo mean of the caught-count over independent trials, one RNG
/// stream per trial.
pub fn sampled_caught_count(
    scheme: &VerificationScheme,
    truths: &[usize],
    reports: &[usize],
    trials: u64,
    seed: u64,
) -> MeanCi {
    let counts = exec::indexed_map(trials as usize, |t| {
        let mut rng = rng::stream(seed, 0, t as u64);
        sample_verification(scheme, truths, reports, &mut rng).len() as i64
    });
    let sum: i128 = counts.iter().map(|&c| c as i128).sum();
    let sum_sq: i128 = counts.iter().map(|&c| (c as i128) * (c as i128)).sum();
    MeanCi::from_sums(sum, sum_sq, trials)
}

// ---------------------------------------------------------------------------
// scheme files
// ---------------------------------------------------------------------------

/// On-disk scheme: per agent a `verifiable` flag, a probability kind
/// (`constant` / `theorem1` / `table`) with its parameter fields, and a fine
/// kind with the same shapes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeFile {
    pub agents: Vec<SchemeAgentFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeAgentFile {
    pub verifiable: bool,
    pub p_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_table: Option<Vec<TableEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_default: Option<f64>,
    pub fine_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine_table: Option<Vec<TableEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine_default: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revealing: Option<Vec<Vec<usize>>>,
}

impl SchemeFile {
    pub fn from_json(text: &str) -> Result<SchemeFile, SchemeError> {
        serde_json::from_str(text).map_err(|e| SchemeError::BadFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme file serializes")
    }

    pub fn into_scheme(self) -> Result<VerificationScheme, SchemeError> {
        let agents = self
            .agents
            .into_iter()
            .enumerate()
            .map(|(agent, a)| {
                let missing = |field: &str| {
                    SchemeError::BadFile(format!("agent {agent}: missing field {field}"))
                };
                let prob = match a.p_kind.as_str() {
                    "constant" => ProbSpec::Constant(a.p_value.ok_or_else(|| missing("p_value"))?),
                    "theorem1" => {
                        ProbSpec::Theorem1 { gamma: a.p_gamma.ok_or_else(|| missing("p_gamma"))? }
                    }
                    "table" => ProbSpec::Table(LookupTable {
                        entries: a.p_table.ok_or_else(|| missing("p_table"))?,
                        default: a.p_default.ok_or_else(|| missing("p_default"))?,
                    }),
                    kind => {
                        return Err(SchemeError::UnknownKind { agent, kind: kind.to_string() })
                    }
                };
                let fine = match a.fine_kind.as_str() {
                    "constant" => {
                        FineSpec::Constant(a.fine_value.ok_or_else(|| missing("fine_value"))?)
                    }
                    "theorem1" => FineSpec::Theorem1 {
                        gamma: a.fine_gamma.ok_or_else(|| missing("fine_gamma"))?,
                    },
                    "table" => FineSpec::Table(LookupTable {
                        entries: a.fine_table.ok_or_else(|| missing("fine_table"))?,
                        default: a.fine_default.ok_or_else(|| missing("fine_default"))?,
                    }),
                    kind => {
                        return Err(SchemeError::UnknownKind { agent, kind: kind.to_string() })
                    }
                };
                Ok(AgentScheme { verifiable: a.verifiable, prob, fine, revealing: a.revealing })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VerificationScheme { agents })
    }
}
