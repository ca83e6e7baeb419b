//! Softmax outcome selection with partial verification: sample outcomes with
//! probability proportional to `exp(beta * f(b, s))`, verify the first
//! `n - c` revealers, and check the probability-ratio, utility-difference
//! and approximation bounds that make the construction incentive-sound.
//! Also the imposing variant, which mixes in a uniform draw and forces each
//! agent's post-outcome reaction to be optimal for her declared type.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dominance::{SignallingMap, UtilityModel};
use crate::game::{odometer, ChanceEdge, Edge, GameForm, NodeKind, Strategy};
use crate::rng;
use crate::valuation::ValuationTable;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("unverified count {c} exceeds agent count {n}")]
    CTooLarge { c: usize, n: usize },
    #[error("infeasible parameters: 4*d*c/epsilon = {lhs} must stay below n = {n}")]
    Infeasible { lhs: f64, n: usize },
    #[error("sensitivity must be at least 1 for the softmax scale (constant functions have none)")]
    ZeroSensitivity,
    #[error("exhaustive sweep needs {size} evaluations (cap {cap})")]
    SweepTooLarge { size: u128, cap: u128 },
    #[error("score function and valuations disagree on domains or outcomes")]
    DomainMismatch,
    #[error("reactions do not influence utility (every report induces an optimal reaction)")]
    GammaZero,
    #[error("n = {n} is not above the required threshold n0 = {n0}")]
    NTooSmall { n: usize, n0: usize },
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("malformed score file: {0}")]
    BadFile(String),
}

/// Outcome-quality function `f : D x S -> [0, 1]`, either an explicit table
/// over the full profile space or the fraction-of-high-reports family on
/// binary domains (outcome 1 scores the fraction, outcome 0 its
/// complement).
#[derive(Debug, Clone)]
pub enum ScoreFn {
    Table(ScoreTable),
    FractionHigh { agents: usize },
}

#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub domain_sizes: Vec<usize>,
    pub outcomes: Vec<String>,
    /// `values[profile][outcome]`, profiles in odometer order.
    pub values: Vec<Vec<f64>>,
}

impl ScoreFn {
    pub fn n_agents(&self) -> usize {
        match self {
            ScoreFn::Table(t) => t.domain_sizes.len(),
            ScoreFn::FractionHigh { agents } => *agents,
        }
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        match self {
            ScoreFn::Table(t) => t.domain_sizes.clone(),
            ScoreFn::FractionHigh { agents } => vec![2; *agents],
        }
    }

    pub fn n_outcomes(&self) -> usize {
        match self {
            ScoreFn::Table(t) => t.outcomes.len(),
            ScoreFn::FractionHigh { .. } => 2,
        }
    }

    pub fn outcome_labels(&self) -> Vec<String> {
        match self {
            ScoreFn::Table(t) => t.outcomes.clone(),
            ScoreFn::FractionHigh { .. } => vec!["s1".into(), "s2".into()],
        }
    }

    pub fn score(&self, profile: &[usize], outcome: usize) -> f64 {
        match self {
            ScoreFn::Table(t) => {
                let idx = profile
                    .iter()
                    .zip(&t.domain_sizes)
                    .fold(0usize, |acc, (&b, &d)| acc * d + b);
                t.values[idx][outcome]
            }
            ScoreFn::FractionHigh { agents } => {
                let frac =
                    profile.iter().filter(|&&b| b == 1).count() as f64 / *agents as f64;
                if outcome == 1 {
                    frac
                } else {
                    1.0 - frac
                }
            }
        }
    }

    pub fn score_row(&self, profile: &[usize]) -> Vec<f64> {
        (0..self.n_outcomes()).map(|s| self.score(profile, s)).collect()
    }

    /// Largest score at `profile` over outcomes.
    pub fn max_score(&self, profile: &[usize]) -> f64 {
        self.score_row(profile).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of profiles, saturating at `u128::MAX` for huge domains.
    pub fn profile_count(&self) -> u128 {
        self.domain_sizes()
            .iter()
            .fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }
}

/// Smallest integer `d` with every single-report change of `f` bounded by
/// `d / n`, found by exhaustive sweep (capped); the fraction family is `1`
/// analytically.
pub fn sensitivity(f: &ScoreFn, cap: u128) -> Result<u32, ExpError> {
    match f {
        ScoreFn::FractionHigh { .. } => Ok(1),
        ScoreFn::Table(t) => {
            let profiles: u128 =
                t.domain_sizes.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
            let per_profile: u128 = t
                .domain_sizes
                .iter()
                .map(|&d| (d as u128).saturating_sub(1))
                .sum::<u128>()
                * t.outcomes.len() as u128;
            let size = profiles.saturating_mul(per_profile.max(1));
            if size > cap {
                return Err(ExpError::SweepTooLarge { size, cap });
            }
            let n = t.domain_sizes.len() as f64;
            let mut max_change: f64 = 0.0;
            for profile in odometer(&t.domain_sizes) {
                for agent in 0..t.domain_sizes.len() {
                    let mut other = profile.clone();
                    for alt in 0..t.domain_sizes[agent] {
                        if alt == profile[agent] {
                            continue;
                        }
                        other[agent] = alt;
                        for s in 0..t.outcomes.len() {
                            let change =
                                (self_score(t, &profile, s) - self_score(t, &other, s)).abs();
                            max_change = max_change.max(change);
                        }
                    }
                    other[agent] = profile[agent];
                }
            }
            Ok((n * max_change - 1e-9).ceil().max(0.0) as u32)
        }
    }
}

fn self_score(t: &ScoreTable, profile: &[usize], outcome: usize) -> f64 {
    let idx = profile
        .iter()
        .zip(&t.domain_sizes)
        .fold(0usize, |acc, (&b, &d)| acc * d + b);
    t.values[idx][outcome]
}

/// Parameters of one partial-verification run: `c` unverified agents and
/// the softmax scale `beta = n * epsilon / (2 * d * c)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpMechConfig {
    pub n: usize,
    pub c: usize,
    pub d: u32,
    pub epsilon: f64,
    pub beta: f64,
}

impl ExpMechConfig {
    /// Validates `epsilon > 0`, `c <= n`, `d >= 1`, and the feasibility
    /// condition `4*d*c/epsilon < n`. With `c = 0` every agent is verified
    /// and no ratio constraint binds; `beta` then uses the `c = 1` scale so
    /// the mechanism still concentrates on high-score outcomes.
    pub fn new(n: usize, c: usize, d: u32, epsilon: f64) -> Result<ExpMechConfig, ExpError> {
        if !(epsilon > 0.0) {
            return Err(ExpError::BadEpsilon(epsilon));
        }
        if c > n {
            return Err(ExpError::CTooLarge { c, n });
        }
        if d == 0 {
            return Err(ExpError::ZeroSensitivity);
        }
        let lhs = 4.0 * d as f64 * c as f64 / epsilon;
        if lhs >= n as f64 {
            return Err(ExpError::Infeasible { lhs, n });
        }
        let scale_c = c.max(1) as f64;
        let beta = n as f64 * epsilon / (2.0 * d as f64 * scale_c);
        Ok(ExpMechConfig { n, c, d, epsilon, beta })
    }

    /// The additive approximation guarantee
    /// `4*d*c/(n*eps) * ln(n*eps*|S|/(2*d*c))`.
    pub fn error_bound(&self, n_outcomes: usize) -> f64 {
        error_bound(self.n, self.c, self.d, self.epsilon, n_outcomes)
    }
}

/// The approximation-bound formula on raw parameters, usable for parameter
/// sweeps without constructing a feasible configuration.
pub fn error_bound(n: usize, c: usize, d: u32, epsilon: f64, n_outcomes: usize) -> f64 {
    let c = c.max(1) as f64;
    let lead = 4.0 * d as f64 * c / (n as f64 * epsilon);
    lead * (n as f64 * epsilon * n_outcomes as f64 / (2.0 * d as f64 * c)).ln()
}

/// Numerically stable softmax of `beta * scores`, normalized to sum to 1.
pub fn softmax(beta: f64, scores: &[f64]) -> Vec<f64> {
    let peak = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let weights: Vec<f64> = scores.iter().map(|&s| (beta * (s - peak)).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Outcome distribution of the mechanism at declaration profile `b`.
pub fn distribution(f: &ScoreFn, profile: &[usize], beta: f64) -> Vec<f64> {
    softmax(beta, &f.score_row(profile))
}

/// Draws the outcome index from `dist` by the cumulative-interval rule:
/// `u` uniform on `(0, 1]`, outcome `l` on the left-open interval ending at
/// the `l`-th partial sum.
pub fn sample_outcome(dist: &[f64], u: f64) -> usize {
    debug_assert!(u > 0.0 && u <= 1.0);
    let mut cum = 0.0;
    for (l, &p) in dist.iter().enumerate() {
        cum += p;
        if u <= cum {
            return l;
        }
    }
    dist.len() - 1
}

#[derive(Debug, Clone)]
pub struct ExpMechRun {
    pub outcome: usize,
    /// Revelation order (identity unless shuffled).
    pub order: Vec<usize>,
    /// The first `n - c` revealers.
    pub verified: Vec<usize>,
}

/// One run: fix the revelation order, verify its first `n - c` agents, and
/// sample the outcome from the softmax distribution at `profile`.
pub fn run_expmech(
    profile: &[usize],
    config: &ExpMechConfig,
    f: &ScoreFn,
    seed: u64,
    shuffle: bool,
) -> ExpMechRun {
    let mut order: Vec<usize> = (0..config.n).collect();
    if shuffle {
        use rand::seq::SliceRandom;
        let mut order_rng = rng::stream(seed, 1, 0);
        order.shuffle(&mut order_rng);
    }
    let verified: Vec<usize> = order.iter().copied().take(config.n - config.c).collect();
    let dist = distribution(f, profile, config.beta);
    let mut draw_rng = rng::stream(seed, 0, 0);
    let u = 1.0 - draw_rng.random::<f64>();
    ExpMechRun { outcome: sample_outcome(&dist, u), order, verified }
}

#[derive(Debug, Clone)]
pub struct GapWitness {
    pub profile_a: Vec<usize>,
    pub profile_b: Vec<usize>,
    pub outcome: usize,
}

/// Result of the exhaustive incentive check over profile pairs that agree
/// on the verified coordinates (the first `n - c`).
#[derive(Debug, Clone)]
pub struct GapCheck {
    pub max_ratio: f64,
    pub ratio_bound: f64,
    pub ratio_holds: bool,
    pub max_utility_diff: f64,
    pub utility_bound: f64,
    pub utility_holds: bool,
    pub worst_ratio_witness: Option<GapWitness>,
}

/// Enumerates every pair of profiles agreeing on the first `n - c`
/// coordinates and checks the pointwise probability ratio against
/// `exp(epsilon)` and the expected-utility difference (any agent, any type)
/// against `2 * epsilon`.
pub fn osp_gap_check(
    f: &ScoreFn,
    config: &ExpMechConfig,
    vals: &ValuationTable,
    cap: u128,
) -> Result<GapCheck, ExpError> {
    let sizes = f.domain_sizes();
    if vals.n_agents() != sizes.len()
        || vals.domain_sizes() != sizes
        || vals.outcomes().len() != f.n_outcomes()
    {
        return Err(ExpError::DomainMismatch);
    }
    let verified = config.n - config.c;
    let prefix_sizes = &sizes[..verified];
    let suffix_sizes = &sizes[verified..];
    let prefix_count: u128 =
        prefix_sizes.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
    let suffix_count: u128 =
        suffix_sizes.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
    let pairs = prefix_count * suffix_count * suffix_count;
    if pairs.saturating_mul(f.n_outcomes() as u128) > cap {
        return Err(ExpError::SweepTooLarge {
            size: pairs * f.n_outcomes() as u128,
            cap,
        });
    }

    let mut max_ratio = 1.0f64;
    let mut worst: Option<GapWitness> = None;
    let mut max_utility_diff = 0.0f64;

    for prefix in odometer(prefix_sizes) {
        let suffixes = odometer(suffix_sizes);
        let dists: Vec<Vec<f64>> = suffixes
            .iter()
            .map(|suffix| {
                let mut profile = prefix.clone();
                profile.extend_from_slice(suffix);
                distribution(f, &profile, config.beta)
            })
            .collect();
        for (ia, da) in dists.iter().enumerate() {
            for (ib, db) in dists.iter().enumerate() {
                for s in 0..f.n_outcomes() {
                    let ratio = da[s] / db[s];
                    if ratio > max_ratio {
                        max_ratio = ratio;
                        let mut pa = prefix.clone();
                        pa.extend_from_slice(&suffixes[ia]);
                        let mut pb = prefix.clone();
                        pb.extend_from_slice(&suffixes[ib]);
                        worst = Some(GapWitness { profile_a: pa, profile_b: pb, outcome: s });
                    }
                }
                for agent in 0..vals.n_agents() {
                    for type_idx in 0..vals.domain_size(agent) {
                        let ea: f64 = (0..f.n_outcomes())
                            .map(|s| da[s] * vals.value(agent, type_idx, s))
                            .sum();
                        let eb: f64 = (0..f.n_outcomes())
                            .map(|s| db[s] * vals.value(agent, type_idx, s))
                            .sum();
                        max_utility_diff = max_utility_diff.max(ea - eb);
                    }
                }
            }
        }
    }

    let ratio_bound = config.epsilon.exp();
    let utility_bound = 2.0 * config.epsilon;
    Ok(GapCheck {
        max_ratio,
        ratio_bound,
        ratio_holds: max_ratio <= ratio_bound * (1.0 + 1e-9),
        max_utility_diff,
        utility_bound,
        utility_holds: max_utility_diff <= utility_bound + 1e-9,
        worst_ratio_witness: worst,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ApproxReport {
    pub expected: f64,
    pub max: f64,
    pub error: f64,
    /// `2 * ln(beta * |S|) / beta`, asserted only when `beta * |S| > e`.
    pub bound: Option<f64>,
    pub bound_holds: bool,
}

/// Exact expected score under the softmax distribution at `profile`,
/// against the best achievable score.
pub fn approx_error(f: &ScoreFn, profile: &[usize], beta: f64) -> ApproxReport {
    let row = f.score_row(profile);
    let dist = softmax(beta, &row);
    let expected: f64 = dist.iter().zip(&row).map(|(p, s)| p * s).sum();
    let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let error = max - expected;
    let count = row.len() as f64;
    let bound = if beta * count > std::f64::consts::E {
        Some(2.0 * (beta * count).ln() / beta)
    } else {
        None
    };
    let bound_holds = bound.map(|b| error <= b + 1e-12).unwrap_or(true);
    ApproxReport { expected, max, error, bound, bound_holds }
}

// ---------------------------------------------------------------------------
// imposing variant
// ---------------------------------------------------------------------------

/// Post-outcome reaction valuations `v(type, outcome, reaction)` per agent,
/// all in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ReactionModel {
    agents: Vec<Vec<Vec<Vec<f64>>>>,
}

impl ReactionModel {
    pub fn new(agents: Vec<Vec<Vec<Vec<f64>>>>) -> Result<ReactionModel, ExpError> {
        for per_agent in &agents {
            for per_type in per_agent {
                for per_outcome in per_type {
                    if per_outcome.is_empty() {
                        return Err(ExpError::BadParameters(
                            "each (type, outcome) needs at least one reaction".into(),
                        ));
                    }
                    for &v in per_outcome {
                        if !(0.0..=1.0).contains(&v) {
                            return Err(ExpError::BadParameters(format!(
                                "reaction value {v} outside [0, 1]"
                            )));
                        }
                    }
                }
            }
        }
        Ok(ReactionModel { agents })
    }

    /// The same `values[type][outcome][reaction]` table for every agent.
    pub fn shared(n: usize, values: Vec<Vec<Vec<f64>>>) -> Result<ReactionModel, ExpError> {
        ReactionModel::new(vec![values; n])
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_types(&self, agent: usize) -> usize {
        self.agents[agent].len()
    }

    pub fn value(&self, agent: usize, type_idx: usize, outcome: usize, reaction: usize) -> f64 {
        self.agents[agent][type_idx][outcome][reaction]
    }

    /// Argmax reaction, lowest index on ties.
    pub fn optimal_reaction(&self, agent: usize, type_idx: usize, outcome: usize) -> usize {
        let row = &self.agents[agent][type_idx][outcome];
        let mut best = 0usize;
        for (r, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = r;
            }
        }
        best
    }

    /// Valuation of the forced reaction: agent with true type `truth`,
    /// imposed the reaction optimal for `reported` at `outcome`.
    pub fn imposed_value(
        &self,
        agent: usize,
        truth: usize,
        reported: usize,
        outcome: usize,
    ) -> f64 {
        let r = self.optimal_reaction(agent, reported, outcome);
        self.agents[agent][truth][outcome][r]
    }
}

/// The mixture mechanism: with probability `1 - q` the softmax draw, with
/// probability `q` a uniform outcome, and every agent's reaction imposed to
/// be optimal for her declared type.
#[derive(Debug, Clone)]
pub struct ImposingMechanism {
    pub f: ScoreFn,
    pub reactions: ReactionModel,
    pub n: usize,
    pub c: usize,
    pub d: u32,
    /// Minimum over (agent, truth, lie) of the worst-case imposed-reaction
    /// utility gap.
    pub gamma: f64,
    pub epsilon: f64,
    pub q: f64,
    pub beta: f64,
    pub n0: usize,
}

/// Derives `gamma`, `epsilon = sqrt(gamma*d/(|S|*n) * ln(n*gamma/(2d)))`,
/// `q = 2*|S|*epsilon/gamma`, `beta = n*epsilon/(2*d*c)` and the threshold
/// `n0`, rejecting `gamma = 0` and `n <= n0`.
pub fn build_imposing(
    f: ScoreFn,
    d: u32,
    reactions: ReactionModel,
    n: usize,
    c: usize,
) -> Result<ImposingMechanism, ExpError> {
    if d == 0 {
        return Err(ExpError::ZeroSensitivity);
    }
    if c == 0 {
        return Err(ExpError::BadParameters("imposing construction needs c >= 1".into()));
    }
    if c > n {
        return Err(ExpError::CTooLarge { c, n });
    }
    if reactions.n_agents() != n || f.n_agents() != n {
        return Err(ExpError::DomainMismatch);
    }
    let outcomes = f.n_outcomes() as f64;

    let mut gamma = f64::INFINITY;
    for agent in 0..n {
        let types = reactions.n_types(agent);
        for truth in 0..types {
            for lie in 0..types {
                if lie == truth {
                    continue;
                }
                let mut worst_case = f64::NEG_INFINITY;
                for outcome in 0..f.n_outcomes() {
                    let honest = reactions.imposed_value(agent, truth, truth, outcome);
                    let imposed = reactions.imposed_value(agent, truth, lie, outcome);
                    worst_case = worst_case.max(honest - imposed);
                }
                gamma = gamma.min(worst_case);
            }
        }
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(ExpError::GammaZero);
    }

    let k = 8.0 * d as f64 * outcomes / gamma;
    let first = k * (gamma / (2.0 * d as f64)).ln();
    let mut n0 = 2usize;
    loop {
        if n0 as f64 >= first && (n0 as f64) / (n0 as f64).ln() > k {
            break;
        }
        n0 += 1;
        if n0 > 100_000_000 {
            return Err(ExpError::BadParameters("threshold n0 exceeds 1e8".into()));
        }
    }
    if n <= n0 {
        return Err(ExpError::NTooSmall { n, n0 });
    }

    let log_term = (n as f64 * gamma / (2.0 * d as f64)).ln();
    if log_term <= 0.0 {
        return Err(ExpError::BadParameters(
            "n * gamma / (2d) must exceed 1 for the epsilon derivation".into(),
        ));
    }
    let epsilon = (gamma * d as f64 / (outcomes * n as f64)).sqrt() * log_term.sqrt();
    let q = 2.0 * outcomes * epsilon / gamma;
    if !(q > 0.0 && q < 1.0) {
        return Err(ExpError::BadParameters(format!("mixing weight q = {q} outside (0, 1)")));
    }
    let beta = n as f64 * epsilon / (2.0 * d as f64 * c as f64);
    Ok(ImposingMechanism { f, reactions, n, c, d, gamma, epsilon, q, beta, n0 })
}

impl ImposingMechanism {
    /// The worst-case imposed-reaction gap for one (agent, truth, lie)
    /// triple, with the outcome attaining it (lowest index on ties).
    pub fn gap_witness(&self, agent: usize, truth: usize, lie: usize) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for outcome in 0..self.f.n_outcomes() {
            let gap = self.reactions.imposed_value(agent, truth, truth, outcome)
                - self.reactions.imposed_value(agent, truth, lie, outcome);
            if gap > best.0 {
                best = (gap, outcome);
            }
        }
        best
    }

    /// `(1 - q) * softmax + q * uniform`; full support at least `q / |S|`.
    pub fn mixture(&self, profile: &[usize]) -> Vec<f64> {
        let soft = distribution(&self.f, profile, self.beta);
        let u = self.q / self.f.n_outcomes() as f64;
        soft.into_iter().map(|p| (1.0 - self.q) * p + u).collect()
    }

    fn mixture_of_row(&self, row: &[f64]) -> Vec<f64> {
        let soft = softmax(self.beta, row);
        let u = self.q / row.len() as f64;
        soft.into_iter().map(|p| (1.0 - self.q) * p + u).collect()
    }

    /// For every (agent, truth, lie): the uniform-draw margin
    /// `E_P[v(truth, s, r*(truth, s))] - E_P[v(truth, s, r*(lie, s))]`,
    /// which must be at least `gamma / |S|`.
    pub fn margin_check(&self) -> MarginReport {
        let outcomes = self.f.n_outcomes();
        let mut min_margin = f64::INFINITY;
        for agent in 0..self.n {
            let types = self.reactions.n_types(agent);
            for truth in 0..types {
                for lie in 0..types {
                    if lie == truth {
                        continue;
                    }
                    let margin: f64 = (0..outcomes)
                        .map(|s| {
                            self.reactions.imposed_value(agent, truth, truth, s)
                                - self.reactions.imposed_value(agent, truth, lie, s)
                        })
                        .sum::<f64>()
                        / outcomes as f64;
                    min_margin = min_margin.min(margin);
                }
            }
        }
        let required = self.gamma / outcomes as f64;
        MarginReport {
            min_margin,
            required,
            holds: min_margin >= required - 1e-12,
            q_times_margin: self.q * self.gamma / outcomes as f64,
            two_epsilon: 2.0 * self.epsilon,
        }
    }

    /// Exact truthful-versus-lying expected-utility gap for every
    /// unverified agent, minimized over profile pairs that agree on the
    /// verified coordinates; strict positivity is the imposing mechanism's
    /// whole point. Fraction-family scores are checked over the high-count
    /// quotient (exhaustive up to symmetry); explicit tables are enumerated
    /// directly, subject to `cap`.
    pub fn strict_osp_check(&self, cap: u128) -> Result<StrictOspReport, ExpError> {
        let verified = self.n - self.c;
        let mut min_gap = f64::INFINITY;
        let mut pairs: u64 = 0;
        match &self.f {
            ScoreFn::FractionHigh { agents } => {
                let n = *agents;
                // distribution depends only on the high count
                let dists: Vec<Vec<f64>> = (0..=n)
                    .map(|k| {
                        let frac = k as f64 / n as f64;
                        self.mixture_of_row(&[1.0 - frac, frac])
                    })
                    .collect();
                for agent in verified..n {
                    for truth in 0..2usize {
                        for lie in 0..2usize {
                            if lie == truth {
                                continue;
                            }
                            for fixed_high in 0..=verified {
                                for others_truth in 0..self.c {
                                    for others_lie in 0..self.c {
                                        let k_t = fixed_high + others_truth + truth;
                                        let k_b = fixed_high + others_lie + lie;
                                        let gap = self.pair_gap(
                                            agent, truth, lie, &dists[k_t], &dists[k_b],
                                        );
                                        min_gap = min_gap.min(gap);
                                        pairs += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            ScoreFn::Table(t) => {
                let prefix_sizes = &t.domain_sizes[..verified];
                let suffix_sizes = &t.domain_sizes[verified..];
                let prefix_count: u128 =
                    prefix_sizes.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
                let suffix_count: u128 =
                    suffix_sizes.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
                let total = prefix_count * suffix_count * suffix_count;
                if total > cap {
                    return Err(ExpError::SweepTooLarge { size: total, cap });
                }
                for prefix in odometer(prefix_sizes) {
                    let suffixes = odometer(suffix_sizes);
                    let dists: Vec<Vec<f64>> = suffixes
                        .iter()
                        .map(|suffix| {
                            let mut profile = prefix.clone();
                            profile.extend_from_slice(suffix);
                            self.mixture(&profile)
                        })
                        .collect();
                    for (it, st) in suffixes.iter().enumerate() {
                        for (ib, sb) in suffixes.iter().enumerate() {
                            for agent in verified..self.n {
                                let truth = st[agent - verified];
                                let lie = sb[agent - verified];
                                if truth == lie {
                                    continue;
                                }
                                let gap = self.pair_gap(
                                    agent, truth, lie, &dists[it], &dists[ib],
                                );
                                min_gap = min_gap.min(gap);
                                pairs += 1;
                            }
                        }
                    }
                }
            }
        }
        Ok(StrictOspReport { min_gap, holds: min_gap > 0.0, pairs_checked: pairs })
    }

    fn pair_gap(
        &self,
        agent: usize,
        truth: usize,
        lie: usize,
        dist_truth: &[f64],
        dist_lie: &[f64],
    ) -> f64 {
        let honest: f64 = dist_truth
            .iter()
            .enumerate()
            .map(|(s, p)| p * self.reactions.imposed_value(agent, truth, truth, s))
            .sum();
        let lying: f64 = dist_lie
            .iter()
            .enumerate()
            .map(|(s, p)| p * self.reactions.imposed_value(agent, truth, lie, s))
            .sum();
        honest - lying
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MarginReport {
    pub min_margin: f64,
    pub required: f64,
    pub holds: bool,
    /// `q * gamma / |S|`, which equals `2 * epsilon` by construction.
    pub q_times_margin: f64,
    pub two_epsilon: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StrictOspReport {
    pub min_gap: f64,
    pub holds: bool,
    pub pairs_checked: u64,
}

// ---------------------------------------------------------------------------
// game-form encoding
// ---------------------------------------------------------------------------

/// Encodes the mechanism as an explicit game form for the dominance
/// checkers: agents report in index order (one information set each), every
/// full report profile feeds a terminal chance node carrying the softmax
/// distribution, and verified agents' lies collapse to the value floor
/// (full verification with tight fines).
pub fn expmech_game_form(
    f: &ScoreFn,
    config: &ExpMechConfig,
    vals: &ValuationTable,
) -> Result<(GameForm, SignallingMap, UtilityModel), ExpError> {
    let sizes = f.domain_sizes();
    if vals.n_agents() != sizes.len()
        || vals.domain_sizes() != sizes
        || vals.outcomes().len() != f.n_outcomes()
    {
        return Err(ExpError::DomainMismatch);
    }
    let n = sizes.len();
    let n_outcomes = f.n_outcomes();

    let mut level_start = vec![0usize; n + 1];
    let mut count = 1usize;
    for agent in 0..n {
        level_start[agent + 1] = level_start[agent] + count;
        count *= sizes[agent];
    }
    let chance_start = level_start[n];
    let profiles = odometer(&sizes);
    let terminal_start = chance_start + profiles.len();

    let mut nodes = Vec::new();
    let mut names = Vec::new();
    let mut info_sets: Vec<(usize, Vec<usize>)> = (0..n).map(|a| (a, Vec::new())).collect();
    for agent in 0..n {
        let level_count = level_start[agent + 1] - level_start[agent];
        for idx in 0..level_count {
            let node_id = level_start[agent] + idx;
            let next_start = if agent + 1 < n { level_start[agent + 1] } else { chance_start };
            let edges = (0..sizes[agent])
                .map(|report| Edge {
                    action: vals.type_names(agent)[report].clone(),
                    child: next_start + idx * sizes[agent] + report,
                })
                .collect();
            nodes.push(NodeKind::Player { agent, edges });
            names.push(format!("n{agent}_{idx}"));
            info_sets[agent].1.push(node_id);
        }
    }
    for (idx, profile) in profiles.iter().enumerate() {
        let dist = distribution(f, profile, config.beta);
        let edges = (0..n_outcomes)
            .map(|s| ChanceEdge {
                action: vals.outcomes()[s].clone(),
                child: terminal_start + idx * n_outcomes + s,
                prob: dist[s],
            })
            .collect();
        nodes.push(NodeKind::Chance { edges });
        names.push(format!("c{idx}"));
    }
    for (idx, _) in profiles.iter().enumerate() {
        for s in 0..n_outcomes {
            nodes.push(NodeKind::Terminal { outcome: s });
            names.push(format!("z{idx}_{s}"));
        }
    }

    let game = GameForm::assemble(nodes, names, 0, vals.outcomes().to_vec(), info_sets);

    let signalling = SignallingMap::new(
        (0..n)
            .map(|agent| {
                (0..sizes[agent]).map(|report| Strategy { agent, choices: vec![report] }).collect()
            })
            .collect(),
    );

    let verified = config.n - config.c;
    let utility = UtilityModel::from_fn(&game, sizes.clone(), |agent, truth, terminal| {
        let flat = terminal - terminal_start;
        let profile = &profiles[flat / n_outcomes];
        let outcome = flat % n_outcomes;
        if agent < verified && profile[agent] != truth {
            // caught with certainty, fined down to the value floor
            vals.value_min()
        } else {
            vals.value(agent, truth, outcome)
        }
    });

    Ok((game, signalling, utility))
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

/// On-disk score function: `kind = "table"` with explicit
/// `domain_sizes`/`outcomes`/`scores`, or `kind = "fraction"` with `agents`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<usize>,
}

impl ScoreFile {
    pub fn from_json(text: &str) -> Result<ScoreFile, ExpError> {
        serde_json::from_str(text).map_err(|e| ExpError::BadFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("score file serializes")
    }

    pub fn into_score_fn(self) -> Result<ScoreFn, ExpError> {
        match self.kind.as_str() {
            "fraction" => {
                let agents = self
                    .agents
                    .ok_or_else(|| ExpError::BadFile("fraction kind needs agents".into()))?;
                Ok(ScoreFn::FractionHigh { agents })
            }
            "table" => {
                let domain_sizes = self
                    .domain_sizes
                    .ok_or_else(|| ExpError::BadFile("table kind needs domain_sizes".into()))?;
                let outcomes = self
                    .outcomes
                    .ok_or_else(|| ExpError::BadFile("table kind needs outcomes".into()))?;
                let values = self
                    .scores
                    .ok_or_else(|| ExpError::BadFile("table kind needs scores".into()))?;
                let expected =
                    domain_sizes.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
                if expected > usize::MAX as u128 {
                    return Err(ExpError::BadFile("score table domain is too large".into()));
                }
                let expected = expected as usize;
                if values.len() != expected
                    || values.iter().any(|row| row.len() != outcomes.len())
                {
                    return Err(ExpError::BadFile("score table has wrong shape".into()));
                }
                if values.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(ExpError::BadFile("scores must lie in [0, 1]".into()));
                }
                Ok(ScoreFn::Table(ScoreTable { domain_sizes, outcomes, values }))
            }
            other => Err(ExpError::BadFile(format!("unknown score kind {other:?}"))),
        }
    }
}

/// On-disk reactions: one `values[type][outcome][reaction]` table shared by
/// all agents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReactionsFile {
    pub values: Vec<Vec<Vec<f64>>>,
}

impl ReactionsFile {
    pub fn from_json(text: &str) -> Result<ReactionsFile, ExpError> {
        serde_json::from_str(text).map_err(|e| ExpError::BadFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reactions file serializes")
    }
}

#[cfg(test)]
mod tests;
