//! Full-verification direct-revelation constructions: given a social choice
//! function over finite domains, build verification probabilities and fines
//! that make concurrent truthful revelation obviously dominant.
//!
//! Three recipes are provided. With fines given (all at least the valuation
//! range), probabilities are set to `(value_min - value_max + F_min) / F_max`.
//! With uniform fines `gamma * range`, that probability is `1 - 1/gamma` and
//! the expected number of checked agents is `n / gamma`. With probabilities
//! given (all below 1), fines are set to the tight pointwise bound
//! `(v(truth, outcome) - floor) / (1 - p_max)`, where the floor is the global
//! value minimum or, for revealing verification, the infimum over the
//! revealed subset. Each mechanism converts to an explicit game form so the
//! dominance checkers can confirm the construction independently.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dominance::{SignallingMap, UtilityModel};
use crate::game::{odometer, GameForm, NodeKind, Strategy};
use crate::valuation::{ValuationError, ValuationTable};
use crate::verification::{
    expected_verified_count, lying_utility, AgentScheme, FinePerturbation, FineSpec, ProbSpec,
    SchemeError, VerificationScheme,
};

#[derive(Debug, Error)]
pub enum DirectError {
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("agent {agent}: minimum fine {f_min} is below the valuation range {range} (shortfall {shortfall})")]
    FineTooSmall { agent: usize, f_min: f64, range: f64, shortfall: f64 },
    #[error("theorem-1 construction needs gamma > 1, got {0}")]
    GammaTooSmall(f64),
    #[error("agent {agent}: miss probability reaches 1 (p_max = {p_max}), no finite fine deters lying")]
    ProbabilityReachesOne { agent: usize, p_max: f64 },
    #[error("social choice table has {got} rows, expected {expected}")]
    TableSizeMismatch { got: usize, expected: usize },
    #[error("social choice table over {0} profiles is too large to materialize")]
    TableTooLarge(u128),
    #[error("social choice outcomes do not match the valuation outcomes")]
    OutcomeMismatch,
    #[error("construction expects {expected} per-agent specs, got {got}")]
    SpecCountMismatch { expected: usize, got: usize },
    #[error("malformed social choice file: {0}")]
    BadFile(String),
}

/// Social choice function as an explicit table over the full profile space.
/// Profiles are indexed in odometer order, last agent fastest.
#[derive(Debug, Clone)]
pub struct Scf {
    domain_sizes: Vec<usize>,
    outcomes: Vec<String>,
    table: Vec<usize>,
}

/// Largest explicit profile table the constructors will materialize.
pub const MAX_SCF_PROFILES: u128 = 1_000_000;

impl Scf {
    pub fn new(
        domain_sizes: Vec<usize>,
        outcomes: Vec<String>,
        table: Vec<usize>,
    ) -> Result<Scf, DirectError> {
        let expected = checked_profile_count(&domain_sizes)?;
        if table.len() != expected {
            return Err(DirectError::TableSizeMismatch { got: table.len(), expected });
        }
        Ok(Scf { domain_sizes, outcomes, table })
    }

    pub fn constant(
        domain_sizes: Vec<usize>,
        outcomes: Vec<String>,
        outcome: usize,
    ) -> Result<Scf, DirectError> {
        let size = checked_profile_count(&domain_sizes)?;
        Ok(Scf { domain_sizes, outcomes, table: vec![outcome; size] })
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    pub fn n_agents(&self) -> usize {
        self.domain_sizes.len()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.domain_sizes)
            .fold(0, |acc, (&b, &d)| acc * d + b)
    }

    pub fn outcome(&self, profile: &[usize]) -> usize {
        self.table[self.profile_index(profile)]
    }

    /// Outcome when agent `agent` reports `reported` and everyone else
    /// reports `others` (ascending agent order with `agent` removed).
    pub fn outcome_with(&self, agent: usize, reported: usize, others: &[usize]) -> usize {
        let mut profile = Vec::with_capacity(self.domain_sizes.len());
        let mut it = others.iter();
        for a in 0..self.domain_sizes.len() {
            if a == agent {
                profile.push(reported);
            } else {
                profile.push(*it.next().expect("others covers remaining agents"));
            }
        }
        self.outcome(&profile)
    }

    pub fn profiles(&self) -> Vec<Vec<usize>> {
        odometer(&self.domain_sizes)
    }

    pub fn from_file(file: &ScfFile) -> Result<Scf, DirectError> {
        let table = file
            .table
            .iter()
            .map(|label| {
                file.outcomes
                    .iter()
                    .position(|o| o == label)
                    .ok_or_else(|| DirectError::BadFile(format!("unknown outcome {label:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Scf::new(file.domain_sizes.clone(), file.outcomes.clone(), table)
    }

    pub fn to_file(&self) -> ScfFile {
        ScfFile {
            domain_sizes: self.domain_sizes.clone(),
            outcomes: self.outcomes.clone(),
            table: self.table.iter().map(|&o| self.outcomes[o].clone()).collect(),
        }
    }
}

fn checked_profile_count(domain_sizes: &[usize]) -> Result<usize, DirectError> {
    let wide: u128 = domain_sizes.iter().map(|&d| d as u128).product();
    if wide > MAX_SCF_PROFILES {
        return Err(DirectError::TableTooLarge(wide));
    }
    Ok(wide as usize)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScfFile {
    pub domain_sizes: Vec<usize>,
    pub outcomes: Vec<String>,
    pub table: Vec<String>,
}

impl ScfFile {
    pub fn from_json(text: &str) -> Result<ScfFile, DirectError> {
        serde_json::from_str(text).map_err(|e| DirectError::BadFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scf file serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    FixedFines,
    Theorem1 { gamma: f64 },
    FixedProbs,
    FixedProbsRevealing,
}

/// A direct-revelation mechanism: everyone reveals concurrently, the table
/// decides the outcome, and the verification scheme prices lies.
#[derive(Debug, Clone)]
pub struct DirectMechanism {
    pub f: Scf,
    pub valuations: ValuationTable,
    pub scheme: VerificationScheme,
    pub construction: Construction,
}

fn check_compatible(f: &Scf, vals: &ValuationTable) -> Result<(), DirectError> {
    if f.outcomes() != vals.outcomes() {
        return Err(DirectError::OutcomeMismatch);
    }
    if f.domain_sizes() != vals.domain_sizes().as_slice() {
        return Err(DirectError::SpecCountMismatch {
            expected: vals.n_agents(),
            got: f.n_agents(),
        });
    }
    Ok(())
}

/// Fines-first construction: requires every agent's minimum fine to reach
/// the valuation range, then sets the constant miss probability
/// `(value_min - value_max + F_min) / F_max` per agent.
pub fn build_fixed_fines(
    f: Scf,
    valuations: ValuationTable,
    fines: Vec<FineSpec>,
) -> Result<DirectMechanism, DirectError> {
    check_compatible(&f, &valuations)?;
    if fines.len() != valuations.n_agents() {
        return Err(DirectError::SpecCountMismatch {
            expected: valuations.n_agents(),
            got: fines.len(),
        });
    }
    let range = valuations.range();
    let mut agents = Vec::with_capacity(fines.len());
    for (agent, fine) in fines.into_iter().enumerate() {
        let probe = VerificationScheme {
            agents: (0..valuations.n_agents())
                .map(|a| AgentScheme {
                    verifiable: true,
                    prob: ProbSpec::Constant(0.0),
                    fine: if a == agent { fine.clone() } else { FineSpec::Constant(1.0) },
                    revealing: None,
                })
                .collect(),
        };
        let (f_min, f_max) = probe.fine_extrema(agent, &valuations, &|reported, others| {
            f.outcome_with(agent, reported, others)
        });
        if f_min < range {
            return Err(DirectError::FineTooSmall {
                agent,
                f_min,
                range,
                shortfall: range - f_min,
            });
        }
        let p = (valuations.value_min() - valuations.value_max() + f_min) / f_max;
        agents.push(AgentScheme {
            verifiable: true,
            prob: ProbSpec::Constant(p),
            fine,
            revealing: None,
        });
    }
    let scheme = VerificationScheme { agents };
    scheme.validate(&valuations)?;
    Ok(DirectMechanism { f, valuations, scheme, construction: Construction::FixedFines })
}

/// Uniform-fine construction: fines `gamma * range` for every cell, miss
/// probability `1 - 1/gamma`, hence `n / gamma` checked agents in
/// expectation.
pub fn build_theorem1(
    f: Scf,
    valuations: ValuationTable,
    gamma: f64,
) -> Result<DirectMechanism, DirectError> {
    check_compatible(&f, &valuations)?;
    if !(gamma > 1.0) {
        return Err(DirectError::GammaTooSmall(gamma));
    }
    let agents = (0..valuations.n_agents())
        .map(|_| AgentScheme {
            verifiable: true,
            prob: ProbSpec::Theorem1 { gamma },
            fine: FineSpec::Theorem1 { gamma },
            revealing: None,
        })
        .collect();
    let scheme = VerificationScheme { agents };
    scheme.validate(&valuations)?;
    Ok(DirectMechanism { f, valuations, scheme, construction: Construction::Theorem1 { gamma } })
}

/// Probabilities-first construction: fines sit exactly at the tight lower
/// bound `(v(truth, outcome) - floor) / (1 - p_max)`. Without a revealing
/// map the floor is the global value minimum; with one, it is the infimum of
/// realized valuations over the revealed subset, which can only lower fines.
pub fn build_fixed_probs(
    f: Scf,
    valuations: ValuationTable,
    probs: Vec<ProbSpec>,
    revealing: Option<Vec<Vec<Vec<usize>>>>,
) -> Result<DirectMechanism, DirectError> {
    check_compatible(&f, &valuations)?;
    if probs.len() != valuations.n_agents() {
        return Err(DirectError::SpecCountMismatch {
            expected: valuations.n_agents(),
            got: probs.len(),
        });
    }
    if let Some(maps) = &revealing {
        if maps.len() != valuations.n_agents() {
            return Err(DirectError::SpecCountMismatch {
                expected: valuations.n_agents(),
                got: maps.len(),
            });
        }
    }
    let mut agents = Vec::with_capacity(probs.len());
    for (agent, prob) in probs.into_iter().enumerate() {
        let probe = VerificationScheme {
            agents: (0..valuations.n_agents())
                .map(|a| AgentScheme {
                    verifiable: true,
                    prob: if a == agent { prob.clone() } else { ProbSpec::Constant(0.0) },
                    fine: FineSpec::Constant(1.0),
                    revealing: None,
                })
                .collect(),
        };
        let floors: Vec<f64> = (0..valuations.domain_size(agent))
            .map(|truth| {
                let p_max = probe.max_miss_prob(agent, truth, &valuations);
                if p_max >= 1.0 {
                    return f64::NAN; // flagged below
                }
                match &revealing {
                    None => valuations.value_min(),
                    Some(maps) => {
                        // infimum of v(t', f(t', others)) over the revealed
                        // subset and all opponents-report vectors
                        let subset = &maps[agent][truth];
                        let other_sizes: Vec<usize> = (0..valuations.n_agents())
                            .filter(|&a| a != agent)
                            .map(|a| valuations.domain_size(a))
                            .collect();
                        let mut lo = f64::INFINITY;
                        for &candidate in subset {
                            for others in odometer(&other_sizes) {
                                let outcome = f.outcome_with(agent, candidate, &others);
                                lo = lo.min(valuations.value(agent, candidate, outcome));
                            }
                        }
                        lo
                    }
                }
            })
            .collect();
        for (truth, floor) in floors.iter().enumerate() {
            if floor.is_nan() {
                let p_max = probe.max_miss_prob(agent, truth, &valuations);
                return Err(DirectError::ProbabilityReachesOne { agent, p_max });
            }
        }
        agents.push(AgentScheme {
            verifiable: true,
            prob,
            fine: FineSpec::TightLowerBound { floors, perturb: None },
            revealing: revealing.as_ref().map(|maps| maps[agent].clone()),
        });
    }
    let scheme = VerificationScheme { agents };
    scheme.validate(&valuations)?;
    let construction = if revealing.is_some() {
        Construction::FixedProbsRevealing
    } else {
        Construction::FixedProbs
    };
    Ok(DirectMechanism { f, valuations, scheme, construction })
}

impl DirectMechanism {
    /// Expected checked-agent count when types are `truths` and reports are
    /// `reports`.
    pub fn expected_verified(&self, truths: &[usize], reports: &[usize]) -> f64 {
        expected_verified_count(&self.scheme, truths, reports)
    }

    /// Nudges one fine of one agent by `delta` (tight-bound fines only);
    /// used to probe that the bound is tight.
    pub fn perturb_fine(&mut self, agent: usize, perturbation: FinePerturbation) {
        if let FineSpec::TightLowerBound { perturb, .. } = &mut self.scheme.agents[agent].fine {
            *perturb = Some(perturbation);
        }
    }

    /// Explicit game form for independent checking: agents report in index
    /// order, each agent's nodes form a single information set (the
    /// simultaneous-move encoding), terminals carry `f(b)`, and utilities
    /// fold the expected fine of each attributed lie.
    pub fn as_game_form(&self) -> (GameForm, SignallingMap, UtilityModel) {
        let n = self.valuations.n_agents();
        let sizes = self.valuations.domain_sizes();

        let mut nodes: Vec<NodeKind> = Vec::new();
        let mut names: Vec<String> = Vec::new();
        let mut info_sets: Vec<(usize, Vec<usize>)> = (0..n).map(|a| (a, Vec::new())).collect();

        // one level per agent; nodes map report prefixes to children
        let mut level_start = vec![0usize; n + 1];
        let mut count = 1usize;
        for agent in 0..n {
            level_start[agent + 1] = level_start[agent] + count;
            count *= sizes[agent];
        }
        let terminal_start = level_start[n];

        for agent in 0..n {
            let level_count = level_start[agent + 1] - level_start[agent];
            for idx in 0..level_count {
                let node_id = level_start[agent] + idx;
                let next_start =
                    if agent + 1 < n { level_start[agent + 1] } else { terminal_start };
                let edges = (0..sizes[agent])
                    .map(|report| crate::game::Edge {
                        action: self.valuations.type_names(agent)[report].clone(),
                        child: next_start + idx * sizes[agent] + report,
                    })
                    .collect();
                nodes.push(NodeKind::Player { agent, edges });
                names.push(format!("n{agent}_{idx}"));
                info_sets[agent].1.push(node_id);
            }
        }
        for (idx, profile) in self.f.profiles().into_iter().enumerate() {
            nodes.push(NodeKind::Terminal { outcome: self.f.outcome(&profile) });
            names.push(format!("z{idx}"));
        }

        let game = GameForm::assemble(
            nodes,
            names,
            0,
            self.f.outcomes().to_vec(),
            info_sets,
        );

        let signalling = SignallingMap::new(
            (0..n)
                .map(|agent| {
                    (0..sizes[agent])
                        .map(|report| Strategy { agent, choices: vec![report] })
                        .collect()
                })
                .collect(),
        );

        let profiles = self.f.profiles();
        let utility = UtilityModel::from_fn(&game, sizes.clone(), |agent, truth, terminal| {
            let profile = &profiles[terminal - terminal_start];
            let others: Vec<usize> = profile
                .iter()
                .enumerate()
                .filter(|(a, _)| *a != agent)
                .map(|(_, &b)| b)
                .collect();
            lying_utility(
                &self.scheme,
                agent,
                truth,
                profile[agent],
                Some(&others),
                self.f.outcome(profile),
                &self.valuations,
            )
        });

        (game, signalling, utility)
    }
}

/// The probability-versus-fine trade-off curve for equal minimum and maximum
/// fines: `p(F) = (F - range) / F`, zero at `F = range` and concave
/// increasing beyond it.
pub fn verification_curve(range: f64, fines: &[f64]) -> Vec<(f64, f64)> {
    fines.iter().map(|&f| (f, (f - range) / f)).collect()
}
