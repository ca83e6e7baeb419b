//! Deciding whether a strategy is ε-weakly dominant or ε-obviously dominant
//! for an agent of a given type, per chance realization or in expectation
//! over chance, and classifying whole mechanisms cell by cell.
//!
//! All four checks enumerate the deviation strategies, opponent profiles and
//! chance realizations exhaustively, replaying the game once per triple and
//! memoizing terminals and visited information sets, since witnesses repeat
//! across deviations. Comparisons allow an absolute slack of [`SLACK`] on
//! top of ε to absorb double rounding in expectation arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::game::{
    ChanceRealization, EnumLimits, GameError, GameForm, NodeKind, Strategy,
};
use crate::valuation::{ValuationError, ValuationTable};
use crate::verification::VerificationScheme;

/// Absolute tolerance added to ε in every dominance comparison.
pub const SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DominanceError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("signalling map lacks a strategy for agent {agent} type {type_idx}")]
    MissingSignalling { agent: usize, type_idx: usize },
    #[error("strategy is not a member of the agent's strategy space")]
    UnknownStrategy,
    #[error("utility model does not cover agent {agent} type {type_idx}")]
    MissingUtility { agent: usize, type_idx: usize },
}

/// Per-realization or expectation-over-chance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    PerRealization,
    Expectation,
}

/// Mechanism-level solution notions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MechanismNotion {
    Sp,
    SpExpectation,
    Osp,
    OspExpectation,
}

impl MechanismNotion {
    pub fn is_obvious(self) -> bool {
        matches!(self, MechanismNotion::Osp | MechanismNotion::OspExpectation)
    }
}

/// Total utility assignment: one value per (agent, type, terminal node).
///
/// Plain valuations depend on the terminal only through its outcome; fine
/// adjusted utilities also depend on which reports the terminal encodes, so
/// the table is indexed by terminal node.
#[derive(Debug, Clone)]
pub struct UtilityModel {
    n_nodes: usize,
    type_counts: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl UtilityModel {
    /// Builds a model by evaluating `f(agent, type, terminal)` at every
    /// terminal node.
    pub fn from_fn<F>(game: &GameForm, type_counts: Vec<usize>, f: F) -> UtilityModel
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let n_nodes = game.n_nodes();
        let mut offsets = Vec::with_capacity(type_counts.len());
        let mut total = 0usize;
        for &c in &type_counts {
            offsets.push(total);
            total += c * n_nodes;
        }
        let mut values = vec![f64::NAN; total];
        for (agent, &count) in type_counts.iter().enumerate() {
            for type_idx in 0..count {
                for (terminal, _) in game.terminals() {
                    values[offsets[agent] + type_idx * n_nodes + terminal] =
                        f(agent, type_idx, terminal);
                }
            }
        }
        UtilityModel { n_nodes, type_counts, offsets, values }
    }

    /// Utilities straight from a valuation table: `v(type, outcome)` at each
    /// terminal, matched by outcome label.
    pub fn from_valuations(
        game: &GameForm,
        vals: &ValuationTable,
    ) -> Result<UtilityModel, DominanceError> {
        let outcome_map = map_outcomes(game, vals)?;
        let counts: Vec<usize> = (0..vals.n_agents()).map(|a| vals.domain_size(a)).collect();
        Ok(UtilityModel::from_fn(game, counts, |agent, type_idx, terminal| {
            let outcome = match game.node_kind(terminal) {
                NodeKind::Terminal { outcome } => *outcome,
                _ => unreachable!("from_fn evaluates terminals only"),
            };
            vals.value(agent, type_idx, outcome_map[outcome])
        }))
    }

    /// Fine-adjusted utilities: each terminal is attributed to the reports
    /// that reach it (an agent's report is the unique type whose signalling
    /// strategy matches her actions on the path), and an agent whose
    /// attributed report differs from her true type pays the expected fine
    /// `(1 - p) * F` on top of her valuation of the outcome.
    ///
    /// Agents that take no action on a path, or whose actions match several
    /// types, carry no report there and are never fined.
    pub fn with_scheme(
        game: &GameForm,
        vals: &ValuationTable,
        scheme: &VerificationScheme,
        signalling: &SignallingMap,
    ) -> Result<UtilityModel, DominanceError> {
        let outcome_map = map_outcomes(game, vals)?;
        let counts: Vec<usize> = (0..vals.n_agents()).map(|a| vals.domain_size(a)).collect();
        let n_agents = counts.len();

        // attribute reports per terminal by replaying every path
        let mut reports: Vec<Vec<Option<usize>>> = vec![Vec::new(); game.n_nodes()];
        let mut parent: Vec<Option<(usize, String)>> = vec![None; game.n_nodes()];
        for v in 0..game.n_nodes() {
            match game.node_kind(v) {
                NodeKind::Player { edges, .. } => {
                    for e in edges {
                        parent[e.child] = Some((v, e.action.clone()));
                    }
                }
                NodeKind::Chance { edges } => {
                    for e in edges {
                        parent[e.child] = Some((v, e.action.clone()));
                    }
                }
                NodeKind::Terminal { .. } => {}
            }
        }
        for (terminal, _) in game.terminals() {
            // collect (agent, info set, action label) along the path
            let mut taken: Vec<(usize, usize, String)> = Vec::new();
            let mut v = terminal;
            while let Some((up, action)) = &parent[v] {
                if let NodeKind::Player { agent, .. } = game.node_kind(*up) {
                    let set = game
                        .info_sets()
                        .iter()
                        .position(|s| s.nodes.contains(up))
                        .ok_or_else(|| {
                            GameError::InvalidGame(format!(
                                "decision node {:?} has no information set",
                                game.node_name(*up)
                            ))
                        })?;
                    taken.push((*agent, set, action.clone()));
                }
                v = *up;
            }
            let mut per_agent = vec![None; n_agents];
            for agent in 0..n_agents {
                let own: Vec<(usize, &str)> = taken
                    .iter()
                    .filter(|(a, _, _)| *a == agent)
                    .map(|(_, s, l)| (*s, l.as_str()))
                    .collect();
                if own.is_empty() {
                    continue;
                }
                let mut matches = Vec::new();
                for type_idx in 0..counts[agent] {
                    let strategy = signalling
                        .strategy(agent, type_idx)
                        .ok_or(DominanceError::MissingSignalling { agent, type_idx })?;
                    let plan = game.strategy_labels(strategy);
                    let agrees = own.iter().all(|(set, label)| {
                        plan.iter().any(|(s, l)| s == set && l == label)
                    });
                    if agrees {
                        matches.push(type_idx);
                    }
                }
                if matches.len() == 1 {
                    per_agent[agent] = Some(matches[0]);
                }
            }
            reports[terminal] = per_agent;
        }

        Ok(UtilityModel::from_fn(game, counts, |agent, type_idx, terminal| {
            let outcome = match game.node_kind(terminal) {
                NodeKind::Terminal { outcome } => outcome_map[*outcome],
                _ => unreachable!(),
            };
            let value = vals.value(agent, type_idx, outcome);
            match reports[terminal][agent] {
                Some(reported) if reported != type_idx => {
                    let others: Option<Vec<usize>> = reports[terminal]
                        .iter()
                        .enumerate()
                        .filter(|(a, _)| *a != agent)
                        .map(|(_, r)| *r)
                        .collect();
                    let p = scheme.raw_miss_prob(agent, reported, type_idx, others.as_deref());
                    let fine =
                        scheme.fine(agent, reported, type_idx, others.as_deref(), outcome, vals);
                    value - (1.0 - p) * fine
                }
                _ => value,
            }
        }))
    }

    pub fn type_counts(&self) -> &[usize] {
        &self.type_counts
    }

    pub fn utility(&self, agent: usize, type_idx: usize, terminal: usize) -> f64 {
        self.values[self.offsets[agent] + type_idx * self.n_nodes + terminal]
    }
}

fn map_outcomes(game: &GameForm, vals: &ValuationTable) -> Result<Vec<usize>, DominanceError> {
    game.outcome_labels()
        .iter()
        .map(|label| vals.outcome_index(label).map_err(DominanceError::from))
        .collect()
}

/// The designer's intended strategy per (agent, type).
#[derive(Debug, Clone)]
pub struct SignallingMap {
    per_agent: Vec<Vec<Strategy>>,
}

impl SignallingMap {
    pub fn new(per_agent: Vec<Vec<Strategy>>) -> SignallingMap {
        SignallingMap { per_agent }
    }

    pub fn strategy(&self, agent: usize, type_idx: usize) -> Option<&Strategy> {
        self.per_agent.get(agent).and_then(|types| types.get(type_idx))
    }

    pub fn from_file(
        game: &GameForm,
        vals: &ValuationTable,
        file: &SignallingFile,
    ) -> Result<SignallingMap, DominanceError> {
        let mut per_agent: Vec<Vec<Option<Strategy>>> =
            (0..vals.n_agents()).map(|a| vec![None; vals.domain_size(a)]).collect();
        for entry in &file.strategies {
            let type_idx = vals.type_index(entry.agent, &entry.type_name)?;
            let choices: Vec<(usize, &str)> =
                entry.choices.iter().map(|c| (c.info_set, c.action.as_str())).collect();
            per_agent[entry.agent][type_idx] =
                Some(game.strategy_from_labels(entry.agent, &choices)?);
        }
        let per_agent = per_agent
            .into_iter()
            .enumerate()
            .map(|(agent, types)| {
                types
                    .into_iter()
                    .enumerate()
                    .map(|(type_idx, s)| {
                        s.ok_or(DominanceError::MissingSignalling { agent, type_idx })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SignallingMap { per_agent })
    }

    pub fn to_file(&self, game: &GameForm, vals: &ValuationTable) -> SignallingFile {
        let strategies = self
            .per_agent
            .iter()
            .enumerate()
            .flat_map(|(agent, types)| {
                types.iter().enumerate().map(move |(type_idx, strategy)| {
                    SignallingEntryFile {
                        agent,
                        type_name: vals.type_names(agent)[type_idx].clone(),
                        choices: game
                            .strategy_labels(strategy)
                            .into_iter()
                            .map(|(info_set, action)| ChoiceFile { info_set, action })
                            .collect(),
                    }
                })
            })
            .collect();
        SignallingFile { strategies }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignallingFile {
    pub strategies: Vec<SignallingEntryFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignallingEntryFile {
    pub agent: usize,
    #[serde(rename = "type")]
    pub type_name: String,
    pub choices: Vec<ChoiceFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiceFile {
    pub info_set: usize,
    pub action: String,
}

impl SignallingFile {
    pub fn from_json(text: &str) -> Result<SignallingFile, DominanceError> {
        serde_json::from_str(text)
            .map_err(|e| DominanceError::Game(GameError::BadDescription(e.to_string())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("signalling file serializes")
    }
}

/// One side of a counterexample: the opponents, and for per-realization
/// comparisons the realization (expectation comparisons condition on the
/// whole witnessing set instead).
#[derive(Debug, Clone)]
pub struct Witness {
    pub opponents: Vec<Strategy>,
    pub realization: Option<ChanceRealization>,
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    /// Global information-set index at which the comparison failed
    /// (obvious-dominance checks only).
    pub info_set: Option<usize>,
    pub deviation: Strategy,
    pub truthful_witness: Witness,
    pub deviating_witness: Witness,
    pub truthful_utility: f64,
    pub deviating_utility: f64,
    /// `deviating_utility - truthful_utility`, always `> ε + SLACK`.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct DominanceVerdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

impl DominanceVerdict {
    fn pass() -> DominanceVerdict {
        DominanceVerdict { holds: true, counterexample: None }
    }
}

/// Shared enumeration state for all checks of one agent: terminals and
/// visited own information sets for every (strategy, opponents, realization)
/// triple.
struct Arena<'g> {
    game: &'g GameForm,
    agent: usize,
    strategies: Vec<Strategy>,
    opponents: Vec<Vec<Strategy>>,
    realizations: Vec<ChanceRealization>,
    terminal: Vec<usize>,
    visited: Vec<Vec<u16>>,
}

impl<'g> Arena<'g> {
    fn build(game: &'g GameForm, agent: usize, limits: &EnumLimits) -> Result<Arena<'g>, GameError> {
        let strategies = game.enumerate_strategies(agent, limits.strategy_cap)?;
        let opponents = game.enumerate_opponents(agent, limits)?;
        let realizations = game.enumerate_realizations(limits.realization_cap)?;
        let plays =
            strategies.len() as u128 * opponents.len() as u128 * realizations.len() as u128;
        if plays > limits.play_cap as u128 {
            return Err(GameError::EnumerationTooLarge {
                what: "dominance play table",
                size: plays,
                cap: limits.play_cap as u128,
            });
        }
        let locals = game.agent_info_sets(agent);
        let mut terminal = Vec::with_capacity(plays as usize);
        let mut visited = Vec::with_capacity(plays as usize);
        for own in &strategies {
            for opp in &opponents {
                for real in &realizations {
                    let trace = game.trace(real, |a| {
                        if a == agent {
                            Some(own)
                        } else {
                            opp.iter().find(|s| s.agent == a)
                        }
                    })?;
                    terminal.push(trace.terminal);
                    visited.push(
                        trace
                            .visited_info_sets
                            .iter()
                            .filter_map(|g| {
                                locals.iter().position(|l| l == g).map(|p| p as u16)
                            })
                            .collect(),
                    );
                }
            }
        }
        Ok(Arena { game, agent, strategies, opponents, realizations, terminal, visited })
    }

    fn idx(&self, s: usize, o: usize, r: usize) -> usize {
        (s * self.opponents.len() + o) * self.realizations.len() + r
    }

    fn strategy_index(&self, strategy: &Strategy) -> Option<usize> {
        self.strategies.iter().position(|s| s == strategy)
    }

    fn witness(&self, o: usize, r: Option<usize>) -> Witness {
        Witness {
            opponents: self.opponents[o].clone(),
            realization: r.map(|r| self.realizations[r].clone()),
        }
    }
}

struct Worst {
    gap: f64,
    counterexample: Option<Counterexample>,
}

impl Worst {
    fn new() -> Worst {
        Worst { gap: f64::NEG_INFINITY, counterexample: None }
    }

    fn offer(&mut self, gap: f64, make: impl FnOnce() -> Counterexample) {
        if gap > self.gap {
            self.gap = gap;
            self.counterexample = Some(make());
        }
    }

    fn verdict(self) -> DominanceVerdict {
        match self.counterexample {
            Some(ce) => DominanceVerdict { holds: false, counterexample: Some(ce) },
            None => DominanceVerdict::pass(),
        }
    }
}

fn check_weak(
    arena: &Arena,
    utility: &UtilityModel,
    type_idx: usize,
    truthful: usize,
    epsilon: f64,
    mode: Mode,
) -> DominanceVerdict {
    let agent = arena.agent;
    let u = |s: usize, o: usize, r: usize| {
        utility.utility(agent, type_idx, arena.terminal[arena.idx(s, o, r)])
    };
    let mut worst = Worst::new();
    for dev in 0..arena.strategies.len() {
        if dev == truthful {
            continue;
        }
        for o in 0..arena.opponents.len() {
            match mode {
                Mode::PerRealization => {
                    for r in 0..arena.realizations.len() {
                        let ut = u(truthful, o, r);
                        let ud = u(dev, o, r);
                        if ut < ud - epsilon - SLACK {
                            worst.offer(ud - ut, || Counterexample {
                                info_set: None,
                                deviation: arena.strategies[dev].clone(),
                                truthful_witness: arena.witness(o, Some(r)),
                                deviating_witness: arena.witness(o, Some(r)),
                                truthful_utility: ut,
                                deviating_utility: ud,
                                gap: ud - ut,
                            });
                        }
                    }
                }
                Mode::Expectation => {
                    let mut et = 0.0;
                    let mut ed = 0.0;
                    for (r, real) in arena.realizations.iter().enumerate() {
                        et += real.prob * u(truthful, o, r);
                        ed += real.prob * u(dev, o, r);
                    }
                    if et < ed - epsilon - SLACK {
                        worst.offer(ed - et, || Counterexample {
                            info_set: None,
                            deviation: arena.strategies[dev].clone(),
                            truthful_witness: arena.witness(o, None),
                            deviating_witness: arena.witness(o, None),
                            truthful_utility: et,
                            deviating_utility: ed,
                            gap: ed - et,
                        });
                    }
                }
            }
        }
    }
    worst.verdict()
}

/// Information sets where the two strategies differ, with a nonempty witness
/// list each: for every opponent profile and realization, the set must be
/// reached under both strategies.
fn departure_witnesses(
    arena: &Arena,
    truthful: usize,
    dev: usize,
) -> Vec<(usize, Vec<(usize, usize)>)> {
    let locals = arena.game.agent_info_sets(arena.agent);
    let mut out = Vec::new();
    for local in 0..locals.len() {
        if arena.strategies[truthful].choices.get(local)
            == arena.strategies[dev].choices.get(local)
        {
            continue;
        }
        let mut witnesses = Vec::new();
        for o in 0..arena.opponents.len() {
            for r in 0..arena.realizations.len() {
                let l = local as u16;
                if arena.visited[arena.idx(truthful, o, r)].contains(&l)
                    && arena.visited[arena.idx(dev, o, r)].contains(&l)
                {
                    witnesses.push((o, r));
                }
            }
        }
        if !witnesses.is_empty() {
            out.push((locals[local], witnesses));
        }
    }
    out
}

fn check_obvious(
    arena: &Arena,
    utility: &UtilityModel,
    type_idx: usize,
    truthful: usize,
    epsilon: f64,
) -> DominanceVerdict {
    let agent = arena.agent;
    let u = |s: usize, o: usize, r: usize| {
        utility.utility(agent, type_idx, arena.terminal[arena.idx(s, o, r)])
    };
    let mut worst = Worst::new();
    for dev in 0..arena.strategies.len() {
        if dev == truthful {
            continue;
        }
        for (info_set, witnesses) in departure_witnesses(arena, truthful, dev) {
            let (mut lo, mut lo_w) = (f64::INFINITY, (0, 0));
            let (mut hi, mut hi_w) = (f64::NEG_INFINITY, (0, 0));
            for &(o, r) in &witnesses {
                let ut = u(truthful, o, r);
                if ut < lo {
                    lo = ut;
                    lo_w = (o, r);
                }
                let ud = u(dev, o, r);
                if ud > hi {
                    hi = ud;
                    hi_w = (o, r);
                }
            }
            if lo < hi - epsilon - SLACK {
                worst.offer(hi - lo, || Counterexample {
                    info_set: Some(info_set),
                    deviation: arena.strategies[dev].clone(),
                    truthful_witness: arena.witness(lo_w.0, Some(lo_w.1)),
                    deviating_witness: arena.witness(hi_w.0, Some(hi_w.1)),
                    truthful_utility: lo,
                    deviating_utility: hi,
                    gap: hi - lo,
                });
            }
        }
    }
    worst.verdict()
}

fn check_obvious_expectation(
    arena: &Arena,
    utility: &UtilityModel,
    type_idx: usize,
    truthful: usize,
    epsilon: f64,
) -> Result<DominanceVerdict, DominanceError> {
    let agent = arena.agent;
    let u = |s: usize, o: usize, r: usize| {
        utility.utility(agent, type_idx, arena.terminal[arena.idx(s, o, r)])
    };
    let mut worst = Worst::new();
    for dev in 0..arena.strategies.len() {
        if dev == truthful {
            continue;
        }
        for (info_set, witnesses) in departure_witnesses(arena, truthful, dev) {
            // group witnesses by opponent profile and condition chance on
            // the witnessing realizations
            let mut lo = (f64::INFINITY, 0usize);
            let mut hi = (f64::NEG_INFINITY, 0usize);
            let mut o_iter = 0;
            while o_iter < witnesses.len() {
                let o = witnesses[o_iter].0;
                let mut mass = 0.0;
                let mut et = 0.0;
                let mut ed = 0.0;
                while o_iter < witnesses.len() && witnesses[o_iter].0 == o {
                    let r = witnesses[o_iter].1;
                    let p = arena.realizations[r].prob;
                    mass += p;
                    et += p * u(truthful, o, r);
                    ed += p * u(dev, o, r);
                    o_iter += 1;
                }
                if mass <= 0.0 {
                    return Err(DominanceError::Game(GameError::UnreachableInformationSet {
                        agent,
                        info_set,
                    }));
                }
                let (et, ed) = (et / mass, ed / mass);
                if et < lo.0 {
                    lo = (et, o);
                }
                if ed > hi.0 {
                    hi = (ed, o);
                }
            }
            if lo.0 < hi.0 - epsilon - SLACK {
                worst.offer(hi.0 - lo.0, || Counterexample {
                    info_set: Some(info_set),
                    deviation: arena.strategies[dev].clone(),
                    truthful_witness: arena.witness(lo.1, None),
                    deviating_witness: arena.witness(hi.1, None),
                    truthful_utility: lo.0,
                    deviating_utility: hi.0,
                    gap: hi.0 - lo.0,
                });
            }
        }
    }
    Ok(worst.verdict())
}

fn locate(
    arena: &Arena,
    strategy: &Strategy,
) -> Result<usize, DominanceError> {
    arena.strategy_index(strategy).ok_or(DominanceError::UnknownStrategy)
}

/// ε-weak dominance of `strategy` for `(agent, type)`: no deviation does
/// better than ε against any opponents (and realization, in per-realization
/// mode).
pub fn is_weakly_dominant(
    game: &GameForm,
    agent: usize,
    type_idx: usize,
    strategy: &Strategy,
    utility: &UtilityModel,
    epsilon: f64,
    mode: Mode,
    limits: &EnumLimits,
) -> Result<DominanceVerdict, DominanceError> {
    let arena = Arena::build(game, agent, limits)?;
    let truthful = locate(&arena, strategy)?;
    Ok(check_weak(&arena, utility, type_idx, truthful, epsilon, mode))
}

/// ε-obvious dominance: at every witnessed point of departure, the worst
/// continuation under `strategy` is within ε of the best continuation under
/// the deviation.
pub fn is_obviously_dominant(
    game: &GameForm,
    agent: usize,
    type_idx: usize,
    strategy: &Strategy,
    utility: &UtilityModel,
    epsilon: f64,
    limits: &EnumLimits,
) -> Result<DominanceVerdict, DominanceError> {
    let arena = Arena::build(game, agent, limits)?;
    let truthful = locate(&arena, strategy)?;
    Ok(check_obvious(&arena, utility, type_idx, truthful, epsilon))
}

/// ε-obvious dominance in expectation: utilities are averaged over chance
/// conditioned, per opponent profile, on the realizations that witness the
/// departure point. A departure point reachable only through
/// probability-zero realizations is an error rather than a guess.
pub fn is_obviously_dominant_in_expectation(
    game: &GameForm,
    agent: usize,
    type_idx: usize,
    strategy: &Strategy,
    utility: &UtilityModel,
    epsilon: f64,
    limits: &EnumLimits,
) -> Result<DominanceVerdict, DominanceError> {
    let arena = Arena::build(game, agent, limits)?;
    let truthful = locate(&arena, strategy)?;
    check_obvious_expectation(&arena, utility, type_idx, truthful, epsilon)
}

#[derive(Debug, Clone)]
pub struct CellVerdict {
    pub agent: usize,
    pub type_idx: usize,
    pub verdict: DominanceVerdict,
    /// For obvious notions, the weak verdict at the same ε and mode; an
    /// obviously dominant strategy must also be weakly dominant.
    pub weak_cross_check: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct MechanismReport {
    pub notion: MechanismNotion,
    pub epsilon: f64,
    pub cells: Vec<CellVerdict>,
    pub holds: bool,
}

/// Checks the designer's signalling strategy for every (agent, type) cell
/// and takes the conjunction. Agents are processed in parallel; cells are
/// emitted in (agent, type) order regardless of scheduling.
pub fn check_mechanism(
    game: &GameForm,
    signalling: &SignallingMap,
    utility: &UtilityModel,
    epsilon: f64,
    notion: MechanismNotion,
    limits: &EnumLimits,
) -> Result<MechanismReport, DominanceError> {
    let type_counts = utility.type_counts().to_vec();
    let per_agent: Vec<Result<Vec<CellVerdict>, DominanceError>> =
        exec::indexed_map(type_counts.len(), |agent| {
            let arena = Arena::build(game, agent, limits)?;
            let mut cells = Vec::with_capacity(type_counts[agent]);
            for type_idx in 0..type_counts[agent] {
                let strategy = signalling
                    .strategy(agent, type_idx)
                    .ok_or(DominanceError::MissingSignalling { agent, type_idx })?;
                let truthful = locate(&arena, strategy)?;
                let (verdict, weak_cross_check) = match notion {
                    MechanismNotion::Sp => (
                        check_weak(
                            &arena,
                            utility,
                            type_idx,
                            truthful,
                            epsilon,
                            Mode::PerRealization,
                        ),
                        None,
                    ),
                    MechanismNotion::SpExpectation => (
                        check_weak(&arena, utility, type_idx, truthful, epsilon, Mode::Expectation),
                        None,
                    ),
                    MechanismNotion::Osp => {
                        let v = check_obvious(&arena, utility, type_idx, truthful, epsilon);
                        let weak = check_weak(
                            &arena,
                            utility,
                            type_idx,
                            truthful,
                            epsilon,
                            Mode::PerRealization,
                        );
                        (v, Some(weak.holds))
                    }
                    MechanismNotion::OspExpectation => {
                        let v = check_obvious_expectation(
                            &arena, utility, type_idx, truthful, epsilon,
                        )?;
                        let weak = check_weak(
                            &arena,
                            utility,
                            type_idx,
                            truthful,
                            epsilon,
                            Mode::Expectation,
                        );
                        (v, Some(weak.holds))
                    }
                };
                cells.push(CellVerdict { agent, type_idx, verdict, weak_cross_check });
            }
            Ok(cells)
        });
    let mut cells = Vec::new();
    for agent_cells in per_agent {
        cells.extend(agent_cells?);
    }
    let holds = cells.iter().all(|c| c.verdict.holds);
    Ok(MechanismReport { notion, epsilon, cells, holds })
}
