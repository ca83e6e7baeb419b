//! Finite extensive game forms: a rooted tree of histories with player,
//! chance and terminal nodes, information sets partitioning each agent's
//! decision nodes, and exhaustive strategy / chance-realization enumeration.
//!
//! Everything here is deliberately explicit and finite so that dominance
//! definitions quantifying over "all opponent strategies and realizations"
//! can be decided by enumeration. Enumeration orders are fixed (information
//! sets in discovery order, actions in declared order, odometer with the
//! last coordinate fastest) so runs are reproducible byte for byte.

mod files;

pub use files::{EdgeFile, InfoSetFile, MechanismFile, NodeFile};

use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Edge {
    pub action: String,
    pub child: NodeId,
}

#[derive(Debug, Clone)]
pub struct ChanceEdge {
    pub action: String,
    pub child: NodeId,
    pub prob: f64,
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Player { agent: usize, edges: Vec<Edge> },
    Chance { edges: Vec<ChanceEdge> },
    Terminal { outcome: usize },
}

/// A cell of indistinguishable decision nodes of one agent. All members must
/// offer the same actions; `actions` is the canonical order taken from the
/// first declared member.
#[derive(Debug, Clone)]
pub struct InfoSet {
    pub agent: usize,
    pub nodes: Vec<NodeId>,
    pub actions: Vec<String>,
}

/// One agent's plan: an action index per information set, aligned with the
/// agent's information sets in discovery order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub agent: usize,
    pub choices: Vec<usize>,
}

/// A full mapping from chance nodes to chosen actions, with its probability
/// (product over nodes). Full mappings rather than path samples, so that
/// conditioning on an event is a filter-and-renormalize step.
#[derive(Debug, Clone, PartialEq)]
pub struct ChanceRealization {
    pub choices: Vec<usize>,
    pub prob: f64,
}

/// Result of walking the tree under one realization and one strategy per
/// agent.
#[derive(Debug, Clone)]
pub struct PlayTrace {
    pub terminal: NodeId,
    pub outcome: usize,
    pub path: Vec<NodeId>,
    /// Global indices of every information set crossed, in path order.
    pub visited_info_sets: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Structure,
    Actions,
    Chance,
    InfoSets,
}

/// One named invariant violation. `validate` reports these instead of
/// failing, so a malformed description can be inspected as a whole.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("strategy space too large: agent {agent} has {size} strategies (cap {cap})")]
    StrategySpaceTooLarge { agent: usize, size: u128, cap: u128 },
    #[error("enumeration too large: {what} has {size} elements (cap {cap})")]
    EnumerationTooLarge { what: &'static str, size: u128, cap: u128 },
    #[error("unassigned agent {0}")]
    UnassignedAgent(usize),
    #[error("strategies belong to different agents ({0} and {1})")]
    AgentMismatch(usize, usize),
    #[error("realization does not cover chance node ordinal {0}")]
    RealizationTooShort(usize),
    #[error("strategy for agent {agent} does not cover information set {info_set}")]
    StrategyTooShort { agent: usize, info_set: usize },
    #[error("action {action:?} not available at node {node:?}")]
    ActionUnavailable { node: String, action: String },
    #[error("information set {info_set} of agent {agent} is reachable only with probability 0")]
    UnreachableInformationSet { agent: usize, info_set: usize },
    #[error("invalid game form: {0}")]
    InvalidGame(String),
    #[error("unknown action label {label:?} for information set {info_set}")]
    UnknownAction { info_set: usize, label: String },
    #[error("malformed description: {0}")]
    BadDescription(String),
}

/// Caps applied to exhaustive enumeration so the checkers fail loudly
/// instead of thrashing on oversized inputs.
#[derive(Debug, Clone, Copy)]
pub struct EnumLimits {
    pub strategy_cap: u64,
    pub profile_cap: u64,
    pub realization_cap: u64,
    pub play_cap: u64,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            strategy_cap: 1_000_000,
            profile_cap: 1_000_000,
            realization_cap: 1_000_000,
            play_cap: 20_000_000,
        }
    }
}

/// A witnessed point of first disagreement between two strategies: the
/// information set plus every `(opponent profile, realization)` pair under
/// which the set is reached by both strategies.
#[derive(Debug, Clone)]
pub struct DeparturePoint {
    pub info_set: usize,
    /// Indices into `DepartureAnalysis::{opponent_profiles, realizations}`.
    pub witnesses: Vec<(usize, usize)>,
    /// Projection of `witnesses` onto opponent profiles, deduplicated.
    pub witness_opponents: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DepartureAnalysis {
    pub agent: usize,
    pub opponent_profiles: Vec<Vec<Strategy>>,
    pub realizations: Vec<ChanceRealization>,
    pub points: Vec<DeparturePoint>,
}

#[derive(Debug, Clone)]
pub struct GameForm {
    nodes: Vec<NodeKind>,
    node_names: Vec<String>,
    root: NodeId,
    outcomes: Vec<String>,
    info_sets: Vec<InfoSet>,
    n_agents: usize,
    // derived indexes
    node_info_set: Vec<Option<usize>>,
    agent_info_sets: Vec<Vec<usize>>,
    info_set_local: Vec<(usize, usize)>,
    chance_nodes: Vec<NodeId>,
    chance_ordinal: Vec<Option<usize>>,
    canonical_children: Vec<Option<Vec<Option<NodeId>>>>,
    preorder: Vec<NodeId>,
}

impl GameForm {
    /// Builds the internal representation from a description. Only failures
    /// that make the structure unrepresentable (dangling ids, missing owner)
    /// are errors here; semantic invariants are reported by [`validate`].
    ///
    /// [`validate`]: GameForm::validate
    pub fn from_description(desc: &MechanismFile) -> Result<GameForm, GameError> {
        files::build(desc)
    }

    pub fn to_description(&self) -> MechanismFile {
        files::describe(self)
    }

    pub(crate) fn assemble(
        nodes: Vec<NodeKind>,
        node_names: Vec<String>,
        root: NodeId,
        outcomes: Vec<String>,
        info_sets_raw: Vec<(usize, Vec<NodeId>)>,
    ) -> GameForm {
        let n = nodes.len();
        let mut n_agents = 0usize;
        for kind in &nodes {
            if let NodeKind::Player { agent, .. } = kind {
                n_agents = n_agents.max(agent + 1);
            }
        }
        for (agent, _) in &info_sets_raw {
            n_agents = n_agents.max(agent + 1);
        }

        // preorder walk, cycle-safe
        let mut preorder = Vec::with_capacity(n);
        let mut pos = vec![usize::MAX; n];
        let mut stack = vec![root];
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            pos[v] = preorder.len();
            preorder.push(v);
            match &nodes[v] {
                NodeKind::Player { edges, .. } => {
                    for e in edges.iter().rev() {
                        stack.push(e.child);
                    }
                }
                NodeKind::Chance { edges } => {
                    for e in edges.iter().rev() {
                        stack.push(e.child);
                    }
                }
                NodeKind::Terminal { .. } => {}
            }
        }

        // canonical action order per info set: first declared member's edges
        let mut info_sets = Vec::with_capacity(info_sets_raw.len());
        for (agent, members) in &info_sets_raw {
            let actions = members
                .first()
                .map(|&v| match &nodes[v] {
                    NodeKind::Player { edges, .. } => {
                        edges.iter().map(|e| e.action.clone()).collect()
                    }
                    _ => Vec::new(),
                })
                .unwrap_or_default();
            info_sets.push(InfoSet { agent: *agent, nodes: members.clone(), actions });
        }

        let mut node_info_set = vec![None; n];
        for (idx, set) in info_sets.iter().enumerate() {
            for &v in &set.nodes {
                if node_info_set[v].is_none() {
                    node_info_set[v] = Some(idx);
                }
            }
        }

        // agent info sets in discovery order: min preorder position of members
        let mut agent_info_sets = vec![Vec::new(); n_agents];
        let mut order: Vec<usize> = (0..info_sets.len()).collect();
        order.sort_by_key(|&idx| {
            let min_pos =
                info_sets[idx].nodes.iter().map(|&v| pos[v]).min().unwrap_or(usize::MAX);
            (min_pos, idx)
        });
        for idx in order {
            agent_info_sets[info_sets[idx].agent].push(idx);
        }
        let mut info_set_local = vec![(0usize, 0usize); info_sets.len()];
        for (agent, sets) in agent_info_sets.iter().enumerate() {
            for (local, &global) in sets.iter().enumerate() {
                info_set_local[global] = (agent, local);
            }
        }

        // chance nodes: reachable ones in preorder, then the rest by index
        let mut chance_nodes: Vec<NodeId> = preorder
            .iter()
            .copied()
            .filter(|&v| matches!(nodes[v], NodeKind::Chance { .. }))
            .collect();
        for v in 0..n {
            if matches!(nodes[v], NodeKind::Chance { .. }) && pos[v] == usize::MAX {
                chance_nodes.push(v);
            }
        }
        let mut chance_ordinal = vec![None; n];
        for (ord, &v) in chance_nodes.iter().enumerate() {
            chance_ordinal[v] = Some(ord);
        }

        // resolve each player node's children in its set's canonical order
        let mut canonical_children = vec![None; n];
        for v in 0..n {
            if let NodeKind::Player { edges, .. } = &nodes[v] {
                if let Some(set_idx) = node_info_set[v] {
                    let resolved = info_sets[set_idx]
                        .actions
                        .iter()
                        .map(|a| edges.iter().find(|e| &e.action == a).map(|e| e.child))
                        .collect();
                    canonical_children[v] = Some(resolved);
                }
            }
        }

        GameForm {
            nodes,
            node_names,
            root,
            outcomes,
            info_sets,
            n_agents,
            node_info_set,
            agent_info_sets,
            info_set_local,
            chance_nodes,
            chance_ordinal,
            canonical_children,
            preorder,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.node_names[v]
    }

    pub fn node_kind(&self, v: NodeId) -> &NodeKind {
        &self.nodes[v]
    }

    pub fn outcome_labels(&self) -> &[String] {
        &self.outcomes
    }

    pub fn outcome_label(&self, outcome: usize) -> &str {
        &self.outcomes[outcome]
    }

    pub fn info_sets(&self) -> &[InfoSet] {
        &self.info_sets
    }

    pub fn info_set(&self, idx: usize) -> &InfoSet {
        &self.info_sets[idx]
    }

    /// The agent's information sets (global indices) in discovery order.
    pub fn agent_info_sets(&self, agent: usize) -> &[usize] {
        self.agent_info_sets.get(agent).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn chance_nodes(&self) -> &[NodeId] {
        &self.chance_nodes
    }

    pub fn terminals(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(v, k)| match k {
            NodeKind::Terminal { outcome } => Some((v, *outcome)),
            _ => None,
        })
    }

    /// Checks every structural invariant and returns one diagnostic per
    /// violation; an empty list means the game form is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let diag = |out: &mut Vec<Diagnostic>, kind, message: String| {
            out.push(Diagnostic { kind, message });
        };

        // arborescence: unique parents, everything hangs off the root
        let mut parents = vec![0usize; self.nodes.len()];
        for kind in &self.nodes {
            match kind {
                NodeKind::Player { edges, .. } => {
                    for e in edges {
                        parents[e.child] += 1;
                    }
                }
                NodeKind::Chance { edges } => {
                    for e in edges {
                        parents[e.child] += 1;
                    }
                }
                NodeKind::Terminal { .. } => {}
            }
        }
        if parents[self.root] != 0 {
            diag(
                &mut out,
                DiagnosticKind::Structure,
                format!("root node {:?} has an incoming edge", self.node_name(self.root)),
            );
        }
        let mut reached = vec![false; self.nodes.len()];
        for &v in &self.preorder {
            reached[v] = true;
        }
        for v in 0..self.nodes.len() {
            if v != self.root && parents[v] > 1 {
                diag(
                    &mut out,
                    DiagnosticKind::Structure,
                    format!("node {:?} has {} parents", self.node_name(v), parents[v]),
                );
            }
            if !reached[v] {
                diag(
                    &mut out,
                    DiagnosticKind::Structure,
                    format!("node {:?} is unreachable from the root", self.node_name(v)),
                );
            }
            if !matches!(self.nodes[v], NodeKind::Terminal { .. })
                && self.children_of(v).is_empty()
            {
                diag(
                    &mut out,
                    DiagnosticKind::Structure,
                    format!("internal node {:?} has no actions", self.node_name(v)),
                );
            }
            // action labels one-to-one with children
            let labels = self.action_labels_at(v);
            for i in 0..labels.len() {
                for j in i + 1..labels.len() {
                    if labels[i] == labels[j] {
                        diag(
                            &mut out,
                            DiagnosticKind::Actions,
                            format!(
                                "node {:?} declares action {:?} twice",
                                self.node_name(v),
                                labels[i]
                            ),
                        );
                    }
                }
            }
            if let NodeKind::Chance { edges } = &self.nodes[v] {
                let mut sum = 0.0;
                for e in edges {
                    if e.prob < 0.0 {
                        diag(
                            &mut out,
                            DiagnosticKind::Chance,
                            format!(
                                "chance node {:?} action {:?} has negative probability {}",
                                self.node_name(v),
                                e.action,
                                e.prob
                            ),
                        );
                    }
                    sum += e.prob;
                }
                if !edges.is_empty() && (sum - 1.0).abs() > 1e-12 {
                    diag(
                        &mut out,
                        DiagnosticKind::Chance,
                        format!(
                            "chance node {:?} probabilities sum to {} (expected 1)",
                            self.node_name(v),
                            sum
                        ),
                    );
                }
            }
        }

        // information sets partition each agent's decision nodes
        let mut covered = vec![0usize; self.nodes.len()];
        for (idx, set) in self.info_sets.iter().enumerate() {
            if set.nodes.is_empty() {
                diag(
                    &mut out,
                    DiagnosticKind::InfoSets,
                    format!("information set {idx} of agent {} is empty", set.agent),
                );
            }
            let canonical: Vec<&String> = {
                let mut v: Vec<&String> = set.actions.iter().collect();
                v.sort();
                v
            };
            for &v in &set.nodes {
                covered[v] += 1;
                match &self.nodes[v] {
                    NodeKind::Player { agent, edges } => {
                        if *agent != set.agent {
                            diag(
                                &mut out,
                                DiagnosticKind::InfoSets,
                                format!(
                                    "information set {idx} of agent {} contains node {:?} owned by agent {}",
                                    set.agent,
                                    self.node_name(v),
                                    agent
                                ),
                            );
                        }
                        let mut here: Vec<&String> = edges.iter().map(|e| &e.action).collect();
                        here.sort();
                        if here != canonical {
                            diag(
                                &mut out,
                                DiagnosticKind::InfoSets,
                                format!(
                                    "node {:?} in information set {idx} has action set {:?}, expected {:?}",
                                    self.node_name(v),
                                    here,
                                    canonical
                                ),
                            );
                        }
                    }
                    _ => diag(
                        &mut out,
                        DiagnosticKind::InfoSets,
                        format!(
                            "information set {idx} contains non-player node {:?}",
                            self.node_name(v)
                        ),
                    ),
                }
            }
        }
        for v in 0..self.nodes.len() {
            if let NodeKind::Player { agent, .. } = &self.nodes[v] {
                if covered[v] == 0 {
                    diag(
                        &mut out,
                        DiagnosticKind::InfoSets,
                        format!(
                            "decision node {:?} of agent {agent} belongs to no information set",
                            self.node_name(v)
                        ),
                    );
                } else if covered[v] > 1 {
                    diag(
                        &mut out,
                        DiagnosticKind::InfoSets,
                        format!(
                            "decision node {:?} belongs to {} information sets",
                            self.node_name(v),
                            covered[v]
                        ),
                    );
                }
            }
        }
        // label sets of distinct info sets of one agent are disjoint
        for agent in 0..self.n_agents {
            let sets = self.agent_info_sets(agent);
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    for a in &self.info_sets[sets[i]].actions {
                        if self.info_sets[sets[j]].actions.contains(a) {
                            diag(
                                &mut out,
                                DiagnosticKind::InfoSets,
                                format!(
                                    "action {a:?} available at two information sets of agent {agent} ({} and {})",
                                    sets[i], sets[j]
                                ),
                            );
                        }
                    }
                }
            }
        }
        out
    }

    fn children_of(&self, v: NodeId) -> Vec<NodeId> {
        match &self.nodes[v] {
            NodeKind::Player { edges, .. } => edges.iter().map(|e| e.child).collect(),
            NodeKind::Chance { edges } => edges.iter().map(|e| e.child).collect(),
            NodeKind::Terminal { .. } => Vec::new(),
        }
    }

    fn action_labels_at(&self, v: NodeId) -> Vec<&str> {
        match &self.nodes[v] {
            NodeKind::Player { edges, .. } => edges.iter().map(|e| e.action.as_str()).collect(),
            NodeKind::Chance { edges } => edges.iter().map(|e| e.action.as_str()).collect(),
            NodeKind::Terminal { .. } => Vec::new(),
        }
    }

    /// Walks the tree under `realization`, resolving each acting agent's
    /// strategy through `resolve`.
    pub fn trace<'a, F>(
        &self,
        realization: &ChanceRealization,
        resolve: F,
    ) -> Result<PlayTrace, GameError>
    where
        F: Fn(usize) -> Option<&'a Strategy>,
    {
        let mut v = self.root;
        let mut path = vec![v];
        let mut visited = Vec::new();
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > self.nodes.len() + 1 {
                return Err(GameError::InvalidGame(
                    "walk exceeded node count; the game form is not a tree".into(),
                ));
            }
            match &self.nodes[v] {
                NodeKind::Terminal { outcome } => {
                    return Ok(PlayTrace {
                        terminal: v,
                        outcome: *outcome,
                        path,
                        visited_info_sets: visited,
                    });
                }
                NodeKind::Player { agent, .. } => {
                    let set_idx = self.node_info_set[v].ok_or_else(|| {
                        GameError::InvalidGame(format!(
                            "decision node {:?} has no information set",
                            self.node_name(v)
                        ))
                    })?;
                    visited.push(set_idx);
                    let strategy =
                        resolve(*agent).ok_or(GameError::UnassignedAgent(*agent))?;
                    if strategy.agent != *agent {
                        return Err(GameError::AgentMismatch(strategy.agent, *agent));
                    }
                    let (_, local) = self.info_set_local[set_idx];
                    let &action = strategy.choices.get(local).ok_or(
                        GameError::StrategyTooShort { agent: *agent, info_set: set_idx },
                    )?;
                    let next = self.canonical_children[v]
                        .as_ref()
                        .and_then(|c| c.get(action).copied())
                        .flatten()
                        .ok_or_else(|| GameError::ActionUnavailable {
                            node: self.node_name(v).to_string(),
                            action: self
                                .info_sets[set_idx]
                                .actions
                                .get(action)
                                .cloned()
                                .unwrap_or_else(|| format!("#{action}")),
                        })?;
                    path.push(next);
                    v = next;
                }
                NodeKind::Chance { edges } => {
                    let ord = self.chance_ordinal[v].expect("chance node has an ordinal");
                    let &choice = realization
                        .choices
                        .get(ord)
                        .ok_or(GameError::RealizationTooShort(ord))?;
                    let edge = edges.get(choice).ok_or_else(|| GameError::ActionUnavailable {
                        node: self.node_name(v).to_string(),
                        action: format!("chance#{choice}"),
                    })?;
                    path.push(edge.child);
                    v = edge.child;
                }
            }
        }
    }

    /// Deterministic walk under one strategy per agent in `profile`.
    pub fn play(
        &self,
        realization: &ChanceRealization,
        profile: &[Strategy],
    ) -> Result<PlayTrace, GameError> {
        self.trace(realization, |agent| profile.iter().find(|s| s.agent == agent))
    }

    pub fn strategy_count(&self, agent: usize) -> u128 {
        self.agent_info_sets(agent)
            .iter()
            .map(|&s| self.info_sets[s].actions.len() as u128)
            .product()
    }

    /// Exhaustive strategy list for one agent: the odometer runs over the
    /// agent's information sets in discovery order, last set fastest. An
    /// agent with no decision nodes gets the single empty strategy.
    pub fn enumerate_strategies(
        &self,
        agent: usize,
        cap: u64,
    ) -> Result<Vec<Strategy>, GameError> {
        let size = self.strategy_count(agent);
        if size > cap as u128 {
            return Err(GameError::StrategySpaceTooLarge { agent, size, cap: cap as u128 });
        }
        let arities: Vec<usize> = self
            .agent_info_sets(agent)
            .iter()
            .map(|&s| self.info_sets[s].actions.len())
            .collect();
        Ok(odometer(&arities)
            .into_iter()
            .map(|choices| Strategy { agent, choices })
            .collect())
    }

    /// All full chance mappings with their probabilities. A game without
    /// chance nodes yields the single empty realization of probability 1.
    pub fn enumerate_realizations(&self, cap: u64) -> Result<Vec<ChanceRealization>, GameError> {
        let arities: Vec<usize> = self
            .chance_nodes
            .iter()
            .map(|&v| match &self.nodes[v] {
                NodeKind::Chance { edges } => edges.len(),
                _ => unreachable!("chance ordinal points at a chance node"),
            })
            .collect();
        let size: u128 = arities.iter().map(|&a| a as u128).product();
        if size > cap as u128 {
            return Err(GameError::EnumerationTooLarge {
                what: "chance realization space",
                size,
                cap: cap as u128,
            });
        }
        Ok(odometer(&arities)
            .into_iter()
            .map(|choices| {
                let prob = choices
                    .iter()
                    .zip(&self.chance_nodes)
                    .map(|(&c, &v)| match &self.nodes[v] {
                        NodeKind::Chance { edges } => edges[c].prob,
                        _ => unreachable!(),
                    })
                    .product();
                ChanceRealization { choices, prob }
            })
            .collect())
    }

    /// Every combination of opponent strategies for `agent`, in odometer
    /// order over the other agents ascending (last agent fastest).
    pub fn enumerate_opponents(
        &self,
        agent: usize,
        limits: &EnumLimits,
    ) -> Result<Vec<Vec<Strategy>>, GameError> {
        let others: Vec<usize> = (0..self.n_agents).filter(|&a| a != agent).collect();
        let mut per_agent = Vec::with_capacity(others.len());
        let mut total: u128 = 1;
        for &a in &others {
            let list = self.enumerate_strategies(a, limits.strategy_cap)?;
            total = total.saturating_mul(list.len() as u128);
            per_agent.push(list);
        }
        if total > limits.profile_cap as u128 {
            return Err(GameError::EnumerationTooLarge {
                what: "opponent profile space",
                size: total,
                cap: limits.profile_cap as u128,
            });
        }
        let arities: Vec<usize> = per_agent.iter().map(Vec::len).collect();
        Ok(odometer(&arities)
            .into_iter()
            .map(|combo| {
                combo
                    .iter()
                    .enumerate()
                    .map(|(slot, &idx)| per_agent[slot][idx].clone())
                    .collect()
            })
            .collect())
    }

    /// Earliest points of departure between two strategies of one agent:
    /// information sets where they disagree and that some
    /// `(opponents, realization)` pair reaches under both, with the witness
    /// pairs listed exhaustively.
    pub fn departure_points(
        &self,
        first: &Strategy,
        second: &Strategy,
        limits: &EnumLimits,
    ) -> Result<DepartureAnalysis, GameError> {
        if first.agent != second.agent {
            return Err(GameError::AgentMismatch(first.agent, second.agent));
        }
        let agent = first.agent;
        let opponent_profiles = self.enumerate_opponents(agent, limits)?;
        let realizations = self.enumerate_realizations(limits.realization_cap)?;
        let plays = 2u128
            * opponent_profiles.len() as u128
            * realizations.len() as u128;
        if plays > limits.play_cap as u128 {
            return Err(GameError::EnumerationTooLarge {
                what: "play table",
                size: plays,
                cap: limits.play_cap as u128,
            });
        }

        let locals = self.agent_info_sets(agent);
        let differing: Vec<usize> = (0..locals.len())
            .filter(|&k| first.choices.get(k) != second.choices.get(k))
            .collect();
        let mut points = Vec::new();
        if differing.is_empty() {
            return Ok(DepartureAnalysis { agent, opponent_profiles, realizations, points });
        }

        // visited own info sets for each play of both strategies
        let mut visited_first = Vec::with_capacity(opponent_profiles.len());
        let mut visited_second = Vec::with_capacity(opponent_profiles.len());
        for own in [first, second] {
            let out = if std::ptr::eq(own, first) {
                &mut visited_first
            } else {
                &mut visited_second
            };
            for opp in &opponent_profiles {
                let mut per_real = Vec::with_capacity(realizations.len());
                for real in &realizations {
                    let trace = self.trace(real, |a| {
                        if a == agent {
                            Some(own)
                        } else {
                            opp.iter().find(|s| s.agent == a)
                        }
                    })?;
                    per_real.push(trace.visited_info_sets);
                }
                out.push(per_real);
            }
        }

        for &local in &differing {
            let global = locals[local];
            let mut witnesses = Vec::new();
            let mut witness_opponents = Vec::new();
            for o in 0..opponent_profiles.len() {
                let mut any = false;
                for r in 0..realizations.len() {
                    if visited_first[o][r].contains(&global)
                        && visited_second[o][r].contains(&global)
                    {
                        witnesses.push((o, r));
                        any = true;
                    }
                }
                if any {
                    witness_opponents.push(o);
                }
            }
            if !witnesses.is_empty() {
                points.push(DeparturePoint { info_set: global, witnesses, witness_opponents });
            }
        }
        Ok(DepartureAnalysis { agent, opponent_profiles, realizations, points })
    }

    /// Builds a strategy from `(global info set, action label)` pairs; every
    /// information set of the agent must be assigned exactly once.
    pub fn strategy_from_labels(
        &self,
        agent: usize,
        choices: &[(usize, &str)],
    ) -> Result<Strategy, GameError> {
        let sets = self.agent_info_sets(agent);
        let mut resolved = vec![None; sets.len()];
        for &(global, label) in choices {
            let (owner, local) = *self
                .info_set_local
                .get(global)
                .ok_or_else(|| GameError::BadDescription(format!("no information set {global}")))?;
            if owner != agent {
                return Err(GameError::BadDescription(format!(
                    "information set {global} belongs to agent {owner}, not {agent}"
                )));
            }
            let action = self.info_sets[global]
                .actions
                .iter()
                .position(|a| a == label)
                .ok_or_else(|| GameError::UnknownAction {
                    info_set: global,
                    label: label.to_string(),
                })?;
            resolved[local] = Some(action);
        }
        let choices = resolved
            .into_iter()
            .enumerate()
            .map(|(local, c)| {
                c.ok_or(GameError::StrategyTooShort { agent, info_set: sets[local] })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Strategy { agent, choices })
    }

    /// Human-readable rendering of a strategy as `info_set->action` pairs.
    pub fn strategy_labels(&self, strategy: &Strategy) -> Vec<(usize, String)> {
        self.agent_info_sets(strategy.agent)
            .iter()
            .zip(&strategy.choices)
            .map(|(&global, &c)| {
                let label = self.info_sets[global]
                    .actions
                    .get(c)
                    .cloned()
                    .unwrap_or_else(|| format!("#{c}"));
                (global, label)
            })
            .collect()
    }
}

/// Mixed-radix counter: all tuples over the given arities, last slot fastest.
/// An empty arity list yields the single empty tuple.
pub(crate) fn odometer(arities: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = arities.iter().product();
    if arities.contains(&0) {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; arities.len()];
    loop {
        out.push(current.clone());
        let mut slot = arities.len();
        loop {
            if slot == 0 {
                return out;
            }
            slot -= 1;
            current[slot] += 1;
            if current[slot] < arities[slot] {
                break;
            }
            current[slot] = 0;
        }
    }
}

#[cfg(test)]
mod tests;
