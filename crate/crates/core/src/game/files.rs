//! JSON description of a mechanism's game tree.
//!
//! Schema: `{ "root": id, "nodes": [{ "id", "kind": "player"|"chance"|
//! "terminal", "owner"?, "edges": [{ "action", "child", "prob"? }],
//! "outcome"? }], "info_sets": [{ "agent", "nodes": [ids] }] }`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{ChanceEdge, Edge, GameError, GameForm, NodeKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MechanismFile {
    pub root: String,
    pub nodes: Vec<NodeFile>,
    pub info_sets: Vec<InfoSetFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeFile {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub action: String,
    pub child: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfoSetFile {
    pub agent: usize,
    pub nodes: Vec<String>,
}

impl MechanismFile {
    pub fn from_json(text: &str) -> Result<MechanismFile, GameError> {
        serde_json::from_str(text).map_err(|e| GameError::BadDescription(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mechanism file serializes")
    }
}

pub(super) fn build(desc: &MechanismFile) -> Result<GameForm, GameError> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, node) in desc.nodes.iter().enumerate() {
        if index.insert(node.id.as_str(), i).is_some() {
            return Err(GameError::BadDescription(format!("duplicate node id {:?}", node.id)));
        }
    }
    let resolve = |id: &str| -> Result<usize, GameError> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| GameError::BadDescription(format!("unknown node id {id:?}")))
    };
    let root = resolve(&desc.root)?;

    let mut outcomes: Vec<String> = Vec::new();
    let outcome_idx = |label: &str, outcomes: &mut Vec<String>| -> usize {
        match outcomes.iter().position(|o| o == label) {
            Some(i) => i,
            None => {
                outcomes.push(label.to_string());
                outcomes.len() - 1
            }
        }
    };

    let mut nodes = Vec::with_capacity(desc.nodes.len());
    let mut names = Vec::with_capacity(desc.nodes.len());
    for node in &desc.nodes {
        names.push(node.id.clone());
        let kind = match node.kind.as_str() {
            "player" => {
                let agent = node.owner.ok_or_else(|| {
                    GameError::BadDescription(format!("player node {:?} lacks owner", node.id))
                })?;
                let edges = node
                    .edges
                    .iter()
                    .map(|e| {
                        Ok(Edge { action: e.action.clone(), child: resolve(&e.child)? })
                    })
                    .collect::<Result<Vec<_>, GameError>>()?;
                NodeKind::Player { agent, edges }
            }
            "chance" => {
                let edges = node
                    .edges
                    .iter()
                    .map(|e| {
                        Ok(ChanceEdge {
                            action: e.action.clone(),
                            child: resolve(&e.child)?,
                            prob: e.prob.ok_or_else(|| {
                                GameError::BadDescription(format!(
                                    "chance edge {:?} at node {:?} lacks prob",
                                    e.action, node.id
                                ))
                            })?,
                        })
                    })
                    .collect::<Result<Vec<_>, GameError>>()?;
                NodeKind::Chance { edges }
            }
            "terminal" => {
                if !node.edges.is_empty() {
                    return Err(GameError::BadDescription(format!(
                        "terminal node {:?} declares edges",
                        node.id
                    )));
                }
                let label = node.outcome.as_deref().ok_or_else(|| {
                    GameError::BadDescription(format!(
                        "terminal node {:?} lacks an outcome",
                        node.id
                    ))
                })?;
                NodeKind::Terminal { outcome: outcome_idx(label, &mut outcomes) }
            }
            other => {
                return Err(GameError::BadDescription(format!(
                    "node {:?} has unknown kind {other:?}",
                    node.id
                )))
            }
        };
        nodes.push(kind);
    }

    let mut info_sets = Vec::with_capacity(desc.info_sets.len());
    for set in &desc.info_sets {
        let members = set
            .nodes
            .iter()
            .map(|id| resolve(id))
            .collect::<Result<Vec<_>, GameError>>()?;
        info_sets.push((set.agent, members));
    }

    Ok(GameForm::assemble(nodes, names, root, outcomes, info_sets))
}

pub(super) fn describe(game: &GameForm) -> MechanismFile {
    let nodes = (0..game.n_nodes())
        .map(|v| match game.node_kind(v) {
            NodeKind::Player { agent, edges } => NodeFile {
                id: game.node_name(v).to_string(),
                kind: "player".into(),
                owner: Some(*agent),
                edges: edges
                    .iter()
                    .map(|e| EdgeFile {
                        action: e.action.clone(),
                        child: game.node_name(e.child).to_string(),
                        prob: None,
                    })
                    .collect(),
                outcome: None,
            },
            NodeKind::Chance { edges } => NodeFile {
                id: game.node_name(v).to_string(),
                kind: "chance".into(),
                owner: None,
                edges: edges
                    .iter()
                    .map(|e| EdgeFile {
                        action: e.action.clone(),
                        child: game.node_name(e.child).to_string(),
                        prob: Some(e.prob),
                    })
                    .collect(),
                outcome: None,
            },
            NodeKind::Terminal { outcome } => NodeFile {
                id: game.node_name(v).to_string(),
                kind: "terminal".into(),
                owner: None,
                edges: Vec::new(),
                outcome: Some(game.outcome_label(*outcome).to_string()),
            },
        })
        .collect();
    let info_sets = game
        .info_sets()
        .iter()
        .map(|set| InfoSetFile {
            agent: set.agent,
            nodes: set.nodes.iter().map(|&v| game.node_name(v).to_string()).collect(),
        })
        .collect();
    MechanismFile { root: game.node_name(game.root()).to_string(), nodes, info_sets }
}
