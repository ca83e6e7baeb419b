//! Bounded valuation tables: per agent, a finite type domain and a value for
//! every (type, outcome) pair, all within declared bounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ValuationError {
    #[error("value bounds must satisfy min < max, got [{0}, {1}]")]
    BadBounds(f64, f64),
    #[error("agent {agent} type {type_idx} has {got} values, expected {expected} outcomes")]
    BadRow { agent: usize, type_idx: usize, got: usize, expected: usize },
    #[error("agent {agent} value {value} for (type {type_idx}, outcome {outcome}) is outside [{min}, {max}]")]
    OutOfBounds { agent: usize, type_idx: usize, outcome: usize, value: f64, min: f64, max: f64 },
    #[error("agent {agent} declares no types")]
    EmptyDomain { agent: usize },
    #[error("unknown outcome label {0:?}")]
    UnknownOutcome(String),
    #[error("unknown type {name:?} for agent {agent}")]
    UnknownType { agent: usize, name: String },
    #[error("malformed valuation file: {0}")]
    BadFile(String),
}

#[derive(Debug, Clone)]
struct AgentValuation {
    types: Vec<String>,
    /// `values[type][outcome]`
    values: Vec<Vec<f64>>,
}

/// Finite valuation model: outcome labels shared by all agents, one bounded
/// value per (agent, type, outcome).
#[derive(Debug, Clone)]
pub struct ValuationTable {
    value_min: f64,
    value_max: f64,
    outcomes: Vec<String>,
    agents: Vec<AgentValuation>,
}

impl ValuationTable {
    pub fn new(
        value_min: f64,
        value_max: f64,
        outcomes: Vec<String>,
        agents: Vec<(Vec<String>, Vec<Vec<f64>>)>,
    ) -> Result<ValuationTable, ValuationError> {
        if !(value_min < value_max) {
            return Err(ValuationError::BadBounds(value_min, value_max));
        }
        let mut built = Vec::with_capacity(agents.len());
        for (agent, (types, values)) in agents.into_iter().enumerate() {
            if types.is_empty() {
                return Err(ValuationError::EmptyDomain { agent });
            }
            if values.len() != types.len() {
                return Err(ValuationError::BadRow {
                    agent,
                    type_idx: values.len(),
                    got: values.len(),
                    expected: types.len(),
                });
            }
            for (type_idx, row) in values.iter().enumerate() {
                if row.len() != outcomes.len() {
                    return Err(ValuationError::BadRow {
                        agent,
                        type_idx,
                        got: row.len(),
                        expected: outcomes.len(),
                    });
                }
                for (outcome, &value) in row.iter().enumerate() {
                    if value < value_min || value > value_max {
                        return Err(ValuationError::OutOfBounds {
                            agent,
                            type_idx,
                            outcome,
                            value,
                            min: value_min,
                            max: value_max,
                        });
                    }
                }
            }
            built.push(AgentValuation { types, values });
        }
        Ok(ValuationTable { value_min, value_max, outcomes, agents: built })
    }

    /// Lower bound on every valuation.
    pub fn value_min(&self) -> f64 {
        self.value_min
    }

    /// Upper bound on every valuation.
    pub fn value_max(&self) -> f64 {
        self.value_max
    }

    /// `value_max - value_min`, the worst-case utility swing.
    pub fn range(&self) -> f64 {
        self.value_max - self.value_min
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn domain_size(&self, agent: usize) -> usize {
        self.agents[agent].types.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.agents.iter().map(|a| a.types.len()).collect()
    }

    pub fn type_names(&self, agent: usize) -> &[String] {
        &self.agents[agent].types
    }

    pub fn type_index(&self, agent: usize, name: &str) -> Result<usize, ValuationError> {
        self.agents[agent]
            .types
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| ValuationError::UnknownType { agent, name: name.to_string() })
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn outcome_index(&self, label: &str) -> Result<usize, ValuationError> {
        self.outcomes
            .iter()
            .position(|o| o == label)
            .ok_or_else(|| ValuationError::UnknownOutcome(label.to_string()))
    }

    pub fn value(&self, agent: usize, type_idx: usize, outcome: usize) -> f64 {
        self.agents[agent].values[type_idx][outcome]
    }

    pub fn from_json(text: &str) -> Result<ValuationTable, ValuationError> {
        let file: ValuationFile =
            serde_json::from_str(text).map_err(|e| ValuationError::BadFile(e.to_string()))?;
        file.into_table()
    }

    pub fn to_file(&self) -> ValuationFile {
        ValuationFile {
            value_min: self.value_min,
            value_max: self.value_max,
            outcomes: self.outcomes.clone(),
            agents: self
                .agents
                .iter()
                .map(|a| AgentValuationFile { types: a.types.clone(), values: a.values.clone() })
                .collect(),
        }
    }
}

/// On-disk form: `values[type][outcome]` aligned with `outcomes`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValuationFile {
    pub value_min: f64,
    pub value_max: f64,
    pub outcomes: Vec<String>,
    pub agents: Vec<AgentValuationFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentValuationFile {
    pub types: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ValuationFile {
    pub fn into_table(self) -> Result<ValuationTable, ValuationError> {
        ValuationTable::new(
            self.value_min,
            self.value_max,
            self.outcomes,
            self.agents.into_iter().map(|a| (a.types, a.values)).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("valuation file serializes")
    }
}
