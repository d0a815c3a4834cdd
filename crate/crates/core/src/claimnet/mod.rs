//! Claim constraint networks: claims, weighted positive/negative constraints
//! and scenarios that override initial activations.

mod dot;
mod format;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dot::{export_dot, DotState};
pub use format::{parse_network, parse_scenario, serialize_network, serialize_scenario};

/// Errors raised while building or parsing a network or scenario.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("claim #{index} has an empty id")]
    EmptyId { index: usize },
    #[error("duplicate claim id `{0}`")]
    DuplicateClaim(String),
    #[error("claim `{0}` has no relatedness note")]
    MissingRelatedness(String),
    #[error("claim `{id}` has baseline activation {value} outside [-1, 1]")]
    ActivationOutOfRange { id: String, value: f64 },
    #[error("constraint #{index} references unknown claim `{id}`")]
    DanglingEndpoint { index: usize, id: String },
    #[error("constraint #{index} links claim `{id}` to itself")]
    SelfLoop { index: usize, id: String },
    #[error("constraint #{index} duplicates the pair {{{u}, {v}}}")]
    DuplicatePair { index: usize, u: String, v: String },
    #[error("constraint #{index} ({u}, {v}) has weight {weight}; weights must be finite and > 0")]
    InvalidWeight {
        index: usize,
        u: String,
        v: String,
        weight: f64,
    },
    #[error("scenario `{scenario}` overrides unknown claim `{id}`")]
    UnknownOverride { scenario: String, id: String },
    #[error("scenario `{scenario}` sets claim `{id}` to {value} outside [-1, 1]")]
    OverrideOutOfRange {
        scenario: String,
        id: String,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    InitialResponsibility,
    Fact,
    Moral,
    Analogy,
    Opposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Positive => f.write_str("positive"),
            Polarity::Negative => f.write_str("negative"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub id: String,
    pub label: String,
    pub category: Category,
    /// Why the claim belongs to the domain at all.
    pub relatedness: String,
    pub baseline: f64,
}

/// An undirected constraint between two claims, stored by claim index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub u: usize,
    pub v: usize,
    pub polarity: Polarity,
    pub weight: f64,
}

impl Constraint {
    /// `+weight` for positive constraints, `-weight` for negative ones.
    pub fn signed_weight(&self) -> f64 {
        match self.polarity {
            Polarity::Positive => self.weight,
            Polarity::Negative => -self.weight,
        }
    }

    pub fn other(&self, end: usize) -> usize {
        if end == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Constraint as written by a caller, endpoints named by claim id.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub u: String,
    pub v: String,
    pub polarity: Polarity,
    pub weight: f64,
}

impl ConstraintSpec {
    pub fn positive(u: &str, v: &str) -> Self {
        Self::new(u, v, Polarity::Positive, 1.0)
    }

    pub fn negative(u: &str, v: &str) -> Self {
        Self::new(u, v, Polarity::Negative, 1.0)
    }

    pub fn new(u: &str, v: &str, polarity: Polarity, weight: f64) -> Self {
        ConstraintSpec {
            u: u.to_owned(),
            v: v.to_owned(),
            polarity,
            weight,
        }
    }
}

/// A neighbour of a claim together with the signed weight of the linking constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub claim: usize,
    pub signed_weight: f64,
}

/// A validated, immutable claim constraint network.
///
/// Claim order is the order of construction (file order) and is used for
/// every deterministic tie-break downstream.
#[derive(Debug, Clone)]
pub struct ConstraintNetwork {
    claims: Vec<Claim>,
    constraints: Vec<Constraint>,
    index: HashMap<String, usize>,
    // CSR adjacency: links of claim i are adjacency[offsets[i]..offsets[i + 1]]
    offsets: Vec<usize>,
    adjacency: Vec<Link>,
}

impl PartialEq for ConstraintNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.claims == other.claims && self.constraints == other.constraints
    }
}

impl ConstraintNetwork {
    pub fn new(claims: Vec<Claim>, constraints: Vec<ConstraintSpec>) -> Result<Self, NetworkError> {
        let mut index = HashMap::with_capacity(claims.len());
        for (i, claim) in claims.iter().enumerate() {
            if claim.id.trim().is_empty() {
                return Err(NetworkError::EmptyId { index: i });
            }
            if index.insert(claim.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateClaim(claim.id.clone()));
            }
            if claim.relatedness.trim().is_empty() {
                return Err(NetworkError::MissingRelatedness(claim.id.clone()));
            }
            if !in_unit_range(claim.baseline) {
                return Err(NetworkError::ActivationOutOfRange {
                    id: claim.id.clone(),
                    value: claim.baseline,
                });
            }
        }

        let mut seen = HashMap::with_capacity(constraints.len());
        let mut resolved = Vec::with_capacity(constraints.len());
        for (i, spec) in constraints.into_iter().enumerate() {
            let lookup = |id: &str| {
                index.get(id).copied().ok_or_else(|| NetworkError::DanglingEndpoint {
                    index: i,
                    id: id.to_owned(),
                })
            };
            let u = lookup(&spec.u)?;
            let v = lookup(&spec.v)?;
            if u == v {
                return Err(NetworkError::SelfLoop { index: i, id: spec.u });
            }
            if !(spec.weight.is_finite() && spec.weight > 0.0) {
                return Err(NetworkError::InvalidWeight {
                    index: i,
                    u: spec.u,
                    v: spec.v,
                    weight: spec.weight,
                });
            }
            if seen.insert((u.min(v), u.max(v)), i).is_some() {
                return Err(NetworkError::DuplicatePair {
                    index: i,
                    u: spec.u,
                    v: spec.v,
                });
            }
            resolved.push(Constraint {
                u,
                v,
                polarity: spec.polarity,
                weight: spec.weight,
            });
        }

        let mut degree = vec![0usize; claims.len()];
        for c in &resolved {
            degree[c.u] += 1;
            degree[c.v] += 1;
        }
        let mut offsets = Vec::with_capacity(claims.len() + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..claims.len()].to_vec();
        let mut adjacency = vec![
            Link {
                claim: 0,
                signed_weight: 0.0
            };
            offsets[claims.len()]
        ];
        for c in &resolved {
            let w = c.signed_weight();
            adjacency[fill[c.u]] = Link { claim: c.v, signed_weight: w };
            fill[c.u] += 1;
            adjacency[fill[c.v]] = Link { claim: c.u, signed_weight: w };
            fill[c.v] += 1;
        }

        Ok(ConstraintNetwork {
            claims,
            constraints: resolved,
            index,
            offsets,
            adjacency,
        })
    }

    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.claims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.index_of(id).map(|i| &self.claims[i])
    }

    pub fn id(&self, index: usize) -> &str {
        &self.claims[index].id
    }

    /// Constraints incident to claim `index`, as (neighbour, signed weight).
    pub fn links(&self, index: usize) -> &[Link] {
        &self.adjacency[self.offsets[index]..self.offsets[index + 1]]
    }

    pub fn positive_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.polarity == Polarity::Positive)
            .count()
    }

    pub fn negative_count(&self) -> usize {
        self.constraints.len() - self.positive_count()
    }

    /// Sum of all constraint weights.
    pub fn total_weight(&self) -> f64 {
        self.constraints.iter().map(|c| c.weight).sum()
    }

    pub fn baseline(&self) -> Vec<f64> {
        self.claims.iter().map(|c| c.baseline).collect()
    }

    /// Constraint specs with endpoints named by id, in storage order.
    pub fn constraint_specs(&self) -> Vec<ConstraintSpec> {
        self.constraints
            .iter()
            .map(|c| ConstraintSpec {
                u: self.claims[c.u].id.clone(),
                v: self.claims[c.v].id.clone(),
                polarity: c.polarity,
                weight: c.weight,
            })
            .collect()
    }
}

/// A named set of initial activation overrides.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub overrides: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn new(name: &str, description: &str, overrides: &[(&str, f64)]) -> Self {
        Scenario {
            name: name.to_owned(),
            description: description.to_owned(),
            overrides: overrides.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect(),
        }
    }

    pub fn validate(&self, net: &ConstraintNetwork) -> Result<(), NetworkError> {
        for (id, &value) in &self.overrides {
            if net.index_of(id).is_none() {
                return Err(NetworkError::UnknownOverride {
                    scenario: self.name.clone(),
                    id: id.clone(),
                });
            }
            if !in_unit_range(value) {
                return Err(NetworkError::OverrideOutOfRange {
                    scenario: self.name.clone(),
                    id: id.clone(),
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Initial activation vector (network claim order) for a scenario: the
/// baseline with the scenario's overrides applied.
pub fn apply_scenario(net: &ConstraintNetwork, scenario: &Scenario) -> Result<Vec<f64>, NetworkError> {
    scenario.validate(net)?;
    let mut activations = net.baseline();
    for (id, &value) in &scenario.overrides {
        // validated above
        activations[net.index_of(id).unwrap()] = value;
    }
    Ok(activations)
}

pub(crate) fn in_unit_range(x: f64) -> bool {
    (-1.0..=1.0).contains(&x)
}
