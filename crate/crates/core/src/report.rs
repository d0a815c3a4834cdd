//! JSON reports. Field order and number formatting are fixed so repeated runs
//! over the same inputs produce identical bytes (timing fields aside).

use serde::{Deserialize, Serialize};

use crate::claimnet::ConstraintNetwork;
use crate::coherence::{coherence_weight, ExactSolution};
use crate::dynamics::{EquilibriumResult, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Harmony,
    Exact,
}

/// Resolved inputs of a run, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub network: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub engine: Engine,
    pub solver: SolverConfig,
    pub budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_limit_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dot: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimActivation {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub weight: f64,
    pub accepted: Vec<String>,
    pub rejected: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optima_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmony: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub activations: Vec<ClaimActivation>,
    /// Claims that ended within `10 * epsilon` of the acceptance threshold.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub near_threshold: Vec<String>,
    /// Set when several partitions share the optimum and the tie-break chose one.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub tie_broken: bool,
    pub manifest: RunManifest,
}

fn owned(ids: Vec<&str>) -> Vec<String> {
    ids.into_iter().map(str::to_owned).collect()
}

impl SolveReport {
    pub fn from_exact(net: &ConstraintNetwork, s: &ExactSolution, manifest: RunManifest) -> Self {
        SolveReport {
            weight: s.weight,
            accepted: owned(s.partition.accepted_ids(net)),
            rejected: owned(s.partition.rejected_ids(net)),
            optima_count: Some(s.optima_count),
            enumerated: Some(s.enumerated),
            elapsed_ms: Some(s.elapsed.as_secs_f64() * 1e3),
            converged: None,
            iterations: None,
            harmony: None,
            activations: Vec::new(),
            near_threshold: Vec::new(),
            tie_broken: s.optima_count > 1,
            manifest,
        }
    }

    pub fn from_equilibrium(net: &ConstraintNetwork, r: &EquilibriumResult, manifest: RunManifest) -> Self {
        SolveReport {
            weight: coherence_weight(net, &r.partition).expect("partition built from this network"),
            accepted: owned(r.accepted_ids(net)),
            rejected: owned(r.rejected_ids(net)),
            optima_count: None,
            enumerated: None,
            elapsed_ms: None,
            converged: Some(r.converged),
            iterations: Some(r.iterations),
            harmony: r.harmony_trace.last().copied(),
            activations: net
                .claims()
                .iter()
                .zip(&r.final_state.values)
                .map(|(c, &value)| ClaimActivation {
                    id: c.id.clone(),
                    value,
                })
                .collect(),
            near_threshold: r.near_threshold.iter().map(|&i| net.id(i).to_owned()).collect(),
            tie_broken: false,
            manifest,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serializes");
    out.push('\n');
    out
}
