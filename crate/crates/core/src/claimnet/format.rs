use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Category, Claim, ConstraintNetwork, ConstraintSpec, NetworkError, Polarity, Scenario};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    claims: Vec<ClaimRecord>,
    #[serde(default)]
    constraints: Vec<ConstraintRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimRecord {
    id: String,
    label: String,
    category: Category,
    relatedness: String,
    baseline: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintRecord {
    u: String,
    v: String,
    polarity: Polarity,
    #[serde(default = "unit_weight")]
    weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    overrides: BTreeMap<String, f64>,
}

fn syntax(err: serde_json::Error) -> NetworkError {
    NetworkError::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<ConstraintNetwork, NetworkError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(syntax)?;
    let claims = file
        .claims
        .into_iter()
        .map(|c| Claim {
            id: c.id,
            label: c.label,
            category: c.category,
            relatedness: c.relatedness,
            baseline: c.baseline,
        })
        .collect();
    let constraints = file
        .constraints
        .into_iter()
        .map(|c| ConstraintSpec {
            u: c.u,
            v: c.v,
            polarity: c.polarity,
            weight: c.weight,
        })
        .collect();
    ConstraintNetwork::new(claims, constraints)
}

/// Pretty-printed network document; output is a pure function of the network.
pub fn serialize_network(net: &ConstraintNetwork) -> String {
    let file = NetworkFile {
        claims: net
            .claims()
            .iter()
            .map(|c| ClaimRecord {
                id: c.id.clone(),
                label: c.label.clone(),
                category: c.category,
                relatedness: c.relatedness.clone(),
                baseline: c.baseline,
            })
            .collect(),
        constraints: net
            .constraint_specs()
            .into_iter()
            .map(|c| ConstraintRecord {
                u: c.u,
                v: c.v,
                polarity: c.polarity,
                weight: c.weight,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("network serializes");
    out.push('\n');
    out
}

/// Parses a scenario document. Override ids are checked later against a
/// concrete network; values are range-checked here.
pub fn parse_scenario(text: &str) -> Result<Scenario, NetworkError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(syntax)?;
    for (id, &value) in &file.overrides {
        if !super::in_unit_range(value) {
            return Err(NetworkError::OverrideOutOfRange {
                scenario: file.name.clone(),
                id: id.clone(),
                value,
            });
        }
    }
    Ok(Scenario {
        name: file.name,
        description: file.description,
        overrides: file.overrides,
    })
}

pub fn serialize_scenario(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        name: scenario.name.clone(),
        description: scenario.description.clone(),
        overrides: scenario.overrides.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("scenario serializes");
    out.push('\n');
    out
}
