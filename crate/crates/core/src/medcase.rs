//! AI medical decision-support fixture: 30 claims about who is responsible
//! when a doctor follows an AI diagnosis that leads to a wrong treatment, and
//! three scenarios that shift the initial activations.
//!
//! The constraint edges are a documented reconstruction (see
//! `fixtures/medcase/README.md`); expected outcomes cover only claims whose
//! status the case narratives state explicitly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claimnet::{apply_scenario, parse_network, parse_scenario, ConstraintNetwork, NetworkError, Scenario};
use crate::coherence::{solve_exact, CoherenceError, ExactBudget, Partition};
use crate::dynamics::{run, DynamicsError, SolverConfig};
use crate::par::Parallelism;
use crate::report::Engine;

pub const NETWORK_FILE: &str = "network.json";
pub const NETWORK_JSON: &str = include_str!("../../../fixtures/medcase/network.json");
const CASE_JSON: [&str; 3] = [
    include_str!("../../../fixtures/medcase/case1.json"),
    include_str!("../../../fixtures/medcase/case2.json"),
    include_str!("../../../fixtures/medcase/case3.json"),
];

#[derive(Debug, Error)]
pub enum MedcaseError {
    #[error("no case {0}; cases are 1, 2 and 3")]
    InvalidCase(u8),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Exact(#[from] CoherenceError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseDefinition {
    pub number: u8,
    pub scenario: Scenario,
    pub expected_accepted: Vec<&'static str>,
    pub expected_rejected: Vec<&'static str>,
    /// Why each expectation holds, keyed by claim id.
    pub narrative: Vec<(&'static str, &'static str)>,
}

/// The bundled network.
pub fn fixture_network() -> ConstraintNetwork {
    parse_network(NETWORK_JSON).expect("bundled medcase network is valid")
}

pub fn case_file_name(n: u8) -> String {
    format!("case{n}.json")
}

/// Network from `dir/network.json`.
pub fn load_network(dir: &Path) -> Result<ConstraintNetwork, MedcaseError> {
    Ok(parse_network(&read(&dir.join(NETWORK_FILE))?)?)
}

fn read(path: &Path) -> Result<String, MedcaseError> {
    fs::read_to_string(path).map_err(|source| MedcaseError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Case with its bundled scenario.
pub fn case(n: u8) -> Result<CaseDefinition, MedcaseError> {
    let text = CASE_JSON
        .get(usize::from(n).wrapping_sub(1))
        .ok_or(MedcaseError::InvalidCase(n))?;
    with_scenario(n, parse_scenario(text)?)
}

/// Case with its scenario read from `dir/case<n>.json`.
pub fn load_case(dir: &Path, n: u8) -> Result<CaseDefinition, MedcaseError> {
    if !(1..=3).contains(&n) {
        return Err(MedcaseError::InvalidCase(n));
    }
    let scenario = parse_scenario(&read(&dir.join(case_file_name(n)))?)?;
    with_scenario(n, scenario)
}

fn with_scenario(n: u8, scenario: Scenario) -> Result<CaseDefinition, MedcaseError> {
    let (expected_accepted, expected_rejected, narrative): (Vec<_>, Vec<_>, Vec<_>) = match n {
        1 => (
            vec!["AIDR", "DR", "AINM"],
            vec!["AIDNR", "AIR", "NR", "AIM"],
            vec![
                ("AIDR", "evidence of a design error makes the developer responsible"),
                ("AIDNR", "the opposing claim that the developer is not responsible is rejected"),
                ("DR", "analogies and ethical concerns keep the doctor sharing responsibility"),
                ("AIM", "society is initialized against AI being a moral agent"),
                ("AINM", "society is initialized toward AI not being a moral agent"),
                ("AIR", "the AI system itself is not attributed responsibility"),
                ("NR", "accountability goes to individuals rather than society bearing the loss"),
            ],
        ),
        2 => (
            vec!["DR", "UBER", "PRAC"],
            vec!["AIDR", "AIR", "NR"],
            vec![
                ("DR", "proven operational malpractice makes the doctor responsible"),
                ("UBER", "the autonomous-vehicle analogy blames the operator, not the developer"),
                ("PRAC", "in traditional medical practice the doctor answers for malpractice"),
                ("AIDR", "only the doctor is held responsible"),
                ("AIR", "only the doctor is held responsible"),
                ("NR", "only the doctor is held responsible"),
            ],
        ),
        3 => (
            vec!["NR", "SET", "FIND"],
            vec!["DR", "AIDR", "AIR"],
            vec![
                ("NR", "no individual is held responsible; the loss is shared"),
                ("SET", "society sets up compensation funds"),
                ("FIND", "belief that an individual culprit cannot be pinned down"),
                ("DR", "no individual is held responsible"),
                ("AIDR", "no individual is held responsible"),
                ("AIR", "no individual is held responsible"),
            ],
        ),
        _ => return Err(MedcaseError::InvalidCase(n)),
    };
    Ok(CaseDefinition {
        number: n,
        scenario,
        expected_accepted,
        expected_rejected,
        narrative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Status>,
    pub actual: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub why: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: u8,
    pub scenario: String,
    pub engine: Engine,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub matched: bool,
    pub mismatches: Vec<String>,
    pub rows: Vec<CaseRow>,
    pub solver: SolverConfig,
}

impl CaseReport {
    /// All expectations hold and, for harmony runs, the dynamics converged.
    pub fn ok(&self) -> bool {
        self.matched && self.converged != Some(false)
    }
}

/// Applies the case scenario to `net`, solves, and diffs the outcome against
/// the case expectations. Claims without an expectation are reported as-is.
pub fn run_case(
    net: &ConstraintNetwork,
    case: &CaseDefinition,
    engine: Engine,
    config: &SolverConfig,
    budget: &ExactBudget,
) -> Result<CaseReport, MedcaseError> {
    let initial = apply_scenario(net, &case.scenario)?;
    let (partition, activations, converged, iterations) = match engine {
        Engine::Harmony => {
            let r = run(net, &initial, config)?;
            (r.partition, Some(r.final_state.values), Some(r.converged), Some(r.iterations))
        }
        Engine::Exact => {
            let s = solve_exact(net, budget, Parallelism::default())?;
            (s.partition, None, None, None)
        }
    };
    Ok(diff(net, case, engine, &partition, activations, converged, iterations, config))
}

#[allow(clippy::too_many_arguments)]
fn diff(
    net: &ConstraintNetwork,
    case: &CaseDefinition,
    engine: Engine,
    partition: &Partition,
    activations: Option<Vec<f64>>,
    converged: Option<bool>,
    iterations: Option<usize>,
    config: &SolverConfig,
) -> CaseReport {
    let mut rows = Vec::with_capacity(net.len());
    let mut mismatches = Vec::new();
    for (i, claim) in net.claims().iter().enumerate() {
        let id = claim.id.as_str();
        let expected = if case.expected_accepted.contains(&id) {
            Some(Status::Accepted)
        } else if case.expected_rejected.contains(&id) {
            Some(Status::Rejected)
        } else {
            None
        };
        let actual = if partition.is_accepted(i) {
            Status::Accepted
        } else {
            Status::Rejected
        };
        let matched = expected.map(|e| e == actual);
        if matched == Some(false) {
            mismatches.push(id.to_owned());
        }
        rows.push(CaseRow {
            id: id.to_owned(),
            expected,
            actual,
            activation: activations.as_ref().map(|a| a[i]),
            matched,
            why: case
                .narrative
                .iter()
                .find(|(c, _)| *c == id)
                .map(|(_, why)| (*why).to_owned()),
        });
    }
    CaseReport {
        case: case.number,
        scenario: case.scenario.name.clone(),
        engine,
        converged,
        iterations,
        matched: mismatches.is_empty(),
        mismatches,
        rows,
        solver: *config,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baselines_match_table() {
        let net = fixture_network();
        let table = [
            ("AGS", 0.2),
            ("AGNS", 0.1),
            ("AIDR", 0.01),
            ("AIDNR", -0.01),
            ("DR", 0.01),
            ("DNR", -0.01),
            ("AIR", -0.2),
            ("AINR", 0.1),
            ("NR", -0.2),
            ("DE", 0.1),
            ("OM", 0.01),
            ("DJW", 0.2),
            ("SLOW", 0.01),
            ("UT", 0.01),
            ("UNFAIR", 0.01),
            ("INFO", 0.3),
            ("BETTER", 0.3),
            ("OIC", 0.01),
            ("PRO", 0.5),
            ("NON", 0.7),
            ("OWN", 0.01),
            ("RIGHT", 0.3),
            ("AIM", -0.3),
            ("ATT", 0.0),
            ("AINM", 0.3),
            ("LACK", 0.5),
            ("SET", -0.2),
            ("FIND", 0.0),
            ("UBER", 0.3),
            ("PRAC", 0.6),
        ];
        assert_eq!(net.len(), 30);
        for (i, (id, baseline)) in table.iter().enumerate() {
            let c = &net.claims()[i];
            assert_eq!(c.id, *id);
            assert_eq!(c.baseline, *baseline, "{id}");
        }
    }

    #[test]
    fn all_weights_are_one() {
        let net = fixture_network();
        assert!(net.constraints().iter().all(|c| c.weight == 1.0));
        assert!((0..net.len()).all(|i| !net.links(i).is_empty()), "no isolated claims");
    }

    #[test]
    fn scenario_overrides_match_cases() {
        let overrides = |n| case(n).unwrap().scenario.overrides;
        let c1 = overrides(1);
        assert_eq!((c1.len(), c1["DE"], c1["AIM"], c1["AINM"]), (3, 0.8, -0.3, 0.3));
        let c2 = overrides(2);
        assert_eq!((c2.len(), c2["OM"], c2["DJW"]), (2, 0.6, 0.2));
        let c3 = overrides(3);
        assert_eq!((c3.len(), c3["SET"], c3["FIND"]), (2, 0.8, 0.8));
    }

    #[test]
    fn case_one_initial_vector() {
        let net = fixture_network();
        let a = apply_scenario(&net, &case(1).unwrap().scenario).unwrap();
        assert_eq!(a[net.index_of("DE").unwrap()], 0.8);
        assert_eq!(a[net.index_of("AGS").unwrap()], 0.2);
        let a = apply_scenario(&net, &case(2).unwrap().scenario).unwrap();
        assert_eq!(a[net.index_of("OM").unwrap()], 0.6);
        assert_eq!(a[net.index_of("PRAC").unwrap()], 0.6);
    }

    #[test]
    fn expectations_are_disjoint_and_known() {
        let net = fixture_network();
        for n in 1..=3 {
            let c = case(n).unwrap();
            for id in c.expected_accepted.iter().chain(&c.expected_rejected) {
                assert!(net.index_of(id).is_some(), "{id}");
            }
            assert!(c.expected_accepted.iter().all(|id| !c.expected_rejected.contains(id)));
        }
        assert!(matches!(case(0), Err(MedcaseError::InvalidCase(0))));
        assert!(matches!(case(4), Err(MedcaseError::InvalidCase(4))));
    }

    #[test]
    fn exact_engine_exceeds_budget_on_full_fixture() {
        let net = fixture_network();
        let err = run_case(
            &net,
            &case(2).unwrap(),
            Engine::Exact,
            &SolverConfig::default(),
            &ExactBudget::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            MedcaseError::Exact(CoherenceError::BudgetExceeded { claims: 30, limit: 20 })
        ));
    }
}
