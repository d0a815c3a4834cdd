//! Connectionist approximation of coherence: synchronous decay-plus-net-input
//! activation updates run to a fixed point, then thresholded at zero.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claimnet::ConstraintNetwork;
use crate::coherence::{harmony_unchecked, Partition};
use crate::par::{map_indexed, Parallelism};

/// Claims strictly above this activation at equilibrium are accepted.
pub const ACCEPTANCE_THRESHOLD: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("initial vector has {got} entries but the network has {expected} claims")]
    InitialLength { expected: usize, got: usize },
    #[error("initial activation of `{id}` is {value}, outside [-1, 1]")]
    InitialOutOfRange { id: String, value: f64 },
    #[error("unknown claim `{0}`")]
    UnknownClaim(String),
}

/// Which activation the net input multiplies each signed weight by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetInputRule {
    /// `net_u = sum_v ŵ(v, u) a(v)`: the neighbour's activation.
    #[default]
    Neighbor,
    /// `net_u = sum_v ŵ(v, u) a(u)`: the claim's own activation. Kept for
    /// comparison runs only.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Decay per iteration, in (0, 1).
    pub gamma: f64,
    /// Activation ceiling `M`.
    pub ceiling: f64,
    /// Activation floor.
    pub floor: f64,
    /// Convergence tolerance on the max-norm of the per-iteration change.
    pub epsilon: f64,
    /// Consecutive sub-epsilon iterations required to declare convergence.
    pub stable_window: usize,
    pub max_iters: usize,
    pub net_input: NetInputRule,
    /// Keep a copy of every iteration's activations (needed for CSV traces).
    #[serde(default)]
    pub record_activations: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gamma: 0.05,
            ceiling: 1.0,
            floor: -1.0,
            epsilon: 1e-6,
            stable_window: 5,
            max_iters: 1000,
            net_input: NetInputRule::Neighbor,
            record_activations: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidConfig(msg));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.floor < 0.0 && 0.0 < self.ceiling && self.ceiling.is_finite() && self.floor.is_finite()) {
            return bad(format!(
                "need floor < 0 < ceiling, got floor {} and ceiling {}",
                self.floor, self.ceiling
            ));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.stable_window == 0 {
            return bad("stable_window must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationState {
    pub iteration: usize,
    /// Activations in network claim order.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub final_state: ActivationState,
    pub partition: Partition,
    pub converged: bool,
    pub iterations: usize,
    /// Harmony of every state from the initial one to the final one.
    pub harmony_trace: Vec<f64>,
    /// Every state from the initial one to the final one, when recorded.
    pub activation_trace: Option<Vec<Vec<f64>>>,
    /// Claims whose final activation is within `10 * epsilon` of the threshold.
    pub near_threshold: Vec<usize>,
}

impl EquilibriumResult {
    pub fn accepted_ids<'a>(&self, net: &'a ConstraintNetwork) -> Vec<&'a str> {
        self.partition.accepted_ids(net)
    }

    pub fn rejected_ids<'a>(&self, net: &'a ConstraintNetwork) -> Vec<&'a str> {
        self.partition.rejected_ids(net)
    }
}

fn net_input_at(net: &ConstraintNetwork, values: &[f64], u: usize, rule: NetInputRule) -> f64 {
    let links = net.links(u);
    match rule {
        NetInputRule::Neighbor => links.iter().map(|l| l.signed_weight * values[l.claim]).sum(),
        NetInputRule::Literal => values[u] * links.iter().map(|l| l.signed_weight).sum::<f64>(),
    }
}

/// Net input to `claim` from its incident constraints.
pub fn net_input(net: &ConstraintNetwork, values: &[f64], claim: &str, rule: NetInputRule) -> Result<f64, DynamicsError> {
    let u = net
        .index_of(claim)
        .ok_or_else(|| DynamicsError::UnknownClaim(claim.to_owned()))?;
    Ok(net_input_at(net, values, u, rule))
}

fn update(a: f64, net_in: f64, config: &SolverConfig) -> f64 {
    let next = if net_in > 0.0 {
        a * (1.0 - config.gamma) + net_in * (config.ceiling - a)
    } else {
        a * (1.0 - config.gamma) + net_in * (a - config.floor)
    };
    next.clamp(config.floor, config.ceiling)
}

fn step_into(net: &ConstraintNetwork, current: &[f64], next: &mut [f64], config: &SolverConfig) {
    for (u, slot) in next.iter_mut().enumerate() {
        *slot = update(current[u], net_input_at(net, current, u, config.net_input), config);
    }
}

/// One synchronous round: every claim is updated from the iteration-`t` values.
pub fn step(net: &ConstraintNetwork, state: &ActivationState, config: &SolverConfig) -> ActivationState {
    let mut values = vec![0.0; state.values.len()];
    step_into(net, &state.values, &mut values, config);
    ActivationState {
        iteration: state.iteration + 1,
        values,
    }
}

/// Iterates [`step`] until the largest per-claim change stays below
/// `epsilon` for `stable_window` consecutive rounds, or `max_iters` rounds
/// have run. Non-convergence is reported, not raised.
pub fn run(net: &ConstraintNetwork, initial: &[f64], config: &SolverConfig) -> Result<EquilibriumResult, DynamicsError> {
    config.validate()?;
    if initial.len() != net.len() {
        return Err(DynamicsError::InitialLength {
            expected: net.len(),
            got: initial.len(),
        });
    }
    if let Some((i, &value)) = initial.iter().enumerate().find(|(_, x)| !(-1.0..=1.0).contains(*x)) {
        return Err(DynamicsError::InitialOutOfRange {
            id: net.id(i).to_owned(),
            value,
        });
    }

    let mut current = initial.to_vec();
    let mut next = vec![0.0; current.len()];
    let mut harmony_trace = vec![harmony_unchecked(net, &current)];
    let mut activation_trace = config.record_activations.then(|| vec![current.clone()]);
    let mut streak = 0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iters {
        step_into(net, &current, &mut next, config);
        let change = current
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut current, &mut next);
        iterations += 1;
        harmony_trace.push(harmony_unchecked(net, &current));
        if let Some(trace) = activation_trace.as_mut() {
            trace.push(current.clone());
        }
        streak = if change < config.epsilon { streak + 1 } else { 0 };
        if streak >= config.stable_window {
            converged = true;
            break;
        }
    }

    let near = 10.0 * config.epsilon;
    let near_threshold = current
        .iter()
        .enumerate()
        .filter(|(_, a)| (*a - ACCEPTANCE_THRESHOLD).abs() < near)
        .map(|(i, _)| i)
        .collect();
    Ok(EquilibriumResult {
        partition: Partition::from_activations(&current),
        final_state: ActivationState {
            iteration: iterations,
            values: current,
        },
        converged,
        iterations,
        harmony_trace,
        activation_trace,
        near_threshold,
    })
}

/// Runs several initial vectors over the same network; results keep input order.
pub fn run_batch(
    net: &ConstraintNetwork,
    initials: &[Vec<f64>],
    config: &SolverConfig,
    policy: Parallelism,
) -> Vec<Result<EquilibriumResult, DynamicsError>> {
    map_indexed(policy, initials.len(), |i| run(net, &initials[i], config))
}

/// Claims with final activation strictly above zero.
pub fn accepted_claims<'a>(net: &'a ConstraintNetwork, result: &EquilibriumResult) -> Vec<&'a str> {
    result.accepted_ids(net)
}

/// CSV trace with header `iter,<claim ids...>,harmony`, one row per state.
/// Returns `None` when the run did not record activations.
pub fn trace_csv(net: &ConstraintNetwork, result: &EquilibriumResult) -> Option<String> {
    let trace = result.activation_trace.as_ref()?;
    let mut out = String::from("iter");
    for c in net.claims() {
        out.push(',');
        out.push_str(&c.id);
    }
    out.push_str(",harmony\n");
    for (t, (values, h)) in trace.iter().zip(&result.harmony_trace).enumerate() {
        write!(out, "{t}").unwrap();
        for v in values {
            write!(out, ",{v}").unwrap();
        }
        writeln!(out, ",{h}").unwrap();
    }
    Some(out)
}
