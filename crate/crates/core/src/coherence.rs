//! Exact coherence maximization and harmony evaluation.
//!
//! Coherence weight `W(A, R)` sums the weights of satisfied constraints: a
//! positive constraint is satisfied when both endpoints fall on the same side,
//! a negative one when they fall on opposite sides. Harmony over an activation
//! vector counts each constraint once: `H(a) = sum ŵ(u, v) a(u) a(v)`. At any
//! ±1 vertex assignment `H = 2W - sum w`, so both objectives share maximizers.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::claimnet::{in_unit_range, Constraint, ConstraintNetwork, Polarity};
use crate::par::{map_indexed, Parallelism};

/// Largest network the exhaustive solvers will ever enumerate.
pub const HARD_CLAIM_CAP: usize = 26;
pub const DEFAULT_CLAIM_BUDGET: usize = 20;

// Claims fixed per enumeration chunk (the first claims in network order).
const PREFIX_CLAIMS: usize = 6;
const DEADLINE_CHECK_MASK: u64 = (1 << 16) - 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoherenceError {
    #[error("partition covers {got} claims but the network has {expected}")]
    PartitionSize { expected: usize, got: usize },
    #[error("unknown claim `{0}` in partition")]
    UnknownClaim(String),
    #[error("claim `{0}` is both accepted and rejected")]
    ClaimInBothSets(String),
    #[error("claim `{0}` is neither accepted nor rejected")]
    ClaimNotCovered(String),
    #[error("activation vector has {got} entries but the network has {expected} claims")]
    ActivationLength { expected: usize, got: usize },
    #[error("activation of claim #{index} is {value}, outside [-1, 1]")]
    ActivationOutOfRange { index: usize, value: f64 },
    #[error("network has {claims} claims, exact budget allows at most {limit}")]
    BudgetExceeded { claims: usize, limit: usize },
    #[error("exact enumeration timed out after {0:?}")]
    TimedOut(Duration),
}

/// Split of the claims into accepted and rejected sets, held as one flag per
/// claim in network order so `A ∪ R = V` and `A ∩ R = ∅` hold by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    accepted: Vec<bool>,
}

impl Partition {
    pub fn from_flags(accepted: Vec<bool>) -> Self {
        Partition { accepted }
    }

    /// Builds a partition from explicit id sets; they must cover every claim exactly once.
    pub fn from_ids(net: &ConstraintNetwork, accepted: &[&str], rejected: &[&str]) -> Result<Self, CoherenceError> {
        let mut seen: Vec<Option<bool>> = vec![None; net.len()];
        for (ids, side) in [(accepted, true), (rejected, false)] {
            for id in ids {
                let i = net
                    .index_of(id)
                    .ok_or_else(|| CoherenceError::UnknownClaim((*id).to_owned()))?;
                if seen[i].replace(side).is_some() {
                    return Err(CoherenceError::ClaimInBothSets((*id).to_owned()));
                }
            }
        }
        let flags = seen
            .iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| CoherenceError::ClaimNotCovered(net.id(i).to_owned())))
            .collect::<Result<_, _>>()?;
        Ok(Partition { accepted: flags })
    }

    /// Claims with strictly positive activation are accepted.
    pub fn from_activations(a: &[f64]) -> Self {
        Partition {
            accepted: a.iter().map(|&x| x > 0.0).collect(),
        }
    }

    pub fn flags(&self) -> &[bool] {
        &self.accepted
    }

    pub fn is_accepted(&self, index: usize) -> bool {
        self.accepted[index]
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn accepted_ids<'a>(&self, net: &'a ConstraintNetwork) -> Vec<&'a str> {
        self.ids_where(net, true)
    }

    pub fn rejected_ids<'a>(&self, net: &'a ConstraintNetwork) -> Vec<&'a str> {
        self.ids_where(net, false)
    }

    fn ids_where<'a>(&self, net: &'a ConstraintNetwork, side: bool) -> Vec<&'a str> {
        self.accepted
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == side)
            .map(|(i, _)| net.id(i))
            .collect()
    }

    /// ±1 activation vector (+1 accepted).
    pub fn to_vertex(&self) -> Vec<f64> {
        self.accepted.iter().map(|&a| if a { 1.0 } else { -1.0 }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub partition: Partition,
    /// Optimal coherence weight.
    pub weight: f64,
    /// Number of assignments attaining the optimum.
    pub optima_count: u64,
    /// Number of assignments examined.
    pub enumerated: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactBudget {
    pub max_claims: usize,
    pub time_limit: Option<Duration>,
}

impl Default for ExactBudget {
    fn default() -> Self {
        ExactBudget {
            max_claims: DEFAULT_CLAIM_BUDGET,
            time_limit: None,
        }
    }
}

impl ExactBudget {
    fn check(&self, net: &ConstraintNetwork) -> Result<(), CoherenceError> {
        let limit = self.max_claims.min(HARD_CLAIM_CAP);
        if net.len() > limit {
            return Err(CoherenceError::BudgetExceeded {
                claims: net.len(),
                limit,
            });
        }
        Ok(())
    }
}

pub fn signed_weight(c: &Constraint) -> f64 {
    c.signed_weight()
}

fn satisfied(c: &Constraint, u_accepted: bool, v_accepted: bool) -> bool {
    match c.polarity {
        Polarity::Positive => u_accepted == v_accepted,
        Polarity::Negative => u_accepted != v_accepted,
    }
}

pub fn coherence_weight(net: &ConstraintNetwork, partition: &Partition) -> Result<f64, CoherenceError> {
    if partition.len() != net.len() {
        return Err(CoherenceError::PartitionSize {
            expected: net.len(),
            got: partition.len(),
        });
    }
    Ok(weight_of_flags(net, partition.flags()))
}

fn weight_of_flags(net: &ConstraintNetwork, flags: &[bool]) -> f64 {
    net.constraints()
        .iter()
        .filter(|c| satisfied(c, flags[c.u], flags[c.v]))
        .map(|c| c.weight)
        .sum()
}

pub fn harmony(net: &ConstraintNetwork, a: &[f64]) -> Result<f64, CoherenceError> {
    if a.len() != net.len() {
        return Err(CoherenceError::ActivationLength {
            expected: net.len(),
            got: a.len(),
        });
    }
    if let Some((index, &value)) = a.iter().enumerate().find(|(_, x)| !in_unit_range(**x)) {
        return Err(CoherenceError::ActivationOutOfRange { index, value });
    }
    Ok(harmony_unchecked(net, a))
}

pub(crate) fn harmony_unchecked(net: &ConstraintNetwork, a: &[f64]) -> f64 {
    net.constraints()
        .iter()
        .map(|c| c.signed_weight() * a[c.u] * a[c.v])
        .sum()
}

fn tie_tolerance(net: &ConstraintNetwork) -> f64 {
    1e-9 * net.total_weight().max(1.0)
}

/// Best value seen within one enumeration chunk.
#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    mask: u64,
    count: u64,
}

impl Best {
    fn empty() -> Self {
        Best {
            value: f64::NEG_INFINITY,
            mask: 0,
            count: 0,
        }
    }

    fn offer(&mut self, value: f64, mask: u64, tol: f64) {
        self.merge(Best { value, mask, count: 1 }, tol);
    }

    fn merge(&mut self, other: Best, tol: f64) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 || other.value > self.value + tol {
            *self = other;
        } else if other.value >= self.value - tol {
            self.count += other.count;
            if accepted_set_order(other.mask, self.mask) == Ordering::Less {
                self.mask = other.mask;
            }
        }
    }
}

// Claim i is stored at bit (n - 1 - i): the first claim in network order is
// the most significant bit.
fn bit_of(n: usize, claim: usize) -> u32 {
    (n - 1 - claim) as u32
}

/// Tie-break order on accepted sets: compare the ascending lists of accepted
/// claim positions lexicographically, the empty set first.
fn accepted_set_order(mut a: u64, mut b: u64) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            (false, false) => {
                let (ta, tb) = (63 - a.leading_zeros(), 63 - b.leading_zeros());
                if ta != tb {
                    // higher bit = earlier claim = smaller element
                    return if ta > tb { Ordering::Less } else { Ordering::Greater };
                }
                a ^= 1 << ta;
                b ^= 1 << tb;
            }
        }
    }
}

fn flags_of(n: usize, mask: u64) -> Vec<bool> {
    (0..n).map(|i| mask >> bit_of(n, i) & 1 == 1).collect()
}

struct Layout {
    n: usize,
    prefix: usize,
    low: usize,
}

impl Layout {
    fn new(n: usize) -> Self {
        let prefix = n.min(PREFIX_CLAIMS);
        Layout { n, prefix, low: n - prefix }
    }

    fn chunks(&self) -> usize {
        1 << self.prefix
    }

    fn chunk_base(&self, chunk: usize) -> u64 {
        (chunk as u64) << self.low
    }
}

fn deadline_of(start: Instant, budget: &ExactBudget) -> Option<Instant> {
    budget.time_limit.map(|t| start + t)
}

fn timed_out(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Exhaustive maximization of coherence weight.
///
/// Assignments are walked in Gray-code order inside each chunk so every step
/// flips one claim and updates `W` through that claim's incident constraints
/// only. Among equally good partitions the one whose accepted claims, listed
/// in network order, are lexicographically smallest is returned (so the empty
/// set beats everything and `{first}` beats `{second}`).
pub fn solve_exact(
    net: &ConstraintNetwork,
    budget: &ExactBudget,
    policy: Parallelism,
) -> Result<ExactSolution, CoherenceError> {
    let verify_every = if cfg!(debug_assertions) { Some(1024) } else { None };
    solve_exact_checked(net, budget, policy, verify_every)
}

pub(crate) fn solve_exact_checked(
    net: &ConstraintNetwork,
    budget: &ExactBudget,
    policy: Parallelism,
    verify_every: Option<u64>,
) -> Result<ExactSolution, CoherenceError> {
    budget.check(net)?;
    let start = Instant::now();
    let deadline = deadline_of(start, budget);
    let layout = Layout::new(net.len());
    let tol = tie_tolerance(net);

    let chunks = map_indexed(policy, layout.chunks(), |chunk| {
        gray_chunk(net, &layout, chunk, tol, deadline, verify_every)
    });
    let best = merge_chunks(chunks, tol, start)?;
    finish(net, &layout, best, start)
}

fn gray_chunk(
    net: &ConstraintNetwork,
    layout: &Layout,
    chunk: usize,
    tol: f64,
    deadline: Option<Instant>,
    verify_every: Option<u64>,
) -> Result<Best, CoherenceError> {
    if timed_out(deadline) {
        return Err(CoherenceError::TimedOut(Duration::ZERO));
    }
    let n = layout.n;
    let mut mask = layout.chunk_base(chunk);
    let mut flags = flags_of(n, mask);
    let mut w = weight_of_flags(net, &flags);
    let mut best = Best::empty();
    best.offer(w, mask, tol);

    let steps = 1u64 << layout.low;
    for j in 1..steps {
        if j & DEADLINE_CHECK_MASK == 0 && timed_out(deadline) {
            return Err(CoherenceError::TimedOut(Duration::ZERO));
        }
        let bit = j.trailing_zeros() as usize;
        let claim = n - 1 - bit;
        let side = flags[claim];
        for link in net.links(claim) {
            let same = side == flags[link.claim];
            let wants_same = link.signed_weight > 0.0;
            let weight = link.signed_weight.abs();
            // every incident constraint toggles between satisfied and violated
            if same == wants_same {
                w -= weight;
            } else {
                w += weight;
            }
        }
        flags[claim] = !side;
        mask ^= 1 << bit;
        if let Some(every) = verify_every {
            if j % every == 0 {
                let full = weight_of_flags(net, &flags);
                assert!(
                    (full - w).abs() <= tol,
                    "incremental weight {w} drifted from full recompute {full}"
                );
            }
        }
        best.offer(w, mask, tol);
    }
    Ok(best)
}

fn merge_chunks(chunks: Vec<Result<Best, CoherenceError>>, tol: f64, start: Instant) -> Result<Best, CoherenceError> {
    let mut best = Best::empty();
    for chunk in chunks {
        match chunk {
            Ok(c) => best.merge(c, tol),
            Err(CoherenceError::TimedOut(_)) => return Err(CoherenceError::TimedOut(start.elapsed())),
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

fn finish(net: &ConstraintNetwork, layout: &Layout, best: Best, start: Instant) -> Result<ExactSolution, CoherenceError> {
    let partition = Partition::from_flags(flags_of(layout.n, best.mask));
    let weight = weight_of_flags(net, partition.flags());
    Ok(ExactSolution {
        partition,
        weight,
        optima_count: best.count,
        enumerated: 1u64 << layout.n,
        elapsed: start.elapsed(),
    })
}

/// Exhaustive maximization of harmony over ±1 activations (+1 = accepted).
///
/// Evaluates `H` from scratch at every vertex, which makes it an independent check on [`solve_exact`]: both must return the same
/// partition under the same tie-break.
pub fn vertex_harmony_argmax(
    net: &ConstraintNetwork,
    budget: &ExactBudget,
    policy: Parallelism,
) -> Result<ExactSolution, CoherenceError> {
    budget.check(net)?;
    let start = Instant::now();
    let deadline = deadline_of(start, budget);
    let layout = Layout::new(net.len());
    // H = 2W - sum w, so ties in H are twice as wide
    let tol = 2.0 * tie_tolerance(net);

    let chunks = map_indexed(policy, layout.chunks(), |chunk| {
        if timed_out(deadline) {
            return Err(CoherenceError::TimedOut(Duration::ZERO));
        }
        let base = layout.chunk_base(chunk);
        let mut a = vec![0.0; layout.n];
        let mut best = Best::empty();
        for j in 0..(1u64 << layout.low) {
            if j & DEADLINE_CHECK_MASK == DEADLINE_CHECK_MASK && timed_out(deadline) {
                return Err(CoherenceError::TimedOut(Duration::ZERO));
            }
            let mask = base | j;
            for (i, x) in a.iter_mut().enumerate() {
                *x = if mask >> bit_of(layout.n, i) & 1 == 1 { 1.0 } else { -1.0 };
            }
            best.offer(harmony_unchecked(net, &a), mask, tol);
        }
        Ok(best)
    });
    let best = merge_chunks(chunks, tol, start)?;
    finish(net, &layout, best, start)
}
