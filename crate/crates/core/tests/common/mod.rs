#![allow(dead_code)]

use cre_core::claimnet::{Category, Claim, ConstraintSpec, Polarity};
use cre_core::ConstraintNetwork;
use proptest::prelude::*;
use rand::Rng;

pub const WEIGHTS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn claim(id: String, baseline: f64) -> Claim {
    Claim {
        label: format!("claim {id}"),
        id,
        category: Category::Fact,
        relatedness: "generated".into(),
        baseline,
    }
}

/// Random network: each unordered pair becomes a constraint with probability
/// `density`, with random polarity and a weight from `WEIGHTS`.
pub fn random_network(rng: &mut impl Rng, n: usize, density: f64) -> ConstraintNetwork {
    let claims = (0..n)
        .map(|i| claim(format!("c{i}"), rng.random_range(-1.0..=1.0)))
        .collect::<Vec<_>>();
    let mut specs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                let polarity = if rng.random_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
                let w = WEIGHTS[rng.random_range(0..WEIGHTS.len())];
                specs.push(ConstraintSpec::new(&claims[u].id, &claims[v].id, polarity, w));
            }
        }
    }
    ConstraintNetwork::new(claims, specs).expect("generated network is valid")
}

/// Proptest strategy over networks with `min..=max` claims.
pub fn arb_network(min: usize, max: usize) -> impl Strategy<Value = ConstraintNetwork> {
    (min..=max).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            proptest::collection::vec(-1.0f64..=1.0, n),
            proptest::collection::vec(proptest::option::weighted(0.5, (any::<bool>(), 0..WEIGHTS.len())), pairs),
        )
            .prop_map(move |(baselines, edges)| {
                let claims: Vec<Claim> = baselines
                    .into_iter()
                    .enumerate()
                    .map(|(i, b)| claim(format!("c{i}"), b))
                    .collect();
                let mut specs = Vec::new();
                let mut k = 0;
                for u in 0..n {
                    for v in u + 1..n {
                        if let Some((positive, w)) = edges[k] {
                            let polarity = if positive { Polarity::Positive } else { Polarity::Negative };
                            specs.push(ConstraintSpec::new(&claims[u].id, &claims[v].id, polarity, WEIGHTS[w]));
                        }
                        k += 1;
                    }
                }
                ConstraintNetwork::new(claims, specs).expect("generated network is valid")
            })
    })
}

/// All 2^n partitions as accepted flags, claim 0 in the lowest bit.
pub fn all_flags(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |mask| (0..n).map(|i| mask >> i & 1 == 1).collect())
}
