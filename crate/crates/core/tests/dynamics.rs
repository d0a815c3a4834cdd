mod common;

use cre_core::claimnet::ConstraintSpec;
use cre_core::dynamics::{run_batch, step, trace_csv, ActivationState, SolverConfig};
use cre_core::{run, ConstraintNetwork, Parallelism};
use proptest::prelude::*;

/// 0.05, 0.10, ..., 0.95
fn grid() -> Vec<f64> {
    (1..=19).map(|i| f64::from(i) * 0.05).collect()
}

fn pair(positive: bool) -> ConstraintNetwork {
    let claims = vec![common::claim("X".into(), 0.0), common::claim("Y".into(), 0.0)];
    let c = if positive { ConstraintSpec::positive("X", "Y") } else { ConstraintSpec::negative("X", "Y") };
    ConstraintNetwork::new(claims, vec![c]).unwrap()
}

fn initial_vector(net: &ConstraintNetwork) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..=1.0, net.len())
}

#[test]
fn stronger_claim_wins_competition() {
    let net = pair(false);
    let cfg = SolverConfig::default();
    for &x in &grid() {
        for &y in grid().iter().filter(|&&y| y < x) {
            let r = run(&net, &[x, y], &cfg).unwrap();
            assert!(r.converged, "x={x} y={y}");
            assert_eq!(r.accepted_ids(&net), ["X"], "x={x} y={y}");
        }
    }
}

#[test]
fn coherent_claims_resonate() {
    let net = pair(true);
    let cfg = SolverConfig::default();
    for &x in &grid() {
        for &y in std::iter::once(&0.0).chain(grid().iter()) {
            let r = run(&net, &[x, y], &cfg).unwrap();
            assert!(r.converged, "x={x} y={y}");
            assert_eq!(r.accepted_ids(&net), ["X", "Y"], "x={x} y={y}");
        }
    }
}

#[test]
fn batch_matches_individual_runs() {
    let net = pair(false);
    let cfg = SolverConfig::default();
    let initials: Vec<Vec<f64>> = grid().iter().map(|&x| vec![x, 0.5]).collect();
    let seq = run_batch(&net, &initials, &cfg, Parallelism::Sequential);
    let par = run_batch(&net, &initials, &cfg, Parallelism::Parallel);
    for ((a, b), init) in seq.into_iter().zip(par).zip(&initials) {
        let (a, b) = (a.unwrap(), b.unwrap());
        assert_eq!(a, b);
        assert_eq!(a, run(&net, init, &cfg).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_stay_bounded((net, init) in common::arb_network(1, 10).prop_flat_map(|n| { let s = initial_vector(&n); (Just(n), s) })) {
        let cfg = SolverConfig::default();
        let mut state = ActivationState { iteration: 0, values: init };
        for _ in 0..50 {
            state = step(&net, &state, &cfg);
            prop_assert!(state.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn zero_is_a_fixed_point(net in common::arb_network(1, 10)) {
        let zero = ActivationState { iteration: 0, values: vec![0.0; net.len()] };
        prop_assert_eq!(step(&net, &zero, &SolverConfig::default()).values, zero.values.clone());
        let r = run(&net, &zero.values, &SolverConfig::default()).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.accepted_ids(&net).is_empty());
    }

    #[test]
    fn runs_are_deterministic((net, init) in common::arb_network(1, 10).prop_flat_map(|n| { let s = initial_vector(&n); (Just(n), s) })) {
        let cfg = SolverConfig { record_activations: true, max_iters: 200, ..SolverConfig::default() };
        let a = run(&net, &init, &cfg).unwrap();
        let b = run(&net, &init, &cfg).unwrap();
        prop_assert_eq!(trace_csv(&net, &a), trace_csv(&net, &b));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn negation_is_symmetric((net, init) in common::arb_network(1, 10).prop_flat_map(|n| { let s = initial_vector(&n); (Just(n), s) })) {
        let cfg = SolverConfig { max_iters: 300, ..SolverConfig::default() };
        let a = run(&net, &init, &cfg).unwrap();
        let neg: Vec<f64> = init.iter().map(|v| -v).collect();
        let b = run(&net, &neg, &cfg).unwrap();
        prop_assert_eq!(a.iterations, b.iterations);
        for (u, (x, y)) in a.final_state.values.iter().zip(&b.final_state.values).enumerate() {
            prop_assert_eq!(*x, -*y);
            if *x != 0.0 {
                prop_assert_ne!(a.partition.is_accepted(u), b.partition.is_accepted(u));
            }
        }
    }
}
