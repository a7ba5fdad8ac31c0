mod common;

use std::collections::BTreeSet;

use gdg_core::checkers::{evaluate, Variant};
use gdg_core::protocol::UNSET;
use gdg_core::sim::run;

#[test]
fn simulator_matches_hand_checked_trace() {
    let out = run(&common::oracle_ring(), &common::oracle_placement(), 100).unwrap();
    let expected = common::oracle_events();
    assert_eq!(out.trace.events.len(), expected.len());
    for (got, want) in out.trace.events.iter().zip(&expected) {
        assert_eq!(got, want, "round {}", want.round);
    }
}

#[test]
fn hand_checked_final_variables() {
    let out = run(&common::oracle_ring(), &common::oracle_placement(), 100).unwrap();
    let cfg = &out.final_config;
    let vars = |id| &cfg.slot(id).unwrap().vars;

    assert_eq!(vars(2).right_steps, 5);
    assert_eq!((vars(2).id_potential_min, vars(2).id_min), (2, UNSET));
    for id in [1, 3, 4] {
        assert_eq!(vars(id).id_min, 1, "robot {id}");
        assert_eq!(vars(id).id_head_walker, 4, "robot {id}");
        assert_eq!(vars(id).walk_steps, 1, "robot {id}");
    }
    assert_eq!(vars(1).walker_mate, BTreeSet::from([4]));
    assert_eq!(vars(3).walker_mate, BTreeSet::from([4]));
    assert_eq!(vars(4).walker_mate, BTreeSet::from([1]));
    assert!(cfg.all_terminated());
}

#[test]
fn hand_checked_trace_verdict() {
    let out = run(&common::oracle_ring(), &common::oracle_placement(), 100).unwrap();
    let v = evaluate(&out.trace, Some(96));
    assert!(v.violations.is_empty(), "{:?}", v.violations);
    assert_eq!(v.termination_round, Some(14));
    assert_eq!(v.satisfied, Variant::ALL.into_iter().collect());
}
