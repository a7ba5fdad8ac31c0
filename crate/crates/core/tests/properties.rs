mod common;

use gdg_core::adversary::{generate, AcPolicy, GeneratorSpec};
use gdg_core::checkers::{check_safety, evaluate, Variant};
use gdg_core::protocol::RuleId;
use gdg_core::ring::{DynClass, EdgeId, EvolvingRing, Interval, NodeId, Schedule, Snapshot};
use gdg_core::sim::{step, Configuration};
use gdg_core::trace::{Activity, Trace, TraceEvent};
use proptest::prelude::*;

fn class_strategy() -> impl Strategy<Value = DynClass> {
    prop_oneof![
        Just(DynClass::St),
        (1u32..=6).prop_map(DynClass::Bre),
        Just(DynClass::Re),
        Just(DynClass::Ac),
        Just(DynClass::Cot),
    ]
}

fn snapshot(n: usize) -> impl Strategy<Value = Snapshot> {
    prop::collection::vec(any::<bool>(), n).prop_map(Snapshot::from_bits)
}

fn ring_strategy() -> impl Strategy<Value = EvolvingRing> {
    (4usize..=7).prop_flat_map(|n| {
        (prop::collection::vec(snapshot(n), 0..6), prop::collection::vec(snapshot(n), 1..5))
            .prop_map(move |(prefix, cycle)| EvolvingRing::new(n, Schedule { prefix, cycle }).unwrap())
    })
}

/// Classes a ring of class `c` must also belong to.
fn superclasses(c: DynClass) -> Vec<DynClass> {
    match c {
        DynClass::St => vec![DynClass::Bre(1), DynClass::Bre(4), DynClass::Re, DynClass::Ac, DynClass::Cot],
        DynClass::Bre(d) => vec![DynClass::Bre(d + 1), DynClass::Bre(d + 7), DynClass::Re, DynClass::Cot],
        DynClass::Re | DynClass::Ac => vec![DynClass::Cot],
        DynClass::Cot => vec![],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_rings_respect_class_inclusion(class in class_strategy(), n in 4usize..=10, seed in any::<u64>()) {
        let ring = generate(&GeneratorSpec::new(class, n, seed)).unwrap();
        prop_assert!(ring.verify_class(class));
        for sup in superclasses(class) {
            prop_assert!(ring.verify_class(sup), "{class} ring not in {sup}");
        }
    }

    #[test]
    fn membership_is_closed_upward_on_arbitrary_rings(ring in ring_strategy()) {
        if ring.verify_class(DynClass::St) {
            prop_assert!(ring.verify_class(DynClass::Ac) && ring.verify_class(DynClass::Bre(1)));
        }
        for d in 1..6 {
            if ring.verify_class(DynClass::Bre(d)) {
                prop_assert!(ring.verify_class(DynClass::Bre(d + 1)));
                prop_assert!(ring.verify_class(DynClass::Re));
            }
        }
        if ring.verify_class(DynClass::Re) || ring.verify_class(DynClass::Ac) {
            prop_assert!(ring.verify_class(DynClass::Cot));
        }
    }

    #[test]
    fn removal_only_touches_the_interval(ring in ring_strategy(), e in 0usize..4, a in 0u64..12, len in 0u64..6, open in any::<bool>()) {
        let e = EdgeId(e);
        let interval = if open { Interval::From { start: a } } else { Interval::Closed { start: a, end: a + len } };
        let cut = ring.remove_edge_interval(e, interval).unwrap();
        for t in 0..40 {
            let inside = t >= a && (open || t <= a + len);
            for f in (0..ring.n()).map(EdgeId) {
                let want = if f == e && inside { false } else { ring.edge_present(f, t) };
                prop_assert_eq!(cut.edge_present(f, t), want, "edge {} round {}", f.0, t);
            }
        }
    }

    #[test]
    fn splice_switches_at_the_seam(ring in ring_strategy(), t0 in 0u64..10, seed in any::<u64>()) {
        let other = generate(&GeneratorSpec::new(DynClass::Re, ring.n(), seed)).unwrap();
        let joined = ring.splice(t0, &other).unwrap();
        for t in 0..40 {
            let want = if t <= t0 { ring.snapshot_at(t) } else { other.snapshot_at(t) };
            prop_assert_eq!(joined.snapshot_at(t), want);
        }
        prop_assert!(joined.splice(0, &ring).unwrap().equivalent(&ring));
    }

    #[test]
    fn ring_files_round_trip(ring in ring_strategy()) {
        let back = EvolvingRing::from_json(&ring.to_json()).unwrap();
        prop_assert_eq!(&back, &ring);
        prop_assert!(back.equivalent(&ring));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_are_safe_valid_and_replayable(class in class_strategy(), seed in 0u64..1_000_000) {
        let c = common::case(class, seed);
        let first = common::execute(&c);
        let again = common::execute(&c);
        prop_assert_eq!(first.trace.to_jsonl(), again.trace.to_jsonl());

        let trace = &first.trace;
        prop_assert!(check_safety(trace));
        assert_physically_valid(trace, &c.ring)?;

        let v = evaluate(trace, c.bound);
        prop_assert!(v.violations.is_empty(), "{:?}", v.violations);
        prop_assert!(v.satisfied.contains(&Variant::expected_for(class)), "{class} seed {seed}: {:?}", v.satisfied);
        for a in &v.satisfied {
            for b in Variant::ALL {
                if a.implies(b) {
                    prop_assert!(v.satisfied.contains(&b), "{a} without {b}");
                }
            }
        }

        let back = Trace::read_jsonl(trace.to_jsonl().as_bytes()).unwrap();
        prop_assert_eq!(&back, trace);
    }

    #[test]
    fn counters_only_grow_and_states_stay_closed(class in class_strategy(), seed in 0u64..1_000_000) {
        let c = common::case(class, seed);
        let mut cfg = Configuration::initial(c.ring.n(), &c.placement).unwrap();
        let rounds = c.horizon.min(3_000);
        while cfg.round < rounds && !cfg.all_terminated() {
            let (next, ev) = step(&cfg, &c.ring).unwrap();
            for (before, after) in cfg.robots.iter().zip(&next.robots) {
                let (b, a) = (&before.vars, &after.vars);
                prop_assert!(a.right_steps >= b.right_steps);
                prop_assert!(a.walk_steps >= b.walk_steps);
                prop_assert!(a.walk_steps <= c.ring.n() as u64);
                prop_assert!(!b.state.is_min() || a.state.is_min());
                prop_assert!(!b.terminated || (a == b && after.position == before.position));
            }
            for rec in &ev.robots {
                if let Activity::Fired(rule) = rec.rule {
                    prop_assert!(RuleId::ALL.contains(&rule));
                }
            }
            cfg = next;
        }
    }
}

/// Every crossing uses an edge present in that round, and the next round
/// starts where the previous one ended.
fn assert_physically_valid(trace: &Trace, ring: &EvolvingRing) -> Result<(), TestCaseError> {
    let n = ring.n();
    for pair in trace.events.windows(2) {
        for (a, b) in pair[0].robots.iter().zip(&pair[1].robots) {
            prop_assert_eq!(TraceEvent::end_node(a, n), b.node);
        }
    }
    for ev in &trace.events {
        prop_assert_eq!(&ev.edges, ring.snapshot_at(ev.round));
        for rec in &ev.robots {
            if rec.moved {
                let e = match rec.dir {
                    gdg_core::protocol::Direction::Right => gdg_core::ring::right_edge_of(rec.node, n),
                    gdg_core::protocol::Direction::Left => gdg_core::ring::left_edge_of(rec.node, n),
                    gdg_core::protocol::Direction::Bot => {
                        return Err(TestCaseError::fail("moved without a direction"));
                    }
                };
                prop_assert!(ev.edges.is_present(e));
            }
        }
    }
    Ok(())
}

#[test]
fn all_ac_policies_reach_weak_gathering() {
    for policy in [AcPolicy::Rotating, AcPolicy::Random, AcPolicy::Fixed] {
        for seed in 0..10 {
            let mut spec = GeneratorSpec::new(DynClass::Ac, 6, seed);
            spec.params.ac_policy = policy;
            let ring = generate(&spec).unwrap();
            let placement: Vec<_> = [(3, 0), (5, 2), (8, 3), (9, 5)].iter().map(|&(i, v)| (i, NodeId(v))).collect();
            let out = gdg_core::sim::run(&ring, &placement, 10_000).unwrap();
            let v = evaluate(&out.trace, Some(10_000));
            assert!(v.violations.is_empty());
            assert!(v.satisfied.contains(&Variant::GW), "{policy:?} seed {seed}");
        }
    }
}
