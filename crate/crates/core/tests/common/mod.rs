#![allow(dead_code)]

use gdg_core::adversary::{generate, random_ids, random_placement, rng_for, GeneratorSpec};
use gdg_core::checkers::{bound_for, default_horizon, BoundParams};
use gdg_core::protocol::{Direction, RobotId, RobotState, RuleId};
use gdg_core::ring::{DynClass, EvolvingRing, NodeId, Schedule, Snapshot};
use gdg_core::sim::{run_labeled, Run, RunLabels};
use gdg_core::trace::{Activity, RobotRecord, TraceEvent};
use rand::Rng;

/// One seeded experiment: the seed alone fixes ring, ids and placement.
#[derive(Debug, Clone)]
pub struct Case {
    pub class: DynClass,
    pub seed: u64,
    pub ring: EvolvingRing,
    pub ids: Vec<RobotId>,
    pub placement: Vec<(RobotId, NodeId)>,
    pub bound: Option<u64>,
    pub horizon: u64,
}

pub fn case(class: DynClass, seed: u64) -> Case {
    let mut rng = rng_for(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0xa11ce);
    let n = rng.random_range(4..=12);
    let robots = rng.random_range(4..=8);
    let ids = random_ids(robots, 32, &mut rng);
    let placement = random_placement(&ids, n, &mut rng);
    let ring = generate(&GeneratorSpec::new(class, n, seed)).expect("generator spec is satisfiable");
    let bound = bound_for(&BoundParams::new(class, n, robots, ids[0])).ok();
    let horizon = default_horizon(&ring, class, robots, ids[0]);
    Case { class, seed, ring, ids, placement, bound, horizon }
}

pub fn execute(c: &Case) -> Run {
    let labels = RunLabels { class_claim: Some(c.class), seed: Some(c.seed) };
    run_labeled(&c.ring, &c.placement, c.horizon, labels).expect("valid case")
}

fn bits(s: &str) -> Snapshot {
    Snapshot::from_bits(s.bytes().map(|b| b == b'1').collect())
}

/// Scripted schedule for the hand-checked trace on n = 4.
pub fn oracle_ring() -> EvolvingRing {
    let prefix = [
        "1111", "1111", "1110", "0110", "0110", "1110", "1110", "1110", "1010", "0100", "1110", "1110", "1111",
        "1111", "1111",
    ];
    EvolvingRing::new(4, Schedule { prefix: prefix.iter().map(|s| bits(s)).collect(), cycle: vec![bits("1111")] })
        .expect("valid scripted ring")
}

/// Robots 2, 3, 4 start together on node 0; robot 1 starts on node 2.
pub fn oracle_placement() -> Vec<(RobotId, NodeId)> {
    vec![(1, NodeId(2)), (2, NodeId(0)), (3, NodeId(0)), (4, NodeId(0))]
}

type Row = (RobotId, usize, RobotState, Direction, Option<RuleId>, bool);

/// The fifteen rounds, worked out by evaluating the rule guards by hand in
/// priority order. `None` as the rule marks a robot that terminated earlier.
pub fn oracle_events() -> Vec<TraceEvent> {
    use Direction::{Bot, Left, Right};
    use RobotState::*;
    use RuleId::*;
    let rounds: Vec<Vec<Row>> = vec![
        // 2, 3, 4 form a tower of R - 1 righters and start searching.
        vec![
            (1, 2, Righter, Right, Some(M8), true),
            (2, 0, PotentialMin, Right, Some(M6), true),
            (3, 0, DumbSearcher, Right, Some(M6), true),
            (4, 0, DumbSearcher, Right, Some(M6), true),
        ],
        // The largest searcher turns left and meets robot 1 on node 0.
        vec![
            (1, 3, Righter, Right, Some(M8), true),
            (2, 1, PotentialMin, Right, Some(M8), true),
            (3, 1, DumbSearcher, Right, Some(M11), true),
            (4, 1, DumbSearcher, Left, Some(M11), true),
        ],
        // Robot 1 learns it is the minimum from the searcher's idPotentialMin.
        vec![
            (1, 0, MinWaitingWalker, Bot, Some(M1), false),
            (2, 2, PotentialMin, Right, Some(M8), true),
            (3, 2, DumbSearcher, Left, Some(M11), true),
            (4, 0, DumbSearcher, Left, Some(M11), false),
        ],
        vec![
            (1, 0, MinWaitingWalker, Bot, Some(K2), false),
            (2, 3, PotentialMin, Right, Some(M8), false),
            (3, 1, DumbSearcher, Left, Some(M11), false),
            (4, 0, WaitingWalker, Bot, Some(K3), false),
        ],
        // towerMin of R - 2 robots: 4 leads as head, 1 trails as tail.
        vec![
            (1, 0, MinTailWalker, Bot, Some(K1), false),
            (2, 3, PotentialMin, Right, Some(M8), false),
            (3, 1, DumbSearcher, Left, Some(M11), false),
            (4, 0, HeadWalker, Bot, Some(K1), false),
        ],
        vec![
            (1, 0, MinTailWalker, Bot, Some(W1), false),
            (2, 3, PotentialMin, Right, Some(M8), false),
            (3, 1, DumbSearcher, Left, Some(M11), true),
            (4, 0, HeadWalker, Right, Some(W1), true),
        ],
        // The head waits for its mate; robot 3 joins the tail.
        vec![
            (1, 0, MinTailWalker, Right, Some(W1), true),
            (2, 3, PotentialMin, Right, Some(M8), false),
            (3, 0, TailWalker, Right, Some(M4), true),
            (4, 1, HeadWalker, Bot, Some(W1), false),
        ],
        vec![
            (1, 1, MinTailWalker, Right, Some(Term2), false),
            (2, 3, PotentialMin, Right, Some(M8), false),
            (3, 1, TailWalker, Right, Some(Term2), false),
            (4, 1, HeadWalker, Bot, Some(Term2), false),
        ],
    ];
    let waiting_for_edge = |node: usize, moved: bool, rule: RuleId| -> Vec<Row> {
        vec![
            (1, 1, MinTailWalker, Right, None, false),
            (2, node, PotentialMin, Right, Some(rule), moved),
            (3, 1, TailWalker, Right, None, false),
            (4, 1, HeadWalker, Bot, None, false),
        ]
    };
    let mut rounds = rounds;
    for _ in 8..12 {
        rounds.push(waiting_for_edge(3, false, M8));
    }
    rounds.push(waiting_for_edge(3, true, M8));
    rounds.push(waiting_for_edge(0, true, M8));
    rounds.push(waiting_for_edge(1, false, Term1));

    let ring = oracle_ring();
    rounds
        .into_iter()
        .enumerate()
        .map(|(t, rows)| TraceEvent {
            round: t as u64,
            edges: ring.snapshot_at(t as u64).clone(),
            robots: rows
                .into_iter()
                .map(|(id, node, state, dir, rule, moved)| RobotRecord {
                    id,
                    node: NodeId(node),
                    state,
                    dir,
                    rule: rule.map_or(Activity::Terminated, Activity::Fired),
                    moved,
                })
                .collect(),
        })
        .collect()
}
