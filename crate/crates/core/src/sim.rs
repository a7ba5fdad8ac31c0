//! Synchronous Look-Compute-Move execution.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::protocol::{Algorithm, Direction, Gdg, ProtocolError, RobotId, RobotVars, View, EdgeView};
use crate::ring::{left_edge_of, left_neighbor, right_edge_of, right_neighbor, EvolvingRing, NodeId, Snapshot};
use crate::trace::{Activity, RobotRecord, Trace, TraceEvent, TraceHeader};

/// Smallest robot population the model admits.
pub const MIN_ROBOTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("unknown robot id {0}")]
    UnknownRobot(RobotId),
    #[error("at least {MIN_ROBOTS} robots are required, got {0}")]
    TooFewRobots(usize),
    #[error("robot ids must be positive")]
    ZeroId,
    #[error("duplicate robot id {0}")]
    DuplicateId(RobotId),
    #[error("robot {robot} placed on node {node} outside a ring of size {n}")]
    NodeOutOfRange { robot: RobotId, node: usize, n: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("snapshot has {got} edges, ring has {n}")]
    SnapshotSize { got: usize, n: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RobotSlot {
    pub vars: RobotVars,
    pub position: NodeId,
    pub prev_position: NodeId,
}

/// Global state at the start of a round.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub round: u64,
    pub n: usize,
    /// Sorted by id.
    pub robots: Vec<RobotSlot>,
}

impl Configuration {
    /// Initial configuration: every robot fresh at its placement.
    pub fn initial(n: usize, placement: &[(RobotId, NodeId)]) -> Result<Self, SimError> {
        if placement.len() < MIN_ROBOTS {
            return Err(SimError::TooFewRobots(placement.len()));
        }
        let mut seen = BTreeSet::new();
        for &(id, node) in placement {
            if id == 0 {
                return Err(SimError::ZeroId);
            }
            if !seen.insert(id) {
                return Err(SimError::DuplicateId(id));
            }
            if node.0 >= n {
                return Err(SimError::NodeOutOfRange { robot: id, node: node.0, n });
            }
        }
        let mut robots: Vec<RobotSlot> = placement
            .iter()
            .map(|&(id, node)| RobotSlot { vars: RobotVars::new(id), position: node, prev_position: node })
            .collect();
        robots.sort_by_key(|s| s.vars.id);
        Ok(Self { round: 0, n, robots })
    }

    pub fn ids(&self) -> Vec<RobotId> {
        self.robots.iter().map(|s| s.vars.id).collect()
    }

    pub fn slot(&self, id: RobotId) -> Option<&RobotSlot> {
        self.robots.iter().find(|s| s.vars.id == id)
    }

    pub fn position(&self, id: RobotId) -> Option<NodeId> {
        self.slot(id).map(|s| s.position)
    }

    pub fn all_terminated(&self) -> bool {
        self.robots.iter().all(|s| s.vars.terminated)
    }
}

/// Capture the view of robot `id`. `previous` is the snapshot of the
/// previous round, `None` at round 0.
pub fn build_view(
    config: &Configuration,
    current: &Snapshot,
    previous: Option<&Snapshot>,
    id: RobotId,
) -> Result<View, SimError> {
    let me = config.slot(id).ok_or(SimError::UnknownRobot(id))?;
    let n = config.n;
    let here = me.position;
    let mates = config
        .robots
        .iter()
        .filter(|s| s.vars.id != id && s.position == here)
        .map(|s| s.vars.clone())
        .collect();
    let (re, le) = (right_edge_of(here, n), left_edge_of(here, n));
    let edges = EdgeView {
        right_current: current.is_present(re),
        left_current: current.is_present(le),
        right_previous: previous.is_some_and(|p| p.is_present(re)),
        left_previous: previous.is_some_and(|p| p.is_present(le)),
    };
    Ok(View {
        me: me.vars.clone(),
        mates,
        edges,
        has_moved: config.round > 0 && me.position != me.prev_position,
        n,
        robots: config.robots.len(),
    })
}

/// Execute one synchronous round with an arbitrary algorithm.
pub fn step_with<A: Algorithm + ?Sized>(
    alg: &A,
    config: &Configuration,
    current: &Snapshot,
    previous: Option<&Snapshot>,
) -> Result<(Configuration, TraceEvent), SimError> {
    let n = config.n;
    if current.len() != n {
        return Err(SimError::SnapshotSize { got: current.len(), n });
    }
    // Compute: every robot against the same frozen configuration.
    let mut decisions = Vec::with_capacity(config.robots.len());
    for slot in &config.robots {
        if slot.vars.terminated {
            decisions.push((slot.vars.clone(), Activity::Terminated));
            continue;
        }
        let view = build_view(config, current, previous, slot.vars.id)?;
        let d = alg.compute(&view)?;
        let activity = d.rule.map_or(Activity::Unlabeled, Activity::Fired);
        decisions.push((d.vars, activity));
    }
    // Move: simultaneously, across edges present this round.
    let mut next = Vec::with_capacity(config.robots.len());
    let mut records = Vec::with_capacity(config.robots.len());
    for (slot, (vars, activity)) in config.robots.iter().zip(decisions) {
        let here = slot.position;
        let target = if vars.terminated {
            None
        } else {
            match vars.dir {
                Direction::Right if current.is_present(right_edge_of(here, n)) => Some(right_neighbor(here, n)),
                Direction::Left if current.is_present(left_edge_of(here, n)) => Some(left_neighbor(here, n)),
                _ => None,
            }
        };
        records.push(RobotRecord {
            id: vars.id,
            node: here,
            state: vars.state,
            dir: vars.dir,
            rule: activity,
            moved: target.is_some(),
        });
        next.push(RobotSlot { position: target.unwrap_or(here), prev_position: here, vars });
    }
    let event = TraceEvent { round: config.round, edges: current.clone(), robots: records };
    Ok((Configuration { round: config.round + 1, n, robots: next }, event))
}

/// One round of the gathering protocol on `ring`.
pub fn step(config: &Configuration, ring: &EvolvingRing) -> Result<(Configuration, TraceEvent), SimError> {
    let t = config.round;
    let prev = t.checked_sub(1).map(|p| ring.snapshot_at(p));
    step_with(&Gdg, config, ring.snapshot_at(t), prev)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub termination_rounds: BTreeMap<RobotId, Option<u64>>,
    pub final_positions: BTreeMap<RobotId, NodeId>,
    /// The horizon was reached with at least one robot still active.
    pub halted_at_horizon: bool,
    pub rounds_executed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub trace: Trace,
    pub outcome: RunOutcome,
    pub final_config: Configuration,
}

/// Options attached to the trace header.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunLabels {
    pub class_claim: Option<crate::ring::DynClass>,
    pub seed: Option<u64>,
}

/// Run the protocol until every robot terminates or `horizon` rounds elapse.
pub fn run(ring: &EvolvingRing, placement: &[(RobotId, NodeId)], horizon: u64) -> Result<Run, SimError> {
    run_labeled(ring, placement, horizon, RunLabels::default())
}

pub fn run_labeled(
    ring: &EvolvingRing,
    placement: &[(RobotId, NodeId)],
    horizon: u64,
    labels: RunLabels,
) -> Result<Run, SimError> {
    run_with(&Gdg, ring, placement, horizon, labels)
}

pub fn run_with<A: Algorithm + ?Sized>(
    alg: &A,
    ring: &EvolvingRing,
    placement: &[(RobotId, NodeId)],
    horizon: u64,
    labels: RunLabels,
) -> Result<Run, SimError> {
    if horizon == 0 {
        return Err(SimError::ZeroHorizon);
    }
    let mut config = Configuration::initial(ring.n(), placement)?;
    let mut events = Vec::new();
    while config.round < horizon && !config.all_terminated() {
        let t = config.round;
        let prev = t.checked_sub(1).map(|p| ring.snapshot_at(p));
        let (next, ev) = step_with(alg, &config, ring.snapshot_at(t), prev)?;
        events.push(ev);
        config = next;
    }
    let header = TraceHeader {
        n: ring.n(),
        robots: config.robots.len(),
        ids: config.ids(),
        class_claim: labels.class_claim,
        seed: labels.seed,
        horizon,
    };
    let trace = Trace { header, events };
    let outcome = outcome_of(&trace, &config);
    Ok(Run { trace, outcome, final_config: config })
}

pub(crate) fn outcome_of(trace: &Trace, config: &Configuration) -> RunOutcome {
    RunOutcome {
        termination_rounds: trace.termination_rounds(),
        final_positions: config.robots.iter().map(|s| (s.vars.id, s.position)).collect(),
        halted_at_horizon: !config.all_terminated(),
        rounds_executed: config.round,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{RobotState, RuleId};
    use crate::ring::{EdgeId, Schedule};

    fn place(pairs: &[(RobotId, usize)]) -> Vec<(RobotId, NodeId)> {
        pairs.iter().map(|&(i, v)| (i, NodeId(v))).collect()
    }

    #[test]
    fn colocated_robots_see_each_other() {
        let c = Configuration::initial(6, &place(&[(1, 2), (2, 2), (3, 0), (4, 5)])).unwrap();
        let s = Snapshot::full(6);
        let v1 = build_view(&c, &s, None, 1).unwrap();
        let v2 = build_view(&c, &s, None, 2).unwrap();
        assert_eq!(v1.mate_ids(), BTreeSet::from([2]));
        assert_eq!(v2.mate_ids(), BTreeSet::from([1]));
        assert!(build_view(&c, &s, None, 3).unwrap().mates.is_empty());
    }

    #[test]
    fn view_geometry_and_round_zero() {
        let c = Configuration::initial(4, &place(&[(1, 0), (2, 1), (3, 2), (4, 3)])).unwrap();
        let s = Snapshot::without(4, &[EdgeId(0)]);
        let v = build_view(&c, &s, None, 1).unwrap();
        assert!(v.edges.left_current);
        assert!(!v.edges.right_current);
        assert!(!v.edges.left_previous && !v.edges.right_previous);
        assert!(!v.has_moved);
        assert_eq!(build_view(&c, &s, None, 9), Err(SimError::UnknownRobot(9)));
    }

    #[test]
    fn stuck_robot_stays() {
        let st = EvolvingRing::new(
            6,
            Schedule { prefix: vec![], cycle: vec![Snapshot::without(6, &[EdgeId(1)])] },
        )
        .unwrap();
        let c = Configuration::initial(6, &place(&[(1, 1), (2, 3), (3, 4), (4, 5)])).unwrap();
        let (next, ev) = step(&c, &st).unwrap();
        assert_eq!(next.position(1), Some(NodeId(1)));
        assert!(!ev.record(1).unwrap().moved);
        assert_eq!(next.slot(1).unwrap().vars.right_steps, 0);
        assert_eq!(next.position(2), Some(NodeId(4)));
    }

    #[test]
    fn terminated_robots_are_frozen() {
        let st = EvolvingRing::static_ring(4).unwrap();
        let c = Configuration::initial(4, &place(&[(1, 0), (2, 0), (3, 0), (4, 0)])).unwrap();
        let (done, ev0) = step(&c, &st).unwrap();
        assert!(ev0.robots.iter().all(|r| r.rule == Activity::Fired(RuleId::Term1) && !r.moved));
        let (again, ev1) = step(&done, &st).unwrap();
        assert_eq!(again.round, done.round + 1);
        assert_eq!(again.robots.iter().map(|s| (&s.vars, s.position)).collect::<Vec<_>>(),
                   done.robots.iter().map(|s| (&s.vars, s.position)).collect::<Vec<_>>());
        assert!(ev1.robots.iter().all(|r| r.rule == Activity::Terminated));
    }

    #[test]
    fn scattered_righters_advance_together() {
        let st = EvolvingRing::static_ring(4).unwrap();
        let c = Configuration::initial(4, &place(&[(1, 0), (2, 1), (3, 2), (4, 3)])).unwrap();
        let (next, ev) = step(&c, &st).unwrap();
        for (slot, v) in next.robots.iter().zip([1, 2, 3, 0]) {
            assert_eq!(slot.position, NodeId(v));
            assert_eq!(slot.vars.right_steps, 1);
            assert_eq!(slot.vars.state, RobotState::Righter);
        }
        assert!(ev.robots.iter().all(|r| r.rule == Activity::Fired(RuleId::M8) && r.moved));
    }

    #[test]
    fn gathered_start_terminates_at_round_zero() {
        let st = EvolvingRing::static_ring(4).unwrap();
        let r = run(&st, &place(&[(1, 0), (2, 0), (3, 0), (4, 0)]), 50).unwrap();
        assert_eq!(r.trace.events.len(), 1);
        assert!(r.outcome.termination_rounds.values().all(|t| *t == Some(0)));
        assert!(!r.outcome.halted_at_horizon);
    }

    #[test]
    fn placement_validation() {
        let st = EvolvingRing::static_ring(4).unwrap();
        assert_eq!(run(&st, &place(&[(1, 0), (2, 0), (3, 0), (4, 0)]), 0).unwrap_err(), SimError::ZeroHorizon);
        assert_eq!(run(&st, &place(&[(1, 0), (2, 0), (3, 0)]), 5).unwrap_err(), SimError::TooFewRobots(3));
        assert_eq!(run(&st, &place(&[(1, 0), (1, 1), (3, 0), (4, 0)]), 5).unwrap_err(), SimError::DuplicateId(1));
        assert_eq!(run(&st, &place(&[(0, 0), (2, 1), (3, 0), (4, 0)]), 5).unwrap_err(), SimError::ZeroId);
        assert!(matches!(run(&st, &place(&[(1, 7), (2, 1), (3, 0), (4, 0)]), 5), Err(SimError::NodeOutOfRange { .. })));
    }

    #[test]
    fn compute_order_does_not_matter() {
        // Reversing the slot order must not change any robot's decision.
        let st = EvolvingRing::static_ring(5).unwrap();
        let c = Configuration::initial(5, &place(&[(3, 1), (5, 1), (7, 1), (2, 4)])).unwrap();
        let (a, _) = step(&c, &st).unwrap();
        let mut rev = c.clone();
        rev.robots.reverse();
        let (mut b, _) = step_with(&Gdg, &rev, st.snapshot_at(0), None).unwrap();
        b.robots.reverse();
        assert_eq!(a, b);
    }
}
