//! Gathering-variant verdicts, round bounds, and runtime invariant monitors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{Direction, RobotId, RobotState};
use crate::ring::{DynClass, EvolvingRing, NodeId};
use crate::trace::{Trace, TraceEvent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("no round bound is known for class {0}")]
    NotApplicable(DynClass),
    #[error("variant {0} needs a round bound but none was supplied")]
    BoundRequired(Variant),
    #[error("bound parameters must be positive")]
    NonPositive,
}

/// Gathering variants, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "G")]
    G,
    #[serde(rename = "G_E")]
    GE,
    #[serde(rename = "G_W")]
    GW,
    #[serde(rename = "G_EW")]
    GEW,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::G, Variant::GE, Variant::GW, Variant::GEW];

    pub fn name(self) -> &'static str {
        match self {
            Variant::G => "G",
            Variant::GE => "G_E",
            Variant::GW => "G_W",
            Variant::GEW => "G_EW",
        }
    }

    /// Whether the variant carries a round bound.
    pub fn is_bounded(self) -> bool {
        matches!(self, Variant::G | Variant::GW)
    }

    /// `self` implies `other`.
    pub fn implies(self, other: Variant) -> bool {
        match self {
            Variant::G => true,
            Variant::GE => matches!(other, Variant::GE | Variant::GEW),
            Variant::GW => matches!(other, Variant::GW | Variant::GEW),
            Variant::GEW => other == Variant::GEW,
        }
    }

    /// The strongest variant the protocol achieves in each class.
    pub fn expected_for(class: DynClass) -> Variant {
        match class {
            DynClass::St | DynClass::Bre(_) => Variant::G,
            DynClass::Re => Variant::GE,
            DynClass::Ac => Variant::GW,
            DynClass::Cot => Variant::GEW,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    /// Only the smallest id may reach a min state.
    MinIsSmallestId,
    MinClosed,
    SingleTowerMin,
    WaitingWalkersParked,
    RightDirectionHistory,
    NoStateReentry,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::MinIsSmallestId => "min_is_smallest_id",
            Invariant::MinClosed => "min_closed",
            Invariant::SingleTowerMin => "single_tower_min",
            Invariant::WaitingWalkersParked => "waiting_walkers_parked",
            Invariant::RightDirectionHistory => "right_direction_history",
            Invariant::NoStateReentry => "no_state_reentry",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub round: u64,
    pub robot: Option<RobotId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub safety_ok: bool,
    pub satisfied: BTreeSet<Variant>,
    /// Round by which the last counted robot terminated: all robots for
    /// `G_E`, the first `R - 1` otherwise.
    pub termination_round: Option<u64>,
    pub terminated: usize,
    pub bound: Option<u64>,
    /// `None` when no bound applies.
    pub bound_ok: Option<bool>,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn satisfies(&self, v: Variant) -> Result<bool, CheckError> {
        if v.is_bounded() && self.bound.is_none() {
            return Err(CheckError::BoundRequired(v));
        }
        Ok(self.satisfied.contains(&v))
    }

    /// The strongest satisfied variant in the order G, G_E, G_W, G_EW.
    pub fn strongest(&self) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| self.satisfied.contains(v))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serialization is infallible")
    }
}

/// Node where each robot terminated.
fn termination_nodes(trace: &Trace) -> BTreeMap<RobotId, (u64, NodeId)> {
    let mut out = BTreeMap::new();
    for ev in &trace.events {
        for rec in &ev.robots {
            if rec.rule.rule().is_some_and(|r| r.is_termination()) {
                out.insert(rec.id, (ev.round, rec.node));
            }
        }
    }
    out
}

/// All robots that terminated did so on one node.
pub fn check_safety(trace: &Trace) -> bool {
    let nodes: BTreeSet<NodeId> = termination_nodes(trace).values().map(|(_, v)| *v).collect();
    nodes.len() <= 1
}

/// Decide which variants the trace satisfies. Bounded variants are only
/// considered when `bound` is given.
pub fn check_variant(trace: &Trace, bound: Option<u64>) -> Verdict {
    let robots = trace.header.robots;
    let safety_ok = check_safety(trace);
    let mut rounds: Vec<u64> = termination_nodes(trace).values().map(|(t, _)| *t).collect();
    rounds.sort_unstable();
    let terminated = rounds.len();

    let mut satisfied = BTreeSet::new();
    let all_round = (terminated == robots).then(|| rounds[robots - 1]);
    let weak_round = (terminated + 1 >= robots && robots >= 2).then(|| rounds[robots - 2]);
    if safety_ok {
        if all_round.is_some() {
            satisfied.insert(Variant::GE);
        }
        if weak_round.is_some() {
            satisfied.insert(Variant::GEW);
        }
        if let Some(b) = bound {
            if all_round.is_some_and(|t| t <= b) {
                satisfied.insert(Variant::G);
            }
            if weak_round.is_some_and(|t| t <= b) {
                satisfied.insert(Variant::GW);
            }
        }
    }
    let termination_round = all_round.or(weak_round);
    let bound_ok = bound.map(|b| termination_round.is_some_and(|t| t <= b));
    Verdict { safety_ok, satisfied, termination_round, terminated, bound, bound_ok, violations: Vec::new() }
}

/// Multipliers of the explicit round bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c1: u64,
    pub c2: u64,
    pub c3: u64,
}

impl BoundConstants {
    pub const AC: BoundConstants = BoundConstants { c1: 16, c2: 3, c3: 12 };
    pub const BRE: BoundConstants = BoundConstants { c1: 4, c2: 3, c3: 8 };

    pub fn default_for(class: DynClass) -> Option<BoundConstants> {
        match class {
            DynClass::Ac => Some(Self::AC),
            DynClass::Bre(_) | DynClass::St => Some(Self::BRE),
            DynClass::Cot | DynClass::Re => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundParams {
    pub class: DynClass,
    pub n: u64,
    pub robots: u64,
    pub id_rmin: u64,
    /// Defaults per class when `None`.
    pub constants: Option<BoundConstants>,
}

impl BoundParams {
    pub fn new(class: DynClass, n: usize, robots: usize, id_rmin: RobotId) -> Self {
        Self { class, n: n as u64, robots: robots as u64, id_rmin: u64::from(id_rmin), constants: None }
    }
}

/// Explicit round bound for the bounded variants.
///
/// * AC: `c1·id·n² + c2·R·n + c3·n²`
/// * BRE(δ): `c1·n·δ·id + c2·n·δ·R + c3·n·δ`
/// * ST: BRE with δ = 1
pub fn bound_for(p: &BoundParams) -> Result<u64, CheckError> {
    if p.n == 0 || p.robots == 0 || p.id_rmin == 0 {
        return Err(CheckError::NonPositive);
    }
    let c = p
        .constants
        .or_else(|| BoundConstants::default_for(p.class))
        .ok_or(CheckError::NotApplicable(p.class))?;
    let (n, r, id) = (p.n, p.robots, p.id_rmin);
    match p.class {
        DynClass::Ac => Ok(c.c1 * id * n * n + c.c2 * r * n + c.c3 * n * n),
        DynClass::Bre(delta) => {
            let nd = n * u64::from(delta);
            Ok(c.c1 * nd * id + c.c2 * nd * r + c.c3 * nd)
        }
        DynClass::St => Ok(c.c1 * n * id + c.c2 * n * r + c.c3 * n),
        other => Err(CheckError::NotApplicable(other)),
    }
}

/// Horizon standing in for "finite time": the prefix plus four times the
/// BRE bound with δ equal to the cycle length. Bounded classes never get less
/// than their own bound.
pub fn default_horizon(ring: &EvolvingRing, class: DynClass, robots: usize, id_rmin: RobotId) -> u64 {
    let delta = u32::try_from(ring.cycle_len()).unwrap_or(u32::MAX);
    let periodic = bound_for(&BoundParams::new(DynClass::Bre(delta), ring.n(), robots, id_rmin)).unwrap_or(0);
    let heuristic = ring.prefix_len() as u64 + 4 * periodic;
    let own = bound_for(&BoundParams::new(class, ring.n(), robots, id_rmin)).unwrap_or(0);
    heuristic.max(own)
}

/// Per-round view reconstructed from a trace: states at Look time.
struct LookStates {
    states: BTreeMap<RobotId, RobotState>,
}

impl LookStates {
    fn initial(ids: &[RobotId]) -> Self {
        Self { states: ids.iter().map(|&id| (id, RobotState::Righter)).collect() }
    }

    fn advance(&mut self, ev: &TraceEvent) {
        for rec in &ev.robots {
            self.states.insert(rec.id, rec.state);
        }
    }
}

/// Check the protocol's structural invariants on a trace.
pub fn monitor_invariants(trace: &Trace) -> Vec<Violation> {
    let ids = &trace.header.ids;
    let robots = trace.header.robots;
    let Some(&min_id) = ids.iter().min() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut push = |invariant, round, robot| out.push(Violation { invariant, round, robot });

    let mut look = LookStates::initial(ids);
    let mut was_min: BTreeSet<RobotId> = BTreeSet::new();
    let mut left_right_moving: BTreeSet<RobotId> = BTreeSet::new();
    let mut left_righter: BTreeSet<RobotId> = BTreeSet::new();
    let mut left_waiting: BTreeSet<RobotId> = BTreeSet::new();
    let mut was_waiting: BTreeSet<RobotId> = BTreeSet::new();
    let mut turned_away: BTreeSet<RobotId> = BTreeSet::new();
    let mut tower_episodes = 0usize;
    let mut in_tower = false;

    for ev in &trace.events {
        let t = ev.round;

        // (c) towerMin at Look time of round t.
        let tower_now = ev.robots.iter().any(|min_rec| {
            look.states.get(&min_rec.id) == Some(&RobotState::MinWaitingWalker)
                && ev
                    .robots
                    .iter()
                    .filter(|r| r.node == min_rec.node && look.states.get(&r.id) == Some(&RobotState::WaitingWalker))
                    .count()
                    + 3
                    == robots
        });
        if tower_now && !in_tower {
            tower_episodes += 1;
            if tower_episodes > 1 {
                push(Invariant::SingleTowerMin, t, None);
            }
        }
        in_tower = tower_now;

        // (e) direction history, checked against Look-time state.
        for rec in &ev.robots {
            let st = look.states[&rec.id];
            if st.is_potential_min_or_righter() && turned_away.contains(&rec.id) {
                push(Invariant::RightDirectionHistory, t, Some(rec.id));
            }
        }

        for rec in &ev.robots {
            let id = rec.id;
            let st = rec.state;
            // (a)
            if st.is_min() && id != min_id {
                push(Invariant::MinIsSmallestId, t, Some(id));
            }
            // (b)
            if was_min.contains(&id) && !st.is_min() {
                push(Invariant::MinClosed, t, Some(id));
            }
            if st.is_min() {
                was_min.insert(id);
            }
            // (f)
            if st == RobotState::Righter && left_righter.contains(&id) {
                push(Invariant::NoStateReentry, t, Some(id));
            }
            if st != RobotState::Righter {
                left_righter.insert(id);
            }
            if st.is_potential_min_or_righter() && left_right_moving.contains(&id) {
                push(Invariant::NoStateReentry, t, Some(id));
            }
            if !st.is_potential_min_or_righter() {
                left_right_moving.insert(id);
            }
            if st.is_waiting() && left_waiting.contains(&id) {
                push(Invariant::NoStateReentry, t, Some(id));
            }
            if st.is_waiting() {
                was_waiting.insert(id);
            } else if was_waiting.contains(&id) {
                left_waiting.insert(id);
            }
            // (d)
            if st == RobotState::WaitingWalker {
                let anchor = ev
                    .robots
                    .iter()
                    .find(|r| r.state == RobotState::MinWaitingWalker && r.node == rec.node);
                let parked = anchor.is_some_and(|m| !m.moved) && !rec.moved;
                if !parked {
                    push(Invariant::WaitingWalkersParked, t, Some(id));
                }
            }
            if st == RobotState::MinWaitingWalker && rec.moved {
                push(Invariant::WaitingWalkersParked, t, Some(id));
            }
            if !rec.rule.eq(&crate::trace::Activity::Terminated) && rec.dir != Direction::Right {
                turned_away.insert(id);
            }
        }
        look.advance(ev);
    }
    out
}

/// Variant verdict plus invariant monitoring.
pub fn evaluate(trace: &Trace, bound: Option<u64>) -> Verdict {
    let mut v = check_variant(trace, bound);
    v.violations = monitor_invariants(trace);
    v
}
