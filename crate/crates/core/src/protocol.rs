//! The gracefully degrading gathering protocol: robot variables, predicates,
//! the functions that update variables, and the ordered guarded rules.
//!
//! Everything here is a pure function of a [`View`]. A robot's view holds its
//! own variables plus frozen copies of every co-located robot captured in the
//! Look phase, so evaluating robots in any order yields the same result.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type RobotId = u32;

/// Sentinel for identifiers that have not been learned yet. Real ids are
/// strictly positive.
pub const UNSET: i64 = -1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("robot {0} has no enabled rule")]
    NoEnabledRule(RobotId),
    #[error("rule {rule} is not enabled for robot {robot}")]
    RuleNotEnabled { rule: RuleId, robot: RobotId },
    #[error("robot {0} is terminated and no longer computes")]
    Terminated(RobotId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RobotState {
    Righter,
    DumbSearcher,
    AwareSearcher,
    PotentialMin,
    WaitingWalker,
    MinWaitingWalker,
    HeadWalker,
    TailWalker,
    MinTailWalker,
    LeftWalker,
}

impl RobotState {
    pub const ALL: [RobotState; 10] = [
        RobotState::Righter,
        RobotState::DumbSearcher,
        RobotState::AwareSearcher,
        RobotState::PotentialMin,
        RobotState::WaitingWalker,
        RobotState::MinWaitingWalker,
        RobotState::HeadWalker,
        RobotState::TailWalker,
        RobotState::MinTailWalker,
        RobotState::LeftWalker,
    ];

    /// `minWaitingWalker` or `minTailWalker`: the robot knows it holds the
    /// smallest identifier.
    pub fn is_min(self) -> bool {
        matches!(self, RobotState::MinWaitingWalker | RobotState::MinTailWalker)
    }

    pub fn is_waiting(self) -> bool {
        matches!(self, RobotState::WaitingWalker | RobotState::MinWaitingWalker)
    }

    pub fn is_walker(self) -> bool {
        matches!(self, RobotState::HeadWalker | RobotState::TailWalker | RobotState::MinTailWalker)
    }

    pub fn is_searcher(self) -> bool {
        matches!(self, RobotState::DumbSearcher | RobotState::AwareSearcher)
    }

    pub fn is_potential_min_or_righter(self) -> bool {
        matches!(self, RobotState::PotentialMin | RobotState::Righter)
    }

    /// Robots still in the discovery phase (not walking, not waiting).
    pub fn is_not_walker(self) -> bool {
        matches!(
            self,
            RobotState::Righter | RobotState::PotentialMin | RobotState::DumbSearcher | RobotState::AwareSearcher
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            RobotState::Righter => "righter",
            RobotState::DumbSearcher => "dumbSearcher",
            RobotState::AwareSearcher => "awareSearcher",
            RobotState::PotentialMin => "potentialMin",
            RobotState::WaitingWalker => "waitingWalker",
            RobotState::MinWaitingWalker => "minWaitingWalker",
            RobotState::HeadWalker => "headWalker",
            RobotState::TailWalker => "tailWalker",
            RobotState::MinTailWalker => "minTailWalker",
            RobotState::LeftWalker => "leftWalker",
        }
    }
}

impl fmt::Display for RobotState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Left,
    /// Stay put.
    Bot,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Right => "right",
            Direction::Left => "left",
            Direction::Bot => "bot",
        })
    }
}

/// Which round an edge query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundRef {
    Current,
    Previous,
}

/// Guarded rules in dispatch priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Term1,
    Term2,
    T1,
    T2,
    T3,
    W1,
    K1,
    K2,
    K3,
    K4,
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
    M9,
    M10,
    M11,
}

impl RuleId {
    pub const ALL: [RuleId; 21] = [
        RuleId::Term1,
        RuleId::Term2,
        RuleId::T1,
        RuleId::T2,
        RuleId::T3,
        RuleId::W1,
        RuleId::K1,
        RuleId::K2,
        RuleId::K3,
        RuleId::K4,
        RuleId::M1,
        RuleId::M2,
        RuleId::M3,
        RuleId::M4,
        RuleId::M5,
        RuleId::M6,
        RuleId::M7,
        RuleId::M8,
        RuleId::M9,
        RuleId::M10,
        RuleId::M11,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Term1 => "Term1",
            RuleId::Term2 => "Term2",
            RuleId::T1 => "T1",
            RuleId::T2 => "T2",
            RuleId::T3 => "T3",
            RuleId::W1 => "W1",
            RuleId::K1 => "K1",
            RuleId::K2 => "K2",
            RuleId::K3 => "K3",
            RuleId::K4 => "K4",
            RuleId::M1 => "M1",
            RuleId::M2 => "M2",
            RuleId::M3 => "M3",
            RuleId::M4 => "M4",
            RuleId::M5 => "M5",
            RuleId::M6 => "M6",
            RuleId::M7 => "M7",
            RuleId::M8 => "M8",
            RuleId::M9 => "M9",
            RuleId::M10 => "M10",
            RuleId::M11 => "M11",
        }
    }

    pub fn is_termination(self) -> bool {
        matches!(self, RuleId::Term1 | RuleId::Term2)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown rule {s:?}"))
    }
}

/// Per-robot protocol variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RobotVars {
    pub id: RobotId,
    pub state: RobotState,
    pub dir: Direction,
    pub right_steps: u64,
    pub id_potential_min: i64,
    pub id_min: i64,
    pub walker_mate: BTreeSet<RobotId>,
    pub walk_steps: u64,
    pub id_head_walker: i64,
    pub terminated: bool,
}

impl RobotVars {
    pub fn new(id: RobotId) -> Self {
        Self {
            id,
            state: RobotState::Righter,
            dir: Direction::Right,
            right_steps: 0,
            id_potential_min: UNSET,
            id_min: UNSET,
            walker_mate: BTreeSet::new(),
            walk_steps: 0,
            id_head_walker: UNSET,
            terminated: false,
        }
    }

    fn id_i64(&self) -> i64 {
        i64::from(self.id)
    }
}

/// Adjacent-edge presence around the observing robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeView {
    pub right_current: bool,
    pub left_current: bool,
    pub right_previous: bool,
    pub left_previous: bool,
}

/// What one robot observes in a Look phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub me: RobotVars,
    /// Frozen copies of all other robots on the node, terminated ones included.
    pub mates: Vec<RobotVars>,
    pub edges: EdgeView,
    pub has_moved: bool,
    /// Ring size.
    pub n: usize,
    /// Number of robots in the system.
    pub robots: usize,
}

impl View {
    pub fn exists_edge(&self, dir: Direction, round: RoundRef) -> bool {
        match (dir, round) {
            (Direction::Right, RoundRef::Current) => self.edges.right_current,
            (Direction::Left, RoundRef::Current) => self.edges.left_current,
            (Direction::Right, RoundRef::Previous) => self.edges.right_previous,
            (Direction::Left, RoundRef::Previous) => self.edges.left_previous,
            (Direction::Bot, _) => false,
        }
    }

    pub fn mate_ids(&self) -> BTreeSet<RobotId> {
        self.mates.iter().map(|m| m.id).collect()
    }

    fn mate_count(&self) -> usize {
        self.mates.len()
    }

    /// Largest id among the robot and its mates.
    fn max_id_here(&self) -> RobotId {
        self.mates.iter().map(|m| m.id).fold(self.me.id, RobotId::max)
    }

    fn min_id_here(&self) -> RobotId {
        self.mates.iter().map(|m| m.id).fold(self.me.id, RobotId::min)
    }

    fn everyone(&self) -> impl Iterator<Item = &RobotVars> {
        std::iter::once(&self.me).chain(self.mates.iter())
    }
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

pub fn min_discovery(view: &View) -> bool {
    let me = &view.me;
    let id = me.id_i64();
    let beaten_righter = me.state == RobotState::PotentialMin
        && view.mates.iter().any(|m| m.state == RobotState::Righter && me.id < m.id);
    let named_min = view.mates.iter().any(|m| m.id_min == id);
    let below_potential = view.mates.iter().any(|m| {
        matches!(m.state, RobotState::DumbSearcher | RobotState::PotentialMin) && id < m.id_potential_min
    });
    let walked_enough = me.right_steps == 4 * u64::from(me.id) * view.n as u64;
    beaten_righter || named_min || below_potential || walked_enough
}

/// `(G_E(), G_EW())`.
pub fn gathering_predicates(view: &View) -> (bool, bool) {
    let k = view.mate_count();
    let g_e = k + 1 == view.robots;
    let g_ew = k + 2 == view.robots && view.everyone().any(|r| r.state.is_min());
    (g_e, g_ew)
}

fn head_walker_without_walker_mate(view: &View) -> bool {
    view.me.state == RobotState::HeadWalker
        && view.exists_edge(Direction::Left, RoundRef::Previous)
        && !view.has_moved
        && view.mate_ids() != view.me.walker_mate
}

fn head_or_tail_walker_end_discovery(view: &View) -> bool {
    view.me.state.is_walker() && view.me.walk_steps == view.n as u64
}

fn all_but_two_waiting_walker(view: &View) -> bool {
    view.mate_count() + 3 == view.robots && view.everyone().all(|r| r.state.is_waiting())
}

fn all_but_one_righter(view: &View) -> bool {
    view.mate_count() + 2 == view.robots && view.everyone().all(|r| r.state == RobotState::Righter)
}

fn dumb_searcher_min_revelation(view: &View) -> bool {
    view.me.state == RobotState::DumbSearcher
        && view
            .mates
            .iter()
            .any(|m| m.state == RobotState::Righter && i64::from(m.id) > view.me.id_potential_min)
}

// Pairwise predicates `P(r')` used under an existential over mates.

fn potential_min_or_searcher_with_min_waiting(me: &RobotVars, other: &RobotVars) -> bool {
    matches!(me.state, RobotState::PotentialMin | RobotState::DumbSearcher | RobotState::AwareSearcher)
        && other.state == RobotState::MinWaitingWalker
}

fn righter_with_min_waiting(me: &RobotVars, other: &RobotVars) -> bool {
    me.state == RobotState::Righter && other.state == RobotState::MinWaitingWalker
}

fn not_walker_with_head_walker(me: &RobotVars, other: &RobotVars) -> bool {
    me.state.is_not_walker() && other.state == RobotState::HeadWalker
}

fn not_walker_with_tail_walker(me: &RobotVars, other: &RobotVars) -> bool {
    me.state.is_not_walker() && other.state == RobotState::MinTailWalker
}

fn potential_min_with_aware_searcher(me: &RobotVars, other: &RobotVars) -> bool {
    me.state == RobotState::PotentialMin && other.state == RobotState::AwareSearcher
}

fn righter_with_searcher(me: &RobotVars, other: &RobotVars) -> bool {
    me.state == RobotState::Righter && other.state.is_searcher()
}

fn dumb_searcher_with_aware_searcher(me: &RobotVars, other: &RobotVars) -> bool {
    me.state == RobotState::DumbSearcher && other.state == RobotState::AwareSearcher
}

type PairPredicate = fn(&RobotVars, &RobotVars) -> bool;

/// The existential witness for a rule: the satisfying mate with the
/// smallest id.
pub fn select_witness(view: &View, pred: impl Fn(&RobotVars, &RobotVars) -> bool) -> Option<&RobotVars> {
    view.mates.iter().filter(|m| pred(&view.me, m)).min_by_key(|m| m.id)
}

fn exists(view: &View, pred: PairPredicate) -> bool {
    select_witness(view, pred).is_some()
}

/// Predicate of the rule's existential clause, for rules that have one.
fn witness_predicate(rule: RuleId) -> Option<PairPredicate> {
    Some(match rule {
        RuleId::K3 => potential_min_or_searcher_with_min_waiting,
        RuleId::K4 => righter_with_min_waiting,
        RuleId::M2 | RuleId::M3 => not_walker_with_head_walker,
        RuleId::M4 => not_walker_with_tail_walker,
        RuleId::M5 => potential_min_with_aware_searcher,
        RuleId::M7 => righter_with_searcher,
        RuleId::M10 => dumb_searcher_with_aware_searcher,
        _ => return None,
    })
}

/// Whether the guard of `rule` holds on `view`.
pub fn guard(rule: RuleId, view: &View) -> bool {
    let state = view.me.state;
    let right_now = view.exists_edge(Direction::Right, RoundRef::Current);
    match rule {
        RuleId::Term1 => gathering_predicates(view).0,
        RuleId::Term2 => gathering_predicates(view).1,
        RuleId::T1 => state == RobotState::LeftWalker,
        RuleId::T2 => head_walker_without_walker_mate(view),
        RuleId::T3 => head_or_tail_walker_end_discovery(view),
        RuleId::W1 => state.is_walker(),
        RuleId::K1 => all_but_two_waiting_walker(view),
        RuleId::K2 => state.is_waiting(),
        RuleId::K3 => exists(view, potential_min_or_searcher_with_min_waiting),
        RuleId::K4 => exists(view, righter_with_min_waiting) && right_now,
        RuleId::M1 => state.is_potential_min_or_righter() && min_discovery(view),
        RuleId::M2 => exists(view, not_walker_with_head_walker) && right_now,
        RuleId::M3 => exists(view, not_walker_with_head_walker),
        RuleId::M4 => exists(view, not_walker_with_tail_walker),
        RuleId::M5 => exists(view, potential_min_with_aware_searcher),
        RuleId::M6 => all_but_one_righter(view),
        RuleId::M7 => exists(view, righter_with_searcher),
        RuleId::M8 => state.is_potential_min_or_righter(),
        RuleId::M9 => dumb_searcher_min_revelation(view),
        RuleId::M10 => exists(view, dumb_searcher_with_aware_searcher),
        RuleId::M11 => state.is_searcher(),
    }
}

/// The first rule, in priority order, whose guard holds.
pub fn first_enabled_rule(view: &View) -> Result<RuleId, ProtocolError> {
    if view.me.terminated {
        return Err(ProtocolError::Terminated(view.me.id));
    }
    RuleId::ALL
        .into_iter()
        .find(|&r| guard(r, view))
        .ok_or(ProtocolError::NoEnabledRule(view.me.id))
}

// ---------------------------------------------------------------------------
// Functions
// ---------------------------------------------------------------------------

fn walk(vars: &mut RobotVars, view: &View) {
    let mates = view.mate_ids();
    let is_head = vars.id_i64() == vars.id_head_walker;
    let head_here = mates.iter().any(|&m| i64::from(m) == vars.id_head_walker);
    let wait = (is_head && vars.walker_mate != mates) || (!is_head && head_here);
    vars.dir = if wait { Direction::Bot } else { Direction::Right };
    if vars.dir == Direction::Right && view.exists_edge(Direction::Right, RoundRef::Current) {
        vars.walk_steps += 1;
    }
}

fn initiate_walk(vars: &mut RobotVars, view: &View) {
    vars.id_head_walker = i64::from(view.max_id_here());
    vars.walker_mate = view.mate_ids();
    vars.state = if vars.id_i64() == vars.id_head_walker {
        RobotState::HeadWalker
    } else if vars.state == RobotState::MinWaitingWalker {
        RobotState::MinTailWalker
    } else {
        RobotState::TailWalker
    };
}

fn become_waiting_walker(vars: &mut RobotVars, witness: &RobotVars) {
    vars.state = RobotState::WaitingWalker;
    vars.id_potential_min = witness.id_i64();
    vars.id_min = witness.id_i64();
    vars.dir = Direction::Bot;
}

fn become_min_waiting_walker(vars: &mut RobotVars) {
    vars.state = RobotState::MinWaitingWalker;
    vars.id_potential_min = vars.id_i64();
    vars.id_min = vars.id_i64();
    vars.dir = Direction::Bot;
}

fn become_aware_searcher(vars: &mut RobotVars, witness: &RobotVars) {
    let learned = if witness.state == RobotState::DumbSearcher {
        witness.id_potential_min
    } else {
        witness.id_min
    };
    vars.state = RobotState::AwareSearcher;
    vars.dir = Direction::Right;
    vars.id_potential_min = learned;
    vars.id_min = learned;
}

fn become_tail_walker(vars: &mut RobotVars, witness: &RobotVars) {
    vars.state = RobotState::TailWalker;
    vars.id_potential_min = witness.id_potential_min;
    vars.id_min = witness.id_min;
    vars.id_head_walker = witness.id_head_walker;
    vars.walker_mate = witness.walker_mate.clone();
    vars.walk_steps = witness.walk_steps;
}

fn move_right(vars: &mut RobotVars, view: &View) {
    vars.dir = Direction::Right;
    if view.exists_edge(Direction::Right, RoundRef::Current) {
        vars.right_steps += 1;
    }
}

fn initiate_search(vars: &mut RobotVars, view: &View) {
    vars.id_potential_min = i64::from(view.min_id_here());
    vars.state = if vars.id_i64() == vars.id_potential_min {
        RobotState::PotentialMin
    } else {
        RobotState::DumbSearcher
    };
    // A righter always considers the right direction here.
    if vars.state == RobotState::PotentialMin && view.exists_edge(Direction::Right, RoundRef::Current) {
        vars.right_steps += 1;
    }
}

fn search(vars: &mut RobotVars, view: &View) {
    if !view.mates.is_empty() {
        vars.dir = if vars.id == view.max_id_here() {
            Direction::Left
        } else {
            Direction::Right
        };
    }
}

/// Execute the action of `rule` on the viewing robot and return its new
/// variables.
pub fn apply_rule(rule: RuleId, view: &View) -> Result<RobotVars, ProtocolError> {
    if view.me.terminated {
        return Err(ProtocolError::Terminated(view.me.id));
    }
    if !guard(rule, view) {
        return Err(ProtocolError::RuleNotEnabled { rule, robot: view.me.id });
    }
    let witness = witness_predicate(rule).and_then(|p| select_witness(view, p)).cloned();
    let witness = || witness.as_ref().expect("guard established a witness");
    let mut vars = view.me.clone();
    match rule {
        RuleId::Term1 | RuleId::Term2 => vars.terminated = true,
        RuleId::T1 => vars.dir = Direction::Left,
        RuleId::T2 => {
            vars.state = RobotState::LeftWalker;
            vars.dir = Direction::Bot;
        }
        RuleId::T3 | RuleId::K2 => vars.dir = Direction::Bot,
        RuleId::W1 => walk(&mut vars, view),
        RuleId::K1 => initiate_walk(&mut vars, view),
        RuleId::K3 => become_waiting_walker(&mut vars, witness()),
        RuleId::K4 | RuleId::M2 => become_aware_searcher(&mut vars, witness()),
        RuleId::M1 => become_min_waiting_walker(&mut vars),
        RuleId::M3 => {
            become_aware_searcher(&mut vars, witness());
            vars.dir = Direction::Bot;
        }
        RuleId::M4 => {
            become_tail_walker(&mut vars, witness());
            walk(&mut vars, view);
        }
        RuleId::M5 | RuleId::M7 | RuleId::M10 => {
            become_aware_searcher(&mut vars, witness());
            search(&mut vars, view);
        }
        RuleId::M6 => initiate_search(&mut vars, view),
        RuleId::M8 => move_right(&mut vars, view),
        RuleId::M9 => {
            let me = view.me.clone();
            become_aware_searcher(&mut vars, &me);
            search(&mut vars, view);
        }
        RuleId::M11 => search(&mut vars, view),
    }
    Ok(vars)
}

/// Result of one robot's Compute phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub vars: RobotVars,
    /// Rule fired, when the algorithm is rule-based.
    pub rule: Option<RuleId>,
}

/// A deterministic robot algorithm: a pure map from a view to new variables.
pub trait Algorithm {
    fn compute(&self, view: &View) -> Result<Decision, ProtocolError>;
}

/// The gracefully degrading gathering protocol.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gdg;

impl Algorithm for Gdg {
    fn compute(&self, view: &View) -> Result<Decision, ProtocolError> {
        let rule = first_enabled_rule(view)?;
        let vars = apply_rule(rule, view)?;
        Ok(Decision { vars, rule: Some(rule) })
    }
}

/// Robots that never move.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeverMove;

impl Algorithm for NeverMove {
    fn compute(&self, view: &View) -> Result<Decision, ProtocolError> {
        let mut vars = view.me.clone();
        vars.dir = Direction::Bot;
        Ok(Decision { vars, rule: None })
    }
}
