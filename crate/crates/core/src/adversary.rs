//! Seeded generators for each dynamics class, and the adaptive
//! always-connected adversary that keeps two chosen robots apart.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `SeedableRng::seed_from_u64(seed)`, so a spec and seed pin the ring.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{Algorithm, RobotId};
use crate::ring::{
    edge_between, left_neighbor, right_neighbor, ring_distance, DynClass, EdgeId, EvolvingRing, NodeId, RingError,
    Schedule, Snapshot,
};
use crate::sim::{outcome_of, step_with, Configuration, RunOutcome, SimError};
use crate::trace::{Trace, TraceHeader};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("unsatisfiable generator spec: {0}")]
    Unsatisfiable(String),
    #[error("generated ring failed verification for class {0}")]
    PostCheck(DynClass),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("targets must be two distinct robots on distinct nodes")]
    BadTargets,
    #[error("unknown target robot {0}")]
    UnknownTarget(RobotId),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Per-round missing-edge policy for always-connected rings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AcPolicy {
    /// The missing edge advances by one position every `dwell` rounds.
    #[default]
    Rotating,
    /// A uniformly random edge (or none) is missing each round.
    Random,
    /// One fixed edge is missing forever.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    /// Cycle length; defaults depend on the class.
    pub cycle_len: Option<usize>,
    /// Eventual missing edge (COT); random when absent.
    pub kill_edge: Option<usize>,
    /// Round from which the eventual missing edge is gone (COT); random when absent.
    pub kill_round: Option<u64>,
    pub ac_policy: AcPolicy,
    /// Rounds each missing edge persists under the rotating policy.
    pub dwell: usize,
    /// Leading rounds with every edge absent (COT and RE only).
    pub blackout: usize,
    /// Probability that an edge is absent in a random round.
    pub absence: f64,
    /// Prefix length before the cycle (RE and COT); random when absent.
    pub prefix_len: Option<usize>,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            cycle_len: None,
            kill_edge: None,
            kill_round: None,
            ac_policy: AcPolicy::Rotating,
            dwell: 1,
            blackout: 0,
            absence: 0.3,
            prefix_len: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub class: DynClass,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: GenParams,
}

impl GeneratorSpec {
    pub fn new(class: DynClass, n: usize, seed: u64) -> Self {
        Self { class, n, seed, params: GenParams::default() }
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Build a ring of the requested class. The result is verified before it is
/// returned.
pub fn generate(spec: &GeneratorSpec) -> Result<EvolvingRing, GenError> {
    let n = spec.n;
    if n < crate::ring::MIN_RING_SIZE {
        return Err(RingError::TooSmall(n).into());
    }
    let p = &spec.params;
    if !(0.0..1.0).contains(&p.absence) {
        return Err(GenError::Unsatisfiable(format!("absence probability {} not in [0, 1)", p.absence)));
    }
    let mut rng = rng_for(spec.seed);
    let schedule = match spec.class {
        DynClass::St => Schedule { prefix: vec![], cycle: vec![Snapshot::full(n)] },
        DynClass::Bre(0) => return Err(GenError::Unsatisfiable("delta must be at least 1".into())),
        DynClass::Bre(delta) => gen_bre(n, delta as usize, p, &mut rng),
        DynClass::Re => gen_re(n, p, &mut rng),
        DynClass::Ac => gen_ac(n, p, &mut rng)?,
        DynClass::Cot => gen_cot(n, p, &mut rng)?,
    };
    let ring = EvolvingRing::new(n, schedule)?;
    if ring.verify_class(spec.class) {
        Ok(ring)
    } else {
        Err(GenError::PostCheck(spec.class))
    }
}

fn random_snapshot(n: usize, absence: f64, rng: &mut ChaCha8Rng) -> Snapshot {
    Snapshot::from_bits((0..n).map(|_| !rng.random_bool(absence)).collect())
}

/// Random cycle where each edge's absence runs are shorter than `delta`,
/// cyclically.
fn gen_bre(n: usize, delta: usize, p: &GenParams, rng: &mut ChaCha8Rng) -> Schedule {
    let len = p.cycle_len.unwrap_or_else(|| rng.random_range(delta.max(2)..=3 * delta + 2)).max(1);
    let mut cycle: Vec<Snapshot> = (0..len).map(|_| random_snapshot(n, p.absence, rng)).collect();
    for e in (0..n).map(EdgeId) {
        let mut gap = 0;
        // Two laps settle runs that wrap around the cycle end.
        for k in 0..2 * len {
            let s = &mut cycle[k % len];
            if s.is_present(e) {
                gap = 0;
            } else {
                gap += 1;
                if gap >= delta {
                    s.set(e, true);
                    gap = 0;
                }
            }
        }
    }
    Schedule { prefix: vec![], cycle }
}

fn ensure_each_edge_once(cycle: &mut [Snapshot], n: usize, rng: &mut ChaCha8Rng) {
    for e in (0..n).map(EdgeId) {
        if !cycle.iter().any(|s| s.is_present(e)) {
            let k = rng.random_range(0..cycle.len());
            cycle[k].set(e, true);
        }
    }
}

fn gen_re(n: usize, p: &GenParams, rng: &mut ChaCha8Rng) -> Schedule {
    let len = p.cycle_len.unwrap_or_else(|| rng.random_range(2..=2 * n)).max(1);
    let mut cycle: Vec<Snapshot> = (0..len).map(|_| random_snapshot(n, p.absence, rng)).collect();
    ensure_each_edge_once(&mut cycle, n, rng);

    let body = p.prefix_len.unwrap_or_else(|| rng.random_range(1..=4 * n));
    let mut prefix: Vec<Snapshot> = std::iter::repeat_with(|| Snapshot::empty(n)).take(p.blackout).collect();
    // Some edge stays absent for the whole non-blackout prefix.
    let hidden = EdgeId(rng.random_range(0..n));
    for _ in 0..body {
        let mut s = random_snapshot(n, p.absence, rng);
        s.set(hidden, false);
        prefix.push(s);
    }
    Schedule { prefix, cycle }
}

fn gen_ac(n: usize, p: &GenParams, rng: &mut ChaCha8Rng) -> Result<Schedule, GenError> {
    let dwell = p.dwell.max(1);
    let cycle = match p.ac_policy {
        AcPolicy::Rotating => {
            let len = p.cycle_len.unwrap_or(n * dwell).max(1);
            let offset = rng.random_range(0..n);
            let forward = rng.random_bool(0.5);
            (0..len)
                .map(|k| {
                    let step = k / dwell;
                    let e = if forward { (offset + step) % n } else { (offset + n * len - step) % n };
                    Snapshot::without(n, &[EdgeId(e)])
                })
                .collect()
        }
        AcPolicy::Random => {
            let len = p.cycle_len.unwrap_or_else(|| rng.random_range(n..=4 * n)).max(1);
            (0..len)
                .map(|_| {
                    let k = rng.random_range(0..=n);
                    if k == n {
                        Snapshot::full(n)
                    } else {
                        Snapshot::without(n, &[EdgeId(k)])
                    }
                })
                .collect()
        }
        AcPolicy::Fixed => {
            let e = match p.kill_edge {
                Some(e) if e >= n => return Err(RingError::EdgeOutOfRange { edge: e, n }.into()),
                Some(e) => e,
                None => rng.random_range(0..n),
            };
            vec![Snapshot::without(n, &[EdgeId(e)])]
        }
    };
    Ok(Schedule { prefix: vec![], cycle })
}

fn gen_cot(n: usize, p: &GenParams, rng: &mut ChaCha8Rng) -> Result<Schedule, GenError> {
    let kill = match p.kill_edge {
        Some(e) if e >= n => return Err(RingError::EdgeOutOfRange { edge: e, n }.into()),
        Some(e) => EdgeId(e),
        None => EdgeId(rng.random_range(0..n)),
    };
    let kill_round = p.kill_round.unwrap_or_else(|| rng.random_range(1..=8 * n as u64)) as usize;
    if kill_round == 0 {
        return Err(GenError::Unsatisfiable("kill round must be at least 1".into()));
    }
    if kill_round <= p.blackout {
        return Err(GenError::Unsatisfiable("kill round falls inside the blackout".into()));
    }
    let len = p.cycle_len.unwrap_or_else(|| rng.random_range(1..=2 * n)).max(1);
    let mut cycle: Vec<Snapshot> = (0..len).map(|_| random_snapshot(n, p.absence, rng)).collect();
    ensure_each_edge_once(&mut cycle, n, rng);
    for s in &mut cycle {
        s.set(kill, false);
    }
    ensure_each_edge_once_except(&mut cycle, n, kill, rng);

    let mut prefix: Vec<Snapshot> = Vec::with_capacity(kill_round);
    for t in 0..kill_round {
        if t < p.blackout {
            prefix.push(Snapshot::empty(n));
        } else {
            prefix.push(random_snapshot(n, p.absence, rng));
        }
    }
    // The killed edge belongs to the footprint.
    let last = prefix.len() - 1;
    prefix[last].set(kill, true);
    Ok(Schedule { prefix, cycle })
}

fn ensure_each_edge_once_except(cycle: &mut [Snapshot], n: usize, skip: EdgeId, rng: &mut ChaCha8Rng) {
    for e in (0..n).map(EdgeId).filter(|&e| e != skip) {
        if !cycle.iter().any(|s| s.is_present(e)) {
            let k = rng.random_range(0..cycle.len());
            cycle[k].set(e, true);
        }
    }
}

/// Random placement of `ids` on `n` nodes; robots may share nodes.
pub fn random_placement(ids: &[RobotId], n: usize, rng: &mut ChaCha8Rng) -> Vec<(RobotId, NodeId)> {
    ids.iter().map(|&id| (id, NodeId(rng.random_range(0..n)))).collect()
}

/// `count` distinct ids drawn from `1..=max_id`.
pub fn random_ids(count: usize, max_id: RobotId, rng: &mut ChaCha8Rng) -> Vec<RobotId> {
    let mut pool: Vec<RobotId> = (1..=max_id).collect();
    pool.shuffle(rng);
    pool.truncate(count);
    pool.sort_unstable();
    pool
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryOutcome {
    /// The emitted schedule: the rounds played, then the final snapshot forever.
    pub ring: EvolvingRing,
    pub trace: Trace,
    pub outcome: RunOutcome,
    /// First round at which the targets were found co-located, if ever.
    pub defeated_at: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct AdversaryTargets {
    pub r1: RobotId,
    pub r2: RobotId,
}

impl AdversaryTargets {
    /// The two largest ids.
    pub fn largest(ids: &[RobotId]) -> Option<Self> {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        let r2 = sorted.pop()?;
        let r1 = sorted.pop()?;
        Some(Self { r1, r2 })
    }
}

/// Build an always-connected schedule online so that `r1` and `r2` never
/// share a node.
///
/// Each round picks a snapshot from the targets' distance: adjacent targets
/// lose the edge between them, and targets two hops apart are simulated one
/// round ahead under the full ring, falling back to single-edge removals
/// when the look-ahead shows them meeting. Farther targets get the full ring.
pub fn adaptive_ac_adversary<A: Algorithm + ?Sized>(
    alg: &A,
    n: usize,
    placement: &[(RobotId, NodeId)],
    targets: &AdversaryTargets,
    horizon: u64,
) -> Result<AdversaryOutcome, AdversaryError> {
    if horizon == 0 {
        return Err(SimError::ZeroHorizon.into());
    }
    if n < crate::ring::MIN_RING_SIZE {
        return Err(RingError::TooSmall(n).into());
    }
    let mut config = Configuration::initial(n, placement)?;
    let p1 = config.position(targets.r1).ok_or(AdversaryError::UnknownTarget(targets.r1))?;
    let p2 = config.position(targets.r2).ok_or(AdversaryError::UnknownTarget(targets.r2))?;
    if targets.r1 == targets.r2 || p1 == p2 {
        return Err(AdversaryError::BadTargets);
    }

    let mut emitted: Vec<Snapshot> = Vec::new();
    let mut events = Vec::new();
    let mut defeated_at = None;

    while config.round < horizon && !config.all_terminated() {
        let prev = emitted.last();
        let snapshot = choose_snapshot(alg, &config, prev, targets)?;
        let (next, ev) = step_with(alg, &config, &snapshot, prev)?;
        emitted.push(snapshot);
        events.push(ev);
        config = next;
        let (a, b) = target_positions(&config, targets);
        if a == b {
            defeated_at = Some(config.round);
            break;
        }
    }

    let last = emitted.last().cloned().unwrap_or_else(|| Snapshot::full(n));
    let ring = EvolvingRing::new(n, Schedule { prefix: emitted, cycle: vec![last] })?;
    let header = TraceHeader {
        n,
        robots: config.robots.len(),
        ids: config.ids(),
        class_claim: Some(DynClass::Ac),
        seed: None,
        horizon,
    };
    let trace = Trace { header, events };
    let outcome = outcome_of(&trace, &config);
    Ok(AdversaryOutcome { ring, trace, outcome, defeated_at })
}

fn target_positions(config: &Configuration, t: &AdversaryTargets) -> (NodeId, NodeId) {
    let a = config.position(t.r1).expect("target present");
    let b = config.position(t.r2).expect("target present");
    (a, b)
}

fn keeps_apart<A: Algorithm + ?Sized>(
    alg: &A,
    config: &Configuration,
    snapshot: &Snapshot,
    prev: Option<&Snapshot>,
    targets: &AdversaryTargets,
) -> Result<bool, SimError> {
    let (fork, _) = step_with(alg, config, snapshot, prev)?;
    let (a, b) = target_positions(&fork, targets);
    Ok(a != b)
}

fn choose_snapshot<A: Algorithm + ?Sized>(
    alg: &A,
    config: &Configuration,
    prev: Option<&Snapshot>,
    targets: &AdversaryTargets,
) -> Result<Snapshot, SimError> {
    let n = config.n;
    let (a, b) = target_positions(config, targets);
    let d = ring_distance(a, b, n);
    if d == 1 {
        let e = edge_between(a, b, n).expect("adjacent nodes share an edge");
        return Ok(Snapshot::without(n, &[e]));
    }
    let full = Snapshot::full(n);
    if d > 2 || keeps_apart(alg, config, &full, prev, targets)? {
        return Ok(full);
    }
    // The look-ahead shows a meeting. Cut the near edge on each path shared
    // with a middle node first, then any other single edge.
    let mut candidates: Vec<EdgeId> = Vec::new();
    for mid in [right_neighbor(a, n), left_neighbor(a, n)] {
        if ring_distance(mid, b, n) == 1 {
            candidates.extend(edge_between(a, mid, n));
            candidates.extend(edge_between(mid, b, n));
        }
    }
    candidates.extend((0..n).map(EdgeId));
    let mut tried = std::collections::BTreeSet::new();
    for e in candidates {
        if !tried.insert(e) {
            continue;
        }
        let s = Snapshot::without(n, &[e]);
        if keeps_apart(alg, config, &s, prev, targets)? {
            return Ok(s);
        }
    }
    // No single removal works; play the near edge and let the caller report.
    let near = edge_between(a, right_neighbor(a, n), n).expect("neighbors share an edge");
    Ok(Snapshot::without(n, &[near]))
}
