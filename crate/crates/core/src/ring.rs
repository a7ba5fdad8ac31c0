//! Dynamic rings as eventually-periodic evolving graphs.
//!
//! A ring of `n` nodes has edges `0..n`, where edge `i` joins node `i` and
//! node `(i + 1) mod n`. Moving *right* from a node means increasing the index.
//! The infinite snapshot sequence is stored as a finite prefix followed by a
//! cycle repeated forever, which makes recurrence and window properties
//! decidable.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Smallest ring the model admits.
pub const MIN_RING_SIZE: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("ring size {0} is below the minimum of {MIN_RING_SIZE}")]
    TooSmall(usize),
    #[error("snapshot {index} has length {len}, expected {n}")]
    SnapshotLength { index: usize, len: usize, n: usize },
    #[error("schedule cycle must contain at least one snapshot")]
    EmptyCycle,
    #[error("invalid interval: start {start} > end {end}")]
    InvalidInterval { start: u64, end: u64 },
    #[error("ring sizes differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("edge {edge} out of range for ring of size {n}")]
    EdgeOutOfRange { edge: usize, n: usize },
    #[error("bit value {0} is not 0 or 1")]
    BadBit(u64),
    #[error("malformed schedule document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Edge on the right port of `v`.
pub fn right_edge_of(v: NodeId, n: usize) -> EdgeId {
    EdgeId(v.0 % n)
}

/// Edge on the left port of `v`.
pub fn left_edge_of(v: NodeId, n: usize) -> EdgeId {
    EdgeId((v.0 + n - 1) % n)
}

pub fn right_neighbor(v: NodeId, n: usize) -> NodeId {
    NodeId((v.0 + 1) % n)
}

pub fn left_neighbor(v: NodeId, n: usize) -> NodeId {
    NodeId((v.0 + n - 1) % n)
}

/// Hop distance between two nodes in the ring footprint.
pub fn ring_distance(u: NodeId, v: NodeId, n: usize) -> usize {
    let d = (v.0 + n - u.0) % n;
    d.min(n - d)
}

/// The edge joining two adjacent nodes, if they are adjacent.
pub fn edge_between(u: NodeId, v: NodeId, n: usize) -> Option<EdgeId> {
    if right_neighbor(u, n) == v {
        Some(right_edge_of(u, n))
    } else if left_neighbor(u, n) == v {
        Some(left_edge_of(u, n))
    } else {
        None
    }
}

/// Nodes strictly between `u` and `v` walking rightward from `u`.
pub fn seg(u: NodeId, v: NodeId, n: usize) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut cur = right_neighbor(u, n);
    while cur != v && cur != u {
        out.push(cur);
        cur = right_neighbor(cur, n);
    }
    out
}

/// Edge presence for one round.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Snapshot {
    present: Vec<bool>,
}

impl Snapshot {
    pub fn full(n: usize) -> Self {
        Self { present: vec![true; n] }
    }

    pub fn empty(n: usize) -> Self {
        Self { present: vec![false; n] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { present: bits }
    }

    /// Full ring minus the listed edges.
    pub fn without(n: usize, missing: &[EdgeId]) -> Self {
        let mut s = Self::full(n);
        for e in missing {
            s.present[e.0] = false;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.present.is_empty()
    }

    pub fn is_present(&self, e: EdgeId) -> bool {
        self.present[e.0]
    }

    pub fn set(&mut self, e: EdgeId, present: bool) {
        self.present[e.0] = present;
    }

    pub fn bits(&self) -> &[bool] {
        &self.present
    }

    pub fn absent_count(&self) -> usize {
        self.present.iter().filter(|p| !**p).count()
    }

    pub fn absent_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, p)| !**p)
            .map(|(i, _)| EdgeId(i))
    }

    /// A snapshot of a ring is connected iff at most one edge is missing.
    pub fn is_connected(&self) -> bool {
        self.absent_count() <= 1
    }
}

impl Serialize for Snapshot {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let bits: Vec<u8> = self.present.iter().map(|&b| u8::from(b)).collect();
        bits.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Snapshot {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<u64>::deserialize(deserializer)?;
        let present = raw
            .into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(RingError::BadBit(other))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { present })
    }
}

/// Finite prefix followed by a cycle repeated forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub prefix: Vec<Snapshot>,
    pub cycle: Vec<Snapshot>,
}

impl Schedule {
    pub fn at(&self, t: u64) -> &Snapshot {
        let t = t as usize;
        if t < self.prefix.len() {
            &self.prefix[t]
        } else {
            &self.cycle[(t - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn all_snapshots(&self) -> impl Iterator<Item = &Snapshot> {
        self.prefix.iter().chain(self.cycle.iter())
    }

    /// Re-express the schedule with a prefix of exactly `len` rounds,
    /// rotating the cycle so every round keeps its snapshot.
    fn unrolled_to(&self, len: usize) -> Schedule {
        let len = len.max(self.prefix.len());
        let prefix: Vec<Snapshot> = (0..len).map(|t| self.at(t as u64).clone()).collect();
        let cycle = (0..self.cycle.len())
            .map(|k| self.at((len + k) as u64).clone())
            .collect();
        Schedule { prefix, cycle }
    }
}

/// Time interval for edge removal. `From` extends to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interval {
    Empty,
    Closed { start: u64, end: u64 },
    From { start: u64 },
}

/// Dynamics classes of evolving rings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DynClass {
    Cot,
    Re,
    Bre(u32),
    Ac,
    St,
}

impl DynClass {
    pub fn tag(&self) -> &'static str {
        match self {
            DynClass::Cot => "cot",
            DynClass::Re => "re",
            DynClass::Bre(_) => "bre",
            DynClass::Ac => "ac",
            DynClass::St => "st",
        }
    }
}

impl fmt::Display for DynClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynClass::Bre(d) => write!(f, "bre:{d}"),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for DynClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (tag, arg) = match lower.split_once(':') {
            Some((t, a)) => (t, Some(a)),
            None => (lower.as_str(), None),
        };
        match (tag, arg) {
            ("cot", None) => Ok(DynClass::Cot),
            ("re", None) => Ok(DynClass::Re),
            ("ac", None) => Ok(DynClass::Ac),
            ("st", None) => Ok(DynClass::St),
            ("bre", Some(d)) => {
                let d: u32 = d.parse().map_err(|_| format!("bad delta in {s:?}"))?;
                if d == 0 {
                    return Err("delta must be at least 1".into());
                }
                Ok(DynClass::Bre(d))
            }
            ("bre", None) => Err("bre needs a delta, e.g. bre:3".into()),
            _ => Err(format!("unknown dynamics class {s:?}")),
        }
    }
}

impl Serialize for DynClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DynClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An eventually-periodic evolving graph over a ring footprint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolvingRing {
    n: usize,
    schedule: Schedule,
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    n: usize,
    prefix: Vec<Snapshot>,
    cycle: Vec<Snapshot>,
}

impl EvolvingRing {
    pub fn new(n: usize, schedule: Schedule) -> Result<Self, RingError> {
        if n < MIN_RING_SIZE {
            return Err(RingError::TooSmall(n));
        }
        if schedule.cycle.is_empty() {
            return Err(RingError::EmptyCycle);
        }
        for (index, s) in schedule.all_snapshots().enumerate() {
            if s.len() != n {
                return Err(RingError::SnapshotLength { index, len: s.len(), n });
            }
        }
        Ok(Self { n, schedule })
    }

    /// Every edge present in every round.
    pub fn static_ring(n: usize) -> Result<Self, RingError> {
        Self::new(n, Schedule { prefix: vec![], cycle: vec![Snapshot::full(n)] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn prefix_len(&self) -> usize {
        self.schedule.prefix.len()
    }

    pub fn cycle_len(&self) -> usize {
        self.schedule.cycle.len()
    }

    pub fn snapshot_at(&self, t: u64) -> &Snapshot {
        self.schedule.at(t)
    }

    pub fn edge_present(&self, e: EdgeId, t: u64) -> bool {
        self.schedule.at(t).is_present(e)
    }

    /// Edges present at least once.
    pub fn footprint(&self) -> BTreeSet<EdgeId> {
        union_of(self.schedule.all_snapshots(), self.n)
    }

    /// Recurrent edges, i.e. those present somewhere in the cycle.
    pub fn eventual_underlying(&self) -> BTreeSet<EdgeId> {
        union_of(self.schedule.cycle.iter(), self.n)
    }

    /// Edges of the ring never present in the cycle.
    pub fn eventual_missing(&self) -> BTreeSet<EdgeId> {
        let rec = self.eventual_underlying();
        (0..self.n).map(EdgeId).filter(|e| !rec.contains(e)).collect()
    }

    pub fn remove_edge_interval(&self, e: EdgeId, interval: Interval) -> Result<Self, RingError> {
        if e.0 >= self.n {
            return Err(RingError::EdgeOutOfRange { edge: e.0, n: self.n });
        }
        let mut schedule = match interval {
            Interval::Empty => return Ok(self.clone()),
            Interval::Closed { start, end } if start > end => {
                return Err(RingError::InvalidInterval { start, end })
            }
            Interval::Closed { end, .. } => self.schedule.unrolled_to(end as usize + 1),
            Interval::From { start } => self.schedule.unrolled_to(start as usize),
        };
        let (start, end) = match interval {
            Interval::Closed { start, end } => (start as usize, end as usize),
            Interval::From { start } => (start as usize, usize::MAX),
            Interval::Empty => unreachable!(),
        };
        for (t, snap) in schedule.prefix.iter_mut().enumerate() {
            if t >= start && t <= end {
                snap.set(e, false);
            }
        }
        if matches!(interval, Interval::From { .. }) {
            for snap in schedule.cycle.iter_mut() {
                snap.set(e, false);
            }
        }
        Self::new(self.n, schedule)
    }

    /// Rounds `0..=t` from `self`, rounds after `t` from `other`.
    pub fn splice(&self, t: u64, other: &EvolvingRing) -> Result<Self, RingError> {
        if self.n != other.n {
            return Err(RingError::DimensionMismatch(self.n, other.n));
        }
        let tail = other.schedule.unrolled_to(t as usize + 1);
        let mut prefix: Vec<Snapshot> = (0..=t).map(|s| self.snapshot_at(s).clone()).collect();
        prefix.extend(tail.prefix.into_iter().skip(t as usize + 1));
        Self::new(self.n, Schedule { prefix, cycle: tail.cycle })
    }

    /// Round-by-round equality over the whole infinite sequence.
    pub fn equivalent(&self, other: &EvolvingRing) -> bool {
        if self.n != other.n {
            return false;
        }
        let span = self.prefix_len().max(other.prefix_len()) + lcm(self.cycle_len(), other.cycle_len());
        (0..span as u64).all(|t| self.snapshot_at(t) == other.snapshot_at(t))
    }

    pub fn verify_class(&self, class: DynClass) -> bool {
        match class {
            DynClass::St => self.schedule.all_snapshots().all(|s| s.absent_count() == 0),
            DynClass::Ac => self.schedule.all_snapshots().all(Snapshot::is_connected),
            DynClass::Re => self.eventual_missing().is_empty(),
            DynClass::Cot => self.eventual_missing().len() <= 1,
            DynClass::Bre(delta) => self.bounded_recurrence(delta as usize),
        }
    }

    /// Every ring edge appears in every window of `delta` consecutive
    /// rounds. An edge that never shows up still belongs to the ring, so it
    /// fails the check rather than being skipped. Windows starting at or after
    /// `prefix + cycle` repeat earlier ones, so checking starts in
    /// `[0, prefix + cycle)` is exhaustive.
    fn bounded_recurrence(&self, delta: usize) -> bool {
        if delta == 0 {
            return false;
        }
        let starts = self.prefix_len() + self.cycle_len();
        let span = (starts + delta - 1).max(self.prefix_len() + 2 * self.cycle_len());
        for e in (0..self.n).map(EdgeId) {
            // Length of the current run of absences ending at round t.
            let mut gap = 0usize;
            for t in 0..span {
                if self.edge_present(e, t as u64) {
                    gap = 0;
                } else {
                    gap += 1;
                    if gap >= delta {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> String {
        let doc = ScheduleDoc {
            n: self.n,
            prefix: self.schedule.prefix.clone(),
            cycle: self.schedule.cycle.clone(),
        };
        serde_json::to_string(&doc).expect("schedule serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, RingError> {
        let doc: ScheduleDoc =
            serde_json::from_str(text).map_err(|e| RingError::Format(e.to_string()))?;
        Self::new(doc.n, Schedule { prefix: doc.prefix, cycle: doc.cycle })
    }
}

fn union_of<'a>(snaps: impl Iterator<Item = &'a Snapshot>, n: usize) -> BTreeSet<EdgeId> {
    let mut seen = vec![false; n];
    for s in snaps {
        for (i, &p) in s.bits().iter().enumerate() {
            seen[i] |= p;
        }
    }
    seen.into_iter()
        .enumerate()
        .filter(|(_, p)| *p)
        .map(|(i, _)| EdgeId(i))
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
