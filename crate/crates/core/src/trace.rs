//! Round-by-round execution records and their JSON-lines encoding.
//!
//! A trace file starts with one header object, followed by one object per
//! executed round.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::protocol::{Direction, RobotId, RobotState, RuleId};
use crate::ring::{DynClass, NodeId, Snapshot};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace has no header line")]
    MissingHeader,
}

/// What a robot did in its Compute phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activity {
    Fired(RuleId),
    /// Already terminated before this round.
    Terminated,
    /// Computed without a rule label (non rule-based algorithms).
    Unlabeled,
}

impl Activity {
    pub fn rule(self) -> Option<RuleId> {
        match self {
            Activity::Fired(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activity::Fired(r) => write!(f, "{r}"),
            Activity::Terminated => f.write_str("terminated"),
            Activity::Unlabeled => f.write_str("-"),
        }
    }
}

impl Serialize for Activity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Activity::Fired(r) => serializer.serialize_str(r.name()),
            Activity::Terminated => serializer.serialize_str("terminated"),
            Activity::Unlabeled => serializer.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Activity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match Option::<String>::deserialize(deserializer)? {
            None => Ok(Activity::Unlabeled),
            Some(s) if s == "terminated" => Ok(Activity::Terminated),
            Some(s) => s.parse().map(Activity::Fired).map_err(serde::de::Error::custom),
        }
    }
}

/// One robot in one round. `node` is the position during Look; `state` and
/// `dir` are the values after Compute; `moved` tells whether the Move phase
/// crossed an edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RobotRecord {
    pub id: RobotId,
    pub node: NodeId,
    pub state: RobotState,
    pub dir: Direction,
    pub rule: Activity,
    pub moved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceEvent {
    pub round: u64,
    /// Edge presence in this round.
    pub edges: Snapshot,
    /// Sorted by robot id.
    pub robots: Vec<RobotRecord>,
}

impl TraceEvent {
    pub fn record(&self, id: RobotId) -> Option<&RobotRecord> {
        self.robots.iter().find(|r| r.id == id)
    }

    /// Position after the Move phase.
    pub fn end_node(rec: &RobotRecord, n: usize) -> NodeId {
        if !rec.moved {
            return rec.node;
        }
        match rec.dir {
            Direction::Right => crate::ring::right_neighbor(rec.node, n),
            Direction::Left => crate::ring::left_neighbor(rec.node, n),
            Direction::Bot => rec.node,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub n: usize,
    #[serde(rename = "R")]
    pub robots: usize,
    pub ids: Vec<RobotId>,
    pub class_claim: Option<DynClass>,
    pub seed: Option<u64>,
    pub horizon: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// Round at which each robot fired a termination rule.
    pub fn termination_rounds(&self) -> BTreeMap<RobotId, Option<u64>> {
        let mut out: BTreeMap<RobotId, Option<u64>> = self.header.ids.iter().map(|&id| (id, None)).collect();
        for ev in &self.events {
            for rec in &ev.robots {
                if let Activity::Fired(rule) = rec.rule {
                    if rule.is_termination() {
                        out.insert(rec.id, Some(ev.round));
                    }
                }
            }
        }
        out
    }

    /// Positions after the last executed round.
    pub fn final_positions(&self) -> BTreeMap<RobotId, NodeId> {
        match self.events.last() {
            None => BTreeMap::new(),
            Some(ev) => ev
                .robots
                .iter()
                .map(|r| (r.id, TraceEvent::end_node(r, self.header.n)))
                .collect(),
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for ev in &self.events {
            serde_json::to_writer(&mut out, ev)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON output is UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TraceError> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
        let header = match lines.next() {
            None => return Err(TraceError::MissingHeader),
            Some((i, line)) => parse_line::<TraceHeader>(i, &line?)?,
        };
        let mut events = Vec::new();
        for (i, line) in lines {
            events.push(parse_line::<TraceEvent>(i, &line?)?);
        }
        Ok(Self { header, events })
    }
}

fn parse_line<T: for<'de> Deserialize<'de>>(index: usize, line: &str) -> Result<T, TraceError> {
    serde_json::from_str(line).map_err(|e| TraceError::Parse { line: index + 1, message: e.to_string() })
}
