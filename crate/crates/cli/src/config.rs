use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use gdg_core::adversary::{generate, random_placement, rng_for, GeneratorSpec};
use gdg_core::checkers::{bound_for, default_horizon, evaluate, BoundParams, Variant, Verdict};
use gdg_core::protocol::RobotId;
use gdg_core::ring::{DynClass, EvolvingRing, NodeId, MIN_RING_SIZE};
use gdg_core::sim::{run_labeled, RunLabels, MIN_ROBOTS};
use gdg_core::trace::Trace;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Problems with the requested experiment, reported before anything runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Usage(String),
    ClassMismatch { claimed: DynClass, path: PathBuf },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Usage(msg) => f.write_str(msg),
            ConfigError::ClassMismatch { claimed, path } => {
                write!(f, "schedule {} does not belong to class {claimed}", path.display())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn usage(msg: impl Into<String>) -> ConfigError {
    ConfigError::Usage(msg.into())
}

/// One experiment, as given on the command line or as a batch entry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    #[serde(rename = "R")]
    pub r: Option<usize>,
    pub ids: Option<Vec<RobotId>>,
    pub class: Option<String>,
    pub delta: Option<u32>,
    pub schedule: Option<PathBuf>,
    /// Node of each robot, in the order of `ids`.
    pub placement: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub horizon: Option<u64>,
}

/// A config with every default filled in and every constraint checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub class: DynClass,
    pub ring: EvolvingRing,
    pub ids: Vec<RobotId>,
    pub placement: Vec<(RobotId, NodeId)>,
    pub seed: u64,
    pub horizon: u64,
    pub bound: Option<u64>,
}

pub fn parse_class(text: &str, delta: Option<u32>) -> Result<DynClass, ConfigError> {
    let text = text.trim().to_ascii_lowercase();
    let class = match (text.as_str(), delta) {
        ("bre", Some(d)) => format!("bre:{d}"),
        ("bre", None) => return Err(usage("class bre needs --delta")),
        (_, Some(_)) => return Err(usage("--delta only applies to class bre")),
        _ => text,
    };
    class.parse::<DynClass>().map_err(|e| usage(e.to_string()))
}

pub fn validate_ids(ids: &[RobotId]) -> Result<(), ConfigError> {
    if ids.len() < MIN_ROBOTS {
        return Err(usage(format!("need at least {MIN_ROBOTS} robots, got {}", ids.len())));
    }
    if ids.contains(&0) {
        return Err(usage("robot ids must be positive"));
    }
    let distinct: BTreeSet<_> = ids.iter().collect();
    if distinct.len() != ids.len() {
        return Err(usage("robot ids must be distinct"));
    }
    Ok(())
}

/// Placement stream: ChaCha8 seeded with the run seed, stream 1. The ring
/// generator uses stream 0 of the same seed.
pub fn placement_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    let mut rng = rng_for(seed);
    rng.set_stream(1);
    rng
}

pub fn load_schedule(path: &Path) -> Result<EvolvingRing, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    EvolvingRing::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn explicit_placement(ids: &[RobotId], nodes: &[usize], n: usize) -> Result<Vec<(RobotId, NodeId)>, ConfigError> {
    if nodes.len() != ids.len() {
        return Err(usage(format!("placement lists {} nodes for {} robots", nodes.len(), ids.len())));
    }
    if let Some(v) = nodes.iter().find(|&&v| v >= n) {
        return Err(usage(format!("node {v} is outside a ring of size {n}")));
    }
    Ok(ids.iter().zip(nodes).map(|(&id, &v)| (id, NodeId(v))).collect())
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let class_text = self.class.as_deref().ok_or_else(|| usage("missing class"))?;
        let class = parse_class(class_text, self.delta)?;
        let ids = self.ids.clone().ok_or_else(|| usage("missing ids"))?;
        validate_ids(&ids)?;
        if let Some(r) = self.r {
            if r != ids.len() {
                return Err(usage(format!("R = {r} but {} ids were given", ids.len())));
            }
        }
        let seed = self.seed.unwrap_or(0);

        let ring = match &self.schedule {
            Some(path) => {
                let ring = load_schedule(path)?;
                if let Some(n) = self.n {
                    if n != ring.n() {
                        return Err(usage(format!("n = {n} but the schedule has {} nodes", ring.n())));
                    }
                }
                if !ring.verify_class(class) {
                    return Err(ConfigError::ClassMismatch { claimed: class, path: path.clone() });
                }
                ring
            }
            None => {
                let n = self.n.ok_or_else(|| usage("missing n"))?;
                if n < MIN_RING_SIZE {
                    return Err(usage(format!("ring size must be at least {MIN_RING_SIZE}, got {n}")));
                }
                generate(&GeneratorSpec::new(class, n, seed)).map_err(|e| usage(e.to_string()))?
            }
        };
        let n = ring.n();

        let placement = match &self.placement {
            Some(nodes) => explicit_placement(&ids, nodes, n)?,
            None => random_placement(&ids, n, &mut placement_rng(seed)),
        };

        let id_rmin = *ids.iter().min().expect("validated non-empty");
        let bound = bound_for(&BoundParams::new(class, n, ids.len(), id_rmin)).ok();
        let horizon = match self.horizon {
            Some(0) => return Err(usage("horizon must be positive")),
            Some(h) => h,
            None => default_horizon(&ring, class, ids.len(), id_rmin),
        };
        Ok(Resolved { class, ring, ids, placement, seed, horizon, bound })
    }
}

/// Result of simulating one resolved config.
pub struct Report {
    pub resolved: Resolved,
    pub trace: Trace,
    pub verdict: Verdict,
}

impl Report {
    pub fn expected(&self) -> Variant {
        Variant::expected_for(self.resolved.class)
    }

    pub fn ok(&self) -> bool {
        self.verdict.satisfied.contains(&self.expected())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "class": self.resolved.class,
            "n": self.resolved.ring.n(),
            "R": self.resolved.ids.len(),
            "ids": self.resolved.ids,
            "seed": self.resolved.seed,
            "horizon": self.resolved.horizon,
            "expected": self.expected(),
            "ok": self.ok(),
            "verdict": self.verdict,
        })
    }
}

pub fn simulate(resolved: Resolved) -> Report {
    let labels = RunLabels { class_claim: Some(resolved.class), seed: Some(resolved.seed) };
    let run = run_labeled(&resolved.ring, &resolved.placement, resolved.horizon, labels)
        .expect("resolved configs are valid simulations");
    let verdict = evaluate(&run.trace, resolved.bound);
    Report { resolved, trace: run.trace, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig {
            n: Some(8),
            ids: Some(vec![1, 2, 3, 5]),
            class: Some("st".into()),
            seed: Some(7),
            ..RunConfig::default()
        }
    }

    #[test]
    fn parses_classes_with_and_without_delta() {
        assert_eq!(parse_class("bre", Some(3)), Ok(DynClass::Bre(3)));
        assert_eq!(parse_class("BRE:2", None), Ok(DynClass::Bre(2)));
        assert_eq!(parse_class("ac", None), Ok(DynClass::Ac));
        assert!(parse_class("bre", None).is_err());
        assert!(parse_class("ac", Some(2)).is_err());
        assert!(parse_class("ring", None).is_err());
    }

    #[test]
    fn resolution_checks_parameters() {
        assert!(base().resolve().is_ok());
        assert!(RunConfig { ids: None, ..base() }.resolve().is_err());
        assert!(RunConfig { ids: Some(vec![1, 2, 3]), ..base() }.resolve().is_err());
        assert!(RunConfig { ids: Some(vec![1, 2, 2, 3]), ..base() }.resolve().is_err());
        assert!(RunConfig { ids: Some(vec![0, 2, 4, 3]), ..base() }.resolve().is_err());
        assert!(RunConfig { r: Some(5), ..base() }.resolve().is_err());
        assert!(RunConfig { n: Some(3), ..base() }.resolve().is_err());
        assert!(RunConfig { horizon: Some(0), ..base() }.resolve().is_err());
        assert!(RunConfig { placement: Some(vec![0, 1, 2]), ..base() }.resolve().is_err());
        assert!(RunConfig { placement: Some(vec![0, 1, 2, 8]), ..base() }.resolve().is_err());
    }

    #[test]
    fn seed_fixes_ring_and_placement() {
        let a = RunConfig { class: Some("cot".into()), ..base() }.resolve().unwrap();
        let b = RunConfig { class: Some("cot".into()), ..base() }.resolve().unwrap();
        assert_eq!(a.ring, b.ring);
        assert_eq!(a.placement, b.placement);
        let c = RunConfig { class: Some("cot".into()), seed: Some(8), ..base() }.resolve().unwrap();
        assert!(a.ring != c.ring || a.placement != c.placement);
    }

    #[test]
    fn static_example_gathers() {
        let report = simulate(base().resolve().unwrap());
        assert!(report.ok());
        assert!(report.verdict.satisfied.contains(&Variant::G));
    }
}
