//! Fixed workloads shared by the benchmarks.

use gdg_core::adversary::{generate, random_ids, random_placement, rng_for, GeneratorSpec};
use gdg_core::protocol::RobotId;
use gdg_core::ring::{DynClass, EvolvingRing, NodeId};

pub struct Workload {
    pub ring: EvolvingRing,
    pub placement: Vec<(RobotId, NodeId)>,
}

/// A reproducible ring and placement for the given class and sizes.
pub fn workload(class: DynClass, n: usize, robots: usize, seed: u64) -> Workload {
    let ring = generate(&GeneratorSpec::new(class, n, seed)).expect("benchmark spec is satisfiable");
    let mut rng = rng_for(seed ^ 0x5eed);
    let ids = random_ids(robots, 32, &mut rng);
    let placement = random_placement(&ids, n, &mut rng);
    Workload { ring, placement }
}
