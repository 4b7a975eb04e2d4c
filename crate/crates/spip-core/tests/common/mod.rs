//! Shared fixtures for the integration suites: the two-map worked instance
//! and seeded generators for small random instances, DAGs, and transition
//! systems. Everything here is deterministic in the seed arguments.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spip_core::dynamics::{AffineMap, LatticePoint, NoiseBound, TransformSet};
use spip_core::experiments::generate_transform_set;
use spip_core::pathspace::enumerate_paths;
use spip_core::reductions::{dag_path_count_oracle, Dag, TransitionSystem};
use spip_core::scalar::{rat, Rat};
use spip_core::SpipInstance;

/// Two half-scale maps with offsets (1,0) and (0,1), ε = 1/2, three steps
/// from the origin, target (1,0).
pub fn worked_instance() -> SpipInstance {
    let half = || [[rat(1, 2), rat(0, 1)], [rat(0, 1), rat(1, 2)]];
    let maps = vec![
        AffineMap::new(half(), [rat(1, 1), rat(0, 1)]).unwrap(),
        AffineMap::new(half(), [rat(0, 1), rat(1, 1)]).unwrap(),
    ];
    let ts = TransformSet::new(maps).unwrap();
    let noise = NoiseBound::with_default_grid(rat(1, 2)).unwrap();
    SpipInstance::new(ts, noise, 3, LatticePoint::ORIGIN).with_target(LatticePoint::new(1, 0))
}

/// The fixed three-step noise realization that walks the worked instance
/// through (0,0) → (1,−1) → (0,0) → (1,0) under code (1,2,1).
pub fn worked_deltas() -> Vec<[Rat; 2]> {
    vec![
        [rat(3, 10), rat(-2, 5)],
        [rat(-1, 5), rat(1, 5)],
        [rat(1, 10), rat(2, 5)],
    ]
}

/// Cap used by the small-instance generator; matches the equivalence
/// criteria's path-space ceiling.
pub const SMALL_INSTANCE_CAP: u64 = 100_000;

/// Seeded small instances whose full path space fits under
/// SMALL_INSTANCE_CAP, each with its target set to the modal endpoint.
/// Attempts whose census blows the cap are skipped, so the family stays
/// exhaustively checkable.
pub fn random_small_instances(count: usize, base_seed: u64) -> Vec<SpipInstance> {
    let eps_grid = [rat(1, 4), rat(2, 5), rat(1, 2), rat(3, 5)];
    let mut out = Vec::with_capacity(count);
    let mut attempt: u64 = 0;
    while out.len() < count {
        let seed = base_seed.wrapping_add(attempt);
        attempt += 1;
        let m = 2 + (seed % 2) as u32;
        let n = 3 + (seed % 3) as usize;
        let eps = eps_grid[(seed % 4) as usize].clone();
        let ts = generate_transform_set(m, seed);
        let noise = NoiseBound::with_default_grid(eps).unwrap();
        let inst = SpipInstance::new(ts, noise, n, LatticePoint::ORIGIN);
        let census = match enumerate_paths(&inst, SMALL_INSTANCE_CAP) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let target = census
            .endpoints
            .iter()
            .max_by_key(|&(point, count)| (count.clone(), (point.x, point.y)))
            .map(|(point, _)| *point)
            .expect("census of a nonempty path space");
        out.push(inst.with_target(target));
    }
    out
}

/// Seeded random DAGs with 4..=8 vertices, edges only from lower to higher
/// index, and at least one source-to-sink path.
pub fn random_dags(count: usize, base_seed: u64) -> Vec<Dag> {
    let mut out = Vec::with_capacity(count);
    let mut attempt: u64 = 0;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(attempt));
        attempt += 1;
        let vertices = rng.random_range(4..=8usize);
        let mut edges = Vec::new();
        for u in 0..vertices {
            for v in (u + 1)..vertices {
                if rng.random_bool(0.45) {
                    edges.push((u, v));
                }
            }
        }
        let dag = match Dag::new(vertices, edges, 0, vertices - 1) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let total: num_bigint::BigUint = dag_path_count_oracle(&dag).values().sum();
        if num_traits::Zero::is_zero(&total) {
            continue;
        }
        out.push(dag);
    }
    out
}

/// Seeded random transition systems with 3..=5 states, arbitrary ordered
/// transitions (cycles and self-loops included), and horizons 1..=5. The
/// unreachable cases stay in the family on purpose.
pub fn random_transition_systems(count: usize, base_seed: u64) -> Vec<TransitionSystem> {
    let mut out = Vec::with_capacity(count);
    let mut attempt: u64 = 0;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(attempt));
        attempt += 1;
        let states = rng.random_range(3..=5usize);
        let mut transitions = Vec::new();
        for u in 0..states {
            for v in 0..states {
                if rng.random_bool(0.25) {
                    transitions.push((u, v));
                }
            }
        }
        if transitions.is_empty() {
            continue;
        }
        let horizon = rng.random_range(1..=5usize);
        out.push(TransitionSystem::new(states, transitions, 0, states - 1, horizon).unwrap());
    }
    out
}
