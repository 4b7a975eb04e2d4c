//! The release gate. Each test exercises one numbered acceptance check at
//! its stated tolerance and time budget and prints a single PASS line; a
//! failed assertion is the FAIL.
//!
//!  1. fixed-noise replay of the worked instance, exact states, < 1 ms
//!  2. four-element branch set and the 512 growth bound, exact
//!  3. census = per-endpoint counts = dfs = mitm on 26 instances, < 60 s
//!  4. DAG embedding certified vs the path-count oracle, and transition
//!     reachability vs BFS, < 120 s
//!  5. endpoint-statistics identities and trends at N=1000 ×5 seeds, < 5 min
//!  6. size surface equals n·log2(m·ceil(10ε)) to 1e-9 on a 20×20 grid
//!  7. byte-identical outputs at 1, 4, and 8 worker threads
//!  8. branch/preimage duality over [-5,5]² × 20 random maps, < 30 s

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use spip_core::dynamics::{
    branch_set, preimage_set, replay_trajectory, AffineMap, LatticePoint, NoiseBound,
    SymbolicCode, Window,
};
use spip_core::experiments::{
    default_suite, generate_transform_set, run_suite, spearman, sweep_csv, sweep_surface,
    symbolic_freedom,
};
use spip_core::inversion::{invert_dfs, invert_mitm};
use spip_core::pathspace::{count_paths_to, enumerate_paths, growth_bounds};
use spip_core::reductions::{
    dag_path_count_oracle, embed_and_certify, reachability_oracle, reachable_via_spip,
    recommended_spacing,
};
use spip_core::dynamics::Trajectory;
use spip_core::scalar::{rat, Rat};

use common::{
    random_dags, random_small_instances, random_transition_systems, worked_deltas,
    worked_instance, SMALL_INSTANCE_CAP,
};

fn report(id: u32, elapsed: Duration, detail: &str) {
    println!("criterion {id}: PASS ({:.3} s) {detail}", elapsed.as_secs_f64());
}

#[test]
fn criterion_1_worked_replay() {
    let inst = worked_instance();
    let code = SymbolicCode::new(vec![1, 2, 1], 2).unwrap();
    let deltas = worked_deltas();
    // One warm-up replay so the timed run measures the arithmetic, not
    // first-touch page faults.
    replay_trajectory(&inst.ts, &code, inst.x0, &inst.noise, &deltas).unwrap();
    let start = Instant::now();
    let traj = replay_trajectory(&inst.ts, &code, inst.x0, &inst.noise, &deltas).unwrap();
    let elapsed = start.elapsed();
    let expected = vec![
        LatticePoint::new(0, 0),
        LatticePoint::new(1, -1),
        LatticePoint::new(0, 0),
        LatticePoint::new(1, 0),
    ];
    assert_eq!(traj.states, expected);
    assert!(
        elapsed < Duration::from_millis(1),
        "replay took {elapsed:?}, budget is 1 ms"
    );
    report(1, elapsed, "replay states (0,0) (1,-1) (0,0) (1,0)");
}

#[test]
fn criterion_2_branch_arithmetic() {
    let start = Instant::now();
    let half = || [[rat(1, 2), rat(0, 1)], [rat(0, 1), rat(1, 2)]];
    let map = AffineMap::new(half(), [rat(1, 1), rat(0, 1)]).unwrap();
    let noise = NoiseBound::with_default_grid(rat(1, 2)).unwrap();
    let branches = branch_set(&map, LatticePoint::ORIGIN, &noise);
    assert_eq!(branches.len(), 4);
    let bounds = growth_bounds(2, 4, 3);
    assert_eq!(bounds.bound_mkn, BigUint::from(512u32));
    report(2, start.elapsed(), "branch set of 4, growth bound 512");
}

fn solution_set(solutions: &[(SymbolicCode, Trajectory)]) -> BTreeSet<(Vec<u32>, Vec<LatticePoint>)> {
    solutions
        .iter()
        .map(|(c, t)| (c.symbols().to_vec(), t.states.clone()))
        .collect()
}

#[test]
fn criterion_3_count_oracle_equivalence() {
    let start = Instant::now();
    let mut family = vec![worked_instance()];
    family.extend(random_small_instances(25, 40_000));
    let mut pairs_checked = 0u64;
    for inst in &family {
        let census = enumerate_paths(inst, SMALL_INSTANCE_CAP).unwrap();
        for (endpoint, multiplicity) in &census.endpoints {
            let probe = inst.clone().with_target(*endpoint);
            let counted = count_paths_to(&probe, SMALL_INSTANCE_CAP).unwrap();
            assert_eq!(&counted, multiplicity, "endpoint {endpoint} disagrees");
            pairs_checked += 1;
        }
        let dfs = invert_dfs(inst, u64::MAX, SMALL_INSTANCE_CAP).unwrap();
        assert!(dfs.exhausted);
        let mitm = invert_mitm(inst, SMALL_INSTANCE_CAP).unwrap();
        assert_eq!(solution_set(&dfs.solutions), solution_set(&mitm.solutions));
        let target_count = census.endpoints[&inst.target.unwrap()].clone();
        assert_eq!(BigUint::from(dfs.solutions.len() as u64), target_count);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "equivalence sweep took {elapsed:?}, budget is 60 s"
    );
    report(
        3,
        elapsed,
        &format!(
            "26 instances, {pairs_checked} endpoint counts, dfs = mitm everywhere"
        ),
    );
}

#[test]
fn criterion_4_reduction_certification() {
    let start = Instant::now();
    let eps = rat(1, 4);
    // Wandering states stay on one axis under the collinear placement, but
    // dense 8-vertex graphs still push the layered DP past the small cap.
    let cap = 50_000_000;
    let mut total_paths = BigUint::from(0u32);
    for dag in random_dags(10, 70_000) {
        let spacing = recommended_spacing(dag.vertices() - 1);
        let cert = embed_and_certify(&dag, &eps, spacing, 3, cap).unwrap();
        assert!(cert.report.pass);
        assert!(cert.rounds_used <= 3);
        let oracle_total: BigUint = dag_path_count_oracle(&dag).values().sum();
        assert_eq!(cert.report.total_spip, oracle_total);
        assert_eq!(cert.report.total_oracle, oracle_total);
        total_paths += oracle_total;
    }
    let mut reachable = 0u32;
    for ts in random_transition_systems(20, 80_000) {
        let expected = reachability_oracle(&ts);
        let got = reachable_via_spip(&ts, &eps, cap).unwrap();
        assert_eq!(got, expected, "transition system disagrees with BFS");
        if expected {
            reachable += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(120),
        "certification took {elapsed:?}, budget is 120 s"
    );
    report(
        4,
        elapsed,
        &format!(
            "10 DAGs certified ({total_paths} paths), 20 transition systems ({reachable} reachable)"
        ),
    );
}

/// The eight published (entropy, transforms, freedom) rows the identity
/// check replays.
const PUBLISHED_ROWS: [(f64, u32, f64); 8] = [
    (2.71, 2, 2.71),
    (3.23, 4, 1.62),
    (3.23, 6, 1.25),
    (3.47, 8, 1.16),
    (3.57, 12, 1.00),
    (3.70, 20, 0.86),
    (3.85, 30, 0.79),
    (3.94, 40, 0.74),
];

#[test]
fn criterion_5_endpoint_statistics() {
    let start = Instant::now();
    for (entropy, m, freedom) in PUBLISHED_ROWS {
        let derived = symbolic_freedom(entropy, m);
        assert!(
            (derived - freedom).abs() <= 0.01,
            "freedom from H={entropy}, m={m}: {derived} vs {freedom}"
        );
    }
    // The seed replicates exist to stabilize each tier's estimate: a map
    // set's stationary entropy varies seed to seed by more than the upper
    // tiers' ladder increments, so the trend is read off replicate-averaged
    // tiers rather than raw per-run points.
    let mut steps_axis = Vec::new();
    let mut transforms_axis = Vec::new();
    let mut entropy_mean = vec![0.0; 8];
    let mut freedom_mean = vec![0.0; 8];
    for replicate in 0..5u64 {
        let cfgs = default_suite(1000, 1000 * (replicate + 1));
        let (metrics, _) = run_suite(&cfgs);
        for (tier, (cfg, m)) in cfgs.iter().zip(&metrics).enumerate() {
            assert!(
                m.entropy_bits <= (m.unique_endpoints as f64).log2() + 1e-9,
                "entropy above log2(unique): {m:?}"
            );
            if replicate == 0 {
                steps_axis.push(cfg.steps as f64);
                transforms_axis.push(cfg.transforms as f64);
            }
            entropy_mean[tier] += m.entropy_bits / 5.0;
            freedom_mean[tier] += m.symbolic_freedom / 5.0;
        }
    }
    let rho_steps = spearman(&steps_axis, &entropy_mean);
    let rho_freedom = spearman(&transforms_axis, &freedom_mean);
    assert!(rho_steps > 0.8, "entropy vs steps rho = {rho_steps}");
    assert!(rho_freedom < -0.8, "freedom vs transforms rho = {rho_freedom}");
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(300),
        "statistics run took {elapsed:?}, budget is 5 min"
    );
    report(
        5,
        elapsed,
        &format!(
            "40 runs, tier-mean rho(entropy, steps)={rho_steps:.3}, rho(freedom, m)={rho_freedom:.3}"
        ),
    );
}

#[test]
fn criterion_6_sweep_surface() {
    let start = Instant::now();
    let epsilons: Vec<Rat> = (1..=20).map(|j| rat(j, 20)).collect();
    let cells = sweep_surface(1, 20, &epsilons, 10);
    assert_eq!(cells.len(), 400);
    for cell in &cells {
        // Independent recomputation: ceil(10·j/20) = ceil(j/2) in integers.
        let j = (&cell.epsilon * rat(20, 1)).to_integer();
        let j = i64::try_from(&j).unwrap();
        let k = (j + 1) / 2;
        let expected = cell.n as f64 * ((10 * k) as f64).log2();
        assert!(
            (cell.log2_space - expected).abs() <= 1e-9,
            "cell n={} eps={} off: {} vs {expected}",
            cell.n,
            cell.epsilon,
            cell.log2_space
        );
    }
    report(6, start.elapsed(), "400 cells within 1e-9");
}

#[test]
fn criterion_7_thread_count_determinism() {
    let start = Instant::now();
    let mut csv_outputs = Vec::new();
    let mut json_outputs = Vec::new();
    let mut sweep_outputs = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let (csv, json, sweep) = pool.install(|| {
            let (_, csv) = run_suite(&default_suite(200, 42));
            let census = enumerate_paths(&worked_instance(), SMALL_INSTANCE_CAP).unwrap();
            let json = census.to_json().to_string();
            let epsilons: Vec<Rat> = (1..=10).map(|j| rat(j, 10)).collect();
            let sweep = sweep_csv(&sweep_surface(1, 10, &epsilons, 10));
            (csv, json, sweep)
        });
        csv_outputs.push(csv);
        json_outputs.push(json);
        sweep_outputs.push(sweep);
    }
    assert_eq!(csv_outputs[0], csv_outputs[1]);
    assert_eq!(csv_outputs[0], csv_outputs[2]);
    assert_eq!(json_outputs[0], json_outputs[1]);
    assert_eq!(json_outputs[0], json_outputs[2]);
    assert_eq!(sweep_outputs[0], sweep_outputs[1]);
    assert_eq!(sweep_outputs[0], sweep_outputs[2]);
    report(
        7,
        start.elapsed(),
        "suite CSV, census JSON, sweep CSV identical at 1/4/8 threads",
    );
}

#[test]
fn criterion_8_preimage_duality() {
    let start = Instant::now();
    let window = Window::centered(5);
    let eps_grid = [rat(1, 4), rat(2, 5), rat(1, 2), rat(3, 5)];
    let ts = generate_transform_set(20, 90_001);
    let mut pairs = 0u64;
    for sym in 1..=20u32 {
        let map = ts.map_for(sym);
        let noise = NoiseBound::with_default_grid(eps_grid[(sym % 4) as usize].clone()).unwrap();
        let mut forward = BTreeSet::new();
        for x in window.points() {
            for y in branch_set(map, x, &noise) {
                if window.contains(y) {
                    forward.insert((x, y));
                }
            }
        }
        let mut backward = BTreeSet::new();
        for y in window.points() {
            for x in preimage_set(map, y, &noise, &window).unwrap() {
                backward.insert((x, y));
            }
        }
        assert_eq!(forward, backward, "duality broke for map {sym}");
        pairs += forward.len() as u64;
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(30),
        "duality sweep took {elapsed:?}, budget is 30 s"
    );
    report(
        8,
        elapsed,
        &format!("20 maps, {pairs} dual pairs, zero discrepancies"),
    );
}
