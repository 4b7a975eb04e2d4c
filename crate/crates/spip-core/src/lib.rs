//! Exact workbench for symbolic path inversion over noisy contractive
//! lattice maps: step semantics, path-space enumeration and census, target
//! inversion, a path-counting reduction from DAGs, and the statistical
//! experiment harness behind the reported tables.
//!
//! Everything that touches system state is computed in arbitrary-precision
//! rational arithmetic; floating point appears only in reported metrics and
//! in random map generation (which rounds to exact rationals before use).

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod inversion;
pub mod pathspace;
pub mod reductions;
pub mod scalar;

pub use dynamics::{
    apply_with_noise, branch_contains, branch_count, branch_ranges, branch_set, forward_cone,
    preimage_set, replay_trajectory, sample_step, sample_trajectory, AffineMap, LatticePoint,
    NoiseBound, SymbolicCode, Trajectory, TransformSet, Window, DEFAULT_SAMPLE_DENOMINATOR,
};
pub use error::SpipError;
pub use experiments::{
    default_suite, generate_transform_set, grover_cost, run_metrics, run_suite, shannon_entropy,
    spearman, sweep_csv, sweep_surface, symbolic_freedom, RunConfig, RunMetrics,
    SearchCostEstimate, SweepCell,
};
pub use inversion::{
    invert_dfs, invert_mitm, invert_random, measure_dfs_cost, solution_to_json, verify_path,
    InversionResult, SearchCost,
};
pub use pathspace::{
    branching_stats, count_paths_to, endpoint_histogram_dp, enumerate_paths, growth_bounds,
    BoundReport, PathSpaceCensus, SpipInstance,
};
pub use reductions::{
    dag_path_count_oracle, embed_and_certify, embed_dag, embed_transition_system,
    reachability_oracle, reachable_via_spip, recommended_spacing, verify_dag_embedding,
    CertifiedEmbedding, Dag, EmbeddingReport, TransitionSystem, VertexEmbedding,
};
pub use scalar::{format_rat, parse_rat, rat, rat_int, Rat};
