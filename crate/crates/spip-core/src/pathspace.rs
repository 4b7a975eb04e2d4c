//! Exhaustive enumeration of the symbolic path space at desk scale: the
//! census of all (code, rounded-trajectory) pairs, endpoint multiplicities,
//! per-step branching statistics, and the closed-form growth bounds.
//!
//! Two independent routes compute multiplicities: a depth-first walk over
//! codes and rounding outcomes, and a layered dynamic program. Tests hold
//! them equal; callers get whichever fits.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde_json::json;

use crate::dynamics::{
    branch_ranges, LatticePoint, NoiseBound, SymbolicCode, TransformSet,
};
use crate::error::SpipError;
use crate::scalar::{format_rat, rat, rat_int, Rat};

/// One inversion problem: maps, noise bound, path length, endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpipInstance {
    pub ts: TransformSet,
    pub noise: NoiseBound,
    pub n: usize,
    pub x0: LatticePoint,
    pub target: Option<LatticePoint>,
}

impl SpipInstance {
    pub fn new(ts: TransformSet, noise: NoiseBound, n: usize, x0: LatticePoint) -> SpipInstance {
        SpipInstance {
            ts,
            noise,
            n,
            x0,
            target: None,
        }
    }

    pub fn with_target(mut self, target: LatticePoint) -> SpipInstance {
        self.target = Some(target);
        self
    }

    pub fn alphabet_len(&self) -> u32 {
        self.ts.alphabet_len()
    }
}

/// Retained (code, states) lists are dropped beyond this many entries.
pub const DEFAULT_RETAIN_CAP: usize = 100_000;

/// Exhaustive record of a path space: counts, endpoint histogram, branching
/// statistics over every (state, symbol) visit, and optionally the paths
/// themselves (`None` when the retain cap was passed; never truncated).
#[derive(Clone, Debug)]
pub struct PathSpaceCensus {
    pub total_pairs: BigUint,
    pub endpoints: BTreeMap<LatticePoint, BigUint>,
    pub branch_min: Option<u64>,
    pub branch_max: Option<u64>,
    pub branch_mean: Option<Rat>,
    pub paths: Option<Vec<(SymbolicCode, Vec<LatticePoint>)>>,
}

impl PathSpaceCensus {
    /// Smallest branch size seen, defaulting to 1 on zero-length instances.
    pub fn observed_k(&self) -> u64 {
        self.branch_min.unwrap_or(1)
    }

    /// Census as JSON: counts as decimal strings, rationals as "p/q",
    /// endpoints sorted by coordinate.
    pub fn to_json(&self) -> serde_json::Value {
        let endpoints: Vec<serde_json::Value> = self
            .endpoints
            .iter()
            .map(|(p, c)| json!([p.x, p.y, c.to_string()]))
            .collect();
        json!({
            "total_pairs": self.total_pairs.to_string(),
            "endpoints": endpoints,
            "branch_min": self.branch_min.map(|v| format_rat(&rat_int(v as i64))),
            "branch_max": self.branch_max.map(|v| format_rat(&rat_int(v as i64))),
            "branch_mean": self.branch_mean.as_ref().map(format_rat),
        })
    }
}

struct EnumState<'a> {
    inst: &'a SpipInstance,
    cap: u64,
    total: u64,
    endpoints: BTreeMap<LatticePoint, u64>,
    branch_sizes_sum: u128,
    branch_visits: u64,
    branch_min: Option<u64>,
    branch_max: Option<u64>,
    retain: Vec<(SymbolicCode, Vec<LatticePoint>)>,
    retain_overflow: bool,
    code: Vec<u32>,
    states: Vec<LatticePoint>,
}

impl EnumState<'_> {
    fn dfs(&mut self, depth: usize, x: LatticePoint) -> Result<(), SpipError> {
        if depth == self.inst.n {
            self.total += 1;
            if self.total > self.cap {
                return Err(SpipError::CapExceeded {
                    cap: self.cap.to_string(),
                });
            }
            *self.endpoints.entry(x).or_insert(0) += 1;
            if !self.retain_overflow {
                if self.retain.len() < DEFAULT_RETAIN_CAP {
                    self.retain.push((
                        SymbolicCode::from_raw(self.code.clone()),
                        self.states.clone(),
                    ));
                } else {
                    self.retain_overflow = true;
                    self.retain.clear();
                }
            }
            return Ok(());
        }
        for sym in 1..=self.inst.alphabet_len() {
            let map = self.inst.ts.map_for(sym);
            let [(xl, xh), (yl, yh)] = branch_ranges(map, x, &self.inst.noise);
            let size = ((xh - xl + 1) as u64) * ((yh - yl + 1) as u64);
            self.branch_sizes_sum += size as u128;
            self.branch_visits += 1;
            self.branch_min = Some(self.branch_min.map_or(size, |m| m.min(size)));
            self.branch_max = Some(self.branch_max.map_or(size, |m| m.max(size)));
            self.code.push(sym);
            for px in xl..=xh {
                for py in yl..=yh {
                    let y = LatticePoint::new(px, py);
                    self.states.push(y);
                    self.dfs(depth + 1, y)?;
                    self.states.pop();
                }
            }
            self.code.pop();
        }
        Ok(())
    }
}

/// Walk every code in Σⁿ and, per step, every rounding outcome; count each
/// (code, state-sequence) pair once. Aborts with CapExceeded as soon as the
/// pair count passes `cap`.
pub fn enumerate_paths(inst: &SpipInstance, cap: u64) -> Result<PathSpaceCensus, SpipError> {
    let mut st = EnumState {
        inst,
        cap,
        total: 0,
        endpoints: BTreeMap::new(),
        branch_sizes_sum: 0,
        branch_visits: 0,
        branch_min: None,
        branch_max: None,
        retain: Vec::new(),
        retain_overflow: false,
        code: Vec::new(),
        states: vec![inst.x0],
    };
    st.dfs(0, inst.x0)?;
    let branch_mean = if st.branch_visits > 0 {
        Some(rat(st.branch_sizes_sum as i64, st.branch_visits as i64))
    } else {
        None
    };
    Ok(PathSpaceCensus {
        total_pairs: BigUint::from(st.total),
        endpoints: st
            .endpoints
            .into_iter()
            .map(|(p, c)| (p, BigUint::from(c)))
            .collect(),
        branch_min: st.branch_min,
        branch_max: st.branch_max,
        branch_mean,
        paths: if st.retain_overflow {
            None
        } else {
            Some(st.retain)
        },
    })
}

/// Endpoint multiplicities by layered dynamic programming: carry exact pair
/// counts per reachable state, one layer per step. `cap` bounds the summed
/// branch work, not the (possibly astronomical) counts.
pub fn endpoint_histogram_dp(
    inst: &SpipInstance,
    cap: u64,
) -> Result<BTreeMap<LatticePoint, BigUint>, SpipError> {
    let mut layer: HashMap<LatticePoint, BigUint> = HashMap::new();
    layer.insert(inst.x0, BigUint::one());
    let mut work: u64 = 0;
    for _ in 0..inst.n {
        let mut next: HashMap<LatticePoint, BigUint> = HashMap::new();
        for (x, count) in &layer {
            for sym in 1..=inst.alphabet_len() {
                let map = inst.ts.map_for(sym);
                let [(xl, xh), (yl, yh)] = branch_ranges(map, *x, &inst.noise);
                let cells = ((xh - xl + 1) as u64) * ((yh - yl + 1) as u64);
                work = work.saturating_add(cells);
                if work > cap {
                    return Err(SpipError::CapExceeded {
                        cap: cap.to_string(),
                    });
                }
                for px in xl..=xh {
                    for py in yl..=yh {
                        let y = LatticePoint::new(px, py);
                        *next.entry(y).or_insert_with(BigUint::zero) += count;
                    }
                }
            }
        }
        layer = next;
    }
    Ok(layer.into_iter().collect())
}

/// Exact number of (code, path) pairs from x₀ to the instance target.
pub fn count_paths_to(inst: &SpipInstance, cap: u64) -> Result<BigUint, SpipError> {
    let target = inst
        .target
        .ok_or_else(|| SpipError::Parse("count_paths_to needs an instance target".into()))?;
    let hist = endpoint_histogram_dp(inst, cap)?;
    Ok(hist.get(&target).cloned().unwrap_or_else(BigUint::zero))
}

/// Min/max/mean branch-set size over the given states × all symbols.
/// The mean is exact. Panics on an empty state list.
pub fn branching_stats(inst: &SpipInstance, states: &[LatticePoint]) -> (u64, u64, Rat) {
    assert!(!states.is_empty(), "branching stats need at least one state");
    let mut min = u64::MAX;
    let mut max = 0u64;
    let mut sum: u128 = 0;
    let mut visits: u64 = 0;
    for &x in states {
        for sym in 1..=inst.alphabet_len() {
            let map = inst.ts.map_for(sym);
            let [(xl, xh), (yl, yh)] = branch_ranges(map, x, &inst.noise);
            let size = ((xh - xl + 1) as u64) * ((yh - yl + 1) as u64);
            min = min.min(size);
            max = max.max(size);
            sum += size as u128;
            visits += 1;
        }
    }
    (min, max, rat(sum as i64, visits as i64))
}

/// The closed-form growth floors kⁿ and (m·k)ⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub k_lower: u64,
    pub bound_kn: BigUint,
    pub bound_mkn: BigUint,
}

pub fn growth_bounds(m: u64, k: u64, n: u64) -> BoundReport {
    let n32 = u32::try_from(n).expect("exponent fits u32");
    BoundReport {
        k_lower: k,
        bound_kn: BigUint::from(k).pow(n32),
        bound_mkn: BigUint::from(m * k).pow(n32),
    }
}
