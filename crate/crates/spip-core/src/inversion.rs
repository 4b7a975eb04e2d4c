//! Solvers for the inversion task: given maps, noise bound, endpoints, and a
//! length, recover valid (code, state-sequence) pairs. A path is valid iff
//! every step stays inside the exact branch set, so the verifier needs no
//! noise search.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use num_bigint::BigUint;
use rand::Rng;
use serde_json::json;

use crate::dynamics::{
    branch_ranges, forward_cone, preimage_set, sample_trajectory, LatticePoint, SymbolicCode,
    Trajectory, Window,
};
use crate::error::SpipError;
use crate::pathspace::SpipInstance;

/// Outcome of one solver run. `exhausted` means the whole search space was
/// covered, so `solutions` is the complete (deduplicated) set.
#[derive(Clone, Debug)]
pub struct InversionResult {
    pub solutions: Vec<(SymbolicCode, Trajectory)>,
    pub nodes_expanded: u128,
    pub wall_time_s: f64,
    pub exhausted: bool,
    /// Raw hits/trials for the sampling solver; None for exact solvers.
    pub hit_rate: Option<f64>,
}

/// Cost summary of an exhaustive walk that counts instead of storing, for
/// growth measurements where materializing every solution would not fit.
#[derive(Clone, Debug)]
pub struct SearchCost {
    pub solutions: BigUint,
    pub nodes_expanded: u128,
    pub wall_time_s: f64,
}

/// One solution as a JSON line value: {"code":[...],"states":[[x,y],...]}.
pub fn solution_to_json(code: &SymbolicCode, traj: &Trajectory) -> serde_json::Value {
    let states: Vec<serde_json::Value> = traj.states.iter().map(|p| json!([p.x, p.y])).collect();
    json!({"code": code.symbols(), "states": states})
}

/// Exact validity check: right length, right endpoints, and every transition
/// inside the branch set of the coded map.
pub fn verify_path(
    inst: &SpipInstance,
    code: &SymbolicCode,
    states: &[LatticePoint],
) -> Result<bool, SpipError> {
    if code.len() != inst.n || states.len() != inst.n + 1 {
        return Err(SpipError::LengthMismatch {
            expected_code: inst.n,
            expected_states: inst.n + 1,
            got_code: code.len(),
            got_states: states.len(),
        });
    }
    if states[0] != inst.x0 {
        return Ok(false);
    }
    if let Some(t) = inst.target {
        if states[inst.n] != t {
            return Ok(false);
        }
    }
    for (i, &sym) in code.symbols().iter().enumerate() {
        let [(xl, xh), (yl, yh)] = branch_ranges(inst.ts.map_for(sym), states[i], &inst.noise);
        let y = states[i + 1];
        if y.x < xl || y.x > xh || y.y < yl || y.y > yh {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-layer sets used to prune the search: `live[i]` holds exactly the
/// states that are forward-reachable from x₀ in i steps AND can still reach
/// the target in the remaining n−i steps. The prune is exact, so the walk
/// below it visits only nodes that extend to solutions.
fn feasible_layers(inst: &SpipInstance, cap: u64) -> Result<Vec<HashSet<LatticePoint>>, SpipError> {
    let target = inst.target.expect("pruning needs a target");
    let mut reach: Vec<HashSet<LatticePoint>> = Vec::with_capacity(inst.n + 1);
    let mut cur = HashSet::new();
    cur.insert(inst.x0);
    reach.push(cur);
    let mut work: u64 = 0;
    for _ in 0..inst.n {
        let prev = reach.last().unwrap();
        let mut next = HashSet::new();
        for &x in prev {
            for sym in 1..=inst.alphabet_len() {
                let [(xl, xh), (yl, yh)] = branch_ranges(inst.ts.map_for(sym), x, &inst.noise);
                work = work.saturating_add(((xh - xl + 1) as u64) * ((yh - yl + 1) as u64));
                if work > cap {
                    return Err(SpipError::CapExceeded {
                        cap: cap.to_string(),
                    });
                }
                for px in xl..=xh {
                    for py in yl..=yh {
                        next.insert(LatticePoint::new(px, py));
                    }
                }
            }
        }
        reach.push(next);
    }
    let mut live = reach.clone();
    live[inst.n] = if reach[inst.n].contains(&target) {
        HashSet::from([target])
    } else {
        HashSet::new()
    };
    for i in (0..inst.n).rev() {
        let mut kept = HashSet::new();
        for &x in &reach[i] {
            'sym: for sym in 1..=inst.alphabet_len() {
                let [(xl, xh), (yl, yh)] = branch_ranges(inst.ts.map_for(sym), x, &inst.noise);
                for px in xl..=xh {
                    for py in yl..=yh {
                        if live[i + 1].contains(&LatticePoint::new(px, py)) {
                            kept.insert(x);
                            break 'sym;
                        }
                    }
                }
            }
        }
        live[i] = kept;
    }
    Ok(live)
}

struct DfsState<'a> {
    inst: &'a SpipInstance,
    live: &'a [HashSet<LatticePoint>],
    cap: u64,
    max_solutions: u64,
    nodes: u128,
    found: u64,
    store: Option<Vec<(SymbolicCode, Trajectory)>>,
    code: Vec<u32>,
    states: Vec<LatticePoint>,
}

enum WalkEnd {
    Done,
    SolutionLimit,
}

impl DfsState<'_> {
    fn walk(&mut self, depth: usize, x: LatticePoint) -> Result<WalkEnd, SpipError> {
        self.nodes += 1;
        if self.nodes > self.cap as u128 {
            return Err(SpipError::CapExceeded {
                cap: self.cap.to_string(),
            });
        }
        if depth == self.inst.n {
            self.found += 1;
            if let Some(store) = &mut self.store {
                store.push((
                    SymbolicCode::new(self.code.clone(), self.inst.alphabet_len())
                        .expect("symbols come from the alphabet"),
                    Trajectory {
                        states: self.states.clone(),
                        noises: None,
                    },
                ));
            }
            if self.found >= self.max_solutions {
                return Ok(WalkEnd::SolutionLimit);
            }
            return Ok(WalkEnd::Done);
        }
        for sym in 1..=self.inst.alphabet_len() {
            let [(xl, xh), (yl, yh)] = branch_ranges(self.inst.ts.map_for(sym), x, &self.inst.noise);
            self.code.push(sym);
            for px in xl..=xh {
                for py in yl..=yh {
                    let y = LatticePoint::new(px, py);
                    if !self.live[depth + 1].contains(&y) {
                        continue;
                    }
                    self.states.push(y);
                    let end = self.walk(depth + 1, y)?;
                    self.states.pop();
                    if matches!(end, WalkEnd::SolutionLimit) {
                        self.code.pop();
                        return Ok(WalkEnd::SolutionLimit);
                    }
                }
            }
            self.code.pop();
        }
        Ok(WalkEnd::Done)
    }
}

/// Stored solutions (when requested), nodes expanded, solutions found, and
/// whether the walk ran to completion.
type DfsOutcome = (Option<Vec<(SymbolicCode, Trajectory)>>, u128, u64, bool);

fn dfs_walk(
    inst: &SpipInstance,
    max_solutions: u64,
    cap: u64,
    store: bool,
) -> Result<DfsOutcome, SpipError> {
    if inst.target.is_none() {
        return Err(SpipError::Parse("inversion needs an instance target".into()));
    }
    let live = feasible_layers(inst, cap)?;
    let mut st = DfsState {
        inst,
        live: &live,
        cap,
        max_solutions,
        nodes: 0,
        found: 0,
        store: if store { Some(Vec::new()) } else { None },
        code: Vec::new(),
        states: vec![inst.x0],
    };
    let end = if live[0].contains(&inst.x0) {
        st.walk(0, inst.x0)?
    } else {
        WalkEnd::Done
    };
    let exhausted = matches!(end, WalkEnd::Done);
    Ok((st.store, st.nodes, st.found, exhausted))
}

/// Depth-first search over codes × rounding outcomes, pruned by the exact
/// layer feasibility test. Stops after `max_solutions` verified solutions;
/// `exhausted` is set when the full (pruned) tree was covered.
pub fn invert_dfs(
    inst: &SpipInstance,
    max_solutions: u64,
    cap: u64,
) -> Result<InversionResult, SpipError> {
    let start = Instant::now();
    let (store, nodes, _, exhausted) = dfs_walk(inst, max_solutions, cap, true)?;
    let solutions = store.expect("storing walk");
    debug_assert!(solutions
        .iter()
        .all(|(c, t)| verify_path(inst, c, &t.states).unwrap()));
    Ok(InversionResult {
        solutions,
        nodes_expanded: nodes,
        wall_time_s: start.elapsed().as_secs_f64(),
        exhausted,
        hit_rate: None,
    })
}

/// The same exhaustive walk as invert_dfs, counting solutions instead of
/// storing them.
pub fn measure_dfs_cost(inst: &SpipInstance, cap: u64) -> Result<SearchCost, SpipError> {
    let start = Instant::now();
    let (_, nodes, found, exhausted) = dfs_walk(inst, u64::MAX, cap, false)?;
    assert!(exhausted, "unbounded max_solutions always exhausts");
    Ok(SearchCost {
        solutions: BigUint::from(found),
        nodes_expanded: nodes,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Backward preimage windows wider than this abort with WindowOverflow.
pub const MITM_MAX_WINDOW_CELLS: u128 = 4_000_000;

type PathTail = (Vec<u32>, Vec<LatticePoint>);

/// Meet-in-the-middle: forward-enumerate all half-depth prefixes, walk
/// preimages back from the target through the exact reachability envelope,
/// and join on the meeting layer. Always exhaustive on success; the result
/// solution set equals invert_dfs's.
pub fn invert_mitm(inst: &SpipInstance, cap: u64) -> Result<InversionResult, SpipError> {
    let start = Instant::now();
    let target = inst
        .target
        .ok_or_else(|| SpipError::Parse("inversion needs an instance target".into()))?;
    let h = inst.n / 2;
    let mut nodes: u128 = 0;

    // Forward prefixes x0 → layer h, keyed by the layer-h state.
    let mut forward: HashMap<LatticePoint, Vec<PathTail>> = HashMap::new();
    let mut stack: Vec<(usize, LatticePoint, Vec<u32>, Vec<LatticePoint>)> =
        vec![(0, inst.x0, Vec::new(), vec![inst.x0])];
    let mut stored: u64 = 0;
    while let Some((depth, x, code, states)) = stack.pop() {
        nodes += 1;
        if depth == h {
            stored += 1;
            if stored > cap {
                return Err(SpipError::CapExceeded {
                    cap: cap.to_string(),
                });
            }
            forward.entry(x).or_default().push((code, states));
            continue;
        }
        for sym in 1..=inst.alphabet_len() {
            let [(xl, xh), (yl, yh)] = branch_ranges(inst.ts.map_for(sym), x, &inst.noise);
            for px in xl..=xh {
                for py in yl..=yh {
                    let y = LatticePoint::new(px, py);
                    let mut c = code.clone();
                    c.push(sym);
                    let mut s = states.clone();
                    s.push(y);
                    stack.push((depth + 1, y, c, s));
                }
            }
        }
    }

    // Backward suffixes layer n → layer h. The forward reachability envelope
    // bounds every preimage window, so candidates never escape and the
    // backward sweep stays complete.
    let cone = forward_cone(&inst.ts, &inst.noise, inst.x0, inst.n);
    let mut backward: HashMap<LatticePoint, Vec<PathTail>> = HashMap::new();
    backward.insert(target, vec![(Vec::new(), Vec::new())]);
    for i in (h..inst.n).rev() {
        let window: Window = cone[i];
        if window.cells() > MITM_MAX_WINDOW_CELLS {
            return Err(SpipError::WindowOverflow {
                cells: window.cells(),
                limit: MITM_MAX_WINDOW_CELLS,
            });
        }
        let mut prev: HashMap<LatticePoint, Vec<PathTail>> = HashMap::new();
        for (y, tails) in &backward {
            for sym in 1..=inst.alphabet_len() {
                let pre = preimage_set(inst.ts.map_for(sym), *y, &inst.noise, &window)?;
                for x in pre {
                    nodes += 1;
                    for (tc, tsuf) in tails {
                        stored += 1;
                        if stored > cap {
                            return Err(SpipError::CapExceeded {
                                cap: cap.to_string(),
                            });
                        }
                        let mut c = Vec::with_capacity(tc.len() + 1);
                        c.push(sym);
                        c.extend_from_slice(tc);
                        let mut s = Vec::with_capacity(tsuf.len() + 1);
                        s.push(*y);
                        s.extend_from_slice(tsuf);
                        prev.entry(x).or_default().push((c, s));
                    }
                }
            }
        }
        backward = prev;
    }

    // Join on the meeting layer.
    let mut solutions: Vec<(SymbolicCode, Trajectory)> = Vec::new();
    let mut meet: Vec<&LatticePoint> = forward.keys().collect();
    meet.sort();
    for x in meet {
        let Some(tails) = backward.get(x) else {
            continue;
        };
        for (pc, ps) in &forward[x] {
            for (sc, ss) in tails {
                if solutions.len() as u64 >= cap {
                    return Err(SpipError::CapExceeded {
                        cap: cap.to_string(),
                    });
                }
                let mut code = Vec::with_capacity(inst.n);
                code.extend_from_slice(pc);
                code.extend_from_slice(sc);
                let mut states = Vec::with_capacity(inst.n + 1);
                states.extend_from_slice(ps);
                states.extend_from_slice(ss);
                let code = SymbolicCode::new(code, inst.alphabet_len())
                    .expect("symbols come from the alphabet");
                assert!(
                    verify_path(inst, &code, &states)?,
                    "joined path failed verification"
                );
                solutions.push((
                    code,
                    Trajectory {
                        states,
                        noises: None,
                    },
                ));
            }
        }
    }
    solutions.sort_by(|a, b| (a.0.symbols(), &a.1.states).cmp(&(b.0.symbols(), &b.1.states)));
    Ok(InversionResult {
        solutions,
        nodes_expanded: nodes,
        wall_time_s: start.elapsed().as_secs_f64(),
        exhausted: true,
        hit_rate: None,
    })
}

/// Blind sampling baseline: draw uniform codes, sample trajectories, keep
/// the ones that land on the target. Never exhaustive.
pub fn invert_random<R: Rng + ?Sized>(
    inst: &SpipInstance,
    trials: u64,
    rng: &mut R,
) -> Result<InversionResult, SpipError> {
    let start = Instant::now();
    let target = inst
        .target
        .ok_or_else(|| SpipError::Parse("inversion needs an instance target".into()))?;
    let m = inst.alphabet_len();
    let mut hits: u64 = 0;
    let mut seen: BTreeSet<(Vec<u32>, Vec<LatticePoint>)> = BTreeSet::new();
    let mut solutions = Vec::new();
    for _ in 0..trials {
        let symbols: Vec<u32> = (0..inst.n).map(|_| rng.random_range(1..=m)).collect();
        let code = SymbolicCode::new(symbols, m).expect("drawn from the alphabet");
        let traj = sample_trajectory(&inst.ts, &code, inst.x0, &inst.noise, rng);
        if traj.endpoint() == target {
            hits += 1;
            if seen.insert((code.symbols().to_vec(), traj.states.clone())) {
                solutions.push((code, traj));
            }
        }
    }
    Ok(InversionResult {
        solutions,
        nodes_expanded: (trials as u128) * (inst.n as u128),
        wall_time_s: start.elapsed().as_secs_f64(),
        exhausted: false,
        hit_rate: if trials > 0 {
            Some(hits as f64 / trials as f64)
        } else {
            None
        },
    })
}
