//! One exact step of the system: apply a contractive affine map with bounded
//! noise and component-wise floor rounding over the integer lattice.
//!
//! All state-affecting arithmetic is exact. The common case (coefficient
//! denominators and the noise grid fitting machine words) runs on a scaled
//! i128 kernel; anything else falls back to full rational arithmetic. Both
//! paths compute identical values.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::SpipError;
use crate::scalar::{floor_i64, rat_int, sqrt_upper_bound, Rat};

/// A state on the two-dimensional integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        LatticePoint { x, y }
    }

    /// Squared Euclidean distance to another point.
    pub fn dist_sq(&self, other: &LatticePoint) -> u128 {
        let dx = (self.x - other.x) as i128;
        let dy = (self.y - other.y) as i128;
        (dx * dx + dy * dy) as u128
    }

    /// Chebyshev (L∞) distance to another point.
    pub fn linf_dist(&self, other: &LatticePoint) -> u64 {
        let dx = (self.x - other.x).unsigned_abs();
        let dy = (self.y - other.y).unsigned_abs();
        dx.max(dy)
    }
}

impl std::fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Map and noise numerators over one common denominator, for the i128 path.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ScaledMap {
    den: i64,
    a: [[i64; 2]; 2],
    b: [i64; 2],
}

fn to_scaled_i64(v: &Rat, den: i64) -> Option<i64> {
    let q = BigInt::from(den) / v.denom();
    (v.numer() * q).to_i64()
}

impl ScaledMap {
    fn build(a: &[[Rat; 2]; 2], b: &[Rat; 2]) -> Option<ScaledMap> {
        let mut den = BigInt::one();
        for row in a {
            for e in row {
                den = den.lcm(e.denom());
            }
        }
        for e in b {
            den = den.lcm(e.denom());
        }
        let den = den.to_i64()?;
        let mut sa = [[0i64; 2]; 2];
        for (r, row) in a.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                sa[r][c] = to_scaled_i64(e, den)?;
            }
        }
        let sb = [to_scaled_i64(&b[0], den)?, to_scaled_i64(&b[1], den)?];
        Some(ScaledMap { den, a: sa, b: sb })
    }

    /// Numerators of `A·x + b` over `self.den`, or None on (absurd) overflow.
    fn pre_floor_nums(&self, x: LatticePoint) -> Option<[i128; 2]> {
        let px = x.x as i128;
        let py = x.y as i128;
        let mut out = [0i128; 2];
        for (r, slot) in out.iter_mut().enumerate() {
            let t0 = (self.a[r][0] as i128).checked_mul(px)?;
            let t1 = (self.a[r][1] as i128).checked_mul(py)?;
            *slot = t0.checked_add(t1)?.checked_add(self.b[r] as i128)?;
        }
        Some(out)
    }
}

/// One contractive affine map `x ↦ ⌊A·x + b + δ⌋`.
///
/// Construction certifies `‖A‖₂ < 1` exactly: with `t = trace(AᵀA)` and
/// `d = det(AᵀA)`, both eigenvalues of `AᵀA` lie strictly below 1 iff
/// `t < 2` and `1 − t + d > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    a: [[Rat; 2]; 2],
    b: [Rat; 2],
    scaled: Option<ScaledMap>,
}

impl AffineMap {
    /// Build the map iff the exact contraction test passes.
    pub fn new(a: [[Rat; 2]; 2], b: [Rat; 2]) -> Result<AffineMap, SpipError> {
        let (t, d) = gram_trace_det(&a);
        if t < rat_int(2) && rat_int(1) - t + d > Rat::zero() {
            let scaled = ScaledMap::build(&a, &b);
            Ok(AffineMap { a, b, scaled })
        } else {
            Err(SpipError::NotContractive)
        }
    }

    pub fn matrix(&self) -> &[[Rat; 2]; 2] {
        &self.a
    }

    pub fn translation(&self) -> &[Rat; 2] {
        &self.b
    }

    /// Pre-floor image `A·x + b` of a lattice point, exact.
    pub fn pre_floor(&self, x: LatticePoint) -> [Rat; 2] {
        let px = rat_int(x.x);
        let py = rat_int(x.y);
        [
            &self.a[0][0] * &px + &self.a[0][1] * &py + &self.b[0],
            &self.a[1][0] * &px + &self.a[1][1] * &py + &self.b[1],
        ]
    }

    /// Rational `s` with `‖A‖₂ ≤ s`, tight to `2^-iters`, by exact bisection
    /// on the characteristic polynomial of `AᵀA`.
    pub fn contraction_bound(&self, iters: u32) -> Rat {
        let (t, d) = gram_trace_det(&self.a);
        let two = rat_int(2);
        let mut lo = Rat::zero();
        let mut hi = Rat::one();
        for _ in 0..iters {
            let mid = (&lo + &hi) / &two;
            // λmax(AᵀA) ≤ c  ⟺  c² − t·c + d ≥ 0  ∧  2c ≥ t
            let ge_vertex = &two * &mid >= t;
            let poly_ok = &mid * &mid - &t * &mid + &d >= Rat::zero();
            if ge_vertex && poly_ok {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        sqrt_upper_bound(&hi, iters)
    }
}

fn gram_trace_det(a: &[[Rat; 2]; 2]) -> (Rat, Rat) {
    let t = &a[0][0] * &a[0][0] + &a[0][1] * &a[0][1] + &a[1][0] * &a[1][0] + &a[1][1] * &a[1][1];
    let det_a = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
    let d = &det_a * &det_a;
    (t, d)
}

/// Noise bound ε with the exact sampling grid `{k/Q : −εQ ≤ k ≤ εQ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseBound {
    epsilon: Rat,
    sample_denominator: u64,
    grid_radius: i64,
}

/// Default sampling grid granularity `Q = 2³²`.
pub const DEFAULT_SAMPLE_DENOMINATOR: u64 = 1 << 32;

impl NoiseBound {
    pub fn new(epsilon: Rat, sample_denominator: u64) -> Result<NoiseBound, SpipError> {
        if epsilon.is_negative() {
            return Err(SpipError::InvalidNoise(format!(
                "epsilon {epsilon} is negative"
            )));
        }
        if sample_denominator < 2 {
            return Err(SpipError::InvalidNoise(format!(
                "sample denominator {sample_denominator} below 2"
            )));
        }
        let radius = (&epsilon * rat_int(sample_denominator as i64)).floor();
        let grid_radius = radius.to_integer().to_i64().ok_or_else(|| {
            SpipError::InvalidNoise("epsilon * Q overflows the sampling grid".into())
        })?;
        Ok(NoiseBound {
            epsilon,
            sample_denominator,
            grid_radius,
        })
    }

    /// Noise bound on the default grid `Q = 2³²`.
    pub fn with_default_grid(epsilon: Rat) -> Result<NoiseBound, SpipError> {
        NoiseBound::new(epsilon, DEFAULT_SAMPLE_DENOMINATOR)
    }

    /// Zero noise: every step lands exactly on `⌊A·x + b⌋`.
    pub fn zero() -> NoiseBound {
        NoiseBound::new(Rat::zero(), DEFAULT_SAMPLE_DENOMINATOR).unwrap()
    }

    pub fn epsilon(&self) -> &Rat {
        &self.epsilon
    }

    pub fn sample_denominator(&self) -> u64 {
        self.sample_denominator
    }

    /// Largest grid numerator: sampled components are `k/Q`, `|k| ≤ radius`.
    pub fn grid_radius(&self) -> i64 {
        self.grid_radius
    }

    /// Draw one δ component numerator uniformly from `[−radius, radius]`.
    fn sample_num<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        if self.grid_radius == 0 {
            0
        } else {
            rng.random_range(-self.grid_radius..=self.grid_radius)
        }
    }

    /// Draw a δ vector as grid numerators over `Q`.
    pub(crate) fn sample_nums<R: Rng + ?Sized>(&self, rng: &mut R) -> [i64; 2] {
        let kx = self.sample_num(rng);
        let ky = self.sample_num(rng);
        [kx, ky]
    }

    pub(crate) fn nums_to_delta(&self, nums: [i64; 2]) -> [Rat; 2] {
        let q = BigInt::from(self.sample_denominator);
        [
            Rat::new(BigInt::from(nums[0]), q.clone()),
            Rat::new(BigInt::from(nums[1]), q),
        ]
    }

    /// Exact check `|v| ≤ ε` for a noise component.
    pub fn admits(&self, v: &Rat) -> bool {
        v.abs() <= self.epsilon
    }
}

/// The indexed family 𝕋 of maps; the symbolic alphabet is `{1..m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformSet {
    maps: Vec<AffineMap>,
}

impl TransformSet {
    pub fn new(maps: Vec<AffineMap>) -> Result<TransformSet, SpipError> {
        if maps.is_empty() {
            return Err(SpipError::Parse("transform set must hold at least one map".into()));
        }
        Ok(TransformSet { maps })
    }

    /// Alphabet size m.
    pub fn alphabet_len(&self) -> u32 {
        self.maps.len() as u32
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    /// Map selected by a 1-based symbol. Panics on a symbol outside `[1, m]`;
    /// codes are validated at construction against the alphabet.
    pub fn map_for(&self, symbol: u32) -> &AffineMap {
        &self.maps[(symbol - 1) as usize]
    }
}

/// A sequence of 1-based transformation indices σ = (σ₀, …, σ_{n−1}).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicCode {
    symbols: Vec<u32>,
}

impl SymbolicCode {
    pub fn new(symbols: Vec<u32>, alphabet: u32) -> Result<SymbolicCode, SpipError> {
        for &s in &symbols {
            if s < 1 || s > alphabet {
                return Err(SpipError::InvalidCode {
                    symbol: s,
                    alphabet,
                });
            }
        }
        Ok(SymbolicCode { symbols })
    }

    pub(crate) fn from_raw(symbols: Vec<u32>) -> SymbolicCode {
        SymbolicCode { symbols }
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// States visited by one realization, with the sampled noise when known.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<LatticePoint>,
    pub noises: Option<Vec<[Rat; 2]>>,
}

impl Trajectory {
    pub fn endpoint(&self) -> LatticePoint {
        *self.states.last().expect("trajectory holds x0")
    }
}

/// Apply one map with an explicit noise vector: `⌊A·x + b + δ⌋`, exact.
pub fn apply_with_noise(map: &AffineMap, x: LatticePoint, delta: &[Rat; 2]) -> LatticePoint {
    if let Some(sm) = &map.scaled {
        if let Some(p) = apply_fast(sm, x, delta) {
            return p;
        }
    }
    let v = map.pre_floor(x);
    LatticePoint::new(floor_i64(&(&v[0] + &delta[0])), floor_i64(&(&v[1] + &delta[1])))
}

fn apply_fast(sm: &ScaledMap, x: LatticePoint, delta: &[Rat; 2]) -> Option<LatticePoint> {
    let nums = sm.pre_floor_nums(x)?;
    let den = sm.den as i128;
    let mut out = [0i64; 2];
    for c in 0..2 {
        let dn = delta[c].numer().to_i128()?;
        let dd = delta[c].denom().to_i128()?;
        let common = checked_lcm(den, dd)?;
        let v = nums[c].checked_mul(common / den)?;
        let dv = dn.checked_mul(common / dd)?;
        out[c] = v.checked_add(dv)?.div_euclid(common).to_i64()?;
    }
    Some(LatticePoint::new(out[0], out[1]))
}

/// Apply with a grid noise vector given as numerators over `Q`.
pub(crate) fn apply_grid_delta(
    map: &AffineMap,
    x: LatticePoint,
    noise: &NoiseBound,
    nums: [i64; 2],
) -> LatticePoint {
    if let Some(sm) = &map.scaled {
        if let Some(p) = apply_grid_fast(sm, x, noise.sample_denominator, nums) {
            return p;
        }
    }
    apply_with_noise(map, x, &noise.nums_to_delta(nums))
}

fn apply_grid_fast(
    sm: &ScaledMap,
    x: LatticePoint,
    q: u64,
    nums: [i64; 2],
) -> Option<LatticePoint> {
    let pf = sm.pre_floor_nums(x)?;
    let den = sm.den as i128;
    let q = q as i128;
    let common = checked_lcm(den, q)?;
    let mv = common / den;
    let md = common / q;
    let fx = pf[0].checked_mul(mv)?.checked_add((nums[0] as i128).checked_mul(md)?)?;
    let fy = pf[1].checked_mul(mv)?.checked_add((nums[1] as i128).checked_mul(md)?)?;
    Some(LatticePoint::new(
        fx.div_euclid(common).to_i64()?,
        fy.div_euclid(common).to_i64()?,
    ))
}

fn checked_lcm(a: i128, b: i128) -> Option<i128> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b)
}

/// Inclusive per-coordinate ranges `[⌊v_c − ε⌋, ⌊v_c + ε⌋]` of the branch set.
pub fn branch_ranges(map: &AffineMap, x: LatticePoint, noise: &NoiseBound) -> [(i64, i64); 2] {
    if let Some(sm) = &map.scaled {
        if let Some(r) = branch_ranges_fast(sm, x, noise) {
            return r;
        }
    }
    branch_ranges_reference(map, x, noise)
}

/// Pure-rational route for the branch ranges; kept as the fallback and as the
/// cross-check for the scaled kernel.
pub(crate) fn branch_ranges_reference(
    map: &AffineMap,
    x: LatticePoint,
    noise: &NoiseBound,
) -> [(i64, i64); 2] {
    let v = map.pre_floor(x);
    let eps = noise.epsilon();
    let mut out = [(0i64, 0i64); 2];
    for c in 0..2 {
        out[c] = (floor_i64(&(&v[c] - eps)), floor_i64(&(&v[c] + eps)));
    }
    out
}

fn branch_ranges_fast(
    sm: &ScaledMap,
    x: LatticePoint,
    noise: &NoiseBound,
) -> Option<[(i64, i64); 2]> {
    let nums = sm.pre_floor_nums(x)?;
    let den = sm.den as i128;
    let en = noise.epsilon().numer().to_i128()?;
    let ed = noise.epsilon().denom().to_i128()?;
    let common = checked_lcm(den, ed)?;
    let mv = common / den;
    let me = common / ed;
    let e = en.checked_mul(me)?;
    let mut out = [(0i64, 0i64); 2];
    for c in 0..2 {
        let v = nums[c].checked_mul(mv)?;
        let lo = v.checked_sub(e)?.div_euclid(common).to_i64()?;
        let hi = v.checked_add(e)?.div_euclid(common).to_i64()?;
        out[c] = (lo, hi);
    }
    Some(out)
}

/// The exact set `{⌊A·x + b + δ⌋ : δ ∈ [−ε, ε]²}`: the Cartesian product of
/// the two coordinate ranges, in row-major order.
pub fn branch_set(map: &AffineMap, x: LatticePoint, noise: &NoiseBound) -> Vec<LatticePoint> {
    let [(xl, xh), (yl, yh)] = branch_ranges(map, x, noise);
    let mut out = Vec::with_capacity(((xh - xl + 1) * (yh - yl + 1)) as usize);
    for px in xl..=xh {
        for py in yl..=yh {
            out.push(LatticePoint::new(px, py));
        }
    }
    out
}

/// Membership in the branch set without materializing it.
pub fn branch_contains(
    map: &AffineMap,
    x: LatticePoint,
    noise: &NoiseBound,
    y: LatticePoint,
) -> bool {
    let [(xl, xh), (yl, yh)] = branch_ranges(map, x, noise);
    xl <= y.x && y.x <= xh && yl <= y.y && y.y <= yh
}

/// Number of branch outcomes `(⌊v_x+ε⌋−⌊v_x−ε⌋+1)·(⌊v_y+ε⌋−⌊v_y−ε⌋+1)`.
pub fn branch_count(map: &AffineMap, x: LatticePoint, noise: &NoiseBound) -> u64 {
    let [(xl, xh), (yl, yh)] = branch_ranges(map, x, noise);
    ((xh - xl + 1) as u64) * ((yh - yl + 1) as u64)
}

/// One sampled step: δ drawn uniformly from the exact rational grid, then
/// `⌊A·x + b + δ⌋`. Deterministic given the stream state.
pub fn sample_step<R: Rng + ?Sized>(
    map: &AffineMap,
    x: LatticePoint,
    noise: &NoiseBound,
    rng: &mut R,
) -> (LatticePoint, [Rat; 2]) {
    let nums = noise.sample_nums(rng);
    let point = apply_grid_delta(map, x, noise, nums);
    (point, noise.nums_to_delta(nums))
}

/// Axis-aligned inclusive integer box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

impl Window {
    pub fn new(x_min: i64, x_max: i64, y_min: i64, y_max: i64) -> Window {
        Window {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// Square window `[-r, r]²`.
    pub fn centered(r: i64) -> Window {
        Window::new(-r, r, -r, r)
    }

    pub fn is_empty(&self) -> bool {
        self.x_min > self.x_max || self.y_min > self.y_max
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }

    pub fn cells(&self) -> u128 {
        if self.is_empty() {
            0
        } else {
            ((self.x_max - self.x_min + 1) as u128) * ((self.y_max - self.y_min + 1) as u128)
        }
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window::new(
            self.x_min.max(other.x_min),
            self.x_max.min(other.x_max),
            self.y_min.max(other.y_min),
            self.y_max.min(other.y_max),
        )
    }

    pub fn hull(&self, other: &Window) -> Window {
        Window::new(
            self.x_min.min(other.x_min),
            self.x_max.max(other.x_max),
            self.y_min.min(other.y_min),
            self.y_max.max(other.y_max),
        )
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (self.x_min..=self.x_max)
            .flat_map(move |x| (self.y_min..=self.y_max).map(move |y| LatticePoint::new(x, y)))
    }
}

/// All `x` in the window with `y ∈ branch_set(map, x, noise)`.
///
/// Candidates are narrowed by mapping the admissible pre-floor slab through
/// `A⁻¹` when `A` is invertible; every candidate is then membership-tested
/// exactly, so the result is exact either way.
pub fn preimage_set(
    map: &AffineMap,
    y: LatticePoint,
    noise: &NoiseBound,
    window: &Window,
) -> Result<Vec<LatticePoint>, SpipError> {
    if window.is_empty() {
        return Err(SpipError::EmptyWindow);
    }
    let search = candidate_box(map, y, noise)
        .map(|b| b.intersect(window))
        .unwrap_or(*window);
    let mut out = Vec::new();
    for x in search.points() {
        if branch_contains(map, x, noise, y) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Bounding box of `A⁻¹(S − b)` for the closed slab
/// `S = [y − ε, y + 1 + ε]²`; None when `A` is singular.
fn candidate_box(map: &AffineMap, y: LatticePoint, noise: &NoiseBound) -> Option<Window> {
    let a = &map.a;
    let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
    if det.is_zero() {
        return None;
    }
    let eps = noise.epsilon();
    let lo = [
        rat_int(y.x) - eps - &map.b[0],
        rat_int(y.y) - eps - &map.b[1],
    ];
    let hi = [
        rat_int(y.x) + rat_int(1) + eps - &map.b[0],
        rat_int(y.y) + rat_int(1) + eps - &map.b[1],
    ];
    // A⁻¹ = [[a11, −a01], [−a10, a00]] / det
    let inv = [
        [&a[1][1] / &det, -(&a[0][1] / &det)],
        [-(&a[1][0] / &det), &a[0][0] / &det],
    ];
    let mut x_min: Option<Rat> = None;
    let mut x_max: Option<Rat> = None;
    let mut y_min: Option<Rat> = None;
    let mut y_max: Option<Rat> = None;
    for cx in [&lo[0], &hi[0]] {
        for cy in [&lo[1], &hi[1]] {
            let px = &inv[0][0] * cx + &inv[0][1] * cy;
            let py = &inv[1][0] * cx + &inv[1][1] * cy;
            upd_min(&mut x_min, &px);
            upd_max(&mut x_max, &px);
            upd_min(&mut y_min, &py);
            upd_max(&mut y_max, &py);
        }
    }
    Some(Window::new(
        floor_i64(&x_min.unwrap()),
        floor_i64(&(x_max.unwrap() + rat_int(1))),
        floor_i64(&y_min.unwrap()),
        floor_i64(&(y_max.unwrap() + rat_int(1))),
    ))
}

fn upd_min(slot: &mut Option<Rat>, v: &Rat) {
    match slot {
        Some(cur) if &*cur <= v => {}
        _ => *slot = Some(v.clone()),
    }
}

fn upd_max(slot: &mut Option<Rat>, v: &Rat) {
    match slot {
        Some(cur) if &*cur >= v => {}
        _ => *slot = Some(v.clone()),
    }
}

/// Sample a full trajectory under a symbolic code, recording the noise.
pub fn sample_trajectory<R: Rng + ?Sized>(
    ts: &TransformSet,
    code: &SymbolicCode,
    x0: LatticePoint,
    noise: &NoiseBound,
    rng: &mut R,
) -> Trajectory {
    let mut states = Vec::with_capacity(code.len() + 1);
    let mut noises = Vec::with_capacity(code.len());
    states.push(x0);
    let mut cur = x0;
    for &sym in code.symbols() {
        let (next, delta) = sample_step(ts.map_for(sym), cur, noise, rng);
        states.push(next);
        noises.push(delta);
        cur = next;
    }
    Trajectory {
        states,
        noises: Some(noises),
    }
}

/// Replay a fixed realization: apply the given δ list, checking each
/// component against the noise bound.
pub fn replay_trajectory(
    ts: &TransformSet,
    code: &SymbolicCode,
    x0: LatticePoint,
    noise: &NoiseBound,
    deltas: &[[Rat; 2]],
) -> Result<Trajectory, SpipError> {
    if deltas.len() != code.len() {
        return Err(SpipError::LengthMismatch {
            expected_code: code.len(),
            expected_states: code.len() + 1,
            got_code: code.len(),
            got_states: deltas.len() + 1,
        });
    }
    for d in deltas {
        for v in d {
            if !noise.admits(v) {
                return Err(SpipError::NoiseOutOfBounds {
                    value: v.to_string(),
                    epsilon: noise.epsilon().to_string(),
                });
            }
        }
    }
    let mut states = Vec::with_capacity(code.len() + 1);
    states.push(x0);
    let mut cur = x0;
    for (&sym, d) in code.symbols().iter().zip(deltas) {
        cur = apply_with_noise(ts.map_for(sym), cur, d);
        states.push(cur);
    }
    Ok(Trajectory {
        states,
        noises: Some(deltas.to_vec()),
    })
}

/// Exact interval-arithmetic envelope of the reachable states: `boxes[i]`
/// contains every state any realization can occupy at step `i`.
pub fn forward_cone(
    ts: &TransformSet,
    noise: &NoiseBound,
    start: LatticePoint,
    steps: usize,
) -> Vec<Window> {
    let mut boxes = Vec::with_capacity(steps + 1);
    let mut cur = Window::new(start.x, start.x, start.y, start.y);
    boxes.push(cur);
    for _ in 0..steps {
        let mut next: Option<Window> = None;
        for map in ts.maps() {
            let img = interval_image(map, noise, &cur);
            next = Some(match next {
                Some(w) => w.hull(&img),
                None => img,
            });
        }
        cur = next.expect("transform set is non-empty");
        boxes.push(cur);
    }
    boxes
}

fn interval_image(map: &AffineMap, noise: &NoiseBound, b: &Window) -> Window {
    let eps = noise.epsilon();
    let xs = [rat_int(b.x_min), rat_int(b.x_max)];
    let ys = [rat_int(b.y_min), rat_int(b.y_max)];
    let mut lo = [Rat::zero(), Rat::zero()];
    let mut hi = [Rat::zero(), Rat::zero()];
    for c in 0..2 {
        let (xl, xh) = interval_scale(&map.a[c][0], &xs[0], &xs[1]);
        let (yl, yh) = interval_scale(&map.a[c][1], &ys[0], &ys[1]);
        lo[c] = xl + yl + &map.b[c] - eps;
        hi[c] = xh + yh + &map.b[c] + eps;
    }
    Window::new(
        floor_i64(&lo[0]),
        floor_i64(&hi[0]),
        floor_i64(&lo[1]),
        floor_i64(&hi[1]),
    )
}

fn interval_scale(a: &Rat, lo: &Rat, hi: &Rat) -> (Rat, Rat) {
    if a.is_negative() {
        (a * hi, a * lo)
    } else {
        (a * lo, a * hi)
    }
}
