//! TOML instance files: the maps as "p/q" strings, the noise bound, path
//! length, start point, and optional target and seed. Parse failures carry
//! the file position or the offending field path.

use std::path::Path;

use serde::Deserialize;

use spip_core::dynamics::{AffineMap, LatticePoint, NoiseBound, TransformSet};
use spip_core::scalar::parse_rat;
use spip_core::SpipInstance;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    a: [String; 4],
    b: [String; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    epsilon: String,
    n: usize,
    x0: [i64; 2],
    target: Option<[i64; 2]>,
    seed: Option<u64>,
    sample_denominator: Option<u64>,
    maps: Vec<RawMap>,
}

/// A parsed instance plus the file's optional replay seed.
#[derive(Debug)]
pub struct LoadedInstance {
    pub instance: SpipInstance,
    pub seed: Option<u64>,
}

pub fn load_instance(path: &Path) -> Result<LoadedInstance, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let raw: RawInstance =
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut maps = Vec::with_capacity(raw.maps.len());
    for (i, rm) in raw.maps.iter().enumerate() {
        let mut a = Vec::with_capacity(4);
        for (j, s) in rm.a.iter().enumerate() {
            a.push(
                parse_rat(s).map_err(|e| format!("{}: maps[{i}].a[{j}]: {e}", path.display()))?,
            );
        }
        let b0 = parse_rat(&rm.b[0])
            .map_err(|e| format!("{}: maps[{i}].b[0]: {e}", path.display()))?;
        let b1 = parse_rat(&rm.b[1])
            .map_err(|e| format!("{}: maps[{i}].b[1]: {e}", path.display()))?;
        let matrix = [[a[0].clone(), a[1].clone()], [a[2].clone(), a[3].clone()]];
        maps.push(
            AffineMap::new(matrix, [b0, b1])
                .map_err(|e| format!("{}: maps[{i}]: {e}", path.display()))?,
        );
    }
    let ts = TransformSet::new(maps).map_err(|e| format!("{}: {e}", path.display()))?;
    let epsilon =
        parse_rat(&raw.epsilon).map_err(|e| format!("{}: epsilon: {e}", path.display()))?;
    let noise = match raw.sample_denominator {
        Some(q) => NoiseBound::new(epsilon, q),
        None => NoiseBound::with_default_grid(epsilon),
    }
    .map_err(|e| format!("{}: epsilon: {e}", path.display()))?;
    let mut instance = SpipInstance::new(
        ts,
        noise,
        raw.n,
        LatticePoint::new(raw.x0[0], raw.x0[1]),
    );
    if let Some([tx, ty]) = raw.target {
        instance = instance.with_target(LatticePoint::new(tx, ty));
    }
    Ok(LoadedInstance {
        instance,
        seed: raw.seed,
    })
}
