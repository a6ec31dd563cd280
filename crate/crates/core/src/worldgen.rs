//! Seeded procedural seabed: a value-noise height field and uniform object
//! scattering.
//!
//! All randomness comes from [`SplitMix64`] and [`mix64`], both specified
//! bit-for-bit so a scene can be rebuilt identically on any platform.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{ObjectKind, Orientation, Scene, Vec3};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const LATTICE_J_MULT: u64 = 0xC2B2_AE3D_27D4_EB4F;

/// The SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Top 53 bits of `bits` as a float in `[0, 1)`.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Pseudo-random value in `[0, 1)` attached to lattice cell `(i, j)`.
pub fn lattice_value(i: i64, j: i64, seed: u64) -> f64 {
    let h = mix64(seed ^ (i as u64).wrapping_mul(GOLDEN_GAMMA));
    let h = mix64(h ^ (j as u64).wrapping_mul(LATTICE_J_MULT));
    unit_f64(h)
}

/// 64-bit state generator advancing by the golden gamma.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainParams {
    /// Peak height in meters.
    pub amplitude: f64,
    /// Distance between lattice points in meters.
    pub lattice_spacing: f64,
    pub seed: u64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self {
            amplitude: 0.5,
            lattice_spacing: 8.0,
            seed: 0,
        }
    }
}

impl TerrainParams {
    /// Returns the offending field name and a message on failure.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err((
                "amplitude",
                format!("must be finite and >= 0, got {}", self.amplitude),
            ));
        }
        if !(self.lattice_spacing.is_finite() && self.lattice_spacing > 0.0) {
            return Err((
                "lattice_spacing",
                format!("must be finite and > 0, got {}", self.lattice_spacing),
            ));
        }
        Ok(())
    }
}

/// Seabed height at `(x, y)`: bilinear interpolation of the lattice values,
/// scaled by the amplitude.
pub fn terrain_height(params: &TerrainParams, x: f64, y: f64) -> f64 {
    let gx = x / params.lattice_spacing;
    let gy = y / params.lattice_spacing;
    let (fx, fy) = (gx.floor(), gy.floor());
    let (tx, ty) = (gx - fx, gy - fy);
    let (i, j) = (fx as i64, fy as i64);
    let v = |di: i64, dj: i64| lattice_value(i.wrapping_add(di), j.wrapping_add(dj), params.seed);
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let bottom = lerp(v(0, 0), v(1, 0), tx);
    let top = lerp(v(0, 1), v(1, 1), tx);
    params.amplitude * lerp(bottom, top, ty)
}

/// Axis-aligned world rectangle, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Default for Region {
    fn default() -> Self {
        Self {
            min: [-30.0, -30.0],
            max: [30.0, 30.0],
        }
    }
}

impl Region {
    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn is_degenerate(&self) -> bool {
        let finite = self.min.iter().chain(&self.max).all(|v| v.is_finite());
        !(finite && self.width() > 0.0 && self.height() > 0.0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.min[0] <= x && x <= self.max[0] && self.min[1] <= y && y <= self.max[1]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSpec {
    #[serde(default)]
    pub counts: BTreeMap<ObjectKind, u32>,
    #[serde(default)]
    pub region: Region,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldgenError {
    #[error("scatter region {0:?} is degenerate")]
    DegenerateRegion(Region),
    #[error("invalid terrain {field}: {message}")]
    InvalidTerrain {
        field: &'static str,
        message: String,
    },
}

/// Builds the initial scene: objects drawn kind by kind in catalog order, each
/// resting on the terrain with a random yaw; agent at the origin.
pub fn generate(spec: &ScatterSpec, terrain: &TerrainParams) -> Result<Scene, WorldgenError> {
    terrain
        .validate()
        .map_err(|(field, message)| WorldgenError::InvalidTerrain { field, message })?;
    let any = spec.counts.values().any(|&c| c > 0);
    if any && spec.region.is_degenerate() {
        return Err(WorldgenError::DegenerateRegion(spec.region));
    }

    let mut scene = Scene::new(spec.seed, *terrain);
    let mut rng = SplitMix64::new(spec.seed);
    let r = &spec.region;
    for kind in ObjectKind::ALL {
        let count = spec.counts.get(&kind).copied().unwrap_or(0);
        for _ in 0..count {
            let x = r.min[0] + rng.next_f64() * r.width();
            let y = r.min[1] + rng.next_f64() * r.height();
            let yaw = rng.next_f64() * 360.0;
            let z = terrain_height(terrain, x, y);
            scene
                .put_object(kind, Vec3::new(x, y, z), Orientation::new(yaw, 0.0, 0.0))
                .expect("generated coordinates are finite");
        }
    }
    Ok(scene)
}
