//! World state: placed objects, the agent pose, water and terrain parameters.
//!
//! Every mutation the command catalog can express bottoms out in one of the
//! primitives on [`Scene`]. The scene is single-writer; callers that need a
//! stable view clone it.

mod document;
mod geometry;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::worldgen::TerrainParams;

pub use document::{load_scene, save_scene, SCENE_DOCUMENT_VERSION};
pub use geometry::{shortest_arc, Axis, Mat3, Orientation, Pose, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("unknown object kind \"{0}\"")]
    UnknownKind(String),
    #[error("non-finite value for {0}")]
    NonFiniteArgument(&'static str),
    #[error("no object named \"{0}\"")]
    UnknownObject(String),
    #[error("turbidity must be >= 0, got {0}")]
    NegativeTurbidity(f64),
    #[error("malformed scene document at {location}: {message}")]
    MalformedDocument { location: String, message: String },
}

/// Closed catalog of placeable objects, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Oyster,
    Rock,
    Coral,
    Grass,
    Shipwreck,
    BluerovStatic,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 6] = [
        ObjectKind::Oyster,
        ObjectKind::Rock,
        ObjectKind::Coral,
        ObjectKind::Grass,
        ObjectKind::Shipwreck,
        ObjectKind::BluerovStatic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Oyster => "oyster",
            ObjectKind::Rock => "rock",
            ObjectKind::Coral => "coral",
            ObjectKind::Grass => "grass",
            ObjectKind::Shipwreck => "shipwreck",
            ObjectKind::BluerovStatic => "bluerov_static",
        }
    }

    /// Default bounding radius in meters.
    pub fn bounding_radius(self) -> f64 {
        match self {
            ObjectKind::Oyster => 0.15,
            ObjectKind::Rock => 0.5,
            ObjectKind::Coral => 0.4,
            ObjectKind::Grass => 0.3,
            ObjectKind::Shipwreck => 5.0,
            ObjectKind::BluerovStatic => 0.3,
        }
    }
}

impl FromStr for ObjectKind {
    type Err = SceneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SceneError::UnknownKind(s.to_string()))
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: u64,
    pub kind: ObjectKind,
    pub pose: Pose,
    pub bounding_radius: f64,
}

impl SceneObject {
    /// Reference name understood by `get_position`, e.g. `oyster_3`.
    pub fn name(&self) -> String {
        format!("{}_{}", self.kind, self.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterProperties {
    pub color: [f64; 3],
    pub turbidity: f64,
}

impl Default for WaterProperties {
    fn default() -> Self {
        Self {
            color: [0.05, 0.35, 0.45],
            turbidity: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    objects: BTreeMap<u64, SceneObject>,
    agent: Pose,
    water: WaterProperties,
    terrain: TerrainParams,
    next_id: u64,
    seed: u64,
}

impl Default for Scene {
    fn default() -> Self {
        Scene::new(0, TerrainParams::default())
    }
}

fn ensure_finite(ok: bool, what: &'static str) -> Result<(), SceneError> {
    if ok {
        Ok(())
    } else {
        Err(SceneError::NonFiniteArgument(what))
    }
}

impl Scene {
    /// Empty scene with the agent at the origin.
    pub fn new(seed: u64, terrain: TerrainParams) -> Self {
        Self {
            objects: BTreeMap::new(),
            agent: Pose::default(),
            water: WaterProperties::default(),
            terrain,
            next_id: 1,
            seed,
        }
    }

    pub fn objects(&self) -> impl ExactSizeIterator<Item = &SceneObject> + '_ {
        self.objects.values()
    }

    pub fn object(&self, id: u64) -> Option<&SceneObject> {
        self.objects.get(&id)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn agent(&self) -> &Pose {
        &self.agent
    }

    pub fn water(&self) -> &WaterProperties {
        &self.water
    }

    pub fn terrain(&self) -> &TerrainParams {
        &self.terrain
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn put_object(
        &mut self,
        kind: ObjectKind,
        position: Vec3,
        orientation: Orientation,
    ) -> Result<u64, SceneError> {
        ensure_finite(position.is_finite(), "position")?;
        ensure_finite(orientation.is_finite(), "orientation")?;
        let id = self.next_id;
        self.next_id += 1;
        self.objects.insert(
            id,
            SceneObject {
                id,
                kind,
                pose: Pose::new(position, orientation),
                bounding_radius: kind.bounding_radius(),
            },
        );
        Ok(id)
    }

    /// Like [`Scene::put_object`] but resolves the kind by catalog name.
    pub fn put_object_named(
        &mut self,
        kind: &str,
        position: Vec3,
        orientation: Orientation,
    ) -> Result<u64, SceneError> {
        self.put_object(kind.parse()?, position, orientation)
    }

    /// Removes every object inside the axis-aligned box spanned by the two
    /// corners (faces inclusive). Corners are swapped per axis as needed.
    pub fn delete_objects_in_range(
        &mut self,
        lower: Vec3,
        upper: Vec3,
    ) -> Result<usize, SceneError> {
        ensure_finite(lower.is_finite(), "range lower bound")?;
        ensure_finite(upper.is_finite(), "range upper bound")?;
        let (lo, hi) = normalize_box(lower, upper);
        let before = self.objects.len();
        self.objects
            .retain(|_, o| !box_contains(lo, hi, o.pose.position));
        Ok(before - self.objects.len())
    }

    /// Resolves an `<kind>_<id>` reference.
    pub fn get_position(&self, name: &str) -> Result<Vec3, SceneError> {
        let unknown = || SceneError::UnknownObject(name.to_string());
        let (kind, id) = name.rsplit_once('_').ok_or_else(unknown)?;
        let kind: ObjectKind = kind.parse().map_err(|_| unknown())?;
        let id: u64 = id.parse().map_err(|_| unknown())?;
        match self.objects.get(&id) {
            Some(o) if o.kind == kind => Ok(o.pose.position),
            _ => Err(unknown()),
        }
    }

    pub fn get_bot_position(&self) -> Vec3 {
        self.agent.position
    }

    pub fn set_agent_position(&mut self, p: Vec3) -> Result<(), SceneError> {
        ensure_finite(p.is_finite(), "agent position")?;
        self.agent.position = p;
        Ok(())
    }

    pub fn set_agent_angle(&mut self, axis: Axis, degrees: f64) -> Result<(), SceneError> {
        ensure_finite(degrees.is_finite(), "agent angle")?;
        self.agent.orientation.set(axis, degrees);
        Ok(())
    }

    /// Replaces the water properties; color components are clamped to `[0, 1]`.
    pub fn set_water(&mut self, color: [f64; 3], turbidity: f64) -> Result<(), SceneError> {
        ensure_finite(color.iter().all(|c| c.is_finite()), "water color")?;
        ensure_finite(turbidity.is_finite(), "turbidity")?;
        if turbidity < 0.0 {
            return Err(SceneError::NegativeTurbidity(turbidity));
        }
        self.water = WaterProperties {
            color: color.map(|c| c.clamp(0.0, 1.0)),
            turbidity,
        };
        Ok(())
    }
}

pub(crate) fn normalize_box(a: Vec3, b: Vec3) -> (Vec3, Vec3) {
    (
        Vec3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)),
        Vec3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)),
    )
}

fn box_contains(lo: Vec3, hi: Vec3, p: Vec3) -> bool {
    lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y && lo.z <= p.z && p.z <= hi.z
}
