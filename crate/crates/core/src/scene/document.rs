//! JSON scene documents.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ObjectKind, Orientation, Pose, Scene, SceneError, SceneObject, Vec3, WaterProperties};
use crate::worldgen::TerrainParams;

pub const SCENE_DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDocument {
    version: u32,
    seed: u64,
    next_id: u64,
    agent: AgentDocument,
    water: WaterProperties,
    terrain: TerrainParams,
    objects: Vec<ObjectDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDocument {
    position: Vec3,
    orientation: Orientation,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDocument {
    id: u64,
    kind: ObjectKind,
    position: Vec3,
    orientation: Orientation,
}

/// Serializes the scene as a pretty-printed JSON document.
pub fn save_scene(scene: &Scene) -> String {
    let doc = SceneDocument {
        version: SCENE_DOCUMENT_VERSION,
        seed: scene.seed,
        next_id: scene.next_id,
        agent: AgentDocument {
            position: scene.agent.position,
            orientation: scene.agent.orientation,
        },
        water: scene.water,
        terrain: scene.terrain,
        objects: scene
            .objects
            .values()
            .map(|o| ObjectDocument {
                id: o.id,
                kind: o.kind,
                position: o.pose.position,
                orientation: o.pose.orientation,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("scene documents always serialize")
}

fn malformed(location: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::MalformedDocument {
        location: location.into(),
        message: message.into(),
    }
}

/// Parses and validates a scene document.
pub fn load_scene(text: &str) -> Result<Scene, SceneError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: SceneDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        malformed(
            if path.is_empty() { "$".into() } else { path },
            e.inner().to_string(),
        )
    })?;

    if doc.version != SCENE_DOCUMENT_VERSION {
        return Err(malformed(
            "version",
            format!("unsupported version {}", doc.version),
        ));
    }
    if !doc.agent.position.is_finite() || !doc.agent.orientation.is_finite() {
        return Err(malformed("agent", "non-finite pose"));
    }
    let w = &doc.water;
    if !w.color.iter().all(|c| (0.0..=1.0).contains(c)) {
        return Err(malformed("water.color", "components must lie in [0, 1]"));
    }
    if !(w.turbidity.is_finite() && w.turbidity >= 0.0) {
        return Err(malformed("water.turbidity", "must be a finite value >= 0"));
    }
    doc.terrain
        .validate()
        .map_err(|(field, msg)| malformed(format!("terrain.{field}"), msg))?;

    let mut seen = BTreeSet::new();
    let mut objects = BTreeMap::new();
    for (i, o) in doc.objects.into_iter().enumerate() {
        if o.id == 0 {
            return Err(malformed(format!("objects[{i}].id"), "ids start at 1"));
        }
        if !seen.insert(o.id) {
            return Err(malformed(
                format!("objects[{i}].id"),
                format!("duplicate id {}", o.id),
            ));
        }
        if o.id >= doc.next_id {
            return Err(malformed(
                format!("objects[{i}].id"),
                format!("id {} is not below next_id {}", o.id, doc.next_id),
            ));
        }
        if !o.position.is_finite() || !o.orientation.is_finite() {
            return Err(malformed(format!("objects[{i}]"), "non-finite pose"));
        }
        objects.insert(
            o.id,
            SceneObject {
                id: o.id,
                kind: o.kind,
                pose: Pose::new(o.position, o.orientation),
                bounding_radius: o.kind.bounding_radius(),
            },
        );
    }
    if doc.next_id == 0 {
        return Err(malformed("next_id", "must be at least 1"));
    }

    Ok(Scene {
        objects,
        agent: Pose::new(doc.agent.position, doc.agent.orientation),
        water: doc.water,
        terrain: doc.terrain,
        next_id: doc.next_id,
        seed: doc.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Axis;

    fn ring_scene() -> Scene {
        let mut scene = Scene::new(42, TerrainParams::default());
        for k in 0..10 {
            let a = (36.0 * k as f64).to_radians();
            scene
                .put_object(
                    ObjectKind::Oyster,
                    Vec3::new(3.0 * a.cos(), 3.0 * a.sin(), 0.0),
                    Orientation::new(36.0 * k as f64, 0.0, 0.0),
                )
                .unwrap();
        }
        scene.set_agent_angle(Axis::Pitch, -12.5).unwrap();
        scene.set_water([0.1, 0.3, 0.4], 0.5).unwrap();
        scene
    }

    #[test]
    fn fresh_scene_round_trips() {
        let scene = Scene::default();
        assert_eq!(load_scene(&save_scene(&scene)).unwrap(), scene);
    }

    #[test]
    fn populated_scene_round_trips_field_by_field() {
        let mut scene = ring_scene();
        scene
            .delete_objects_in_range(Vec3::new(2.5, -1.0, -1.0), Vec3::new(3.5, 1.0, 1.0))
            .unwrap();
        let loaded = load_scene(&save_scene(&scene)).unwrap();
        assert_eq!(loaded.next_id(), scene.next_id());
        assert_eq!(loaded.seed(), 42);
        assert_eq!(loaded.object_count(), 9);
        for (a, b) in loaded.objects().zip(scene.objects()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.pose.position.x.to_bits(), b.pose.position.x.to_bits());
            assert_eq!(a.pose.position.y.to_bits(), b.pose.position.y.to_bits());
            assert_eq!(a.pose.orientation, b.pose.orientation);
        }
        assert_eq!(loaded, scene);
    }

    #[test]
    fn document_has_the_expected_top_level_keys() {
        let v: serde_json::Value = serde_json::from_str(&save_scene(&ring_scene())).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["agent", "next_id", "objects", "seed", "terrain", "version", "water"]
        );
        assert_eq!(v["agent"]["position"], serde_json::json!([0.0, 0.0, 0.0]));
        assert_eq!(v["objects"][0]["kind"], "oyster");
        assert_eq!(v["version"], 1);
    }

    #[test]
    fn duplicate_ids_are_rejected_with_location() {
        let mut v: serde_json::Value = serde_json::from_str(&save_scene(&ring_scene())).unwrap();
        v["objects"][3]["id"] = v["objects"][2]["id"].clone();
        let err = load_scene(&v.to_string()).unwrap_err();
        match err {
            SceneError::MalformedDocument { location, .. } => assert_eq!(location, "objects[3].id"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors_carry_a_path() {
        let mut v: serde_json::Value = serde_json::from_str(&save_scene(&ring_scene())).unwrap();
        v["objects"][1]["kind"] = "kraken".into();
        match load_scene(&v.to_string()).unwrap_err() {
            SceneError::MalformedDocument { location, .. } => {
                assert_eq!(location, "objects[1].kind")
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(load_scene("{").is_err());
        assert!(load_scene("[]").is_err());
    }

    #[test]
    fn id_at_or_above_next_id_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&save_scene(&ring_scene())).unwrap();
        v["next_id"] = 5.into();
        assert!(matches!(
            load_scene(&v.to_string()),
            Err(SceneError::MalformedDocument { .. })
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&save_scene(&Scene::default())).unwrap();
        v["extra"] = 1.into();
        assert!(load_scene(&v.to_string()).is_err());
    }
}
