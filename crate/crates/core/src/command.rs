//! The lowered form of a script: one variant per mutating catalog function,
//! plus `LogValue` for top-level getter calls.

use serde::{Deserialize, Serialize};

use crate::scene::{Axis, ObjectKind, Orientation, Scene, SceneError, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    SetBotPosition {
        position: Vec3,
    },
    SetYaw {
        degrees: f64,
    },
    SetPitch {
        degrees: f64,
    },
    SetRoll {
        degrees: f64,
    },
    PutObject {
        kind: ObjectKind,
        position: Vec3,
        orientation: Orientation,
    },
    DeleteObjectsInRange {
        lower: Vec3,
        upper: Vec3,
    },
    PutBotSwitch {
        position: Vec3,
    },
    SetWater {
        color: [f64; 3],
        turbidity: f64,
    },
    LogValue {
        label: String,
        value: Vec3,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SetBotPosition { .. } => "set_bot_position",
            Command::SetYaw { .. } => "set_yaw",
            Command::SetPitch { .. } => "set_pitch",
            Command::SetRoll { .. } => "set_roll",
            Command::PutObject { .. } => "put_object",
            Command::DeleteObjectsInRange { .. } => "delete_objects_in_range",
            Command::PutBotSwitch { .. } => "put_bot_switch",
            Command::SetWater { .. } => "set_water",
            Command::LogValue { .. } => "log_value",
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Command::SetBotPosition { position } | Command::PutBotSwitch { position } => {
                position.is_finite()
            }
            Command::SetYaw { degrees }
            | Command::SetPitch { degrees }
            | Command::SetRoll { degrees } => degrees.is_finite(),
            Command::PutObject {
                position,
                orientation,
                ..
            } => position.is_finite() && orientation.is_finite(),
            Command::DeleteObjectsInRange { lower, upper } => {
                lower.is_finite() && upper.is_finite()
            }
            Command::SetWater { color, turbidity } => {
                color.iter().all(|c| c.is_finite()) && turbidity.is_finite()
            }
            Command::LogValue { value, .. } => value.is_finite(),
        }
    }

    /// Applies the command's end state to `scene` in one step, skipping any
    /// interpolation. `LogValue` is a no-op.
    pub fn apply(&self, scene: &mut Scene) -> Result<(), SceneError> {
        match self {
            Command::SetBotPosition { position } => scene.set_agent_position(*position),
            Command::SetYaw { degrees } => scene.set_agent_angle(Axis::Yaw, *degrees),
            Command::SetPitch { degrees } => scene.set_agent_angle(Axis::Pitch, *degrees),
            Command::SetRoll { degrees } => scene.set_agent_angle(Axis::Roll, *degrees),
            Command::PutObject {
                kind,
                position,
                orientation,
            } => scene.put_object(*kind, *position, *orientation).map(drop),
            Command::DeleteObjectsInRange { lower, upper } => {
                scene.delete_objects_in_range(*lower, *upper).map(drop)
            }
            Command::PutBotSwitch { position } => scene
                .put_object(ObjectKind::BluerovStatic, *position, Orientation::ZERO)
                .map(drop),
            Command::SetWater { color, turbidity } => scene.set_water(*color, *turbidity),
            Command::LogValue { .. } => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape_is_tagged() {
        let c = Command::SetBotPosition {
            position: Vec3::new(15.0, 25.0, 0.0),
        };
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(
            json,
            r#"{"command":"set_bot_position","position":[15.0,25.0,0.0]}"#
        );
        assert_eq!(serde_json::from_str::<Command>(&json).unwrap(), c);
    }

    #[test]
    fn bot_switch_spawns_static_rov() {
        let mut scene = Scene::default();
        Command::PutBotSwitch {
            position: Vec3::new(5.0, 5.0, 0.0),
        }
        .apply(&mut scene)
        .unwrap();
        let o = scene.objects().next().unwrap();
        assert_eq!(o.kind, ObjectKind::BluerovStatic);
        assert_eq!(o.pose.orientation, Orientation::ZERO);
        assert_eq!(scene.agent().position, Vec3::ZERO);
    }
}
