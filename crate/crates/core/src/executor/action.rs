use serde::{Deserialize, Serialize};

use crate::command::Command;
use crate::scene::{Axis, ObjectKind, Orientation, Scene, SceneError, Vec3};

/// A scheduled unit of work. Each occupies exactly one action interval.
/// Start values of moves and turns are filled in when the action begins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    MoveTo {
        target: Vec3,
        start: Option<Vec3>,
    },
    RotateTo {
        axis: Axis,
        target: f64,
        start: Option<f64>,
    },
    Spawn {
        kind: ObjectKind,
        position: Vec3,
        orientation: Orientation,
    },
    Despawn {
        lower: Vec3,
        upper: Vec3,
    },
    SetWater {
        color: [f64; 3],
        turbidity: f64,
    },
    Log {
        label: String,
        value: Vec3,
    },
}

/// One action per command.
pub fn compile(command: &Command) -> Vec<Action> {
    let action = match command {
        Command::SetBotPosition { position } => Action::MoveTo {
            target: *position,
            start: None,
        },
        Command::SetYaw { degrees } => rotate(Axis::Yaw, *degrees),
        Command::SetPitch { degrees } => rotate(Axis::Pitch, *degrees),
        Command::SetRoll { degrees } => rotate(Axis::Roll, *degrees),
        Command::PutObject {
            kind,
            position,
            orientation,
        } => Action::Spawn {
            kind: *kind,
            position: *position,
            orientation: *orientation,
        },
        Command::DeleteObjectsInRange { lower, upper } => Action::Despawn {
            lower: *lower,
            upper: *upper,
        },
        Command::PutBotSwitch { position } => Action::Spawn {
            kind: ObjectKind::BluerovStatic,
            position: *position,
            orientation: Orientation::ZERO,
        },
        Command::SetWater { color, turbidity } => Action::SetWater {
            color: *color,
            turbidity: *turbidity,
        },
        Command::LogValue { label, value } => Action::Log {
            label: label.clone(),
            value: *value,
        },
    };
    vec![action]
}

fn rotate(axis: Axis, target: f64) -> Action {
    Action::RotateTo {
        axis,
        target,
        start: None,
    }
}

impl Action {
    /// Whether the action takes effect in full on its first frame.
    pub fn is_instant(&self) -> bool {
        !matches!(self, Action::MoveTo { .. } | Action::RotateTo { .. })
    }

    /// Applies the action's end state in one step.
    pub fn apply_final(&self, scene: &mut Scene) -> Result<(), SceneError> {
        match self {
            Action::MoveTo { target, .. } => scene.set_agent_position(*target),
            Action::RotateTo { axis, target, .. } => scene.set_agent_angle(*axis, *target),
            Action::Spawn {
                kind,
                position,
                orientation,
            } => scene.put_object(*kind, *position, *orientation).map(drop),
            Action::Despawn { lower, upper } => {
                scene.delete_objects_in_range(*lower, *upper).map(drop)
            }
            Action::SetWater { color, turbidity } => scene.set_water(*color, *turbidity),
            Action::Log { .. } => Ok(()),
        }
    }
}
