//! The whitelist of callable functions.

/// Static type of a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamType {
    /// A number (degrees for the angle setters).
    Scalar,
    /// A 3-component position or orientation.
    Vec3,
    /// An object kind, given as a quoted name or a bare catalog word.
    Kind,
    /// A quoted `<kind>_<id>` object reference.
    ObjectRef,
    /// A box corner: `(x, y, z)`, or `(x, y)` spanning every depth.
    Corner,
    /// An `(r, g, b)` color with components in `[0, 1]`.
    Color,
}

impl ParamType {
    pub fn describe(self) -> &'static str {
        match self {
            ParamType::Scalar => "a number",
            ParamType::Vec3 => "an (x, y, z) tuple",
            ParamType::Kind => "an object kind such as \"oyster\"",
            ParamType::ObjectRef => "a quoted object name such as \"oyster_1\"",
            ParamType::Corner => "an (x, y, z) or (x, y) tuple",
            ParamType::Color => "an (r, g, b) tuple",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Param {
    pub name: &'static str,
    pub ty: ParamType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionSpec {
    pub name: &'static str,
    pub params: &'static [Param],
    /// Whether the call yields an `(x, y, z)` value (getters) or acts on the
    /// scene (everything else).
    pub returns_vec3: bool,
    pub description: &'static str,
}

impl FunctionSpec {
    /// `name(param, ...)` as shown to the model.
    pub fn signature(&self) -> String {
        let params: Vec<_> = self.params.iter().map(|p| p.name).collect();
        format!("{}({})", self.name, params.join(", "))
    }
}

const fn p(name: &'static str, ty: ParamType) -> Param {
    Param { name, ty }
}

pub const STANDARD_FUNCTIONS: [FunctionSpec; 10] = [
    FunctionSpec {
        name: "set_bot_position",
        params: &[p("(x, y, z)", ParamType::Vec3)],
        returns_vec3: false,
        description: "Move the vehicle to the given X, Y, Z position in meters.",
    },
    FunctionSpec {
        name: "get_position",
        params: &[p("object_name", ParamType::ObjectRef)],
        returns_vec3: true,
        description: "Return the (x, y, z) position of a named object, for example \"oyster_1\".",
    },
    FunctionSpec {
        name: "get_bot_position",
        params: &[],
        returns_vec3: true,
        description: "Return the vehicle's current (x, y, z) position.",
    },
    FunctionSpec {
        name: "set_yaw",
        params: &[p("angle", ParamType::Scalar)],
        returns_vec3: false,
        description: "Turn the vehicle to the given yaw angle in degrees (counterclockwise from +X).",
    },
    FunctionSpec {
        name: "set_pitch",
        params: &[p("angle", ParamType::Scalar)],
        returns_vec3: false,
        description: "Set the vehicle's pitch angle in degrees.",
    },
    FunctionSpec {
        name: "set_roll",
        params: &[p("angle", ParamType::Scalar)],
        returns_vec3: false,
        description: "Set the vehicle's roll angle in degrees.",
    },
    FunctionSpec {
        name: "put_object",
        params: &[
            p("kind", ParamType::Kind),
            p("(x, y, z)", ParamType::Vec3),
            p("(yaw, pitch, roll)", ParamType::Vec3),
        ],
        returns_vec3: false,
        description: "Place a new object of the given kind at a position, with orientation angles in degrees.",
    },
    FunctionSpec {
        name: "delete_objects_in_range",
        params: &[p("lower", ParamType::Corner), p("upper", ParamType::Corner)],
        returns_vec3: false,
        description: "Remove every object inside the box between two corners, faces included; (x, y) corners cover all depths.",
    },
    FunctionSpec {
        name: "put_bot_switch",
        params: &[p("(x, y, z)", ParamType::Vec3)],
        returns_vec3: false,
        description: "Place an additional, non-controlled BlueROV at the given position.",
    },
    FunctionSpec {
        name: "set_water",
        params: &[p("(r, g, b)", ParamType::Color), p("turbidity", ParamType::Scalar)],
        returns_vec3: false,
        description: "Set the water color (components between 0 and 1) and turbidity (0 or more).",
    },
];

/// An ordered set of callable functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    functions: Vec<FunctionSpec>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl Catalog {
    pub fn standard() -> Self {
        Self {
            functions: STANDARD_FUNCTIONS.to_vec(),
        }
    }

    /// The same catalog minus one function.
    pub fn without(mut self, name: &str) -> Self {
        self.functions.retain(|f| f.name != name);
        self
    }

    pub fn get(&self, name: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn functions(&self) -> &[FunctionSpec] {
        &self.functions
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}
