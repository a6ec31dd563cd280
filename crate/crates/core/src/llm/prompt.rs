use std::fmt::Write;

use crate::chatscript::Catalog;
use crate::scene::ObjectKind;

pub(crate) const FUNCTIONS_HEADER: &str = "Available functions:";
pub(crate) const RULES_HEADER: &str = "Rules:";

/// The fixed system message. Depends only on `catalog`.
pub fn build_system_prompt(catalog: &Catalog) -> String {
    let mut out = String::new();
    out.push_str(
        "You control a BlueROV underwater vehicle in a simulated seabed scene. \
         Translate each instruction into a ChatScript program.\n\n",
    );
    out.push_str(FUNCTIONS_HEADER);
    out.push('\n');
    for f in catalog.functions() {
        let _ = writeln!(out, "- {}: {}", f.signature(), f.description);
    }
    out.push('\n');
    let kinds: Vec<_> = ObjectKind::ALL.iter().map(|k| k.name()).collect();
    let _ = writeln!(out, "Object kinds: {}.", kinds.join(", "));
    out.push_str(
        "Objects are named <kind>_<id>, for example oyster_3.\n\
         Positions are (x, y, z) in meters with z pointing up. Angles are in degrees.\n\n",
    );
    out.push_str(RULES_HEADER);
    out.push('\n');
    for rule in [
        "Reply with exactly one fenced code block containing only ChatScript.",
        "Call only the functions listed above. Never invent new functions.",
        "One statement per line. `let name = expression` stores a value for later lines.",
        "Numbers, + - * /, (x, y, z) tuples and field access like p.x are allowed.",
        "There are no loops, conditionals or function definitions: write every call out.",
        "Quote object kinds and object names, for example \"oyster\".",
    ] {
        let _ = writeln!(out, "- {rule}");
    }
    out
}
