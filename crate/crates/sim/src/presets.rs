//! Built-in scenarios.

use crate::config::{parse_config, RunSpec};

/// Low rodent transmission, R0 below one.
pub const EXAMPLE_4_2: &str = include_str!("../presets/example-4-2.json");

/// High rodent transmission, R0 above one.
pub const EXAMPLE_4_3: &str = include_str!("../presets/example-4-3.json");

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 2] = ["example-4-2", "example-4-3"];

/// Preset source text by name.
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "example-4-2" => Some(EXAMPLE_4_2),
        "example-4-3" => Some(EXAMPLE_4_3),
        _ => None,
    }
}

/// Parsed low-transmission preset.
pub fn example_4_2() -> RunSpec {
    parse_config(EXAMPLE_4_2).expect("preset is valid")
}

/// Parsed high-transmission preset.
pub fn example_4_3() -> RunSpec {
    parse_config(EXAMPLE_4_3).expect("preset is valid")
}
