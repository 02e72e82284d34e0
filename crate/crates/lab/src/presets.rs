//! Built-in scenarios. The TOML sources live in `presets/` next to the crate
//! manifest and double as examples of the scenario format.

use crate::config::{ConfigError, Scenario};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// `(name, TOML text)` of every preset, in catalog order.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".toml")))),*
        ];
    };
}

presets!(
    "obstacle-big-kite",
    "obstacle-small-disks",
    "phase-retrieval-demo",
    "phase-retrieval-relative",
    "phase-retrieval-absolute",
    "retrieval-sampling-kite",
    "retrieval-sampling-disks",
    "source-one-direction",
    "source-two-directions",
    "source-multi-rectangle",
    "source-multi-L",
    "source-retrieval-relative",
    "source-retrieval-absolute",
    "source-extended-L",
    "source-extended-triangle",
    "source-counterexample-f1",
    "source-counterexample-f2",
);

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parses the named preset.
pub fn get(name: &str) -> Option<Result<Scenario, ConfigError>> {
    text(name).map(Scenario::from_toml_str)
}
