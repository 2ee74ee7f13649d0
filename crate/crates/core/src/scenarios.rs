//! Scenario documents shipped with the crate.

use crate::engine::{load_scenario, Scenario, ScenarioError};

pub const BUNDLED: [(&str, &str); 5] = [
    ("safe_torque", include_str!("../scenarios/safe_torque.json")),
    ("step120", include_str!("../scenarios/step120.json")),
    ("reversal", include_str!("../scenarios/reversal.json")),
    ("multistep", include_str!("../scenarios/multistep.json")),
    ("vf_ramp", include_str!("../scenarios/vf_ramp.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Source text of a bundled scenario.
pub fn source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Loads a bundled scenario by name.
pub fn bundled(name: &str) -> Option<Result<Scenario, ScenarioError>> {
    source(name).map(load_scenario)
}
