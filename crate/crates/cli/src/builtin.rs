//! Scenario files bundled into the binary, addressable as `builtin:<name>`.

/// `(name, JSON text)` of every bundled scenario.
pub const BUILTIN_SCENARIOS: [(&str, &str); 5] = [
    ("example1_ticket", include_str!("../../../scenarios/example1_ticket.json")),
    ("example2_singleton", include_str!("../../../scenarios/example2_singleton.json")),
    ("example3_money", include_str!("../../../scenarios/example3_money.json")),
    ("example4_discount", include_str!("../../../scenarios/example4_discount.json")),
    ("two_by_two", include_str!("../../../scenarios/two_by_two.json")),
];

/// JSON text of a bundled scenario.
pub fn builtin_scenario(name: &str) -> Option<&'static str> {
    BUILTIN_SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
