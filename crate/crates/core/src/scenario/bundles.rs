use super::ScenarioError;

/// Scenario files shipped with the crate, by name.
pub const BUNDLES: [(&str, &str); 10] = [
    ("cheshire", include_str!("../../scenarios/cheshire.toml")),
    ("amplification", include_str!("../../scenarios/amplification.toml")),
    (
        "noisy_spin_orbit",
        include_str!("../../scenarios/noisy_spin_orbit.toml"),
    ),
    (
        "noisy_three_body",
        include_str!("../../scenarios/noisy_three_body.toml"),
    ),
    (
        "parallel_noise_1",
        include_str!("../../scenarios/parallel_noise_1.toml"),
    ),
    (
        "parallel_noise_2",
        include_str!("../../scenarios/parallel_noise_2.toml"),
    ),
    ("disembodiment", include_str!("../../scenarios/disembodiment.toml")),
    (
        "disembodiment_noise",
        include_str!("../../scenarios/disembodiment_noise.toml"),
    ),
    (
        "disembodiment_sweep",
        include_str!("../../scenarios/disembodiment_sweep.toml"),
    ),
    (
        "disembodiment_parallel",
        include_str!("../../scenarios/disembodiment_parallel.toml"),
    ),
];

pub fn bundle_names() -> impl Iterator<Item = &'static str> {
    BUNDLES.iter().map(|(n, _)| *n)
}

pub fn bundle(name: &str) -> Result<&'static str, ScenarioError> {
    BUNDLES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| ScenarioError::UnknownBundle {
            name: name.to_string(),
            available: bundle_names().collect::<Vec<_>>().join(", "),
        })
}
