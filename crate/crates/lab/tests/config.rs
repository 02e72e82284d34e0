use elastic_phaseless_lab::config::{IndicatorKind, Scenario, Tier};
use elastic_phaseless_lab::presets;

const MINIMAL: &str = r#"
name = "tiny"

[obstacle]
directions = 16
boundaries = [{ kind = "circle", center = [0.0, 0.0], radius = 0.5 }]

[grid]
x = [-1.0, 1.0]
y = [-1.0, 1.0]
spacing = 0.5
"#;

#[test]
fn every_preset_validates() {
    let names: Vec<_> = presets::names().collect();
    assert!(names.len() >= 10);
    for name in names {
        let s = presets::get(name).unwrap().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(s.name, name);
        assert!(!s.description.is_empty());
    }
}

#[test]
fn defaults_follow_the_standard_setup() {
    let s = Scenario::from_toml_str(MINIMAL).unwrap();
    assert_eq!(s.wave.omega, 2.0 * std::f64::consts::PI);
    assert_eq!(s.data.z0, vec![[12.0, 12.0]]);
    assert_eq!(s.data.polarizations_deg, vec![45.0, 165.0, 285.0]);
    assert_eq!(s.noise.levels, vec![0.0]);
    assert!(!s.wants_retrieval());
}

#[test]
fn round_trip_through_toml() {
    let s = presets::get("source-multi-L").unwrap().unwrap();
    let back = Scenario::from_toml_str(&s.to_toml()).unwrap();
    assert_eq!(s, back);
}

#[test]
fn syntax_errors_carry_line_numbers() {
    let text = MINIMAL.replace("spacing = 0.5", "spacing = = 0.5");
    let e = Scenario::from_toml_str(&text).unwrap_err();
    assert_eq!(e.line, Some(11), "{e}");
    assert!(e.to_string().starts_with("line 11:"));
}

#[test]
fn unknown_keys_are_rejected_with_their_line() {
    let text = MINIMAL.replace("directions = 16", "directions = 16\nresolution = 3");
    let e = Scenario::from_toml_str(&text).unwrap_err();
    assert_eq!(e.line, Some(6), "{e}");
}

#[test]
fn semantic_errors_point_at_the_key() {
    let odd = MINIMAL.replace("directions = 16", "directions = 15");
    let e = Scenario::from_toml_str(&odd).unwrap_err();
    assert_eq!(e.line, Some(5), "{e}");

    let inside = format!("{MINIMAL}\n[data]\nz0 = [[0.1, 0.0]]\n");
    let e = Scenario::from_toml_str(&inside).unwrap_err();
    assert!(e.message.contains("inside"), "{e}");
    assert_eq!(e.line, Some(14));

    let wrong = format!("{MINIMAL}\n[output]\nindicators = [\"itheta-z0\"]\n");
    assert!(Scenario::from_toml_str(&wrong).is_err());

    let clash = format!("{MINIMAL}\n[data]\nindicator_tau = [0.5, 0.0]\n");
    assert!(Scenario::from_toml_str(&clash).is_err());

    let off_grid = format!("{MINIMAL}\n[output]\nincidence_deg = 10.0\n");
    assert!(Scenario::from_toml_str(&off_grid).is_err());
}

#[test]
fn source_scenarios_need_one_observation_spec() {
    let both = r#"
name = "s"
[source]
shape = "rectangle"
fan = 4
observations_deg = [0.0]
[grid]
x = [0.0, 1.0]
y = [0.0, 1.0]
"#;
    let e = Scenario::from_toml_str(both).unwrap_err();
    assert_eq!(e.line, Some(3));
    let fan = both.replace("observations_deg = [0.0]\n", "");
    let s = Scenario::from_toml_str(&fan).unwrap();
    // θ_j = −π/2 + jπ/4 for j = 1..4 ends at π/2
    let last = s.observations()[3];
    assert!((last.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert_eq!(s.observation_index(90.0), Ok(3));
}

#[test]
fn tiers_and_overrides() {
    let mut s = presets::get("obstacle-big-kite").unwrap().unwrap();
    s.apply_tier(Tier::Paper);
    assert_eq!(s.wave.omega, 8.0 * std::f64::consts::PI);
    assert_eq!(s.obstacle.as_ref().unwrap().directions, 512);
    s.override_noise(0.3);
    assert_eq!(s.noise.levels, vec![0.3]);

    let mut src = presets::get("source-multi-L").unwrap().unwrap();
    let before = src.clone();
    src.apply_tier(Tier::Paper);
    assert_eq!(src, before);
}

#[test]
fn retrieval_indicators_switch_retrieval_on() {
    let s = presets::get("retrieval-sampling-kite").unwrap().unwrap();
    assert!(s.output.indicators.contains(&IndicatorKind::I2Retrieved));
    assert!(s.wants_retrieval());
}
