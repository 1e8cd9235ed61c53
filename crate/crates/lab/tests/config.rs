use std::path::Path;

use gkdv_core::soliton::Direction;
use gkdv_lab::config::{DEFAULT_LENGTH, DEFAULT_MORAWETZ_RADIUS, DEFAULT_N};
use gkdv_lab::{load_config, parse_config, ConfigError, Monitor, Recipe};

fn parse(text: &str) -> Result<gkdv_lab::ScenarioConfig, ConfigError> {
    parse_config(text, "demo", Path::new("/data"))
}

#[test]
fn minimal_file_gets_defaults() {
    let cfg = parse("[initial]\nrecipe = \"scaledQ a=0.99\"\n").unwrap();
    assert_eq!(cfg.initial, Recipe::ScaledQ { a: 0.99 });
    assert_eq!((cfg.grid.length, cfg.grid.n), (DEFAULT_LENGTH, DEFAULT_N));
    assert_eq!(cfg.evolve.dt, 2e-4);
    assert_eq!(cfg.evolve.stride, 50);
    assert_eq!(cfg.delta, 0.1);
    assert_eq!(cfg.monitors.enabled, Monitor::ALL.to_vec());
    assert_eq!(cfg.monitors.morawetz_radius, DEFAULT_MORAWETZ_RADIUS);
    assert_eq!(cfg.name, "demo");
    if std::env::var_os(gkdv_lab::config::OUTPUT_ENV).is_none() {
        assert_eq!(cfg.output, Path::new("runs/demo"));
    }
}

#[test]
fn full_file_round_trips_every_field() {
    let text = r#"
name = "probe"
output = "out/probe"
seed = 42
delta = 0.05

[grid]
L = 60
N = 1024

[initial]
recipe = "perturbedQ"
direction = "yLambdaQ"
coefficient = -0.01

[evolve]
dt = 1e-4
T = 0.5
stride = 20

[monitors]
enabled = ["virialJ", "tails"]
tail_offsets = [5, 7.5]
"#;
    let cfg = parse(text).unwrap();
    assert_eq!(cfg.name, "probe");
    assert_eq!(cfg.seed, 42);
    assert_eq!(cfg.delta, 0.05);
    assert_eq!((cfg.grid.length, cfg.grid.n), (60.0, 1024));
    assert_eq!(cfg.initial, Recipe::PerturbedQ { direction: Direction::YLambdaQ, coefficient: -0.01 });
    assert_eq!((cfg.evolve.dt, cfg.evolve.t_final, cfg.evolve.stride), (1e-4, 0.5, 20));
    assert_eq!(cfg.monitors.enabled, vec![Monitor::VirialJ, Monitor::Tails]);
    assert_eq!(cfg.monitors.tail_offsets, vec![5.0, 7.5]);
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<gkdv_lab::ScenarioConfig>(&json).unwrap(), cfg);
}

#[test]
fn recipes_and_file_paths() {
    let cfg = parse("[initial]\nrecipe = \"framedQ lambda=0.8 x=-3\"\n").unwrap();
    assert_eq!(cfg.initial, Recipe::FramedQ { lambda: 0.8, x: -3.0 });
    let cfg = parse("[initial]\nrecipe = \"framedQ\"\nlambda = 2\n").unwrap();
    assert_eq!(cfg.initial, Recipe::FramedQ { lambda: 2.0, x: 0.0 });
    let cfg = parse("[initial]\nrecipe = \"file path=u0.txt\"\n").unwrap();
    assert_eq!(cfg.initial, Recipe::File { path: Path::new("/data/u0.txt").to_path_buf() });
}

fn invalid_field(r: Result<gkdv_lab::ScenarioConfig, ConfigError>) -> (String, String) {
    match r {
        Err(ConfigError::Invalid { field, message }) => (field, message),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn odd_n_is_rejected() {
    let (field, message) = invalid_field(parse("[grid]\nN = 15\n[initial]\nrecipe = \"scaledQ a=1\"\n"));
    assert_eq!(field, "grid.N");
    assert_eq!(message, "N must be even");
}

#[test]
fn unknown_monitor_lists_valid_names() {
    let text = "[initial]\nrecipe = \"scaledQ a=1\"\n[monitors]\nenabled = [\"virialX\"]\n";
    let (field, message) = invalid_field(parse(text));
    assert_eq!(field, "monitors.enabled");
    for m in Monitor::ALL {
        assert!(message.contains(m.name()), "{message}");
    }
    assert!(message.contains("virialX"));
}

#[test]
fn validation_names_the_field() {
    let cases = [
        ("[initial]\nrecipe = \"scaledQ\"\n", "initial.a"),
        ("[initial]\nrecipe = \"blob a=1\"\n", "initial.recipe"),
        ("[initial]\nrecipe = \"scaledQ a=1\"\nextra = 3\n", "initial.extra"),
        ("[initial]\nrecipe = \"scaledQ a=1\"\n[evolve]\ndt = -1\n", "evolve.dt"),
        ("[initial]\nrecipe = \"scaledQ a=1\"\n[evolve]\nstride = 0\n", "evolve.stride"),
        ("[initial]\nrecipe = \"scaledQ a=1\"\n[monitors]\nmorawetz_radius = 30\n", "monitors.morawetz_radius"),
        ("[initial]\nrecipe = \"scaledQ a=1\"\n[monitors]\ntail_offsets = [80]\n", "monitors.tail_offsets"),
        ("[initial]\nrecipe = \"perturbedQ direction=Qz coefficient=1\"\n", "initial.direction"),
        ("[initial]\nrecipe = \"scaledQ a=1\"\ndelta = 0\n", "initial.delta"),
        ("delta = 0\n[initial]\nrecipe = \"scaledQ a=1\"\n", "delta"),
        ("[initial]\nrecipe = \"scaledQ a=1\"\na = 2\n", "initial.a"),
        ("[grid]\nM = 3\n[initial]\nrecipe = \"scaledQ a=1\"\n", "grid.M"),
    ];
    for (text, want) in cases {
        let (field, _) = invalid_field(parse(text));
        assert_eq!(field, want, "{text}");
    }
}

#[test]
fn parse_errors_carry_the_line() {
    let text = "[grid]\nL = 100\nN = = 4\n[initial]\nrecipe = \"scaledQ a=1\"\n";
    match parse(text) {
        Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn load_config_uses_the_file_stem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("near_soliton.toml");
    std::fs::write(&path, "[initial]\nrecipe = \"scaledQ a=0.99\"\n").unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.name, "near_soliton");
    assert!(matches!(load_config(&dir.path().join("missing.toml")), Err(ConfigError::Io { .. })));
}
