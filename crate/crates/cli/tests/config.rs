use dpw_cli::config::RunConfig;

#[test]
fn empty_file_gives_defaults() {
    let cfg = RunConfig::from_toml("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.trunc_degree, 24);
    assert!((cfg.t() - 1.0 / 42.0).abs() < 1e-16);
}

#[test]
fn odd_grid_is_a_named_violation() {
    let err = RunConfig::from_toml("lambda_grid = 97\n").unwrap_err().to_string();
    assert!(err.contains("lambda_grid must be even"), "{err}");
}

#[test]
fn other_invariants_are_named() {
    for (text, key) in [
        ("rho = 1.0", "rho"),
        ("lambda_grid = 40", "lambda_grid >= 2*trunc_degree + 2"),
        ("ode_tol = 0.0", "ode_tol"),
        ("newton_tol = -1e-3", "newton_tol"),
        ("rays_per_sector = 3", "rays_per_sector"),
        ("k_min = 50\nk_max = 20", "k_min"),
        ("t = 0.7", "t < 1/2"),
    ] {
        let err = RunConfig::from_toml(text).unwrap_err().to_string();
        assert!(err.contains(key), "{text}: {err}");
    }
}

#[test]
fn parse_errors_carry_the_line_number() {
    let err = RunConfig::from_toml("m = 2\nk = 10\nrho = two\n").unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    let err = RunConfig::from_toml("m = 2\n\ncolour = 1\n").unwrap_err().to_string();
    assert!(err.contains("line 3") && err.contains("colour"), "{err}");
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let cfg = RunConfig {
        m: 3,
        k: 17,
        t: Some(0.0123456789012345),
        trunc_degree: 30,
        rho: 1.75,
        lambda_grid: 128,
        ode_tol: 3e-12,
        newton_tol: 2.5e-11,
        rings: 4,
        mesh_out: "out/surface.obj".into(),
        ..RunConfig::default()
    };
    cfg.save(&path).unwrap();
    assert_eq!(RunConfig::load(&path).unwrap(), cfg);
    let plain = RunConfig::default();
    plain.save(&path).unwrap();
    assert_eq!(RunConfig::load(&path).unwrap(), plain);
}

#[test]
fn geometric_sweep_range() {
    let cfg = RunConfig::default();
    let ks = cfg.sweep_ks();
    assert_eq!(ks.first(), Some(&10));
    assert_eq!(ks.last(), Some(&200));
    assert!(ks.windows(2).all(|w| w[0] < w[1]));
    let one = RunConfig { k_min: 5, k_max: 5, ..RunConfig::default() };
    assert_eq!(one.sweep_ks(), vec![5]);
}
