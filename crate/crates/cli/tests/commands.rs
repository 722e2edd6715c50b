use dpw_cli::{load_solve, AreaArtifact};
use std::path::Path;
use std::process::{Command, Output};

fn dpw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpw"))
        .args(args)
        .current_dir(dir)
        .env("DPW_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn kappa_of_m_one_is_ln_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpw(dir.path(), &["kappa", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.6931471806");
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dpw(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(dpw(dir.path(), &["verify", "--suite", "nothing"]).status.code(), Some(2));
    std::fs::write(dir.path().join("odd.toml"), "lambda_grid = 95\n").unwrap();
    let o = dpw(dir.path(), &["--config", "odd.toml", "kappa"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda_grid must be even"));
    let o = Command::new(env!("CARGO_BIN_EXE_dpw"))
        .args(["kappa"])
        .env("DPW_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_then_area_from_the_parameter_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpw(dir.path(), &["solve", "--m", "1", "--k", "20", "--out", "p.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let art = load_solve(&dir.path().join("p.json")).unwrap();
    assert_eq!(art.config.m, 1);
    assert_eq!(art.config.k, 20);
    assert!(art.certificate.residual_inf <= 1e-10);
    assert!(art.tail.adequate);
    assert!((art.params.t - 1.0 / 42.0).abs() < 1e-15);

    let o = dpw(dir.path(), &["area", "--params", "p.json", "--out", "a.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("a.json")).unwrap();
    let area: AreaArtifact = serde_json::from_str(&text).unwrap();
    assert_eq!(area.report.k, 20);
    assert!(area.report.relative_gap < 1e-3);
}

#[test]
fn outputs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "m = 2\nk = 12\n").unwrap();
    let a = dpw(dir.path(), &["--config", "run.toml", "solve", "--out", "a.json"]);
    let b = Command::new(env!("CARGO_BIN_EXE_dpw"))
        .args(["--config", "run.toml", "solve", "--out", "b.json"])
        .current_dir(dir.path())
        .env("DPW_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let ta = std::fs::read(dir.path().join("a.json")).unwrap();
    let tb = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn mesh_and_density_files_embed_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpw(dir.path(), &["mesh", "--m", "1", "--k", "10", "--out", "s.obj", "--density-out", "d.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("closed true"));
    let obj = std::fs::read_to_string(dir.path().join("s.obj")).unwrap();
    let dens = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(obj.starts_with("# config {"));
    assert!(dens.starts_with("# config {"));
    let nv = obj.lines().filter(|l| l.starts_with("v ")).count();
    let nd = dens.lines().skip(2).count();
    assert_eq!(nv, nd);
    assert!(obj.lines().filter(|l| l.starts_with("f ")).count() > nv);
}

#[test]
fn sweep_writes_one_row_per_k() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpw(dir.path(), &["sweep", "--m", "1", "--k-min", "20", "--k-max", "40", "--steps", "2", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config"));
    assert_eq!(lines[1], "m,k,t,area_residue,area_quadrature,gap");
    assert_eq!(lines.len(), 4);
    let row: Vec<f64> = lines[2].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[1], 20.0);
    assert!(row[5] < 1e-3);
}

#[test]
fn verify_iwasawa_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpw(dir.path(), &["verify", "--suite", "iwasawa"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("suite iwasawa: PASS"));
}

#[test]
fn verify_derivatives_for_m_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpw(dir.path(), &["verify", "--suite", "derivatives", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn failing_run_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{ \"config\": 1 }").unwrap();
    let o = dpw(dir.path(), &["area", "--params", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
}
