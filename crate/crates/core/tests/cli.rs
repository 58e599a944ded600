use std::path::Path;
use std::process::{Command, Output};

fn simons(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simons")).args(args).arg("--out").arg(out).output().unwrap()
}

fn bare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simons")).args(args).env_remove("SIMONS_OUT_DIR").output().unwrap()
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        assert!(simons(&["profile", "--n", "3", "--p", "1", "--sign", "-"], dir).status.success());
        assert!(simons(&["mesh", "--n", "2", "--p", "1"], dir).status.success());
        assert!(simons(&["odecheck", "--seed", "5", "--count", "20"], dir).status.success());
    }
    for name in ["profile_n3_p1_minus.csv", "mesh_n2_p1_plus.csv", "mesh_n2_p1_plus.obj", "odecheck_seed5.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(bare(&["roots", "--n", "2", "--p", "1", "--bogus"]).status.code(), Some(64));
    assert_eq!(bare(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(bare(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(simons(&["roots", "--n", "3", "--p", "3"], dir.path()).status.code(), Some(1));
    assert_eq!(simons(&["roots", "--n", "1", "--p", "0"], dir.path()).status.code(), Some(1));
    assert_eq!(simons(&["profile", "--p", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(simons(&["profile", "--n", "2", "--p", "1", "--offset=-1"], dir.path()).status.code(), Some(1));
}

#[test]
fn roots_table_has_all_modes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simons(&["roots", "--n", "2", "--p", "1", "--max-mode", "4"], dir.path()).status.success());
    let csv = std::fs::read_to_string(dir.path().join("roots_n2_p1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,p,k,l,re_plus,im_plus,re_minus,im_minus,kind");
    assert_eq!(lines.count(), 15);
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let from_cfg = dir.path().join("from_cfg");
    std::fs::write(
        &cfg,
        format!(r#"{{"n": 4, "p": 1, "sign": "-", "out_dir": {:?}, "controls": {{"offset": 1e-7}}}}"#, from_cfg),
    )
    .unwrap();
    let env_dir = dir.path().join("from_env");
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_simons")).args(args).env("SIMONS_OUT_DIR", &env_dir).output().unwrap()
    };
    assert!(run(&["profile", "--config", cfg.to_str().unwrap()]).status.success());
    assert!(from_cfg.join("profile_n4_p1_minus.csv").exists());
    // Flags override the file.
    assert!(run(&["profile", "--config", cfg.to_str().unwrap(), "--p", "2", "--sign", "+"]).status.success());
    assert!(from_cfg.join("profile_n4_p2_plus.csv").exists());
    assert!(run(&["roots", "--n", "2", "--p", "1"]).status.success());
    assert!(env_dir.join("roots_n2_p1.csv").exists());

    std::fs::write(&cfg, r#"{"n": 2, "colour": "red"}"#).unwrap();
    assert_eq!(run(&["roots", "--config", cfg.to_str().unwrap(), "--p", "1"]).status.code(), Some(1));
}

#[test]
fn verify_and_density_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = simons(&["verify", "--n", "2", "--p", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(dir.path().join("verify_n2_p1_plus.txt")).unwrap();
    assert!(report.contains("density estimate: 1.5707963"));
    assert!(report.contains("overall: PASS"));
    for name in ["verify_n2_p1_plus_density.csv", "verify_n2_p1_plus_decay.csv", "verify_n2_p1_plus_flux.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    assert!(simons(&["density", "--n", "3", "--p", "2", "--count", "30"], dir.path()).status.success());
    let csv = std::fs::read_to_string(dir.path().join("density_n3_p2_plus.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);
    assert!(simons(&["density", "--n", "3", "--p", "2", "--pole"], dir.path()).status.success());
    assert!(dir.path().join("density_pole_n3_p2_plus.csv").exists());
}

#[test]
fn portrait_and_sweep_commands() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simons(&["portrait", "--n", "7", "--p", "3", "--doubled", "--grid", "10"], dir.path()).status.success());
    let field = std::fs::read_to_string(dir.path().join("portrait_n7_p3.csv")).unwrap();
    assert_eq!(field.lines().count(), 101);
    let ends = std::fs::read_to_string(dir.path().join("portrait_n7_p3_endpoints.csv")).unwrap();
    assert_eq!(ends.lines().count(), 5);

    let out = simons(&["sweep", "--n-max", "4"], dir.path());
    assert!(out.status.success());
    let files = std::fs::read_dir(dir.path().join("sweep")).unwrap().count();
    assert_eq!(files, 12);
    let cell = std::fs::read_to_string(dir.path().join("sweep/n4_p2_plus.csv")).unwrap();
    assert!(cell.lines().nth(1).unwrap().starts_with("4,2,+,ok,"));
}
