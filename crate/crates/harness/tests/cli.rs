//! The `clip-lab` binary: exit codes and on-disk artifacts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn clip_lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clip-lab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CLIP_LAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_is_success_and_bad_usage_is_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&clip_lab(&["--help"], dir.path())), 0);
    assert_eq!(code(&clip_lab(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&clip_lab(&["verify", "nope"], dir.path())), 1);
    assert_eq!(code(&clip_lab(&["limit", "--eta", "0.5"], dir.path())), 1);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "[objective]\nkind = \"quartic\"\n[optimizer]\nschedule = \"explicit\"\neta = 0.1\nbeta = \"high\"\n\
         [init]\nkind = \"explicit\"\nx0 = [1.0]\n[run]\nsteps = 10\nseeds = [1]\n",
    )
    .unwrap();
    let o = clip_lab(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("optimizer.beta"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists(), "nothing is written for an invalid config");
}

#[test]
fn workers_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_clip-lab"))
        .args(["limit", "--eta", "0.5", "--beta", "0", "--nu", "0"])
        .env("CLIP_LAB_WORKERS", "0")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_clip-lab"))
        .args(["limit", "--eta", "0.5", "--beta", "0", "--nu", "0"])
        .env("CLIP_LAB_WORKERS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("1.6666666666666666e-1"), "{text}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = clip_lab(&["run", "preset:appendixE-grid", "--out", out], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 17, "16 trajectories and a summary");
    for n in names {
        let a = fs::read(dir.path().join("a").join(&n)).unwrap();
        let b = fs::read(dir.path().join("b").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn verify_lemmas_passes_and_halved_constants_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = clip_lab(&["verify", "lemmas", "--out", "ok.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = clip_lab(&["verify", "lemmas", "--scale-constants", "0.5", "--out", "bad.csv"], dir.path());
    assert_eq!(code(&o), 2);
    let report = fs::read_to_string(dir.path().join("bad.csv")).unwrap();
    let violating = report
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(4).unwrap().parse::<usize>().unwrap() > 0)
        .count();
    assert!(violating >= 1, "{report}");
    assert!(report.starts_with("suite,objective,check_name,samples,violations,max_residual\n"));
}

#[test]
fn runtime_failure_leaves_partial_outputs_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("diverge.toml");
    fs::write(
        &cfg,
        "[objective]\nkind = \"quartic\"\n[optimizer]\nschedule = \"explicit\"\neta = 0.5\ngamma = inf\n\
         [init]\nkind = \"explicit\"\nx0 = [3.0]\n[run]\nsteps = 100\nseeds = [1, 2]\n",
    )
    .unwrap();
    let o = clip_lab(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let out = dir.path().join("out");
    let errors = fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(errors.starts_with("seed,last_good_step,error\n"));
    assert_eq!(errors.lines().count(), 3);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains(",failed,"));
    let traj = fs::read_to_string(out.join("trajectory_seed1.csv")).unwrap();
    assert!(traj.lines().count() >= 2);
}

#[test]
fn profile_and_sweep_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    fs::write(
        &cfg,
        "[objective]\nkind = \"poly2d\"\n[optimizer]\nschedule = \"explicit\"\neta = 0.001\ngamma = 0.01\n\
         [init]\nkind = \"explicit\"\nx0 = [0.0, 1.0]\n[run]\nsteps = 200\nseeds = [1]\nrecord_stride = 10\n\
         [profile]\nlower = [-3.0, -3.0]\nupper = [3.0, 3.0]\nper_axis = 10\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&clip_lab(&["profile", c, "--grid", "--out", "g"], dir.path())), 0);
    let land = fs::read_to_string(dir.path().join("g/landscape.csv")).unwrap();
    assert!(land.starts_with("point,x0,x1,grad_norm,hess_norm\n"));
    assert_eq!(land.lines().count(), 101);
    assert_eq!(code(&clip_lab(&["profile", c, "--trajectory", "--out", "t"], dir.path())), 0);
    let land = fs::read_to_string(dir.path().join("t/landscape.csv")).unwrap();
    assert_eq!(land.lines().count(), 22);
    let env = fs::read_to_string(dir.path().join("t/envelope.csv")).unwrap();
    assert!(env.starts_with("samples,l0,l1,inflation,violations,rank_correlation\n"));

    let o = clip_lab(&["sweep", c, "--grid", "optimizer.eta=0.001,0.002;optimizer.gamma=0.01,inf", "--out", "s"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sweep = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
    assert!(dir.path().join("s/cell3/summary.csv").exists());
    let o = clip_lab(&["sweep", c, "--grid", "", "--out", "s2"], dir.path());
    assert_eq!(code(&o), 1);
    let o = clip_lab(&["sweep", c, "--grid", "optimizer.etta=1", "--out", "s3"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("etta"), "{}", stderr(&o));
}
