use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use trcopt::formats::{read_trajectory, write_trajectory};
use trcopt_core::{BitVector, Trajectory, TrajectoryPoint};

fn trcopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trcopt"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("TRCOPT_DATA_DIR")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = "[run]\nn_bits = 12\nn_initial = 6\ncycles = 30\nseed = 4\n\
                     [run.train]\nepochs = 50\n[run.anneal]\nnum_reads = 10\nsweeps = 100\n";

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_cycles_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ncycles = 0\n");
    let o = trcopt(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cycles"), "{}", stderr(&o));
}

#[test]
fn missing_material_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("tables/materials")).unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}[data]\nmaterials = \"tables\"\n"));
    let o = trcopt(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sio2.csv"), "{}", stderr(&o));
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.csv");
    fs::write(&traj, "cycle,bitstring,fom\n1,0011,1\n").unwrap();
    let o = trcopt(&["analyze", traj.to_str().unwrap(), "--method", "spline"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("spline"));
}

#[test]
fn malformed_trajectory_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.csv");
    fs::write(&traj, "cycle,bitstring,fom\n1,0011,1\n2,0111,oops\n").unwrap();
    let o = trcopt(&["analyze", traj.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn analyze_reproduces_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = trcopt(&["run", "--config", &cfg, "--method", "pw-5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run_dir = dir.path().join("out/n12_N6_seed4");
    for f in ["trajectory.csv", "dataset.csv", "curve.csv", "report.csv", "best.csv", "spectrum.csv", "model.txt", "qubo.txt"] {
        assert!(run_dir.join(f).is_file(), "{f}");
    }
    let traj = fs::read_to_string(run_dir.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 31);
    let out = dir.path().join("re");
    let o = trcopt(&[
        "analyze",
        run_dir.join("trajectory.csv").to_str().unwrap(),
        "--method",
        "pw",
        "--pieces",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(run_dir.join("report.csv")).unwrap(), fs::read(out.join("report.csv")).unwrap());
    assert_eq!(fs::read(run_dir.join("curve.csv")).unwrap(), fs::read(out.join("curve.csv")).unwrap());
}

#[test]
fn single_cell_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}[sweep]\nsizes = [12]\ncounts = [6]\nseeds = 1\nroot_seed = 4\n"),
    );
    let run_out = dir.path().join("run");
    let sweep_out = dir.path().join("sweep");
    assert!(trcopt(&["run", "--config", &cfg, "--out", run_out.to_str().unwrap()]).status.success());
    let o = trcopt(&["sweep", "--config", &cfg, "--out", sweep_out.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cell = "n12_N6_seed4";
    for entry in fs::read_dir(run_out.join(cell)).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(run_out.join(cell).join(&name)).unwrap(),
            fs::read(sweep_out.join(cell).join(&name)).unwrap(),
            "{name:?}"
        );
    }
    let summary = fs::read_to_string(sweep_out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "n_bits,n_initial,seed,initiation_cycle");
    assert!(rows[1].starts_with("12,6,4,"));
}

#[test]
fn absent_initiation_is_recorded_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}[sweep]\nsizes = [12]\ncounts = [6]\nseeds = 2\n"));
    let out = dir.path().join("s");
    let o = trcopt(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--threshold", "-1e9", "--method", "pw-5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.ends_with(",none")), "{summary}");
    let median = fs::read_to_string(out.join("median.csv")).unwrap();
    assert_eq!(median.lines().nth(1), Some("12,6,2,none"));
}

#[test]
fn failing_cells_give_nonzero_exit_but_finish() {
    let dir = tempfile::tempdir().unwrap();
    // 3-bit padding is invalid for the window decoder, 12 bits is fine
    let cfg = write_config(dir.path(), &format!("{SMALL}[sweep]\nsizes = [12, 3]\ncounts = [6]\nseeds = 1\n"));
    let out = dir.path().join("s");
    let o = trcopt(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("n12_N6_seed0/report.csv").is_file());
    let failures = fs::read_to_string(out.join("failures.csv")).unwrap();
    assert_eq!(failures.lines().count(), 2, "{failures}");
    assert!(failures.lines().nth(1).unwrap().starts_with("3,6,0,"));
}

proptest! {
    #[test]
    fn trajectory_files_round_trip(rows in prop::collection::vec((prop::collection::vec(any::<bool>(), 8), any::<f64>()), 1..40)) {
        let rows: Vec<_> = rows.into_iter().filter(|(_, f)| f.is_finite()).collect();
        let t = Trajectory {
            points: rows
                .into_iter()
                .enumerate()
                .map(|(i, (bits, fom))| TrajectoryPoint { cycle: i + 1, x: BitVector::from_bools(&bits), fom })
                .collect(),
        };
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &t, Path::new("t.csv")).unwrap();
        prop_assert_eq!(read_trajectory(buf.as_slice(), Path::new("t.csv")).unwrap(), t);
    }
}
