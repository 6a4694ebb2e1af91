use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use smuas::output::read_record_csv;

fn smuas(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smuas"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn field(stdout: &[u8], key: &str) -> f64 {
    String::from_utf8_lossy(stdout)
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {key} line"))
}

#[test]
fn run_then_estimate_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = smuas(&["run", "dof_stop=300", "out_dir=out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.path().join("out/record.csv")).unwrap();
    let rows = read_record_csv(&csv).unwrap();
    let dofs: Vec<usize> = rows.iter().map(|r| r.dofs).collect();
    assert_eq!(&dofs[..3], &[25, 81, 289]);
    assert!(*dofs.last().unwrap() >= 300);
    assert!(!dir.path().join("out/.lock").exists());

    let vtk = dir.path().join("out/mesh_1.vtk");
    let est = smuas(&["estimate-only", vtk.to_str().unwrap()], dir.path());
    assert!(est.status.success());
    assert_eq!(field(&est.stdout, "dofs ") as usize, 81);
    let eta = field(&est.stdout, "eta ");
    assert!(
        (eta - rows[1].eta).abs() <= 1e-12 * rows[1].eta,
        "{eta} vs {}",
        rows[1].eta
    );
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = smuas(&["run", "colour=red"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = smuas(&["run", "problem=nope"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "theta = 2\n").unwrap();
    let out = smuas(&["run", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn held_lock_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("out")).unwrap();
    fs::write(dir.path().join("out/.lock"), "").unwrap();
    let out = smuas(&["run", "dof_stop=30", "out_dir=out"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("out/record.csv").exists());
}

#[test]
fn unreadable_vtk_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.vtk"), "not a vtk file").unwrap();
    let out = smuas(&["estimate-only", "x.vtk"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = smuas(&["estimate-only", "missing.vtk"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dmp_test_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = smuas(&["dmp-test"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn dump_limiters_writes_one_row_per_off_diagonal_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = smuas(&["dump-limiters", "--level", "1", "--out", "lim.csv"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("lim.csv")).unwrap();
    // 9 vertices, 16 edges
    assert_eq!(text.lines().count(), 1 + 2 * 16);
    for line in text.lines().skip(1) {
        let alpha: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&alpha));
    }
}
