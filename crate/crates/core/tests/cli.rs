//! End-to-end runs of the `axb` binary.

use std::fs;
use std::process::{Command, Output};

fn axb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_reports_convergence() {
    let o = axb(&["solve", "--random", "30,8,4,5", "--method", "MWRBK", "--stop", "rse:1e-8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("Converged"), "{out}");
    let rse: f64 = out.lines().find(|l| l.starts_with("rse")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(rse <= 1e-8);
}

#[test]
fn traces_without_wall_time_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = axb(&[
            "solve", "--random", "25,6,4,4", "--method", "RGRBK", "--theta", "0.3", "--seed", "4",
            "--stop", "rse:1e-6", "--trace-stride", "50", "--no-wall", "--out", path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn solve_reads_matrix_market_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mtx");
    fs::write(
        &a,
        "%%MatrixMarket matrix coordinate real general\n4 3 6\n1 1 2\n2 2 1\n3 3 3\n4 1 1\n4 2 1\n2 3 -1\n",
    )
    .unwrap();
    let o = axb(&["solve", "--a", a.to_str().unwrap(), "--method", "BK", "--stop", "rse:1e-10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("problem      4x3 A, 3x3 B"));
}

#[test]
fn bench_writes_summary_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("summary.csv");
    let o = axb(&[
        "bench", "--random", "20,10,6,5", "--method", "RBK,GRBK,RGRBK,MWRBK", "--theta", "0.25,0.75",
        "--trials", "3", "--stop", "rse:1e-6", "--out", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    for label in ["RBK", "GRBK", "RGRBK(theta=0.25)", "RGRBK(theta=0.75)", "MWRBK"] {
        assert!(table.contains(label), "{label} missing from\n{table}");
    }
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 6, "{text}");
}

#[test]
fn verify_passes_and_writes_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = axb(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    assert!(dir.path().join("bounds.csv").exists());
}

#[test]
fn deblur_improves_psnr_and_writes_images() {
    let dir = tempfile::tempdir().unwrap();
    let o = axb(&["deblur", "--size", "16", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let db = |key: &str| -> f64 {
        let line = out.lines().find(|l| l.starts_with(key)).unwrap();
        line[key.len()..].trim().trim_end_matches(" dB").parse().unwrap()
    };
    assert!(db("psnr restored") > db("psnr blurred") + 5.0, "{out}");
    for f in ["original.ppm", "blurred.ppm", "restored.ppm", "trace.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(axb(&["solve", "--random", "5,3,2,2", "--method", "XYZ"]).status.code(), Some(2));
    assert_eq!(axb(&["solve"]).status.code(), Some(2));
    assert_eq!(axb(&["bench", "--random", "5,3,2,2", "--theta", "1.5"]).status.code(), Some(2));
    assert_eq!(axb(&["nonsense"]).status.code(), Some(2));
}
