use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn plateau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plateau")).current_dir(root()).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn curvature_prints_multiples_of_pi() {
    let o = plateau(&["curvature", "data/curves/square.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("= 2π (< 4π)"), "{}", stdout(&o));
    let o = plateau(&["curvature", "data/curves/trefoil6.json"]);
    assert!(stdout(&o).contains("(> 4π)"));
    let o = plateau(&["curvature", "data/curves/example52.json", "--space", "data/spaces/glued_pi.json"]);
    assert!(stdout(&o).contains("= 4π (= 4π)"), "{}", stdout(&o));
}

#[test]
fn bad_input_exits_with_two() {
    let o = plateau(&["curvature", "data/curves/open_polyline.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("closed"));
    assert_eq!(plateau(&["run", "no/such/scene.json"]).status.code(), Some(2));
    assert_eq!(plateau(&["curvature", "data/curves/square.json", "--space", "missing.json"]).status.code(), Some(2));
}

#[test]
fn run_writes_reports_that_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = plateau(&["run", "scenes/trefoil6.json", "--threads", "1", "--out", a.to_str().unwrap()]);
    let ob = plateau(&["run", "scenes/trefoil6.json", "--threads", "4", "--out", b.to_str().unwrap()]);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(ob.status.code(), Some(0));
    assert!(stdout(&oa).contains("PASS fary_milnor: above_threshold"));
    let ra = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap());
    for f in ["timings.json", "map.json"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["schema_version"], 1);
}

#[test]
fn solve_then_analyze_reuses_the_map() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("solve");
    let o = plateau(&["solve", "data/curves/square.json", "--rings", "8", "--out", solved.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(solved.join("solve.json").exists());
    let out = dir.path().join("analyze");
    let map = solved.join("map.json");
    let o = plateau(&["analyze", "scenes/square.json", "--map", map.to_str().unwrap(), "--skip-funnel", "--out", out.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("PASS curvature"), "{text}");
    assert!(out.join("report.json").exists());
}

#[test]
fn funnel_and_fary_milnor_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = plateau(&["funnel", "data/curves/square.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("growth.csv")).unwrap();
    assert!(csv.starts_with("r,theta,stderr"));
    assert!(std::fs::read_to_string(dir.path().join("growth.svg")).unwrap().starts_with("<svg"));
    let o = plateau(&["fary-milnor", "data/curves/hexagon.json", "--skip-funnel", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("embedded"));
}
