use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn raster(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raster"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn model_prints_access_times_and_no_lens() {
    let dir = tempfile::tempdir().unwrap();
    let o = raster(&["model"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("428.6 ns"), "{text}");
    assert!(text.contains("457.0 ns"));
    assert!(text.contains("1.76"));
    let o = raster(&["model", "--alpha", "0"], dir.path());
    assert!(stdout(&o).contains("no-lens"));
}

#[test]
fn model_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = raster(&["model", "--out", "m.json"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(v["access_time_ratio_model"].as_f64().unwrap(), 2.0);
}

#[test]
fn resolve_closed_form_row_at_one_microsecond() {
    let dir = tempfile::tempdir().unwrap();
    let o = raster(&["resolve", "--t-scan-us", "1", "--access-time-ns", "457", "--no-oracle"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 2.87).abs() < 0.01, "{text}");
    assert!((row[2] - 18.7).abs() < 0.05, "{text}");
}

#[test]
fn oracle_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = raster(&["oracle", "--alpha", "0,1e13", "--samples", "4096", "--out", "o.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha_hz_per_s,t_scan_s,width_oracle_rad,width_eq_s1_rad,n_dyn_oracle,n_dyn_closed_form,device"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn compile_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "1090\n0909\n9999\n").unwrap();
    let device = config("brimrose_ted150_full_band.json");
    let o = raster(&["--device", &device, "compile", "--pattern", "p.txt", "--out", "s.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    // Default retrace leaves the refresh rate below the default heating margin.
    let o = raster(&["--device", &device, "validate", "--schedule", "s.json"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("C1   FAIL"));
    let o = raster(
        &["--device", &device, "validate", "--schedule", "s.json", "--heating-margin", "6"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn compile_rejects_out_of_band_rows_on_the_default_device() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "1\n1\n1\n").unwrap();
    let o = raster(&["compile", "--pattern", "p.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EOM band"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "99\n19\n").unwrap();
    let device = config("brimrose_ted150_full_band.json");
    for out in ["a.json", "b.json"] {
        let o = raster(&["--device", &device, "compile", "--pattern", "p.txt", "--out", out], dir.path());
        assert!(o.status.success());
    }
    for out in ["a.csv", "b.csv"] {
        let o = raster(&["plan-bench", "--n", "2,4", "--trials", "3", "--seed", "3", "--out", out], dir.path());
        assert!(o.status.success());
    }
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn plan_reports_summary_and_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let bounds = r#"{"x_min_um": 0, "x_max_um": 50, "y_min_um": 0, "y_max_um": 50}"#;
    std::fs::write(
        dir.path().join("a.json"),
        format!(r#"{{"bounds": {bounds}, "positions": [{{"x_um": 0, "y_um": 0}}]}}"#),
    )
    .unwrap();
    std::fs::write(
        dir.path().join("b.json"),
        format!(r#"{{"bounds": {bounds}, "positions": [{{"x_um": 10, "y_um": 0}}]}}"#),
    )
    .unwrap();
    let o = raster(&["plan", "--initial", "a.json", "--target", "b.json", "--out", "plan.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("cycles=100"));
    assert!(stderr(&o).contains("total_time_us=100.000"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("plan.json")).unwrap()).unwrap();
    assert_eq!(v["cycles"], 100);
    let o = raster(&["plan", "--initial", "a.json", "--target", "b.json", "--model", "slm"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn budget_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = raster(&["budget", "--chain", &config("chain_current.json")], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.01875"));
    let o = raster(&["budget", "--chain", &config("chain_upgraded.json")], dir.path());
    let text = stdout(&o);
    assert!(text.contains("derived"), "{text}");
    assert!(text.contains("traps at 1.000 mW/trap: 506"), "{text}");
    let o = raster(&["budget", "--chain", &config("chain_current.json"), "--input-power-w", "1"], dir.path());
    assert!(stdout(&o).contains("user supplied"));
}

#[test]
fn render_writes_pgm() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "90\n09\n").unwrap();
    let o = raster(&["render", "--pattern", "p.txt", "--out", "img.pgm", "--annotate-edge-rows"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(dir.path().join("img.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n"));
    let o = raster(&["render", "--pattern", "p.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_point_at_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"beam\": 3\n}\n").unwrap();
    let o = raster(&["--device", "bad.json", "model"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("beam"), "{err}");
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(raster(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(raster(&["compile"], dir.path()).status.code(), Some(1));
    assert_eq!(raster(&["--help"], dir.path()).status.code(), Some(0));
}
