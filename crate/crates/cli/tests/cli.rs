//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn axiflow(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axiflow"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, body).unwrap();
    path
}

const HELIX_TRACE: &str = r#"
schema_version = 1

[field]
name = "rotation_axial"
[field.params]
omega = 1.0
c = 1.0

[trace]
seeds = [[1.0, 0.0, 0.0]]
t_span = [0.0, 5.0]
rel_tol = 1e-11
"#;

#[test]
fn trace_helix_endpoint_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), HELIX_TRACE);
    let out = axiflow(&["trace"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    // config echo present
    assert_eq!(summary["config"]["field"]["name"], "rotation_axial");
    let row = &summary["report"][0];
    assert_eq!(row["status"], "completed");
    let (r, th, z) = (
        row["end_r"].as_f64().unwrap(),
        row["end_theta"].as_f64().unwrap(),
        row["end_z"].as_f64().unwrap(),
    );
    assert!((r - 1.0).abs() < 1e-9);
    assert!((th - 5.0).abs() < 1e-9);
    assert!((z - 5.0).abs() < 1e-9);

    // CSV columns per the interface
    let csv = fs::read_to_string(dir.path().join("trace_0.csv")).unwrap();
    assert!(csv.starts_with("# t,s,R,Theta,Z,v_r,v_theta,v_z"));
}

const IDENTITIES: &str = r#"
schema_version = 1

[field]
name = "rigid_swirl_pulsatile"
[field.params]
omega = 1.0
g0 = 1.0
g2 = 2.0

[identities]
seed = [1.0, 0.0, 0.0]
t_span = [0.0, 1.0]
probes = [0.3, 0.5, 0.7]
rel_tol = 1e-12
"#;

#[test]
fn identities_report_residuals_below_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), IDENTITIES);
    let out = axiflow(&["identities"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("identities.json")).unwrap())
            .unwrap();
    let report = &doc["report"]["identities"];
    assert_eq!(report["passed"], true);
    assert!(report["max_rel_residual"].as_f64().unwrap() < 1e-4);
    // CSV columns per the interface
    let csv = fs::read_to_string(dir.path().join("identities.csv")).unwrap();
    assert!(csv.starts_with("# probe_s,residual_tau,residual_n,residual_rbar,residual_zbar"));
    assert_eq!(csv.lines().count(), 1 + 3);
}

const SCAN_EMPTY: &str = r#"
schema_version = 1

[field]
name = "uniform"
[field.params]
g0 = 1.0

[scan]
epsilon = 0.9
beta = 0.5
delta = 0.1
g0 = 10.0
g1_grid = [200.0]
g2_grid = [1e5]
seeds = [[0.6, 0.0]]
swirl = 1.5
swirl_band = [0.5, 2.0]
base_amp = 0.25
gain = 0.05
lag = 1e-4
z_in = -20.0
dt_factor = 1e-3
"#;

#[test]
fn empty_admissible_scan_exits_zero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCAN_EMPTY);
    let out = axiflow(&["scan"], &cfg, dir.path());
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no admissible"), "stderr: {stderr}");
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "only the header line");
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("scan.json")).unwrap()).unwrap();
    assert!(doc["report"]["rows"].as_array().unwrap().is_empty());
    assert!(!doc["report"]["skipped"].as_array().unwrap().is_empty());
}

const SCAN_SMALL: &str = r#"
schema_version = 1

[field]
name = "uniform"
[field.params]
g0 = 1.0

[scan]
epsilon = 0.25
beta = 2.0
delta = 0.1
g0 = 10.0
g1_grid = [200.0, 400.0]
g2_grid = [1e5, 5e4]
seeds = [[0.6, 0.0]]
swirl = 1.5
swirl_band = [0.5, 2.0]
base_amp = 0.25
gain = 0.05
lag = 1e-4
z_in = -20.0
dt_factor = 1e-3
"#;

#[test]
fn scan_row_count_equals_admissible_grid_points() {
    // with delta = 0.1: g1/delta^2 = 100 g1, so 200 -> 2e4 and 400 -> 4e4;
    // both below either g2 value: all 4 grid points admissible
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCAN_SMALL);
    let out = axiflow(&["scan"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);

    // JSON table round-trips losslessly
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("scan.json")).unwrap()).unwrap();
    let table: axiflow_core::scan::ScanTable =
        serde_json::from_value(doc["report"].clone()).unwrap();
    let again = serde_json::to_value(&table).unwrap();
    assert_eq!(doc["report"], again);
}

#[test]
fn reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let cfg = write_config(dir_a.path(), SCAN_SMALL);
    assert!(axiflow(&["scan"], &cfg, dir_a.path()).status.success());
    assert!(axiflow(&["scan"], &cfg, dir_b.path()).status.success());
    let a = fs::read(dir_a.path().join("scan.csv")).unwrap();
    let b = fs::read(dir_b.path().join("scan.csv")).unwrap();
    assert_eq!(a, b);
    let a = fs::read(dir_a.path().join("scan.json")).unwrap();
    let b = fs::read(dir_b.path().join("scan.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // unknown key inside a typed block
    let cfg = write_config(dir.path(), &format!("{HELIX_TRACE}bogus_key = 1\n"));
    let out = axiflow(&["trace"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));

    // missing required field parameter
    let cfg = write_config(
        dir.path(),
        "schema_version = 1\n[field]\nname = \"poiseuille\"\n",
    );
    let out = axiflow(&["fields"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("p_s"), "names the missing key: {stderr}");

    // missing subcommand block
    let cfg = write_config(dir.path(), HELIX_TRACE);
    let out = axiflow(&["atlas"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
}

const ATLAS_REVERSING: &str = r#"
schema_version = 1

[field]
name = "womersley"
[field.params]
nu = 0.05
n_freq = 3.0
p_o = 2.0

[atlas]
t = 1.1
rbar0_grid = [0.3, 0.5, 0.7]
z_grid = [0.0, 1.0]
z_in = -5.0
"#;

#[test]
fn numerical_failure_exits_two_with_error_report() {
    // the oscillatory profile reverses: no streamline map exists at this t
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ATLAS_REVERSING);
    let out = axiflow(&["atlas"], &cfg, dir.path());
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("error.json")).unwrap()).unwrap();
    let msg = err["report"]["error"].as_str().unwrap();
    assert!(msg.contains("unilateral"), "error names the failure: {msg}");
}

const ATLAS_UNIFORM: &str = r#"
schema_version = 1

[field]
name = "uniform"
[field.params]
g0 = 1.0
g1 = 2.0

[atlas]
t = 0.5
rbar0_grid = { start = 0.1, stop = 0.9, count = 9 }
z_grid = [-2.0, 0.0, 2.0]
z_in = -10.0
rates_rbar0 = [0.5]
rates_z = [1.0]
"#;

#[test]
fn atlas_outputs_map_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ATLAS_UNIFORM);
    let out = axiflow(&["atlas"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let map = fs::read_to_string(dir.path().join("map.csv")).unwrap();
    assert!(map.starts_with("# rbar0,z,Rbar"));
    assert_eq!(map.lines().count(), 1 + 9 * 3);
    let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert!(rates.starts_with("# rbar0,z,L_x,L_t"));
    // columnar flow: L_x = 2, L_t = 0
    let row: Vec<&str> = rates.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "2");
    assert_eq!(row[3], "0");
}

const FIELDS_AND_FRAMES: &str = r#"
schema_version = 1

[field]
name = "rigid_swirl_pulsatile"
[field.params]
omega = 1.0
g0 = 1.0
g1 = 1.0

[fields]
r_grid = { start = 0.1, stop = 0.9, count = 5 }
z_grid = [0.0]
t = 0.5

[frames]
seed = [1.0, 0.0, 0.0]
t_span = [0.0, 2.0]
rel_tol = 1e-11
n_samples = 8
"#;

#[test]
fn fields_and_frames_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), FIELDS_AND_FRAMES);
    let out = axiflow(&["fields"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fields.json")).unwrap())
            .unwrap();
    assert_eq!(doc["report"]["certification"]["passed"], true);

    let out = axiflow(&["frames"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("frames.csv")).unwrap();
    assert!(csv.starts_with("# s,tau_x"));
    assert_eq!(csv.lines().count(), 1 + 7);
}
