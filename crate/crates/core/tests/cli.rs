use std::path::{Path, PathBuf};
use std::process::Command;

use adscreen::cli::{format_float, parse_config, run, to_json, CONTINUOUS_SWEEP_COLUMNS};
use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn invoke(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["adscreen"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn with_config(cmd: &str, path: &Path) -> (u8, String, String) {
    invoke(&[cmd, "--config", path.to_str().unwrap()])
}

fn temp_config(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn verify_passes_on_the_calibrated_examples() {
    for name in ["example3.json", "example4.json", "example5.json"] {
        let (code, out, err) = with_config("verify", &config(name));
        assert_eq!(code, 0, "{name}: {err}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "sufficient_passed", "{name}");
    }
}

#[test]
fn failed_necessary_condition_exits_one() {
    let (code, out, _) = with_config("verify", &config("example4_low_k.json"));
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "necessary_failed");
}

#[test]
fn output_is_byte_identical_across_runs() {
    for (cmd, name) in [
        ("verify", "example5.json"),
        ("calibrate", "example4.json"),
        ("analyze", "log_linear.json"),
        ("oracle", "example1.json"),
        ("sweep", "example1.json"),
        ("sweep", "sweep_uniform.json"),
    ] {
        let a = with_config(cmd, &config(name));
        let b = with_config(cmd, &config(name));
        assert_eq!(a, b, "{cmd} {name}");
    }
}

#[test]
fn config_errors_name_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = temp_config(
        &dir,
        "bad.json",
        r#"{"type_space":{"x1":[0,1],"x2":[-1,0]},"density":{"kind":"gaussian"},"payment":{"kind":"constant","k":0.0}}"#,
    );
    let (code, out, err) = with_config("analyze", &p);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("density.kind"), "{err}");

    let p = temp_config(&dir, "space.json", r#"{"type_space":{"x1":[1,0],"x2":[-1,0]},"payment":{"kind":"constant","k":0.0}}"#);
    assert_eq!(with_config("oracle", &p).0, 2);
    let (code, _, err) = with_config("verify", &dir.path().join("missing.json"));
    assert_eq!(code, 2);
    assert!(err.contains("--config"));
    assert_eq!(invoke(&["frobnicate"]).0, 2);
}

#[test]
fn quadrature_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = temp_config(
        &dir,
        "q.json",
        r#"{"type_space":{"x1":[0,1],"x2":[-1,0]},"density":{"kind":"log_linear","a":3,"b":2},
            "payment":{"kind":"constant","k":0.0},
            "quadrature":{"gauss_order":4,"max_subdivisions":1,"abs_tol":1e-300,"rel_tol":1e-300}}"#,
    );
    let (code, _, err) = with_config("analyze", &p);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("quadrature"));
}

#[test]
fn missing_root_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let p = temp_config(
        &dir,
        "nr.json",
        r#"{"type_space":{"x1":[2,3],"x2":[-1,0]},"density":{"kind":"uniform"},
            "payment":{"kind":"constant","k":0.0},"mechanism":{"kind":"good_only"}}"#,
    );
    assert_eq!(with_config("calibrate", &p).0, 4);
}

#[test]
fn binary_reports_the_same_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_adscreen");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["verify", "--config", config("example3.json").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    let fail = status(&["verify", "--config", config("example4_low_k.json").to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(1));
    let (_, inproc, _) = with_config("verify", &config("example3.json"));
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), inproc);
}

#[test]
fn calibrate_reports_the_two_price_root() {
    let (code, out, _) = with_config("calibrate", &config("example5.json"));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let pg = v["calibration"]["p_g"].as_f64().unwrap();
    let psb = v["calibration"]["p_sb"].as_f64().unwrap();
    assert!((pg - 1.1173130671842895).abs() < 1e-8 && (psb - 0.7983347667929067).abs() < 1e-8);
    assert_eq!(v["verdict"], "sufficient_passed");
}

#[test]
fn json_round_trips() {
    let text = std::fs::read_to_string(config("example1.json")).unwrap();
    let cfg = parse_config(&text).unwrap();
    let again = parse_config(&to_json(&cfg).unwrap()).unwrap();
    assert_eq!(to_json(&cfg).unwrap(), to_json(&again).unwrap());

    let (_, out, _) = with_config("analyze", &config("example3.json"));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(to_json(&v).unwrap(), out);
    assert!((v["mass"]["atom"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(format_float(0.1 + 0.2), format_float(0.3));
}

#[test]
fn oracle_on_the_two_user_instance() {
    let (code, out, _) = with_config("oracle", &config("example1.json"));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["lp_value"].as_f64().unwrap() >= 0.65 - 1e-9);
    assert!((v["families"]["good_only"]["best"]["revenue"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["families"]["single_bundle"]["best"]["revenue"].as_f64().unwrap() - 0.4).abs() < 1e-12);

    let (_, out, _) = with_config("oracle", &config("example2.json"));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["lp_value"].as_f64().unwrap() - 0.75).abs() < 1e-9);
}

fn read_csv(p: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(p).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn sweep_csv_on_the_two_user_instance() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let (code, out, _) = invoke(&["sweep", "--config", config("example1.json").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["crossing"].as_f64().unwrap() - 0.6).abs() < 1e-9);
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, "k,lp_value,revenue_ad_tiered,revenue_single_bundle,error");
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let k: f64 = r[0].parse().unwrap();
        let lp: f64 = r[1].parse().unwrap();
        let at: f64 = r[2].parse().unwrap();
        let sb: f64 = r[3].parse().unwrap();
        assert!((at - (0.6 + 0.5 * k)).abs() < 1e-9 && (sb - (0.3 + k)).abs() < 1e-9);
        assert!(lp >= at.max(sb) - 1e-9);
    }
}

#[test]
fn continuous_sweep_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let (code, _, err) = invoke(&["sweep", "--config", config("sweep_uniform.json").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, CONTINUOUS_SWEEP_COLUMNS.join(","));
    assert_eq!(rows.len(), 13);
    let regimes: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(regimes.first(), Some(&"good_only"));
    assert_eq!(regimes.last(), Some(&"single_bundle"));
}

#[test]
fn empty_sweeps_write_only_a_header() {
    let dir = tempfile::tempdir().unwrap();
    for (i, sweep) in [r#"{"k_min":1.0,"k_max":0.0,"steps":5}"#, r#"{"k_min":0.0,"k_max":1.0,"steps":0}"#].iter().enumerate() {
        let text = format!(
            r#"{{"type_space":{{"x1":[0.5,1.5],"x2":[-0.8,-0.2]}},"density":{{"kind":"uniform"}},
                "payment":{{"kind":"constant","k":0.0}},"sweep":{sweep}}}"#
        );
        let p = temp_config(&dir, &format!("s{i}.json"), &text);
        let csv = dir.path().join(format!("s{i}.csv"));
        let (code, out, _) = invoke(&["sweep", "--config", p.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 0);
        let (header, rows) = read_csv(&csv);
        assert_eq!(header, CONTINUOUS_SWEEP_COLUMNS.join(","));
        assert!(rows.is_empty());
    }
}

#[test]
fn oracle_gap_table_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("gap.csv");
    let (code, out, _) = invoke(&["oracle", "--config", config("example4.json").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let (header, rows) = read_csv(&csv);
    assert!(header.starts_with("n1,n2,lp_value,mechanism_revenue,gap,relative_gap"));
    assert_eq!(rows.len(), 3);
}
