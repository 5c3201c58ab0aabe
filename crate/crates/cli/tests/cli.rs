use std::path::Path;
use std::process::{Command, Output};

fn eaqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eaqc"))
        .args(args)
        .env_remove("EAQC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV document, header block and column line removed.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn write_example(dir: &Path) -> String {
    let path = dir.join("fig2b.json");
    let o = eaqc(&["gen", "--family", "spectrum-example", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    path.to_str().unwrap().to_string()
}

#[test]
fn landscape_report_for_example_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let o = eaqc(&["landscape", "--instance", &path, "--no-clock"]);
    assert!(o.status.success());
    let report = stdout(&o);
    assert!(report.lines().any(|l| l == "delta = 3"), "{report}");
    assert!(report.lines().any(|l| l == "N_c = 2"), "{report}");
    assert!(report.lines().any(|l| l == "Delta[N=2] = 6"), "{report}");
}

#[test]
fn landscape_curve_export() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let o = eaqc(&["landscape", "--family", "landscape-example", "--eps-points", "5", "--curve-out", curve.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(curve).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "flips,eps,f");
    assert_eq!(data.len(), 1 + 7 * 5);
    assert!(data[1].starts_with("001,0,0"));
}

#[test]
fn ferromagnet_gap_starts_at_two() {
    let o = eaqc(&["mingap", "--family", "ferro", "--M", "3", "--K", "0.2", "--N", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "N,lambda,gap"));
    let first = rows(&text).into_iter().find(|r| r[1] == 0.0).unwrap();
    assert!((first[2] - 2.0).abs() < 1e-9);
}

#[test]
fn outputs_are_reproducible_without_clock() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let mut args = vec!["--no-clock", "--out", path.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(eaqc(&args).status.success());
        std::fs::read(path).unwrap()
    };
    let spectrum = ["spectrum", "--seed", "11", "--N", "3", "--grid", "11", "--levels", "6"];
    assert_eq!(run("a.csv", &spectrum), run("b.csv", &spectrum));
    let batch = |threads: &'static str| {
        ["batch", "--seed", "5", "--count", "3", "--N", "1..2", "--tau", "2", "--steps", "200", "--threads", threads]
    };
    assert_eq!(run("c.csv", &batch("2")), run("d.csv", &batch("2")));
    let body = |bytes: Vec<u8>| String::from_utf8(bytes).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(body(run("e.csv", &batch("1"))), body(run("f.csv", &batch("2"))));
}

#[test]
fn header_block_records_configuration() {
    let o = eaqc(&["anneal", "--family", "spectrum-example", "--N", "1", "--tau", "2", "--steps", "100", "--seed", "9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header[0].starts_with("# eaqc "));
    assert!(header.iter().any(|l| l.starts_with("# config: {") && l.contains("\"tau\":[2.0]")));
    assert!(header.contains(&"# seed: 9"));
    assert!(header.iter().any(|l| l.starts_with("# instance: {")));
    assert!(header.iter().any(|l| l.starts_with("# elapsed_s: ")));
    assert!(text.contains("N,tau,Gamma_z,Gamma_x,success,error,steps,norm_drift\n"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_eaqc"))
        .args(["meanfield", "--family", "ferro", "--grid", "3"])
        .env("EAQC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("meanfield.csv")).unwrap();
    assert!(text.contains("lambda,z_1,z_2,z_3,E_MF_per_N,mf_gap\n"));
    assert_eq!(rows(&text).len(), 3);
}

fn assert_failure(args: &[&str], code: i32, kind: &str) {
    let o = eaqc(args);
    assert_eq!(o.status.code(), Some(code), "{args:?}");
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("eaqc: error: kind={kind} msg=\"")), "{err}");
}

#[test]
fn distinct_exit_codes() {
    assert_failure(&["anneal", "--N", "0"], 2, "config");
    assert_failure(&["spectrum", "--levels", "1"], 2, "config");
    assert_failure(&["batch", "--filter-nc", "three"], 2, "config");
    assert_failure(&["frobnicate"], 2, "config");
    assert_failure(&["landscape", "--instance", "/definitely/missing.json"], 3, "io");
    assert_failure(&["spectrum", "--N", "2", "--out", "/definitely/missing/dir/out.csv"], 3, "io");
    assert_failure(&["anneal", "--N", "40", "--gamma-z", "0.1"], 4, "guard");

    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.json");
    std::fs::write(&flat, r#"{"M": 2, "J": [[0, 0], [0, 0]], "K": [0, 0]}"#).unwrap();
    assert_failure(&["anneal", "--instance", flat.to_str().unwrap(), "--tau", "1", "--steps", "10"], 5, "computation");
    let asym = dir.path().join("asym.json");
    std::fs::write(&asym, r#"{"M": 2, "J": [[0, 1], [0.5, 0]], "K": [0, 0]}"#).unwrap();
    assert_failure(&["landscape", "--instance", asym.to_str().unwrap()], 2, "config");
}

#[test]
fn negativity_rows() {
    let o = eaqc(&["negativity", "--family", "ferro", "--M", "2", "--K", "0.1", "--N", "1..2", "--tau", "4", "--samples", "3", "--steps", "400"]);
    assert!(o.status.success());
    let data = rows(&stdout(&o));
    assert_eq!(data.len(), 6);
    assert!(data.iter().all(|r| r[2] >= 0.0));
    assert_eq!(data[0][0], 0.0);
    assert!(data[0][2] < 1e-10);
}
