use std::process::{Command, Output};

use fpconv::potential::u_direct;
use fpconv::Measure;

fn fpconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpconv"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).lines().next().unwrap()).unwrap()
}

#[test]
fn endpoint_of_semicircle_and_delta() {
    let o = fpconv(&[
        "endpoint",
        "--mu",
        r#"{"type":"semicircle","beta":1}"#,
        "--nu",
        r#"{"type":"atomic","atoms":[[0,1]]}"#,
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["z_star"].as_f64(), Some(-2.0));
    assert_eq!(v["g_star"].as_f64(), Some(1.0));
    assert_eq!(v["h_star"].as_f64(), Some(-1.0));
    assert_eq!(v["h_star_kind"], "critical_point");
}

#[test]
fn infinite_edge_value_is_a_string() {
    let v = json(&fpconv(&["endpoint", "--mu", "mp:1", "--nu", "delta:0"]));
    assert_eq!(v["g_star"], "inf");
    assert_eq!(v["h_star_kind"], "domain_endpoint");
}

#[test]
fn potential_of_two_semicircles() {
    let o = fpconv(&["potential", "--mu", "sc", "--nu", "sc", "--z", "-3"]);
    assert!(o.status.success());
    let u = json(&o)["u"].as_f64().unwrap();
    let direct = u_direct(&Measure::semicircle(2f64.sqrt()).unwrap(), -3.0).unwrap();
    assert!((u - direct).abs() < 1e-12, "{u} vs {direct}");
}

#[test]
fn grid_gives_one_line_per_point() {
    let o = fpconv(&[
        "stieltjes",
        "--mu",
        "mp:0.5",
        "--nu",
        "delta:1",
        "--z-grid",
        "-3:-1:3",
    ]);
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[2]["z"].as_f64(), Some(-1.0));
    assert!(lines
        .windows(2)
        .all(|w| w[0]["g"].as_f64() < w[1]["g"].as_f64()));
}

#[test]
fn exit_codes() {
    let o = fpconv(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(
        fpconv(&["endpoint", "--mu", "sc:-1", "--nu", "sc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fpconv(&["endpoint", "--mu", "delta:0", "--nu", "sc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fpconv(&["potential", "--mu", "sc", "--nu", "sc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fpconv(&[
            "potential",
            "--mu",
            "sc",
            "--nu",
            "sc",
            "--z-grid",
            "-1:-3:4"
        ])
        .status
        .code(),
        Some(2)
    );
    // z* = -2 sqrt 2
    assert_eq!(
        fpconv(&["potential", "--mu", "sc", "--nu", "sc", "--z", "-2"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        fpconv(&[
            "stieltjes",
            "--mu",
            "sc",
            "--nu",
            "sc",
            "--z-grid",
            "-4:-2:3"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn measure_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nu.json");
    std::fs::write(&path, r#"{"type":"atomic","atoms":[[-1,0.5],[1,0.5]]}"#).unwrap();
    let arg = format!("@{}", path.display());
    let o = fpconv(&["endpoint", "--mu", "sc", "--nu", &arg]);
    assert!(o.status.success());
    assert!(json(&o)["z_star"].as_f64().unwrap() < -2.0);
    assert_eq!(
        fpconv(&["endpoint", "--mu", "sc", "--nu", "@/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn profile_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "profile",
        "--mu",
        "sc",
        "--nu",
        "delta:0",
        "--kind",
        "f",
        "--z-grid",
        "-4:-0.1:40",
        "--out",
        out,
    ];
    let o = fpconv(&args);
    assert!(o.status.success());
    let v = json(&o);
    let table = std::fs::read_to_string(v["table"].as_str().unwrap()).unwrap();
    let notes = std::fs::read_to_string(v["annotations"].as_str().unwrap()).unwrap();
    let name = std::path::Path::new(v["table"].as_str().unwrap())
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .to_string();
    assert!(name.starts_with("f_") && name.ends_with(".csv"));
    assert_eq!(table.lines().next(), Some("abscissa,value"));
    assert_eq!(table.lines().count(), 41);
    // F(h) = h + 1/h
    for line in table.lines().skip(1) {
        let [h, f]: [f64; 2] = line
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect::<Vec<_>>()
            .try_into()
            .unwrap();
        assert!((f - (h + 1.0 / h)).abs() < 1e-12);
    }
    assert_eq!(
        notes,
        "abscissa,value,kind\n-1.0000000000000000e0,-2.0000000000000000e0,local_max\n"
    );

    // identical invocations give identical bytes
    let again = fpconv(&args);
    assert_eq!(again.stdout, o.stdout);
    assert_eq!(
        std::fs::read_to_string(v["table"].as_str().unwrap()).unwrap(),
        table
    );

    assert_eq!(
        fpconv(&["profile", "--mu", "sc", "--nu", "delta:0", "--kind", "e", "--z-grid", "0.1:2:5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn monte_carlo_summary_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "mc", "--mu", "sc", "--nu", "delta:0", "--n", "100", "--trials", "4", "--seed", "9",
        "--out", out,
    ];
    let o = fpconv(&args);
    assert!(o.status.success());
    let v = json(&o);
    for key in [
        "n",
        "trials",
        "z",
        "empirical_mean",
        "predicted",
        "abs_error",
    ] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert!(v["abs_error"].as_f64().unwrap() < 0.05);
    let csv = std::fs::read_dir(dir.path())
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let csv = std::fs::read_to_string(csv).unwrap();
    assert_eq!(csv.lines().next(), Some("trial,min_eig,potential_at_z"));
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(fpconv(&args).stdout, o.stdout);

    let capped = Command::new(env!("CARGO_BIN_EXE_fpconv"))
        .args(["mc", "--mu", "sc", "--nu", "delta:0", "--n", "100"])
        .env("FPCONV_MAX_N", "50")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
    assert_eq!(
        fpconv(&["mc", "--mu", "sc", "--nu", "sc", "--n", "8"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fpconv(&[
            "mc",
            "--mu",
            "{\"type\":\"jacobi\",\"a\":0,\"b\":1,\"p\":0,\"q\":0}",
            "--nu",
            "sc"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn selftest_reports_and_fails_on_tolerance() {
    let o = fpconv(&["selftest", "--only", "3", "--only", "9"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().all(|l| l.starts_with("[PASS]")));

    let o = fpconv(&["selftest", "--only", "3", "--tol", "mp_shift=1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("[FAIL]"));
    assert_eq!(
        fpconv(&["selftest", "--tol", "nope=1"]).status.code(),
        Some(2)
    );
}
