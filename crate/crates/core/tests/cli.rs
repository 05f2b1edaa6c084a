use std::process::Command;

use optrisk::american::{self, SolverConfig};
use optrisk::{barrier, european, MarketParams, OptionKind, OptionSpec};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("optrisk").chain(args.iter().copied());
    let code = optrisk::cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// Header plus rows, each row keyed by column name.
fn rows(csv_text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let body = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, body)
}

fn column(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    row[i].parse().unwrap()
}

#[test]
fn european_row_matches_library() {
    let r = run(&[
        "european", "--kind", "put", "--r", "0.1", "--sigma", "0.15", "--k", "1", "--t", "1", "--s0", "1",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, body) = rows(&r.stdout);
    assert_eq!(body.len(), 1);
    for col in ["mean", "variance", "sd", "pew"] {
        assert!(header.iter().any(|h| h == col), "{header:?}");
    }
    let m = MarketParams {
        r: 0.1,
        sigma: 0.15,
        s0: 1.0,
    };
    let p = european::risk_profile(&m, &OptionSpec::european(OptionKind::Put, 1.0, 1.0)).unwrap();
    // round-trip formatting: parsing gives back the same doubles
    assert_eq!(column(&header, &body[0], "mean"), p.mean);
    assert_eq!(column(&header, &body[0], "variance"), p.variance);
    assert_eq!(column(&header, &body[0], "pew"), p.pew);
}

#[test]
fn barrier_and_american_schemas() {
    let r = run(&["barrier"]);
    assert_eq!(r.code, 0);
    let (header, body) = rows(&r.stdout);
    assert_eq!(
        header,
        [
            "s0",
            "strike",
            "expiry",
            "barrier",
            "mean",
            "second_moment",
            "variance",
            "sd",
            "pew",
            "risk_ratio"
        ]
    );
    let m = MarketParams {
        r: 0.1,
        sigma: 0.15,
        s0: 0.8,
    };
    assert_eq!(
        column(&header, &body[0], "mean"),
        barrier::dao_put_mean(&m, 1.0, 1.0, 0.5).unwrap()
    );

    let r = run(&["american", "--spots", "0.8,1,1.2", "--n-y", "101", "--n-tau", "100"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, body) = rows(&r.stdout);
    assert_eq!(header[..5], ["s0", "strike", "expiry", "t", "price"]);
    assert_eq!(body.len(), 3);
    // 0.8 is below the boundary: exercised, so intrinsic
    assert_eq!(column(&header, &body[0], "price"), 1.0 - 0.8);
    assert_eq!(column(&header, &body[0], "pew"), 0.0);

    let r = run(&["american", "--curve", "--n-y", "101", "--n-tau", "100"]);
    let (header, body) = rows(&r.stdout);
    assert_eq!(header, ["t", "b"]);
    assert_eq!(body.len(), 101);
    let last = body.last().unwrap();
    assert_eq!((last[0].as_str(), last[1].as_str()), ("1", "1"));
}

#[test]
fn grid_and_boundary_exports() {
    let dir = tempfile::tempdir().unwrap();
    let grid_path = dir.path().join("grid.csv");
    let boundary_path = dir.path().join("boundary.csv");
    let r = run(&[
        "american",
        "--n-y",
        "21",
        "--n-tau",
        "10",
        "--grid-out",
        grid_path.to_str().unwrap(),
        "--boundary-out",
        boundary_path.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, body) = rows(&std::fs::read_to_string(&grid_path).unwrap());
    assert_eq!(header, ["tau", "y", "U", "V", "W"]);
    assert_eq!(body.len(), 21 * 11);
    let (header, body) = rows(&std::fs::read_to_string(&boundary_path).unwrap());
    assert_eq!(header, ["tau", "B"]);
    assert_eq!(body.len(), 11);

    let m = MarketParams {
        r: 0.1,
        sigma: 0.15,
        s0: 1.0,
    };
    let grid = american::solve(&m, 1.0, 1.0, &SolverConfig::with_grid(21, 10)).unwrap();
    let exported: Vec<f64> = body.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(exported, grid.boundary);
}

#[test]
fn smile_rows_carry_vol_or_reason() {
    let r = run(&[
        "smile", "--q", "-0.01", "--t", "0.5", "--r", "0.02", "--sigma", "0.25", "--s0", "25", "--kind", "put",
        "--kmin", "15", "--kmax", "35", "--points", "81",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, body) = rows(&r.stdout);
    assert_eq!(
        header,
        [
            "strike",
            "bs_price",
            "adjusted_price",
            "effective_vol",
            "failure_reason"
        ]
    );
    assert_eq!(body.len(), 81);

    let r = run(&["smile", "--q", "0.3", "--strikes", "2,10,25,60"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("outside the typical range"));
    let (_, body) = rows(&r.stdout);
    for row in &body {
        assert!(row[3].is_empty() != row[4].is_empty(), "{row:?}");
        if !row[4].is_empty() {
            assert!(["below-intrinsic", "above-max-vol", "negative-price"].contains(&row[4].as_str()));
        }
    }
    assert!(body.iter().any(|r| !r[4].is_empty()));
}

#[test]
fn sweep_covers_the_axis_in_order() {
    let r = run(&[
        "sweep", "--axis", "s0", "--start", "0.5", "--stop", "1.5", "--points", "101", "european", "--kind", "put",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, body) = rows(&r.stdout);
    assert_eq!(body.len(), 101);
    assert_eq!(column(&header, &body[0], "s0"), 0.5);
    assert_eq!(column(&header, &body[100], "s0"), 1.5);
    let m = MarketParams {
        r: 0.1,
        sigma: 0.15,
        s0: 1.2,
    };
    let p = european::risk_profile(&m, &OptionSpec::european(OptionKind::Put, 1.0, 1.0)).unwrap();
    assert_eq!(column(&header, &body[70], "s0"), 1.2);
    assert!((column(&header, &body[70], "variance") - p.variance).abs() < 1e-15);

    let r = run(&[
        "sweep", "--axis", "barrier", "--start", "0.3", "--stop", "0.7", "--points", "5", "barrier",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, body) = rows(&r.stdout);
    let means: Vec<f64> = body.iter().map(|r| column(&header, r, "mean")).collect();
    // a higher barrier knocks out more paths
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn sweep_rejects_bad_specs() {
    for args in [
        &[
            "sweep", "--axis", "barrier", "--start", "0.3", "--stop", "0.7", "--points", "5", "european",
        ][..],
        &[
            "sweep", "--axis", "s0", "--start", "1.5", "--stop", "0.5", "--points", "5", "european",
        ],
        &[
            "sweep", "--axis", "s0", "--start", "0.5", "--stop", "1.5", "--points", "1", "european",
        ],
        &[
            "sweep", "--axis", "volume", "--start", "0.5", "--stop", "1.5", "--points", "3", "european",
        ],
    ] {
        let r = run(args);
        assert_eq!(r.code, 1, "{args:?}");
        assert!(!r.stderr.is_empty());
        assert!(r.stdout.is_empty());
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["european", "--sigma", "-1"]).code, 1);
    assert_eq!(run(&["barrier", "--barrier", "0.9"]).code, 1);
    assert_eq!(run(&["european", "--strike", "abc"]).code, 1);
    assert_eq!(run(&["american", "--spots", "1000"]).code, 1);
    assert_eq!(run(&["american", "--newton-max-iter", "1"]).code, 2);
    assert_eq!(run(&["european", "--s0", "1e200", "--moments", "3"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["verify"]).code, 0);
}

#[test]
fn json_mirrors_csv() {
    let csv_run = run(&["european", "--q", "0.01"]);
    let json_run = run(&["--format", "json", "european", "--q", "0.01"]);
    assert_eq!(json_run.code, 0);
    let (header, body) = rows(&csv_run.stdout);
    let parsed: serde_json::Value = serde_json::from_str(&json_run.stdout).unwrap();
    let objects = parsed.as_array().unwrap();
    assert_eq!(objects.len(), 1);
    let obj = objects[0].as_object().unwrap();
    let mut keys: Vec<&String> = obj.keys().collect();
    let mut names: Vec<&String> = header.iter().collect();
    keys.sort();
    names.sort();
    assert_eq!(keys, names);
    assert_eq!(obj["mean"].as_f64().unwrap(), column(&header, &body[0], "mean"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    let r = run(&["--out", path.to_str().unwrap(), "barrier", "--s0", "0.6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let (_, body) = rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(body.len(), 1);

    let missing = dir.path().join("no/such/dir/x.csv");
    assert_eq!(run(&["--out", missing.to_str().unwrap(), "european"]).code, 1);
}

#[test]
fn monte_carlo_is_seeded() {
    let a = run(&["--seed", "7", "mc", "--paths", "2000", "--steps", "20", "barrier"]);
    let b = run(&["--seed", "7", "mc", "--paths", "2000", "--steps", "20", "barrier"]);
    let c = run(&["--seed", "8", "mc", "--paths", "2000", "--steps", "20", "barrier"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn binary_exit_status() {
    let exe = env!("CARGO_BIN_EXE_optrisk");
    let ok = Command::new(exe).args(["european", "--k", "1.1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("kind,"));
    let bad = Command::new(exe).args(["european", "--r", "-0.1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(!bad.stderr.is_empty());
    let numerical = Command::new(exe)
        .args(["american", "--newton-max-iter", "1"])
        .env("OPTRISK_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(numerical.status.code(), Some(2));
}
