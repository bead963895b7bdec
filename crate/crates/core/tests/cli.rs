use std::path::Path;
use std::process::{Command, Output};

fn dualap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn gen_icosphere_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "s3.off");
    let o = dualap(&["gen", "--icosphere", "3", "-o", &out]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let counts = text.lines().skip(1).find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(counts.split_whitespace().next(), Some("642"));
    let mesh = dualap::mesh::io::read_off(&out).unwrap();
    assert_eq!(mesh.vertex_count(), 642);
}

#[test]
fn weights_csv_for_every_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "s.off");
    let tet = path(dir.path(), "cube");
    assert_eq!(
        dualap(&["gen", "--icosphere", "1", "-o", &off])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        dualap(&["gen", "--cube-tets", "2", "-o", &tet])
            .status
            .code(),
        Some(0)
    );
    let node = format!("{tet}.node");
    for (input, scheme, tag) in [
        (&off, "tri-cotan", "tri-cotan"),
        (&off, "assoc", "assoc-2"),
        (&node, "tet-primal", "tet-primal"),
        (&node, "tet-dual", "tet-dual"),
    ] {
        let o = dualap(&["weights", "-i", input, "--scheme", scheme]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{scheme}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let csv = stdout(&o);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("edge_i,edge_j,scheme,weight"));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert!(!rows.is_empty());
        let keys: Vec<(usize, usize)> = rows
            .iter()
            .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(rows
            .iter()
            .all(|r| r[2] == tag && r[3].parse::<f64>().is_ok()));
    }
    let o = dualap(&["weights", "-i", &node, "--scheme", "tet-dual", "--compare"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("edge_i,edge_j,primal,dual"));
}

#[test]
fn curvature_sections() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "s.off");
    dualap(&["gen", "--icosphere", "1", "-o", &off]);
    let o = dualap(&["curvature", "-i", &off, "--order", "2", "--order", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (edges, vertices) = text.split_once("\n\n").unwrap();
    assert!(edges.starts_with("i,j,theta,H_edge,H_recip,H_assoc_2,H_assoc_4\n"));
    assert_eq!(edges.lines().count(), 1 + 120);
    assert!(vertices.starts_with("v,Hx,Hy,Hz,ring_area\n"));
    assert_eq!(vertices.lines().count(), 1 + 42);
}

#[test]
fn converge_json_schema() {
    let o = dualap(&["converge", "--levels", "1:3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["experiment", "mesh", "levels", "slope", "pass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["pass"], true);
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    for key in ["level", "delta", "median_dev", "max_dev"] {
        assert!(levels[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn taylor_tables() {
    let o = dualap(&["taylor", "--table", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let g = csv.lines().find(|l| l.starts_with("g,")).unwrap();
    let c: Vec<f64> = g
        .split(',')
        .skip(2)
        .take(4)
        .map(|x| x.parse().unwrap())
        .collect();
    for (got, want) in c.iter().zip([1.0, 1.0, -0.75, -5.0 / 12.0]) {
        assert!((got - want).abs() < 1e-10);
    }
    let o = dualap(&["taylor", "--table", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o)
        .lines()
        .find(|l| l.starts_with("10,"))
        .unwrap()
        .to_owned();
    let coeff: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((coeff * 9216.0 + 1.0).abs() < 1e-10);
    assert_eq!(dualap(&["taylor", "--table", "1"]).status.code(), Some(0));
}

#[test]
fn verify_all_passes() {
    let o = dualap(&["verify", "--all", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().all(|l| l.starts_with("[PASS]")));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "s.off");
    dualap(&["gen", "--icosphere", "2", "-o", &off]);
    let a = dualap(&["weights", "-i", &off, "--scheme", "assoc", "--order", "3"]);
    let b = dualap(&[
        "--sequential",
        "weights",
        "-i",
        &off,
        "--scheme",
        "assoc",
        "--order",
        "3",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let a = dualap(&[
        "verify",
        "--all",
        "--seed",
        "4",
        "--samples",
        "5000",
        "--format",
        "json",
    ]);
    let b = dualap(&[
        "verify",
        "--all",
        "--seed",
        "4",
        "--samples",
        "5000",
        "--format",
        "json",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path(dir.path(), "missing.off");
    let bad = path(dir.path(), "bad.off");
    std::fs::write(&bad, "OFF\n3 1 0\n0 0 0\n").unwrap();
    let off = path(dir.path(), "s.off");
    dualap(&["gen", "--icosphere", "0", "-o", &off]);
    for args in [
        vec!["weights", "-i", missing.as_str(), "--scheme", "tri-cotan"],
        vec!["weights", "-i", bad.as_str(), "--scheme", "tri-cotan"],
        vec!["weights", "-i", off.as_str(), "--scheme", "tet-primal"],
        vec!["weights", "-i", off.as_str(), "--scheme", "nonsense"],
        vec![
            "weights",
            "-i",
            off.as_str(),
            "--scheme",
            "assoc",
            "--order",
            "1",
        ],
        vec!["gen", "--regular-tet"],
        vec!["converge", "--levels", "4:2"],
        vec!["verify"],
        vec!["frobnicate"],
    ] {
        let o = dualap(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(!err.trim().is_empty(), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn failed_experiment_exits_two() {
    // the sphere study needs levels ≥ 2 to reach its tolerance
    let o = dualap(&["converge", "--experiment", "sphere", "--levels", "0:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stdout.is_empty());
}
