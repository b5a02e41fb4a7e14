use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flagforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagforge")).args(args).env_remove("FLAGFORGE_SEED").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_count_matches_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("elekes.json");
    stdout(&flagforge(&["generate", "--kind", "elekes-2d", "--param", "k=3", "--param", "l=2", "--out", path(&fam)]));

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("elekes.predicted.json")).unwrap()).unwrap();
    assert_eq!(sidecar["predicted"]["flags"]["exact"], "36");

    let out = stdout(&flagforge(&["count", "--input", path(&fam), "--brute"]));
    assert_eq!(out, "sizes,flags\n36;12,36\n");
}

#[test]
fn count_writes_degree_profile() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("bundle.json");
    let prof = dir.path().join("profile.csv");
    stdout(&flagforge(&[
        "generate",
        "--kind",
        "parallel-bundle-3d",
        "--param",
        "n=12",
        "--param",
        "b=3",
        "--out",
        path(&fam),
    ]));
    let out = stdout(&flagforge(&["count", "--input", path(&fam), "--profile", path(&prof)]));
    assert!(out.ends_with(",36\n"), "{out}");
    let csv = fs::read_to_string(&prof).unwrap();
    assert!(csv.starts_with("k,l,count\n"), "{csv}");
}

#[test]
fn seeded_generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        stdout(&flagforge(&[
            "--seed",
            seed,
            "generate",
            "--kind",
            "lifted-elekes",
            "--param",
            "k=2",
            "--param",
            "l=2",
            "--param",
            "d=4",
            "--param",
            "i=2",
            "--out",
            path(&out),
        ]));
        fs::read(out).unwrap()
    };
    let a = run("a.json", "7");
    assert_eq!(a, run("b.json", "7"));
    assert_ne!(a, run("c.json", "8"));
}

#[test]
fn seed_is_read_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "generate".to_string(),
            "--kind".into(),
            "legendrian".into(),
            "--param".into(),
            "g=3".into(),
            "--param".into(),
            "r=2".into(),
            "--out".into(),
            path(out).to_string(),
        ]
    };
    let via_env = dir.path().join("env.json");
    let out = Command::new(env!("CARGO_BIN_EXE_flagforge"))
        .args(args(&via_env))
        .env("FLAGFORGE_SEED", "11")
        .output()
        .unwrap();
    stdout(&out);
    let via_flag = dir.path().join("flag.json");
    let mut a = vec!["--seed".to_string(), "11".into()];
    a.extend(args(&via_flag));
    let a: Vec<&str> = a.iter().map(String::as_str).collect();
    stdout(&flagforge(&a));
    assert_eq!(fs::read(via_env).unwrap(), fs::read(via_flag).unwrap());
}

#[test]
fn experiment_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        stdout(&flagforge(&[
            "--seed",
            "3",
            "experiment",
            "--kind",
            "grid-3d",
            "--param",
            "k=l^2",
            "--sweep",
            "l=1,2",
            "--out",
            path(&out),
        ]));
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("kind,params,seed,sizes,count,status,"));
    assert!(!lines[0].contains("wall_ms"));
    assert!(lines[2].contains(",1024;256;58,3040,ok,"), "{}", lines[2]);
}

#[test]
fn experiment_skips_oversized_points() {
    let out = stdout(&flagforge(&[
        "experiment",
        "--kind",
        "grid-3d",
        "--param",
        "k=l^2",
        "--sweep",
        "l=2,3",
        "--max-flats",
        "2000",
    ]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].contains(",ok,"));
    assert!(!rows[1].contains(",ok,"), "{}", rows[1]);
}

#[test]
fn bound_prints_value_and_dominant_term() {
    let out = stdout(&flagforge(&["bound", "--id", "st", "--param", "m=1000", "--param", "n=10"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "bound_id,m,n,value,dominant_term");
    assert!(lines[1].starts_with("st,1000,10,"), "{}", lines[1]);
    assert!(lines[1].ends_with(",m"), "{}", lines[1]);

    let out = stdout(&flagforge(&["bound", "--id", "flags", "--param", "sizes=8,8"]));
    assert!(out.contains("(2/3,2/3)") || out.contains("(1,0)") || out.contains("(0,1)"), "{out}");
}

#[test]
fn bad_input_exits_with_error() {
    let out = flagforge(&["bound", "--id", "nope", "--param", "m=1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = flagforge(&["generate", "--kind", "nope", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
    let out = flagforge(&["count", "--input", "/nonexistent/family.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_each_suite() {
    let out = flagforge(&["verify", "--suite", "tuples", "--suite", "predicted"]);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("PASS tuples")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS predicted")), "{text}");
}
