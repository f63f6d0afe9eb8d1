use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn glove(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glove"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn default_simulation_writes_201_sessions_and_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("s");
    let o = glove(&["simulate", "--seed", "5", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sessions = dir_bytes(&out);
    assert_eq!(sessions.len(), 201);
    assert!(sessions.iter().any(|(n, _)| n == "sphere_10cm_u11.session"));
    assert!(!sessions
        .iter()
        .any(|(n, _)| n == "cylinder_10cm_u01.session"));

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["cohort"]["users_sphere"], 11);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 201);
}

#[test]
fn same_seed_gives_identical_bytes_and_replay_reproduces() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    let args = |out: &Path| {
        vec![
            "simulate",
            "--seed",
            "77",
            "--users-sphere",
            "3",
            "--users-cylinder",
            "2",
            "--diameters",
            "6,9,12",
        ]
        .into_iter()
        .map(String::from)
        .chain(["--out".to_string(), p(out).to_string()])
        .collect::<Vec<_>>()
    };
    let run = |out: &Path| {
        let a = args(out);
        glove(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert!(run(&a).status.success());
    assert!(run(&b).status.success());
    assert_eq!(dir_bytes(&a).len(), 3 * 3 + 2 * 3);
    assert_eq!(dir_bytes(&a), dir_bytes(&b));

    let o = glove(&["replay", p(&a.join("manifest.json")), "--out", p(&c)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(dir_bytes(&a), dir_bytes(&c));

    // replaying in place regenerates the manifest byte for byte too
    let before = fs::read(a.join("manifest.json")).unwrap();
    assert!(glove(&["replay", p(&a.join("manifest.json"))])
        .status
        .success());
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), before);
}

#[test]
fn different_seeds_differ() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let o = glove(&[
            "simulate",
            "--seed",
            seed,
            "--users-sphere",
            "2",
            "--users-cylinder",
            "2",
            "--diameters",
            "6,12",
            "--out",
            p(dir),
        ]);
        assert!(o.status.success());
    }
    assert_ne!(dir_bytes(&a), dir_bytes(&b));
}

#[test]
fn argument_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    let o = glove(&["simulate", "--users-sphere", "0", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ArgumentError"));

    let o = glove(&["simulate", "--diameters", "6,-2", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(glove(&["simulate"]).status.code(), Some(2));
    assert_eq!(glove(&["frobnicate"]).status.code(), Some(2));

    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = glove(&["analyze", p(&empty), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no .session files"));
}

#[test]
fn help_and_version_succeed() {
    let o = glove(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("characterize"));
    assert!(glove(&["--version"]).status.success());
}

#[test]
fn characterize_writes_sweep_and_stability() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("bench");
    let o = glove(&["characterize", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "diameter_cm,mean_adc,sem_adc,trials,clean_adc");
    assert_eq!(lines.len(), 19);
    assert!(lines[1].starts_with("22,"));
    assert!(lines[18].starts_with("5,"));
    assert!(lines[18].ends_with(",5,696"));
    let stab = fs::read_to_string(out.join("stability.csv")).unwrap();
    assert_eq!(stab.lines().count(), 1001);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn characterize_reads_a_sensor_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("sensor.toml");
    fs::write(&cfg, "r_fixed_ohm = 47000.0\nvcc = 5.0\nadc_levels = 1024\nnoise_amplitude = 0\n\n[curve]\nr_flat_ohm = 25000.0\nr_min_diam_ohm = 100000.0\nd_knee_cm = 12.0\nd_tightest_cm = 5.0\n").unwrap();
    let out = tmp.path().join("bench");
    let o = glove(&["characterize", "--config", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    // no noise: every row's mean equals its clean value and SEM is zero
    assert!(sweep.contains("\n12,388.000000,0.000000,5,388\n"));

    fs::write(&cfg, "vcc = \"five\"\n").unwrap();
    let o = glove(&["characterize", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("MalformedConfig"));

    let o = glove(&[
        "characterize",
        "--config",
        p(&tmp.path().join("missing.toml")),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn analyze_then_classify() {
    let tmp = TempDir::new().unwrap();
    let (sessions, analysis) = (tmp.path().join("s"), tmp.path().join("a"));
    assert!(glove(&["simulate", "--seed", "42", "--out", p(&sessions)])
        .status
        .success());
    let o = glove(&["analyze", p(&sessions), "--out", p(&analysis)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "cohort.csv",
        "regression.csv",
        "discriminability.csv",
        "centroids.csv",
        "manifest.json",
    ] {
        assert!(analysis.join(name).exists(), "{name}");
    }
    let cohort = fs::read_to_string(analysis.join("cohort.csv")).unwrap();
    assert_eq!(cohort.lines().count(), 1 + (11 + 10) * 5);
    assert!(cohort.contains("sphere,6.000000,pinky,1.000000,0.000000,11"));
    assert!(cohort.contains("cylinder,6.000000,pinky,1.000000,0.000000,8"));

    let o = glove(&[
        "classify",
        p(&sessions.join("cylinder_13cm_u02.session")),
        "--centroids",
        p(&analysis.join("centroids.csv")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.starts_with("shape=cylinder diameter_cm="), "{line}");
    assert!(line.contains(" distance="));
    assert!(line.ends_with('\n'));

    // analysis of the same directory is byte-stable
    let again = tmp.path().join("a2");
    assert!(glove(&["analyze", p(&sessions), "--out", p(&again)])
        .status
        .success());
    assert_eq!(dir_bytes(&analysis), dir_bytes(&again));
}

fn write_small_cohort(dir: &Path, users: &str) {
    let o = glove(&[
        "simulate",
        "--seed",
        "3",
        "--users-sphere",
        users,
        "--users-cylinder",
        users,
        "--diameters",
        "6,10,14",
        "--out",
        p(dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::remove_file(dir.join("manifest.json")).unwrap();
}

#[test]
fn classify_reports_parse_errors_with_position() {
    let tmp = TempDir::new().unwrap();
    let (sessions, analysis) = (tmp.path().join("s"), tmp.path().join("a"));
    write_small_cohort(&sessions, "3");
    assert!(glove(&["analyze", p(&sessions), "--out", p(&analysis)])
        .status
        .success());

    let good = fs::read_to_string(sessions.join("sphere_6cm_u01.session")).unwrap();
    let bad = good.replacen("\n0,", "\n0,12,", 1);
    let bad_path = tmp.path().join("bad.session");
    fs::write(&bad_path, bad).unwrap();
    let o = glove(&[
        "classify",
        p(&bad_path),
        "--centroids",
        p(&analysis.join("centroids.csv")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("MalformedFrame at line 6"), "{err}");

    let o = glove(&[
        "classify",
        p(&bad_path),
        "--centroids",
        p(&tmp.path().join("none.csv")),
    ]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn analyze_rejects_unsupported_schema() {
    let tmp = TempDir::new().unwrap();
    let sessions = tmp.path().join("s");
    write_small_cohort(&sessions, "3");
    let path = sessions.join("cylinder_14cm_u03.session");
    let text = fs::read_to_string(&path)
        .unwrap()
        .replacen("# schema=1", "# schema=2", 1);
    fs::write(&path, text).unwrap();
    let o = glove(&["analyze", p(&sessions), "--out", p(&tmp.path().join("a"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("SchemaError"));
}

#[test]
fn single_user_analysis_is_a_precondition_violation() {
    let tmp = TempDir::new().unwrap();
    let sessions = tmp.path().join("s");
    write_small_cohort(&sessions, "1");
    let o = glove(&["analyze", p(&sessions), "--out", p(&tmp.path().join("a"))]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("PreconditionViolation"));
}

#[test]
fn custom_profile_table_changes_the_output() {
    let tmp = TempDir::new().unwrap();
    let table = tmp.path().join("profile.csv");
    let mut rows = String::from("finger,shape,gain,offset_cm,contact_limit_cm\n");
    for f in ["thumb", "index", "middle", "ring", "pinky"] {
        for s in ["sphere", "cylinder"] {
            rows.push_str(&format!("{f},{s},1.0,0.0,\n"));
        }
    }
    fs::write(&table, &rows).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let common = [
        "simulate",
        "--users-sphere",
        "2",
        "--users-cylinder",
        "2",
        "--diameters",
        "8",
    ];
    let mut with_table = common.to_vec();
    with_table.extend(["--profile-table", p(&table), "--out", p(&a)]);
    assert!(glove(&with_table).status.success());
    let mut without = common.to_vec();
    without.extend(["--out", p(&b)]);
    assert!(glove(&without).status.success());
    assert_ne!(dir_bytes(&a), dir_bytes(&b));

    fs::write(&table, rows.replace("ring,sphere,1.0", "ring,sphere,abc")).unwrap();
    let mut broken = common.to_vec();
    broken.extend(["--profile-table", p(&table), "--out", p(&a)]);
    let o = glove(&broken);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("MalformedTable"), "{}", stderr(&o));
}
