use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use polargrass::{Budget, PolarModel};
use polargrass_cli::cache;
use serde_json::Value;

fn polargrass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polargrass"))
        .args(args)
        .env_remove("POLARGRASS_CACHE")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn rank_of_parabolic_lines_over_f3() {
    let out = polargrass(&["rank", "--space", "Qparab(3,3)", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["data"]["upper"], 21);
    assert_eq!(r["data"]["lower"], 21);
    assert_eq!(r["data"]["statement"], "gr = 21");
    assert_eq!(r["verdict"], "verified");
    assert_eq!(r["models"][0]["grassmannian"]["points"], 3640);
}

#[test]
fn rank_csv_row() {
    let out = polargrass(&["rank", "--space", "Qparab(3,2)", "--k", "1", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "space,k,upper,lower,pinned,statement");
    assert_eq!(lines[1], "\"Qparab(3,2)\",1,7,7,true,gr = 7");
}

#[test]
fn rational_lines_of_the_hyperbolic_quadric_do_not_generate() {
    let out = polargrass(&["span", "--space", "Qplus(3,4)", "--k", "2", "--seed", "rational:F2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["data"]["generated_all"], false);
    assert_eq!(r["verdict"], "info");

    let out = polargrass(&["span", "--space", "Qplus(3,4)", "--k", "2", "--seed", "rational:F2", "--expect", "all"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdict"], "refuted");
}

#[test]
fn seeds_from_ids_fixtures_and_files() {
    let out = polargrass(&["span", "--space", "Qparab(2,2)", "--k", "1", "--seed", "ids:0,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["data"]["seed_size"], 2);

    let out = polargrass(&["span", "--space", "Qparab(3,4)", "--k", "2", "--seed", "fixture:t-gen-4:l1,l2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // l1 and l2 meet in a point, so the closure is their common line of Q2.
    assert_eq!(report(&out)["data"]["closure_size"], 5);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seed.json");
    fs::write(&path, r#"[[["1","0","0","0","0"]], [[0,0,1,0,0]]]"#).unwrap();
    let spec = format!("file:{}", path.display());
    let out = polargrass(&["span", "--space", "Qparab(2,2)", "--k", "1", "--seed", &spec]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(&out)["data"]["seed_size"], 2);

    let out = polargrass(&["span", "--space", "Qparab(2,2)", "--k", "1", "--seed", "ids:9999"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[usage]"));
}

#[test]
fn genset_reports_a_generating_set() {
    let out = polargrass(&["genset", "--space", "H(3,1,2)", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["data"]["method"], "hermitian");
    assert_eq!(r["data"]["size"], 21);
    assert_eq!(r["data"]["elements"].as_array().unwrap().len(), 21);

    let out = polargrass(&["genset", "--space", "Qplus(4,2)", "--k", "3", "--method", "random-hyperplane"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn fixtures_pass_and_corruption_is_reported() {
    let out = polargrass(&["fixture", "t-gen-4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));

    let bundle = polargrass::gensets::load_fixture("t-gen-4").unwrap();
    let dir = tempfile::tempdir().unwrap();

    let mut broken = bundle.clone();
    broken.subspaces[1].rows[0][1] = "1".into();
    let path = dir.path().join("broken.json");
    fs::write(&path, serde_json::to_string(&broken).unwrap()).unwrap();
    let out = polargrass(&["fixture", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let mut wrong = bundle;
    wrong.instances[0].modulus = vec![1, 0, 1];
    let path = dir.path().join("wrong.json");
    fs::write(&path, serde_json::to_string(&wrong).unwrap()).unwrap();
    let out = polargrass(&["fixture", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[fixture]"));
}

#[test]
fn errors_have_distinct_diagnostics() {
    let out = polargrass(&["build", "--space", "Qfoo(1,2)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[descriptor]"));

    let out = polargrass(&["verify", "tgen", "--q", "8"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[budget]"));

    let out = polargrass(&["build", "--space", "Qparab(4,9)", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[budget]"));

    let out = polargrass(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_scenarios() {
    for args in [
        vec!["verify", "hermitian-dual", "--n", "2"],
        vec!["verify", "points", "--space", "Qminus(2,3)"],
        vec!["verify", "triples", "--space", "Qparab(3,2)", "--count", "3"],
        vec!["verify", "subspaces", "--count", "2"],
        vec!["verify", "tgen", "--q", "4"],
        vec!["verify", "orth", "--q", "4"],
        vec!["verify", "notgen", "--q", "4"],
        vec!["verify", "hermitian-rank", "--n", "3", "--d", "1", "--q0", "2", "--k", "2"],
        vec!["verify", "properties", "--space", "H(2,1,2)", "--k", "1", "--samples", "20"],
    ] {
        let out = polargrass(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        assert_eq!(report(&out)["verdict"], "verified", "{args:?}");
    }
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let args = ["genset", "--space", "Qparab(3,2)", "--k", "2"];
    let mut a = report(&polargrass(&args));
    let mut b = report(&polargrass(&args));
    a.as_object_mut().unwrap().remove("timings");
    b.as_object_mut().unwrap().remove("timings");
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn report_can_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = polargrass(&["--out", path.to_str().unwrap(), "verify", "points", "--space", "Qparab(3,2)"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["data"]["gr"], 7);
    assert_eq!(r["config"]["scenario"], "points");
}

fn entry_dir(root: &Path) -> std::path::PathBuf {
    fs::read_dir(root).unwrap().next().unwrap().unwrap().path()
}

#[test]
fn cache_round_trip_reproduces_ids() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = polargrass(&["--cache", root.to_str().unwrap(), "build", "--space", "Qparab(3,2)", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let mut fresh = PolarModel::parse("Qparab(3,2)", Budget::DEFAULT).unwrap();
    fresh.ensure_level(3).unwrap();
    let loaded = cache::load(root, "Qparab(3,2)", Budget::DEFAULT).unwrap().unwrap();
    assert_eq!(loaded.levels_built(), 3);
    for k in 1..=3 {
        let (a, b) = (fresh.level(k).unwrap(), loaded.level(k).unwrap());
        assert_eq!(a.len(), b.len());
        assert_eq!(a.raw(), b.raw());
        let s = a.subspace(a.len() / 2);
        assert_eq!(a.id_of(&s), b.id_of(&s));
    }

    // The environment variable selects the same cache.
    let out = Command::new(env!("CARGO_BIN_EXE_polargrass"))
        .args(["rank", "--space", "Qparab(3,2)", "--k", "2"])
        .env("POLARGRASS_CACHE", root)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn corrupted_cache_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cache_arg = root.to_str().unwrap();
    assert_eq!(polargrass(&["--cache", cache_arg, "build", "--space", "Qparab(2,3)", "--k", "1"]).status.code(), Some(0));
    let level = entry_dir(root).join("level-1.bin");
    let mut bytes = fs::read(&level).unwrap();
    bytes[3] ^= 1;
    fs::write(&level, bytes).unwrap();

    let out = polargrass(&["--cache", cache_arg, "rank", "--space", "Qparab(2,3)", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[cache]"));
    assert!(stderr(&out).contains("corrupted"));

    // A rebuild replaces the bad entry.
    let out = polargrass(&["--cache", cache_arg, "build", "--space", "Qparab(2,3)", "--k", "1", "--rebuild"]);
    assert_eq!(out.status.code(), Some(0));
    let out = polargrass(&["--cache", cache_arg, "rank", "--space", "Qparab(2,3)", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn stale_cache_is_refused_with_a_rebuild_hint() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cache_arg = root.to_str().unwrap();
    assert_eq!(polargrass(&["--cache", cache_arg, "build", "--space", "H(2,1,2)"]).status.code(), Some(0));
    let manifest = entry_dir(root).join("manifest.json");
    let mut m: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    m["tool_version"] = "0.0.0-old".into();
    fs::write(&manifest, m.to_string()).unwrap();

    let out = polargrass(&["--cache", cache_arg, "build", "--space", "H(2,1,2)"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("stale") && err.contains("--rebuild"), "{err}");
}
