use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str], cache: Option<&std::path::Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_statesum"));
    c.args(args).env_remove("STATESUM_CACHE_DIR");
    if let Some(dir) = cache {
        c.env("STATESUM_CACHE_DIR", dir);
    }
    c.output().unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn tv_and_st_values() {
    let v = json(&run(&["tv", "--group", "cyclic:2", "--cocycle", "trivial", "--manifold", "builtin:s3_2tet"], None));
    assert_eq!(v["value"], "1/2");
    assert_eq!(v["backend"], "exact");
    assert_eq!(v["skeleton"]["cells"], 4);
    assert_eq!(v["approx"][0].as_f64(), Some(0.5));
    let v = json(&run(&["tv", "--manifold", "builtin:rp3"], None));
    assert_eq!(v["value"], "1");
    let v = json(&run(&["st", "--manifold", "builtin:s3_2tet", "--per-phi3", "--threads", "2"], None));
    assert_eq!(v["value"], "1/2");
    assert_eq!(v["partial_sums_equal"], true);
    assert_eq!(v["partial_sums"].as_array().unwrap().len(), 16);
    let v = json(&run(&["st", "--manifold", "builtin:s2xs1"], None));
    assert_eq!(v["value"], "1");
}

#[test]
fn twisted_category_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.json");
    std::fs::write(&path, r#"{"group": "product:cyclic:2,cyclic:2,cyclic:2", "cocycle": {"type": "omega_alpha", "n": 2, "q_exp": 1}}"#).unwrap();
    let v = json(&run(&["tv", "--category", path.to_str().unwrap(), "--manifold", "builtin:rp3"], None));
    assert_eq!(v["value"], "3/4");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"tetrahedra\": 1, \"gluings\": [[1, 2]]}").unwrap();
    assert_eq!(run(&["tv", "--manifold", bad.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(run(&["tv", "--manifold", "builtin:nope"], None).status.code(), Some(2));
    assert_eq!(run(&["tv", "--group", "cyclic:x", "--manifold", "builtin:rp3"], None).status.code(), Some(2));
    assert_eq!(run(&["tv", "--manifold", "builtin:rp3", "--backend", "float"], None).status.code(), Some(2));
    // ω(1,1,1) = ζ_3 alone on Z/3 fails the cocycle identity
    let notcocycle = format!("{{\"modulus\": 3, \"values\": [{}]}}", (0..27).map(|i| if i == 13 { "1" } else { "0" }).collect::<Vec<_>>().join(","));
    let o = run(&["tv", "--group", "cyclic:3", "--cocycle", &notcocycle, "--manifold", "builtin:rp3"], None);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
}

#[test]
fn result_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["st", "--group", "cyclic:3", "--manifold", "builtin:s3_2tet"];
    let first = json(&run(&args, Some(dir.path())));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let second = json(&run(&args, Some(dir.path())));
    assert_eq!(first, second);
    assert_eq!(first["value"], "1/3");
}

#[test]
fn suites() {
    let v = json(&run(&["moves-check", "--manifold", "builtin:rp3", "--sequences", "20", "--seed", "4"], None));
    assert_eq!(v["result"], "PASS");
    let again = json(&run(&["moves-check", "--manifold", "builtin:rp3", "--sequences", "20", "--seed", "4"], None));
    assert_eq!(v, again);
    let v = json(&run(&["morita-compare", "--manifolds", "builtin:s3_2tet,builtin:rp3"], None));
    assert_eq!(v["result"], "PASS");
    let v = json(&run(&["validate", "--group", "cyclic:3", "--samples", "20"], None));
    assert_eq!(v["result"], "PASS");
    let v = json(&run(&["validate", "--group", "product:cyclic:2,cyclic:2", "--list-modules"], None));
    assert_eq!(v["modules"].as_array().unwrap().len(), 6);
}
