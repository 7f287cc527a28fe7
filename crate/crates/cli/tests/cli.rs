use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use touchgrid::format::FamilyFile;
use touchgrid_lab::SearchSpec;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_touchgrid"))
        .args(args)
        .env_remove("TOUCHGRID_CACHE_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", path(&fixture("grid.json"))]);
    assert_eq!(code(&ok), 0);
    let v = json(&ok);
    assert_eq!(v["version"], 1);
    let bytes = std::fs::read(fixture("grid.json")).unwrap();
    let sha: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(v["input_sha256"], sha);
    assert_eq!(v["validation"]["is_intersecting"], true);

    assert_eq!(code(&run(&["validate", path(&fixture("double_crossing.json"))])), 2);
    assert_eq!(code(&run(&["validate", path(&fixture("truncated.json"))])), 3);
    assert_eq!(code(&run(&["validate", "/nonexistent/file.json"])), 3);
}

#[test]
fn analyze_reports() {
    let o = run(&["analyze", path(&fixture("fig1.json")), "--probe"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["counts"]["touchings"], 3);
    assert_eq!(v["counts"]["crossings"], 3);
    assert_eq!(v["t_c"], 1);
    assert_eq!(v["arrangement"]["t_c"], 1);
    assert_eq!(v["probe"]["n"], 4);

    let v = json(&run(&["analyze", path(&fixture("disjoint.json"))]));
    assert_eq!(v["t_c"], 1);
    assert_eq!(v["arrangement"]["components"], 2);

    assert_eq!(code(&run(&["analyze", path(&fixture("bad_euler.json"))])), 4);
    assert_eq!(code(&run(&["analyze", path(&fixture("double_crossing.json"))])), 2);
    assert_eq!(code(&run(&["analyze", path(&fixture("truncated.json"))])), 3);
}

#[test]
fn svg_is_deterministic_and_marks_meetings() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig1.json", "fig3.json", "grid.json", "mixed4.json", "disjoint.json"] {
        let a = dir.path().join("a.svg");
        let b = dir.path().join("b.svg");
        assert_eq!(code(&run(&["analyze", path(&fixture(name)), "--svg", path(&a)])), 0);
        assert_eq!(code(&run(&["render", path(&fixture(name)), "-o", path(&b)])), 0);
        let (a, b) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
        assert_eq!(a, b, "{name}");
        assert!(a.starts_with("<?xml") && a.contains("version=\"1.1\""));
        let family = match FamilyFile::parse(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap() {
            FamilyFile::Geometric(g) => touchgrid::geometry::ingest(&g.polylines(), None).unwrap().0,
            FamilyFile::Combinatorial(c) => c.to_family().unwrap(),
        };
        let counts = family.count_meetings();
        assert_eq!(a.matches("class=\"touch\"").count(), counts.touchings, "{name}");
        assert_eq!(a.matches("class=\"crossing\"").count(), counts.crossings, "{name}");
        assert_eq!(a.matches("class=\"curve\"").count(), family.len(), "{name}");
        if counts.touchings + counts.crossings > 0 {
            assert!(a.contains("class=\"face"), "{name}");
        }
    }
    let out = run(&["render", path(&fixture("grid.json"))]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("</svg>\n"));
}

#[test]
fn decompose_figures() {
    let parts = |name: &str| {
        let o = run(&["decompose", path(&fixture(name)), "--g", "0"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        json(&o)["decomposition"]["parts"].as_array().unwrap().len()
    };
    assert_eq!(parts("fig1.json"), 1);
    assert_eq!(parts("fig3.json"), 2);
    assert_eq!(parts("grid.json"), 1);
    assert!(parts("mixed4.json") <= 8);
    assert_eq!(code(&run(&["decompose", path(&fixture("fig1.json")), "--g", "9"])), 2);
    assert_eq!(code(&run(&["decompose", path(&fixture("bad_euler.json")), "--g", "0"])), 4);
}

#[test]
fn search_lemma42() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["search", "--lemma", "42", "--max-curves", "7", "--out", path(dir.path())]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["witnesses"], 0);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["spec"]["kind"]["h"], 5);
    assert_eq!(manifest["spec"]["limits"]["max_meetings"], 25);
    assert_eq!(manifest["searched"], v["searched"]);
    assert!(manifest["searched"].as_u64().unwrap() > 0);

    let dir = tempfile::tempdir().unwrap();
    let o = run(&["search", "--lemma", "42", "--h", "1", "--out", path(dir.path())]);
    assert_eq!(code(&o), 6);
    let v = json(&o);
    let files = v["witness_files"].as_array().unwrap();
    assert!(!files.is_empty());
    let spec: SearchSpec = serde_json::from_value(v["spec"].clone()).unwrap();
    for f in files {
        let text = std::fs::read_to_string(f.as_str().unwrap()).unwrap();
        let FamilyFile::Combinatorial(c) = FamilyFile::parse(&text).unwrap() else { panic!() };
        assert!(spec.replay(&c.to_family().unwrap()));
        assert_eq!(code(&run(&["validate", f.as_str().unwrap()])), 0);
    }
    assert_eq!(code(&run(&["search", "--lemma", "43"])), 3);
}

#[test]
fn paused_search_resumes_to_the_same_result() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["search", "--lemma", "42", "--h", "2"];
    let whole_dir = dir.path().join("whole");
    let whole = run(&[&base[..], &["--out", path(&whole_dir)]].concat());
    assert_eq!(code(&whole), 6);
    let whole = json(&whole);

    let cp = dir.path().join("cp.json");
    let parts = dir.path().join("parts");
    let mut o = run(&[&base[..], &["--max-expansions", "100", "--checkpoint", path(&cp), "--out", path(&parts)]].concat());
    let mut pauses = 0;
    while code(&o) == 7 {
        pauses += 1;
        assert_eq!(json(&o)["checkpoint"], path(&cp));
        o = run(&["search", "--resume", path(&cp), "--max-expansions", "100", "--checkpoint", path(&cp), "--out", path(&parts)]);
    }
    assert!(pauses > 0);
    assert_eq!(code(&o), 6);
    let resumed = json(&o);
    assert_eq!(resumed["searched"], whole["searched"]);
    assert_eq!(resumed["tasks"], whole["tasks"]);
    assert_eq!(resumed["witnesses"], whole["witnesses"]);
    for (a, b) in whole["witness_files"].as_array().unwrap().iter().zip(resumed["witness_files"].as_array().unwrap()) {
        let a = std::fs::read(a.as_str().unwrap()).unwrap();
        let b = std::fs::read(b.as_str().unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn cache_dir_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{ "max_curves": 3, "max_meetings": 10 }"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_touchgrid"))
        .args(["--config", path(&config), "search", "--lemma", "42"])
        .env("TOUCHGRID_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 6);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["spec"]["kind"]["h"], 1);
    assert_eq!(manifest["spec"]["limits"]["max_meetings"], 10);

    std::fs::write(&config, r#"{ "bogus": 1 }"#).unwrap();
    assert_eq!(code(&run(&["--config", path(&config), "validate", path(&fixture("grid.json"))])), 3);
}
