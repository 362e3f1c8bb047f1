use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qk")).args(args).env_remove("QK_JOBS").output().expect("qk runs")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn prop_extra_matches() {
    let out = qk(&["verify", "prop-extra", "-p", "3", "-m", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &json(&out)["result"];
    assert_eq!(r["matched"], true);
    assert_eq!(r["computed"]["degrees"]["1"]["rank"], 81);
    assert_eq!(r["computed"]["degrees"]["0"]["rank"], 0);
}

#[test]
fn cyclic_group_is_the_minus_one_sphere() {
    let out = qk(&["homology", r#"{"construct":"cyclic","p":3,"n":2}"#]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &json(&out)["result"];
    assert_eq!(r["betti"], serde_json::json!({"-1": 1}));
    assert_eq!(r["predicted_betti"], serde_json::json!({"-1": 1}));
    assert_eq!(r["match"], true);
}

#[test]
fn homology_reduced_to_z_and_csv() {
    let spec = r#"{"construct":"extraspecial","p":3,"m":2}"#;
    let full = json(&qk(&["homology", spec]));
    let reduced = json(&qk(&["homology", "--reduce-to-z", spec]));
    assert_eq!(full["result"]["betti"]["1"], 81);
    assert_eq!(full["result"]["betti"], reduced["result"]["betti"]);
    assert_eq!(reduced["result"]["complex"], "a_gt_z");
    let csv = qk(&["homology", "--csv", spec]);
    assert_eq!(String::from_utf8_lossy(&csv.stdout), "degree,rank,torsion\n-1,0,\n0,0,\n1,81,\nn,a_n\n2,1\n");
}

#[test]
fn espec_and_omega() {
    let out = qk(&["espec", r#"{"construct":"semidirect_example","p":5,"m":1}"#]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &json(&out)["result"];
    let a1 = r["counts"]["1"].as_u64().unwrap();
    assert_eq!(r["members"].as_array().unwrap().len() as u64, a1);
    assert_eq!(r["group"]["order"], 625);
    let out = qk(&["omega", "--max", "7", "--depth", "10"]);
    let sets = json(&out)["result"]["sets"].as_array().unwrap().clone();
    assert!(sets.contains(&serde_json::json!([])));
    assert!(sets.contains(&serde_json::json!([1, 2, 3])));
}

#[test]
fn other_verifications_match() {
    let e31 = r#"{"construct":"extraspecial","p":3,"m":1}"#;
    let c9 = r#"{"construct":"cyclic","p":3,"n":2}"#;
    for args in [
        vec!["verify", "techlem", e31, c9],
        vec!["verify", "a2-equiv", r#"{"construct":"extraspecial","p":3,"m":2}"#],
        vec!["verify", "main1", e31],
    ] {
        let out = qk(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        assert_eq!(json(&out)["result"]["matched"], true);
    }
}

#[test]
fn mismatch_exits_one() {
    // the prediction needs an odd prime; the dihedral group of order 8 has
    // two maximal Klein four-groups but one extraspecial candidate
    let spec = fixtures().join("dihedral8.table");
    let inline = format!(r#"{{"construct":"cayley_table","path":"{}"}}"#, spec.display());
    let out = qk(&["verify", "main1", &inline]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let r = &json(&out)["result"];
    assert_eq!(r["matched"], false);
    assert_eq!(r["computed"]["degrees"]["0"]["rank"], 1);
}

#[test]
fn invalid_input_exits_two() {
    let out = qk(&["verify", "corollary3", "-p", "5", "-t", "0", "-k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`p`"), "{}", stderr(&out));
    let out = qk(&["homology", r#"{"construct":"cyclic","p":3,"m":2}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`m`"), "{}", stderr(&out));
    let out = qk(&[
        "homology",
        r#"{"construct":"central_product","left":{"construct":"cyclic","p":3,"n":1},"right":{"construct":"cyclic","p":"x","n":1}}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`right.p`"), "{}", stderr(&out));
    let out = qk(&["homology", "{not json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qk(&["homology", "/no/such/spec.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qk(&["verify", "main1", r#"{"construct":"cyclic","p":5,"n":2}"#]);
    assert_eq!(out.status.code(), Some(2));
    let out = qk(&["homology", r#"{"construct":"cyclic","p":4,"n":2}"#]);
    assert_eq!(out.status.code(), Some(2));
    let out = qk(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qk(&["verify", "prop-extra", "-p", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn feasibility_gates_exit_three() {
    let out = qk(&["homology", r#"{"construct":"extraspecial","p":101,"m":3}"#]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let out = qk(&["--max-elements", "100", "homology", r#"{"construct":"extraspecial","p":5,"m":1}"#]);
    assert_eq!(out.status.code(), Some(3));
    let out = qk(&["--max-simplices", "50", "homology", r#"{"construct":"extraspecial","p":3,"m":2}"#]);
    assert_eq!(out.status.code(), Some(3));
    let out = qk(&["verify", "prop-extra", "-p", "11", "-m", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let out = qk(&["verify", "corollary3", "-p", "7", "-t", "5", "-k", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn results_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"construct":"central_product","left":{"construct":"extraspecial","p":3,"m":1},"right":{"construct":"cyclic","p":3,"n":2}}"#;
    let mut bodies = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.json"));
        let out = qk(&["homology", spec, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(doc["timings_ms"].is_object());
        bodies.push(serde_json::to_string(&doc["result"]).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let a = json(&qk(&["verify", "prop-extra", "-p", "5", "-m", "1"]));
    let b = json(&qk(&["verify", "prop-extra", "-p", "5", "-m", "1"]));
    assert_eq!(serde_json::to_string(&a["result"]).unwrap(), serde_json::to_string(&b["result"]).unwrap());
}

#[test]
fn spec_files_resolve_tables_relative_to_themselves() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixtures().join("corpus/m27.table"), dir.path().join("m.table")).unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"construct":"cayley_table","path":"m.table"}"#).unwrap();
    let out = qk(&["verify", "main1", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["result"]["order"], 27);
}

#[test]
fn shipped_corpus_matches() {
    let dir = fixtures().join("corpus");
    let out = tempfile::NamedTempFile::new().unwrap();
    let run = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_qk"))
            .args(["corpus", dir.to_str().unwrap(), "--out", out.path().to_str().unwrap()])
            .env("QK_JOBS", jobs)
            .output()
            .unwrap()
    };
    let serial = run("1");
    assert_eq!(serial.status.code(), Some(0), "{}", String::from_utf8_lossy(&serial.stdout));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.path()).unwrap()).unwrap();
    let rows = doc["result"]["rows"].as_array().unwrap();
    assert!(rows.len() >= 15);
    assert_eq!(doc["result"]["matched"], rows.len());
    assert!(rows.iter().all(|r| r["matched"] == true && r["torsion_entries"] == 0));
    let parallel = run("4");
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn corpus_reports_the_worst_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: String| std::fs::write(dir.path().join(name), body).unwrap();
    write("a.json", r#"{"construct":"extraspecial","p":3,"m":1}"#.into());
    let d8 = fixtures().join("dihedral8.table");
    write("b.json", format!(r#"{{"construct":"cayley_table","path":"{}"}}"#, d8.display()));
    let corpus = |extra: &[&str]| {
        let mut args = vec!["corpus", dir.path().to_str().unwrap()];
        args.extend_from_slice(extra);
        qk(&args)
    };
    assert_eq!(corpus(&[]).status.code(), Some(1));
    write("c.json", r#"{"construct":"extraspecial","p":5,"m":2}"#.into());
    assert_eq!(corpus(&["--max-elements", "1000"]).status.code(), Some(3));
    write("d.json", r#"{"construct":"cyclic"}"#.into());
    let out = corpus(&["--max-elements", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1/4 matched"));
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(qk(&["corpus", empty.path().to_str().unwrap()]).status.code(), Some(2));
}
