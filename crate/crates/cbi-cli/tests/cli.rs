//! End-to-end tests for the `cbi` binary: golden outputs and exit statuses.

use std::path::PathBuf;
use std::process::{Command, Output};

fn cbi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn temp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cbi-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir.join(name)
}

#[test]
fn parse_renders_in_all_styles() {
    let out = cbi(&["parse", "P -* Q", "--render", "latex"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), r"P \mathrel{\hbox{---}\llap{$\ast$}} Q");

    let out = cbi(&["parse", "!emp -* bot", "--render", "ascii"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), "!emp -* bot");

    let out = cbi(&["parse", "P & Q | R"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), "P ∧ Q ∨ R");
}

#[test]
fn parse_error_reports_offset_with_status_two() {
    let out = cbi(&["parse", "P & & Q"]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("byte 4"), "stderr: {}", stderr(&out));
}

#[test]
fn parse_json_mirrors_the_library_view() {
    let out = cbi(&["--json", "parse", "P * Q"]);
    assert_eq!(status(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["ascii"], "P * Q");
    assert_eq!(v["size"], 3);
    assert_eq!(v["vars"], serde_json::json!(["P", "Q"]));
}

#[test]
fn unknown_flags_use_status_two() {
    let out = cbi(&["parse", "P", "--render", "morse"]);
    assert_eq!(status(&out), 2);
}

#[test]
fn model_build_validate_and_eval() {
    let path = temp("z42.json");
    let out = cbi(&["model", "build", "zmod", "4", "2", "-o", path.to_str().unwrap()]);
    assert_eq!(status(&out), 0, "stderr: {}", stderr(&out));

    let out = cbi(&["model", "validate", path.to_str().unwrap()]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), "ok");

    // Tautology: status 0.
    let out = cbi(&["eval", path.to_str().unwrap(), "P | !P"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), "true");

    // Refutable: status 1, with a witnessing environment and point.
    let out = cbi(&["--json", "eval", path.to_str().unwrap(), "P * P -> P"]);
    assert_eq!(status(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["truth"], false);
    assert!(v["point"].is_string());
    assert!(v["env"].is_object());
}

#[test]
fn eval_at_a_point_with_an_environment() {
    let model = temp("z31.json");
    let out = cbi(&["model", "build", "zmod", "3", "1", "-o", model.to_str().unwrap()]);
    assert_eq!(status(&out), 0);

    let env = temp("env.json");
    std::fs::write(&env, r#"{"P": ["1", "2"]}"#).expect("write env");

    let out = cbi(&[
        "eval",
        model.to_str().unwrap(),
        "P * P",
        "--env",
        env.to_str().unwrap(),
        "--at",
        "0",
    ]);
    assert_eq!(status(&out), 0, "1+2=0, so 0 satisfies P * P");
    assert_eq!(stdout(&out).trim(), "true");

    let out = cbi(&[
        "eval",
        model.to_str().unwrap(),
        "emp",
        "--env",
        env.to_str().unwrap(),
        "--at",
        "2",
    ]);
    assert_eq!(status(&out), 1);
    assert_eq!(stdout(&out).trim(), "false");
}

#[test]
fn model_build_rejects_violated_side_conditions_with_status_one() {
    // The disjoint-union construction needs both units non-self-inverse
    // unless the models agree; z_mod(1,0) collapses e = inf, z_mod(3,1)
    // does not, and the builder must reject gluing them.
    let a = temp("u1.json");
    let b = temp("u3.json");
    assert_eq!(status(&cbi(&["model", "build", "zmod", "1", "0", "-o", a.to_str().unwrap()])), 0);
    assert_eq!(status(&cbi(&["model", "build", "zmod", "3", "1", "-o", b.to_str().unwrap()])), 0);
    let out = cbi(&["model", "build", "union", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(status(&out), 1, "stdout: {}", stdout(&out));
}

#[test]
fn model_build_unknown_name_is_a_usage_error() {
    let out = cbi(&["model", "build", "octonion", "8"]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("octonion"));
}

#[test]
fn model_list_names_every_builder() {
    let out = cbi(&["--json", "model", "list"]);
    assert_eq!(status(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    let names: Vec<&str> = v
        .as_array()
        .expect("array")
        .iter()
        .map(|e| e["name"].as_str().expect("name"))
        .collect();
    for expected in [
        "abelian", "zmod", "bitvec", "powerset", "action", "heap", "denyguar", "union",
        "product", "bbiext",
    ] {
        assert!(names.contains(&expected), "missing builder {expected}");
    }
}

#[test]
fn countermodel_reports_found_and_exhausted_with_status_one() {
    // Macro names expand: K -> L has a three-element countermodel.
    let out = cbi(&["--json", "countermodel", "K -> L"]);
    assert_eq!(status(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["found"], true);
    assert_eq!(v["model"]["carrier"].as_array().expect("carrier").len(), 3);

    // A valid formula exhausts the budget; still status 1, with a marker.
    let out = cbi(&["--json", "countermodel", "P -> P"]);
    assert_eq!(status(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["found"], false);
    assert_eq!(v["exhausted"], true);
    assert!(v["models_tried"].as_u64().expect("count") > 0);
}

#[test]
fn countermodel_family_restriction() {
    let out = cbi(&["--json", "countermodel", "K -> L", "--families", "zmod,bitvec"]);
    // All zmod/bitvec models are partial functional, where K -> L holds.
    assert_eq!(status(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["found"], false);

    let out = cbi(&["countermodel", "P", "--families", "quaternion"]);
    assert_eq!(status(&out), 2);
}

#[test]
fn proof_prove_multiplicative_unit_in_one_node() {
    let out = cbi(&["proof", "prove", "ME |- emp"]);
    assert_eq!(status(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("proved (1 nodes)"), "stdout: {text}");
    assert!(text.contains("MTopR: ME |- emp"), "stdout: {text}");
}

#[test]
fn proof_prove_exhausts_on_the_empty_consecutions() {
    for goal in ["AE |- AE", "ME |- ME"] {
        let out = cbi(&["--json", "proof", "prove", goal, "--depth", "10"]);
        assert_eq!(status(&out), 1);
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
        assert_eq!(v["proved"], false);
        assert_eq!(v["exhausted"], true);
        assert!(v["stats"]["nodes"].is_u64());
    }
}

#[test]
fn proof_check_accepts_a_shipped_fixture_and_rejects_garbage() {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../cbi-core/fixtures/mnot_not_commute.json");
    let out = cbi(&["--json", "proof", "check", fixture.to_str().unwrap()]);
    assert_eq!(status(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["ok"], true);
    assert_eq!(v["cut_free"], true);

    let bad = temp("notaproof.json");
    std::fs::write(&bad, "{\"definitely\": \"not a proof\"}").expect("write");
    let out = cbi(&["proof", "check", bad.to_str().unwrap()]);
    assert_eq!(status(&out), 2);
}

#[test]
fn proof_identity_builds_a_checked_cut_free_proof() {
    let out = cbi(&["--json", "proof", "identity", "P -* (Q |* coemp)"]);
    assert_eq!(status(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["ok"], true);
    assert_eq!(v["cut_free"], true);
    assert_eq!(v["subformula_ok"], true);
}

#[test]
fn proof_audit_passes_the_shipped_rule_table() {
    let out = cbi(&["proof", "audit"]);
    assert_eq!(status(&out), 0);
    assert!(stdout(&out).contains("pass"));
}

#[test]
fn modal_embed_golden_outputs() {
    let out = cbi(&["modal", "embed", "coemp"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), "!INF");

    let out = cbi(&["modal", "embed", "P * Q"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), "P o Q");
}

#[test]
fn modal_embed_model_then_check_axioms() {
    let model = temp("bv2.json");
    assert_eq!(status(&cbi(&["model", "build", "bitvec", "2", "-o", model.to_str().unwrap()])), 0);

    let frame = temp("bv2frame.json");
    let out = cbi(&[
        "modal",
        "embed-model",
        model.to_str().unwrap(),
        "-o",
        frame.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 0, "stderr: {}", stderr(&out));

    let out = cbi(&["--json", "modal", "check-axioms", frame.to_str().unwrap()]);
    assert_eq!(status(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["unitary"], true);
    let checks = v["checks"].as_array().expect("checks");
    assert_eq!(checks.len(), 11);
    assert!(checks.iter().all(|c| c["holds"] == true));
}

#[test]
fn modal_check_axioms_flags_failures_with_status_one() {
    // A two-point frame where composition is not commutative: 0∘1 = {0}
    // but 1∘0 = {1}, so the commutativity axiom fails.
    let frame = temp("skew.json");
    std::fs::write(
        &frame,
        r#"{
            "carrier": ["0", "1"],
            "unit_set": ["0"],
            "infinity_set": ["1"],
            "inv": {"0": ["0"], "1": ["1"]},
            "comp": [["0","0","0"], ["0","1","1"], ["1","0","1"], ["1","1","0"], ["0","1","0"]],
            "cowand": []
        }"#,
    )
    .expect("write frame");
    let out = cbi(&["--json", "modal", "check-axioms", frame.to_str().unwrap()]);
    assert_eq!(status(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert!(v["checks"]
        .as_array()
        .expect("checks")
        .iter()
        .any(|c| c["holds"] == false));
}

#[test]
fn modal_sahlqvist_verdicts_map_to_exit_status() {
    let out = cbi(&["modal", "sahlqvist", "E o P -> P"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out).trim(), "true");

    let out = cbi(&["modal", "sahlqvist", "!P -> P"]);
    assert_eq!(status(&out), 1);
    assert_eq!(stdout(&out).trim(), "false");
}

#[test]
fn missing_files_are_usage_errors() {
    let out = cbi(&["model", "validate", "/nonexistent/model.json"]);
    assert_eq!(status(&out), 2);
    let out = cbi(&["modal", "check-axioms", "/nonexistent/frame.json"]);
    assert_eq!(status(&out), 2);
}
