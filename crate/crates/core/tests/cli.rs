use std::process::Command;

fn postlie(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_postlie"))
        .args(args)
        .env_remove("POSTLIE_MAX_DEGREE")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn magnus_degree_three_json() {
    let (code, out, _) = postlie(&["magnus", "--degree", "3", "--format", "json"]);
    assert_eq!(code, 0);
    assert!(out.contains(r#"{"forest":"[[]]","coeff":"-1/2"}"#), "{out}");
}

#[test]
fn midpoint_has_order_two() {
    let (code, out, _) = postlie(&["order", "--method", "lie-midpoint", "--degree", "4", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["order"], 2);
}

#[test]
fn degree_four_tree_count() {
    let (code, out, _) = postlie(&["enumerate", "--what", "trees", "--degree", "4", "--count-only"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "5");
}

#[test]
fn exit_codes() {
    assert_eq!(postlie(&["graft", "[[]", "[]"]).0, 1);
    assert_eq!(postlie(&["nope"]).0, 2);
    assert_eq!(postlie(&["axioms", "--target", "free", "--degree", "4"]).0, 0);
}

#[test]
fn env_var_lowers_the_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_postlie"))
        .args(["magnus", "--degree", "4"])
        .env("POSTLIE_MAX_DEGREE", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let args = ["converge", "--method", "lie-midpoint", "--hs", "0.1,0.05,0.025", "--format", "json"];
    assert_eq!(postlie(&args).1, postlie(&args).1);
}
