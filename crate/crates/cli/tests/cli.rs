use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cocycle_cli::sha256_hex;
use serde_json::Value;

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn spec(name: &str) -> String {
    specs().join(name).display().to_string()
}

fn cocycle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cocycle")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn entropy_of_golden_mean() {
    let v = json(&cocycle(&["entropy", "--spec", &spec("golden_mean_identity.json")]));
    let h = v["result"]["entropy"].as_f64().unwrap();
    assert!((h - 0.4812118).abs() <= 1e-7);
}

#[test]
fn json_embeds_hash_and_version() {
    let path = spec("butler.json");
    let v = json(&cocycle(&["entropy", "--spec", &path]));
    assert_eq!(v["spec_sha256"], sha256_hex(&std::fs::read(&path).unwrap()));
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["result"]["alphabet"], 2);
}

#[test]
fn pressure_row_contains_closed_form() {
    let csv = stdout(&cocycle(&["pressure", "--spec", &spec("butler.json"), "--t", "1", "--n", "14"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,lower,upper,estimate,n,rigor,method");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (lo, hi): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!(lo <= 0.9162907 && 0.9162907 <= hi);
    assert_eq!(row[4], "14");
}

#[test]
fn spectrum_of_identity_is_one_point() {
    let csv = stdout(&cocycle(&["spectrum", "--spec", &spec("golden_mean_identity.json"), "--t-grid", "-2:2:0.5", "--n", "8"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,h,uncertainty,t_source,region_flag");
    assert_eq!(lines.len(), 2);
    let row: Vec<f64> = lines[1].split(',').take(2).map(|x| x.parse().unwrap()).collect();
    assert!(row[0].abs() <= 1e-9 && (row[1] - 0.4812118).abs() <= 1e-7);
}

#[test]
fn invalid_specs_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let singular = write_spec(
        dir.path(),
        "singular.json",
        r#"{"alphabet":2,"transition":[[1,1],[1,1]],"matrices":{"0":[[1,2],[2,4]],"1":[[1,0],[0,1]]},"omega":0.5,"holder_r":1}"#,
    );
    let out = cocycle(&["entropy", "--spec", &singular]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("symbol 0"));
    let dead = write_spec(
        dir.path(),
        "dead.json",
        r#"{"alphabet":2,"transition":[[1,1],[0,0]],"matrices":{"0":[[1,0],[0,1]],"1":[[1,0],[0,1]]},"omega":0.5,"holder_r":1}"#,
    );
    let out = cocycle(&["entropy", "--spec", &dead]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dead symbol"));
    let out = cocycle(&["entropy", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cocycle(&["pressure", "--spec", &spec("butler.json"), "--t-grid", "1:0:0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_cap_exits_with_status_three() {
    let out = cocycle(&["words", "--spec", &spec("butler.json"), "--n", "30", "--cap", "1000"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = cocycle(&["pressure", "--spec", &spec("positive_pair.json"), "--n", "20", "--cap", "1000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn words_listing_and_count() {
    let gm = spec("golden_mean_identity.json");
    let list = stdout(&cocycle(&["words", "--spec", &gm, "--n", "3"]));
    assert_eq!(list, "word\n000\n001\n010\n100\n101\n");
    assert_eq!(stdout(&cocycle(&["words", "--spec", &gm, "--n", "6", "--count"])), "21\n");
}

#[test]
fn outputs_are_written_atomically_and_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let pp = spec("positive_pair.json");
    for (out, shards) in [(&a, "1"), (&b, "4")] {
        let o = cocycle(&["spectrum", "--spec", &pp, "--n", "10", "--t-grid", "-2:2:0.5", "--shards", shards, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
    let again = dir.path().join("c.csv");
    cocycle(&["spectrum", "--spec", &pp, "--n", "10", "--t-grid", "-2:2:0.5", "--shards", "4", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn certified_negative_weights_need_kappa() {
    let pp = spec("positive_pair.json");
    let out = cocycle(&["pressure", "--spec", &pp, "--t", "-1", "--certified"]);
    assert_eq!(out.status.code(), Some(2));
    let csv = stdout(&cocycle(&["pressure", "--spec", &pp, "--t", "-1", "--certified", "--kappa", "1e-7"]));
    assert!(csv.lines().nth(1).unwrap().ends_with("certified,quasimultiplicative"));
}

#[test]
fn kappa_and_cone_checks() {
    let pp = spec("positive_pair.json");
    let v = json(&cocycle(&["kappa", "--spec", &pp, "--n", "6"]));
    let k = v["result"]["kappa"].as_f64().unwrap();
    assert!(k > 0.0 && k <= 1.0);
    assert_eq!(v["result"]["cone"]["kind"], "orthant");
    let v = json(&cocycle(&["check", "cone", "--spec", &pp, "--cone", "rays:1,0.1;0.1,1"]));
    assert_eq!(v["result"]["invariant"], true);
    let out = cocycle(&["kappa", "--spec", &spec("butler.json")]);
    assert_eq!(out.status.code(), Some(2));
    let out = cocycle(&["kappa", "--spec", &pp, "--cone", "orthant3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn structural_checks() {
    let v = json(&cocycle(&["check", "fiber-bunched", "--spec", &spec("butler.json")]));
    assert_eq!(v["result"]["bunched"], false);
    let v = json(&cocycle(&["check", "domination", "--spec", &spec("positive_pair.json"), "--n", "8"]));
    assert_eq!(v["result"]["dominated"], true);
    let v = json(&cocycle(&["check", "typical", "--spec", &spec("diag_rotation.json")]));
    assert_eq!(v["result"]["typical"], "true");
    let out = cocycle(&["check", "typical", "--spec", &spec("butler.json"), "--p-word", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gibbs_and_jsr_outputs() {
    let csv = stdout(&cocycle(&["gibbs", "--spec", &spec("positive_pair.json"), "--n", "6,8", "--t", "0,1"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,t,h_n,chi_n,energy,ratio_bound,pressure_lower,pressure_upper");
    assert_eq!(lines.len(), 5);
    let v = json(&cocycle(&["jsr", "--spec", &spec("butler.json"), "--n", "8"]));
    assert!((v["result"]["beta_upper"].as_f64().unwrap() - 2f64.ln()).abs() <= 1e-12);
    assert!(v["result"]["alpha_upper"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn perturb_reports_every_eps() {
    let v = json(&cocycle(&["perturb", "--spec", &spec("positive_pair.json"), "--eps", "0.1,0.01", "--n", "8"]));
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["pressure"].as_array().unwrap().len(), 3);
    let zero = json(&cocycle(&["perturb", "--spec", &spec("positive_pair.json"), "--eps", "0", "--n", "8"]));
    assert_eq!(zero["result"]["rows"][0]["spectrum_sup_change"], 0.0);
}
