use std::process::{Command, Output};

use serde_json::Value;
use twinrep_core::{Exact, Field, Matrix};

fn twinrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinrep"))
        .args(args)
        .env_remove("TWINREP_EPS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON stdout")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    stdout(out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const SWEEP_HEADER: &str = "n,re,im,status,reason,abs_phat,algebra_dim";

#[test]
fn verify_reports_all_relations_hold() {
    let out = twinrep(&["verify", "--family", "1", "--n", "6", "--a", "2/1+0/1*i", "--b", "3/1+0/1*i"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["report"], "all relations hold");
}

#[test]
fn verify_other_families() {
    let out = twinrep(&["verify", "--family", "2", "--n", "5", "--c", "-3/2+1/1*i", "--sign", "-1"]);
    assert_eq!(code(&out), 0);
    let out = twinrep(&["verify", "--family", "3", "--n", "4"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn decide_t3_special_point() {
    let out = twinrep(&[
        "decide", "--n", "3", "--a", "0+1.7320508075688772i", "--b", "1+0i", "--backend", "float",
    ]);
    assert_eq!(code(&out), 10);
    let v = json(&out);
    assert_eq!(v["status"], "Reducible");
    assert_eq!(v["reason"], "T3-special");
}

#[test]
fn decide_exit_codes() {
    let out = twinrep(&["decide", "--n", "5", "--a", "2/1+0/1*i", "--b", "1/1+0/1*i"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["status"], "Irreducible");

    let out = twinrep(&["decide", "--n", "4", "--a", "0/1+1/1*i", "--b", "1/1+0/1*i", "--emit-witness"]);
    assert_eq!(code(&out), 10);
    let v = json(&out);
    assert_eq!(v["reason"], "root-of-P");
    assert_eq!(v["witness"]["dim"], 2);

    let out = twinrep(&["decide", "--n", "4", "--a", "2/1+0/1*i", "--b", "0/1+0/1*i"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("b must be nonzero"));

    let out = twinrep(&["decide", "--n", "4", "--a", "two", "--b", "1+0i"]);
    assert_eq!(code(&out), 2);

    let out = twinrep(&["decide", "--bogus"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn roots_csv_for_n4() {
    let out = twinrep(&["roots", "--n", "4", "--csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("n,re,im,residual"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    let mut ims: Vec<f64> = Vec::new();
    for r in &rows {
        let re: f64 = r[1].parse().unwrap();
        let im: f64 = r[2].parse().unwrap();
        let residual: f64 = r[3].parse().unwrap();
        assert!(re.abs() < 1e-10 && (im.abs() - 1.0).abs() < 1e-10);
        assert!(residual < 1e-10);
        ims.push(im);
    }
    assert!(ims[0] * ims[1] < 0.0);
}

#[test]
fn roots_json_lists_coefficients() {
    let out = twinrep(&["roots", "--n", "5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["degree"], 5);
    assert_eq!(v["roots"].as_array().unwrap().len(), 4);
    assert_eq!(code(&twinrep(&["roots", "--n", "3"])), 2);
}

#[test]
fn gen_output_round_trips_and_verifies() {
    let out = twinrep(&["gen", "--family", "1", "--n", "5", "--a", "2/3-1/2*i", "--b", "-5/7+0/1*i"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let images = v["images"].as_array().unwrap();
    assert_eq!(images.len(), 4);
    for img in images {
        let m: Matrix<Exact> = serde_json::from_value(img["matrix"].clone()).unwrap();
        let again = serde_json::to_value(&m).unwrap();
        assert_eq!(again, img["matrix"]);
    }

    let dir = std::env::temp_dir().join(format!("twinrep-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("images.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let out = twinrep(&["verify", "--n", "5", "--images", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    // s₂ in place of s₃ does not commute with s₁.
    let mut broken = v.clone();
    broken["images"][2] = broken["images"][1].clone();
    std::fs::write(&path, serde_json::to_vec(&broken).unwrap()).unwrap();
    let out = twinrep(&["verify", "--n", "5", "--images", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["holds"], false);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reduce_in_both_bases() {
    let out = twinrep(&["reduce", "--n", "4", "--a", "0/1+0/1*i", "--b", "1/1+0/1*i", "--basis", "B"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let s2: Matrix<Exact> = serde_json::from_value(v["images"][1]["matrix"].clone()).unwrap();
    assert_eq!(s2.get(0, 0), &Exact::from_ratio(1, 2));
    assert_eq!(s2.get(1, 0), &Exact::from_ratio(3, 2));

    let out = twinrep(&["reduce", "--n", "4", "--a", "2/1+0/1*i", "--b", "1/1+0/1*i"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["images"].as_array().unwrap().len(), 3);

    let out = twinrep(&["reduce", "--n", "4", "--a", "1/1+0/1*i", "--b", "1/1+0/1*i", "--basis", "B"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn delta_modes_agree() {
    let out = twinrep(&["delta", "--n", "6", "--a", "1/3+2/1*i", "--b", "-2/1+0/1*i", "--mode", "both"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["agree"], true);
    assert_eq!(v["closed"], v["direct"]);

    let out = twinrep(&["delta", "--n", "5", "--a", "0/1+0/1*i", "--b", "1/1+0/1*i", "--mode", "closed"]);
    let v = json(&out);
    assert_eq!(v["closed"]["re"], serde_json::json!(["-5", "2"]));
}

#[test]
fn oracle_reports_dimension_and_lines() {
    let out = twinrep(&["oracle", "--family", "1", "--reduced", "--n", "4", "--a", "2/1+0/1*i", "--b", "1/1+0/1*i"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["algebra_dim"], 9);
    assert_eq!(v["full_dim"], 9);
    assert!(v["eigenlines"].as_array().unwrap().is_empty());

    let out = twinrep(&["oracle", "--family", "1", "--reduced", "--n", "5", "--a", "1/1+0/1*i", "--b", "2/1+0/1*i"]);
    assert_eq!(code(&out), 10);
    assert_eq!(json(&out)["irreducible"], false);

    let out = twinrep(&["oracle", "--family", "3", "--n", "3"]);
    assert_eq!(code(&out), 10);
}

#[test]
fn sweep_unit_circle() {
    let pts: Vec<String> = (0..8)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 8.0;
            format!("{:?}{:+?}i", t.cos(), t.sin())
        })
        .collect();
    let out = twinrep(&["sweep", "--n", "4", "--points", &pts.join(","), "--b", "1+0i"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some(SWEEP_HEADER));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 8);
    for (k, r) in rows.iter().enumerate() {
        let expected = if k == 0 || k == 2 || k == 4 || k == 6 { "Reducible" } else { "Irreducible" };
        assert_eq!(r[3], expected, "k={k} row={r:?}");
    }
    assert_eq!(rows[2][4], "root-of-P");
    assert_eq!(rows[6][4], "root-of-P");
}

#[test]
fn sweep_real_axis_with_oracle() {
    let pts = "-3+0i,-2.5+0i,-2+0i,-1.5+0i,-0.5+0i,0+0i,0.5+0i,1.5+0i,2+0i,2.5+0i,3+0i";
    let out = twinrep(&["sweep", "--n", "5", "--points", pts, "--with-oracle"]);
    assert_eq!(code(&out), 0);
    for r in csv_rows(&out) {
        assert_eq!(r[3], "Irreducible");
        assert_eq!(r[6], "16");
    }
}

#[test]
fn sweep_grid_is_ordered_and_deterministic() {
    let args = [
        "sweep", "--n", "4", "--n-max", "6", "--re-min", "-1.5", "--re-max", "1.5", "--re-steps", "7",
        "--im-min", "-1", "--im-max", "1", "--im-steps", "5",
    ];
    let first = twinrep(&args);
    let second = twinrep(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let rows = csv_rows(&first);
    assert_eq!(rows.len(), 3 * 7 * 5);
    assert_eq!(rows[0][0], "4");
    assert_eq!(rows[rows.len() - 1][0], "6");
}

#[test]
fn sweep_edge_cases() {
    let out = twinrep(&["sweep", "--n", "4", "--points", ""]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), format!("{SWEEP_HEADER}\n"));

    let out = twinrep(&["sweep", "--n", "4", "--re-steps", "100", "--im-steps", "100", "--max-points", "1000"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["decide", "--n", "6", "--a", "0.3+1.1i", "--b", "2+0i", "--emit-witness"];
    assert_eq!(twinrep(&args).stdout, twinrep(&args).stdout);
    let args = ["roots", "--n", "7"];
    assert_eq!(twinrep(&args).stdout, twinrep(&args).stdout);
}

#[test]
fn tolerance_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_twinrep"))
        .args(["decide", "--n", "3", "--a", "0+1.7321i", "--b", "1+0i"])
        .env("TWINREP_EPS", "1e-3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 10);
    let out = twinrep(&["decide", "--n", "3", "--a", "0+1.7321i", "--b", "1+0i"]);
    assert_eq!(code(&out), 0);
    let out = Command::new(env!("CARGO_BIN_EXE_twinrep"))
        .args(["roots", "--n", "4"])
        .env("TWINREP_EPS", "nope")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
