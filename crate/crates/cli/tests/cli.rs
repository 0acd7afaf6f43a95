use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ptbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptbs")).args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stock(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn harmonic_actions_row_at_unit_energy() {
    let out = ptbs(&["actions", "--config", &stock("harmonic.toml")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("E,S0,S1,S2,T\n"));
    let row = rows(&text).into_iter().find(|r| num(&r[0]) == 1.0).unwrap();
    let got: Vec<f64> = row.iter().map(|s| num(s)).collect();
    for (g, want) in got.iter().zip([1.0, PI, PI, 0.0, PI]) {
        assert!((g - want).abs() < 1e-9, "{row:?}");
    }
    assert!(row[1].split('e').next().unwrap().replace(['-', '.'], "").len() == 15);
}

#[test]
fn json_carries_the_same_numbers() {
    let csv = stdout(&ptbs(&["actions", "--config", &stock("harmonic.toml")]));
    let out = ptbs(&["actions", "--config", &stock("harmonic.toml"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let arr = v.as_array().unwrap();
    let table = rows(&csv);
    assert_eq!(arr.len(), table.len());
    for (j, r) in arr.iter().zip(&table) {
        assert!((j["s0"].as_f64().unwrap() - num(&r[1])).abs() <= 1e-13 * num(&r[1]).abs().max(1.0));
        assert!((j["period"].as_f64().unwrap() - num(&r[4])).abs() <= 1e-13);
    }
}

#[test]
fn critical_point_in_window_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "double_well.toml",
        "[problem]\np0 = \"xi^2 + (x^2 - 1)^2\"\nseed = [0.0, 1.5]\n[window]\ne_min = 1.0\ne_max = 1.5\ngrid = 3\n",
    );
    let out = ptbs(&["actions", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("critical point") && err.contains("E = 1"), "{err}");
}

#[test]
fn shifted_harmonic_ground_state() {
    let out = ptbs(&["quantize", "--config", &stock("shifted_harmonic.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let table = rows(&stdout(&out));
    assert_eq!(table[0][1], "1");
    assert!((num(&table[0][2]) - 0.1025).abs() < 1e-8);
    assert!(table.iter().all(|r| num(&r[3]) < 1e-9));
}

#[test]
fn h_sweep_and_empty_window() {
    let dir = TempDir::new().unwrap();
    let base = "[problem]\np0 = \"xi^2 + x^2\"\np1 = \"i*x\"\n[window]\n";
    let sweep = write_config(&dir, "sweep.toml", &format!("{base}e_min = 0.05\ne_max = 1.0\nh_list = [0.1, 0.05]\n"));
    let out = ptbs(&["quantize", "--config", &sweep]);
    assert_eq!(out.status.code(), Some(0));
    let table = rows(&stdout(&out));
    assert_eq!(table.iter().filter(|r| num(&r[0]) == 0.1).count(), 5);
    assert_eq!(table.iter().filter(|r| num(&r[0]) == 0.05).count(), 10);
    let empty = write_config(&dir, "empty.toml", &format!("{base}e_min = 0.12\ne_max = 0.28\nh = 0.1\n"));
    let out = ptbs(&["quantize", "--config", &empty]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "h,n,E,bs_residual\n");
}

#[test]
fn output_file_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = ptbs(&["quantize", "--config", &stock("shifted_harmonic.toml"), "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains("quasi-eigenvalues"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(ptbs(&["actions"]).status.code(), Some(2));
    let bad = write_config(&dir, "bad.toml", "[problem]\np0 = \"xi^2 +\"\n[window]\ne_min = 0.5\ne_max = 1.5\n");
    let out = ptbs(&["actions", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("problem.p0"));
    let out = ptbs(&["oracle", "--config", &stock("harmonic.toml")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("[oracle]"));
    let missing = dir.path().join("nope.toml");
    assert_eq!(ptbs(&["quantize", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_distinguishes_pt_from_solvability() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "odd.toml",
        "[problem]\np0 = \"xi^2 + x^2\"\np1 = \"x\"\n[window]\ne_min = 0.5\ne_max = 1.5\ngrid = 3\n",
    );
    let out = ptbs(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let table = rows(&stdout(&out));
    let find = |name: &str| table.iter().filter(|r| r[0].starts_with(name)).map(|r| r[2] == "true").collect::<Vec<_>>();
    assert_eq!(find("pt_symmetry"), vec![false]);
    assert_eq!(find("solvability"), vec![true; 3]);
    assert!(find("associativity").iter().all(|&p| p));
}

#[test]
fn flipped_star_breaks_the_identities() {
    let plain = rows(&stdout(&ptbs(&["verify"])));
    let flipped = rows(&stdout(&ptbs(&["verify", "--debug-flip-star"])));
    let failures = |t: &[Vec<String>]| t.iter().filter(|r| r[2] == "false").count();
    assert!(failures(&flipped) > failures(&plain));
    let r5 = flipped.iter().find(|r| r[0].starts_with("conjugation expansion")).unwrap();
    assert!(r5[2] == "false" && num(&r5[1]) > 0.0);
    let unit = flipped.iter().find(|r| r[0].starts_with("x # xi")).unwrap();
    assert_eq!(unit[2], "false");
}

#[test]
fn oracle_matches_shifted_harmonic() {
    let out = ptbs(&["oracle", "--config", &stock("shifted_harmonic.toml"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let block = &v[0];
    assert!(block["max_gap"].as_f64().unwrap() <= 2e-4);
    let pairs = block["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 5);
    assert!(pairs.iter().all(|p| p["im_e_oracle"].as_f64().unwrap().abs() <= 1e-6));
}

#[test]
fn oracle_prints_quartic_gap_ratio() {
    let out = ptbs(&["oracle", "--config", &stock("quartic.toml")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = stderr(&out);
    let ratio: f64 = summary
        .lines()
        .find_map(|l| l.trim().strip_prefix("gap ratio h = 0.1 -> 0.05: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 1.0, "{summary}");
    assert!(stdout(&out).starts_with("h,n,E_bs,Re_E_oracle,Im_E_oracle,gap\n"));
}
