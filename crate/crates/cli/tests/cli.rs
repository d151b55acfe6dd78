use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bubqkd(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bubqkd"));
    cmd.args(args).env_remove("BUBQKD_WORKERS");
    if let Some(w) = workers {
        cmd.env("BUBQKD_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_reports_named_checks() {
    let o = bubqkd(&["verify"], None);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    for needle in ["table1: PASS", "breidbart P1=0.833333: PASS", "collective K closure: PASS", "p2_tilde identity (720 points): PASS"] {
        assert!(text.contains(needle), "missing {needle:?}");
    }
    for module in ["qmath", "protocol", "intercept", "collective", "montecarlo"] {
        assert!(text.contains(&format!("[{module}]")), "no checks for {module}");
    }
    let o = bubqkd(&["verify", "--format", "json"], None);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["failed"], 0);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn breidbart_table() {
    let o = bubqkd(&["breidbart"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for needle in ["5/6", "(5+3√2)/10", "9/10", "3:5:5:3", "(3-√2)/6", "(3+√2)/6", "0.924264068712"] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
    let o = bubqkd(&["breidbart", "--format", "json"], None);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["blocks"][1]["q_ratio_form"], "3:5:5:3");
}

#[test]
fn ir_sweep_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ir.csv");
    let o = bubqkd(&["ir-sweep", "--points", "720", "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["alpha", "p1", "p1_comp_r2r3_a", "p1_comp_r2r3_b", "p2", "p2_comp_r1", "p2_comp_r4", "q1", "q2"]);
    assert_eq!(rows.len(), 720);
    let first: Vec<f64> = rows[0].iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 0.833333).abs() < 1e-6);
    assert!((first[4] - 0.924264).abs() < 1e-6);

    // every number is already at 12 significant digits
    for row in &rows {
        for cell in row {
            let x: f64 = cell.parse().unwrap();
            let again: f64 = format!("{x:.11e}").parse().unwrap();
            assert_eq!(x, again, "{cell}");
            assert!(!cell.contains(','));
        }
    }

    let side = read_json(&dir.path().join("ir.json"));
    let step = 2.0 * PI / 720.0;
    for a in side["argmax"].as_array().unwrap() {
        let alpha = a["coords"][0].as_f64().unwrap();
        assert!([0.0, PI, 2.0 * PI].iter().any(|c| (alpha - c).abs() <= step), "{a}");
    }
    assert_eq!(side["provenance"]["config"]["points"], "720");
    assert_eq!(side["provenance"]["toolkit"], "bubqkd");

    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# toolkit: bubqkd "));
}

#[test]
fn collective_sweep_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let o = bubqkd(&["collective-sweep", "--nmax", "200", "--mmax", "200", "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["n", "m", "a", "b", "F", "p_ab", "p_e"]);
    assert_eq!(rows.len(), 201 * 201);
    assert!(rows.iter().flatten().all(|c| !c.is_empty()));
    let invalid: Vec<_> = rows.iter().filter(|r| r[4] == "invalid").collect();
    assert_eq!(invalid.len(), 1);
    assert_eq!((invalid[0][0].as_str(), invalid[0][1].as_str()), ("0", "200"));
    assert!(invalid[0][4..].iter().all(|c| c == "invalid"));

    let side = read_json(&dir.path().join("grid.json"));
    let best = &side["argmax"][0];
    let step = PI / 200.0;
    assert!((best["value"].as_f64().unwrap() - 0.927).abs() <= 0.002);
    assert!((best["coords"][2].as_f64().unwrap() - 1.30).abs() <= step);
    assert!((best["coords"][3].as_f64().unwrap() - 0.990).abs() <= step);
    let idx = best["index"].as_u64().unwrap() as usize;
    let p_ab: f64 = rows[idx][5].parse().unwrap();
    assert!((p_ab - 0.839).abs() <= 0.002);
    assert_eq!(side["invalid_cells"], serde_json::json!([[0, 200]]));

    let (header, slice) = read_csv(&dir.path().join("grid_slice.csv"));
    assert_eq!(header, ["a", "F", "p_e"]);
    assert_eq!(slice.len(), 201);
    assert_eq!(slice[idx / 201][2], rows[idx][6]);
}

#[test]
fn reruns_are_bit_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let args = |p: &Path| {
        ["mc", "--scenario", "ir", "--alpha", "0.4", "--beta", "1.1", "--trials", "200000", "--seed", "5", "--out"]
            .iter()
            .map(|x| x.to_string())
            .chain([s(p).to_string()])
            .collect::<Vec<_>>()
    };
    let run = |p: &Path, w: &str| {
        let v = args(p);
        bubqkd(&v.iter().map(String::as_str).collect::<Vec<_>>(), Some(w))
    };
    run(&a, "1");
    run(&b, "4");
    let (mut ja, mut jb) = (read_json(&a), read_json(&b));
    assert_eq!(ja["provenance"]["config"]["workers"], "1");
    assert_eq!(jb["provenance"]["config"]["workers"], "4");
    ja["provenance"]["config"]["workers"] = Value::Null;
    jb["provenance"]["config"]["workers"] = Value::Null;
    ja["provenance"]["config"]["out"] = Value::Null;
    jb["provenance"]["config"]["out"] = Value::Null;
    assert_eq!(ja, jb);

    let (c1, c2) = (dir.path().join("c1.csv"), dir.path().join("c2.csv"));
    for p in [&c1, &c2] {
        bubqkd(&["ir-sweep", "--points", "90", "--out", s(p)], Some("2"));
    }
    let body = |p: &Path| std::fs::read_to_string(p).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&c1), body(&c2));
}

#[test]
fn mc_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("honest.json");
    let o = bubqkd(&["mc", "--scenario", "honest", "--trials", "100000", "--seed", "1", "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&out);
    assert_eq!(v["report"]["table1_violations"], 0);
    assert_eq!(v["provenance"]["seed"], 1);
    let cells = v["report"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 16);
    // half the (axis, outcome, r) combinations are forbidden by Table 1
    let empty = cells.iter().filter(|c| c["expected"].as_f64().unwrap() < 1e-12).collect::<Vec<_>>();
    assert_eq!(empty.len(), 8);
    assert!(empty.iter().all(|c| c["count"] == 0));

    let out = dir.path().join("ir.json");
    let o = bubqkd(&["mc", "--scenario", "ir", "--alpha", "0", "--beta", &(PI / 4.0).to_string(), "--trials", "1000000", "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = read_json(&out);
    let pass = v["report"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "s23_pass_rate").unwrap();
    let (obs, sigma) = (pass["observed"].as_f64().unwrap(), pass["sigma"].as_f64().unwrap());
    assert!((obs - 5.0 / 6.0).abs() <= 4.0 * sigma);
    let cell = &v["report"]["cells"][0];
    for key in ["observed", "expected", "sigma_deviation", "count"] {
        assert!(!cell[key].is_null(), "{key}");
    }

    let out = dir.path().join("col.csv");
    let o = bubqkd(&["mc", "--scenario", "collective", "--a", "1.30", "--b", "0.990", "--trials", "1000000", "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header[..4], ["axis", "bob", "eve", "r"]);
    assert_eq!(rows.len(), 16);
    let v = read_json(&dir.path().join("col.json"));
    let p = v["report"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "p_ab").unwrap();
    let (obs, sigma) = (p["observed"].as_f64().unwrap(), p["sigma"].as_f64().unwrap());
    // 0.839 is given to three places
    assert!((obs - 0.839).abs() <= 4.0 * sigma + 5e-4);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let from_cfg = dir.path().join("from_cfg.csv");
    std::fs::write(&cfg, serde_json::json!({"points": 40, "out": s(&from_cfg)}).to_string()).unwrap();
    let o = bubqkd(&["ir-sweep", "--config", s(&cfg)], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_csv(&from_cfg).1.len(), 40);

    let from_flag = dir.path().join("from_flag.csv");
    let o = bubqkd(&["ir-sweep", "--config", s(&cfg), "--points", "12", "--out", s(&from_flag)], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_csv(&from_flag).1.len(), 12);

    std::fs::write(&cfg, r#"{"pionts": 40}"#).unwrap();
    assert_eq!(bubqkd(&["ir-sweep", "--config", s(&cfg), "--out", s(&from_flag)], None).status.code(), Some(2));
}

#[test]
fn json_format_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.json");
    let o = bubqkd(&["--format", "json", "collective-sweep", "--nmax", "4", "--mmax", "4", "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&out);
    assert_eq!(v["grid"]["rows"].as_array().unwrap().len(), 25);
    // (0, π) has no fidelity
    assert!(v["grid"]["rows"][4]["values"][0].is_null());
    assert_eq!(v["grid"]["provenance"]["config"]["nmax"], "4");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["frobnicate"],
        vec!["ir-sweep", "--points", "1", "--out", s(&out)],
        vec!["ir-sweep", "--points", "ten", "--out", s(&out)],
        vec!["collective-sweep", "--nmax", "0", "--out", s(&out)],
        vec!["ir-sweep", "--out", "/nonexistent-dir/x.csv"],
        vec!["mc", "--out", s(&out)],
        vec!["mc", "--scenario", "collective", "--alpha", "1", "--out", s(&out)],
        vec!["mc", "--scenario", "collective", "--a", "4", "--b", "1", "--out", s(&out)],
        vec!["mc", "--scenario", "honest", "--trials", "0", "--out", s(&out)],
    ] {
        assert_eq!(bubqkd(&args, None).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(bubqkd(&["breidbart"], Some("zero")).status.code(), Some(2));
    assert_eq!(bubqkd(&["--help"], None).status.code(), Some(0));
}
