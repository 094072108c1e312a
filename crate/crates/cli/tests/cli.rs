use std::process::{Command, Output};

fn bilateral(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bilateral")).args(args).env_remove("BILATERAL_OUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn step_example_value() {
    let o = bilateral(&["chi", "--function", "catalog:example51", "--n", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o)["value"].as_f64().unwrap();
    assert!((v - 0.5f64.sqrt() * (2.0 + 1.0 / 1000.0)).abs() < 1e-12);
}

#[test]
fn fundamental_profile_csv() {
    let o = bilateral(&["fundamental", "--psi", "zeta:1,2,1,1", "--delta-range", "1e-8:1e8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    assert_eq!(&header, vec!["delta", "phi_numeric", "phi_closed", "rel_diff", "chi", "p_star"]);
    let mut n = 0;
    for r in rows.records() {
        let r = r.unwrap();
        let rel: f64 = r[3].parse().unwrap();
        assert!(rel < 1e-4, "{r:?}");
        let (d, phi, chi): (f64, f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap(), r[4].parse().unwrap());
        assert!((chi * phi / d - 1.0).abs() < 1e-12);
        n += 1;
    }
    assert_eq!(n, 65);
}

#[test]
fn verify_duality_suite() {
    let o = bilateral(&["verify", "--suite", "duality", "--seed", "7", "--count", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"][0]["cases"], 8);
}

#[test]
fn input_errors_exit_one() {
    for args in [
        vec!["catalog", "--check", "nope"],
        vec!["norm", "grand", "--psi", "zeta:1,2,1", "--function", "values:1"],
        vec!["norm", "grand", "--psi", "zeta:2,1,1,1", "--function", "values:1"],
        vec!["norm", "grand", "--psi", "zeta:1,2,1,1", "--function", "/no/such/file.csv"],
        vec!["norm", "small", "--psi", "zeta:1,2,1,1", "--function", "values:1", "--grid", "4"],
        vec!["verify", "--suite", "nope"],
        vec!["bogus"],
    ] {
        let o = bilateral(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let a = String::from_utf8(bilateral(&["catalog", "--check", "nope"]).stderr).unwrap();
    let b = String::from_utf8(bilateral(&["norm", "grand", "--psi", "zeta:2,1,1,1", "--function", "values:1"]).stderr).unwrap();
    assert!(a.contains("unknown catalog entry"));
    assert!(b.contains("domain"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# small norm run\npsi = zeta:1.5,4,1,2\nfunction = values:1,2\nspace = atomic:0.5,0.5\nmode = dual\n").unwrap();
    let base = bilateral(&["--config", cfg.to_str().unwrap(), "norm", "small"]);
    assert_eq!(base.status.code(), Some(0), "{}", String::from_utf8_lossy(&base.stderr));
    let v = json(&base);
    assert!(v.get("dual").is_some() && v.get("primal").is_none());
    let over = bilateral(&["--config", cfg.to_str().unwrap(), "norm", "small", "--function", "values:2,4"]);
    let w = json(&over);
    let (x, y) = (v["dual"]["value"].as_f64().unwrap(), w["dual"]["value"].as_f64().unwrap());
    assert!((y - 2.0 * x).abs() < 1e-9 * y);
}

#[test]
fn out_dir_from_env_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = Command::new(env!("CARGO_BIN_EXE_bilateral"))
            .args(["verify", "--suite", "holder", "--seed", "3", "--count", "50"])
            .env("BILATERAL_OUT_DIR", &out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out.join("verify.json")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn atomic_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.csv");
    std::fs::write(&file, "id,weight,value\nx,0.5,1.0\ny,0.25,3.0\nz,0.25,0.0\n").unwrap();
    let o = bilateral(&["norm", "grand", "--psi", "zeta:1,2,1,1", "--function", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["atoms"], 3);
    let norm = v["grand"]["value"].as_f64().unwrap();
    // the ratio at p = h = 1.5 bounds the norm below
    let at_h = (0.5 + 0.25 * 3f64.powf(1.5)).powf(1.0 / 1.5) * 0.25;
    assert!(norm >= at_h * (1.0 - 1e-12));
    std::fs::write(&file, "id,weight,value\nx,oops,1.0\n").unwrap();
    let bad = bilateral(&["norm", "grand", "--psi", "zeta:1,2,1,1", "--function", file.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn catalog_outputs() {
    let list = stdout(&bilateral(&["catalog", "--list"]));
    assert_eq!(list.lines().filter(|l| !l.starts_with("note:")).count(), 10);
    assert!(list.contains("note: ") && list.contains("Gamma(p*gamma + 1)"));
    let check = bilateral(&["catalog", "--check", "f_ab_gamma_nu:a=1,b=2,gamma=1,nu=1"]);
    assert_eq!(check.status.code(), Some(0));
    let v = json(&check);
    assert_eq!(v["all_passed"], true);
    assert!(v["note"].as_str().unwrap().contains("pairs"));
    let export = stdout(&bilateral(&["catalog", "--export", "h_m", "--nodes", "16"]));
    assert!(export.starts_with("x,ln_x,weight,value\n"));
    assert!(export.lines().count() > 16);
}

#[test]
fn indices_and_infinite_values() {
    let o = bilateral(&["indices", "--psi", "zeta:2,8,1,1"]);
    let v = json(&o);
    assert!(v["diagnostics"].as_array().unwrap().is_empty());
    assert_eq!(v["small"].as_array().unwrap().len(), 4);
    // a function outside L^p near b has an infinite grand norm
    let o = bilateral(&["norm", "grand", "--psi", "zeta:1,2,1,0", "--function", "catalog:f_L:a=1,b=1.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["grand"]["value"], "inf");
}
