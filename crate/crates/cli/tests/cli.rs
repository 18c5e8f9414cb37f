use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use closing_core::quadrature::integrate_interval;
use closing_core::{Band, BumpProfile};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_closing"))
}

fn maps() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("maps")
}

fn write_map(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn flux_of_half_translation() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_map(&dir, "t.map", "order=right-to-left\ntranslate a=0.5 b=0\n");
    let out = run(&["flux", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    let r = &v["results"];
    assert_eq!(f(&r["reduced"][0]), 0.5);
    assert_eq!(f(&r["reduced"][1]), 0.0);
    assert_eq!(r["exact"], false);
}

#[test]
fn flux_of_empty_chain() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_map(&dir, "e.map", "# nothing\norder=right-to-left\n");
    let v = json(&run(&["flux", m.to_str().unwrap()]));
    assert_eq!(f(&v["results"]["vx"]), 0.0);
    assert_eq!(f(&v["results"]["vy"]), 0.0);
    assert_eq!(v["results"]["exact"], true);
}

#[test]
fn flux_of_shear_matches_one_dimensional_oracle() {
    let m = maps().join("shear.map");
    let v = json(&run(&["--grid", "2048", "flux", m.to_str().unwrap()]));
    let prof = BumpProfile::new(0.3, 0.7).unwrap();
    let band = Band::new(0.0, 0.1).unwrap();
    let oracle = 0.02 * integrate_interval(|y| band.profile(&prof, y).0, 0.0, 0.1, 256);
    assert!((f(&v["results"]["vx"]) - oracle).abs() < 1e-10);
}

#[test]
fn floats_carry_seventeen_digits() {
    let m = maps().join("translation.map");
    let out = run(&["flux", m.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"vx\"")).unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{number}");
}

#[test]
fn parse_errors_exit_2_without_output() {
    for (body, needle) in [
        ("order=right-to-left\ndisktwist cx=0.5 cy=0.5 r=0.5 t=1\n", "line 2, column 25"),
        ("order=right-to-left\ntranslate a=0.1 b=0.2 colour=red\n", "unknown key `colour`"),
        ("translate a=0.1 b=0.2\n", "expected header"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let m = write_map(&dir, "bad.map", body);
        let json_out = dir.path().join("r.json");
        let out = run(&["--json-out", json_out.to_str().unwrap(), "flux", m.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(out.stdout.is_empty());
        assert!(!json_out.exists());
        assert!(String::from_utf8_lossy(&out.stderr).contains(needle));
    }
    assert_eq!(run(&["flux"]).status.code(), Some(2));
    assert_eq!(run(&["flux", "/nonexistent.map"]).status.code(), Some(2));
    let m = maps().join("translation.map");
    let out = run(&["scan", m.to_str().unwrap(), "--disk", "0.5,0.5,0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn action_of_twist_and_unsupported_map() {
    let m = maps().join("twist.map");
    let out = run(&["action", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(f(&v["results"]["total"]) > 0.0);
    assert!(f(&v["residuals"]["boundary"]) < 1e-9);
    assert!(f(&v["results"]["g_min_sampled"]) >= -1e-10);
    let named = json(&run(&["action", m.to_str().unwrap(), "--disk", "core", "--form", "neg-v-du"]));
    assert!((f(&named["results"]["total"]) - f(&v["results"]["total"])).abs() < 1e-8);

    let t = maps().join("translation.map");
    let out = run(&["action", t.to_str().unwrap(), "--disk", "0.5,0.5,0.2"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
}

#[test]
fn orbits_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("o.csv");
    let m = maps().join("third.map");
    let out = run(&[
        "--csv-out",
        csv.to_str().unwrap(),
        "orbits",
        m.to_str().unwrap(),
        "--period",
        "3",
        "--disk",
        "0.5,0.5,0.05",
        "--seeds",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let n = v["results"]["count"].as_u64().unwrap() as usize;
    assert!(n > 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,period,z1,z2,residual"));
    assert_eq!(lines.count(), n);

    let dir = tempfile::tempdir().unwrap();
    let m = write_map(&dir, "irr.map", "order=right-to-left\ntranslate a=0.3 b=0.3\n");
    let v = json(&run(&["orbits", m.to_str().unwrap(), "--period", "1", "--seeds", "8"]));
    assert_eq!(v["results"]["count"], 0);
}

#[test]
fn scan_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_map(&dir, "slow.map", "order=right-to-left\ntranslate a=0.02 b=0\n");
    let m = m.to_str().unwrap();

    // a single t = 0 cannot close this orbit
    let out = run(&["scan", m, "--disk", "0.5,0.5,0.1", "--q-max", "1", "--t-steps", "1"]);
    assert_eq!(out.status.code(), Some(5));
    let v = json(&out);
    assert_eq!(v["results"]["found"], false);
    assert!(v["results"]["diagnostics"]["seeds"].as_u64().unwrap() > 0);

    let out = run(&["scan", m, "--disk", "0.5,0.5,0.1", "--q-max", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let t_star = f(&v["results"]["t_star"]);
    assert!(t_star > 0.0 && t_star <= 1.0);
    assert!(f(&v["residuals"]["forward_iteration"]) < 1e-10);

    let t = maps().join("translation.map");
    let out = run(&["scan", t.to_str().unwrap(), "--disk", "0.5,0.5,0.45", "--max-shrinks", "0"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(out.stdout.is_empty());

    let out = run(&["scan", t.to_str().unwrap(), "--disk", "0.5,0.5,0.1", "--q-max", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rationalize_writes_map() {
    let dir = tempfile::tempdir().unwrap();
    let out_map = dir.path().join("r.map");
    let m = maps().join("translation.map");
    let out = run(&[
        "rationalize",
        m.to_str().unwrap(),
        "--map-out",
        out_map.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["q"], 11);
    assert!(f(&v["results"]["c0_size"]) <= 0.05);
    let flux = json(&run(&["flux", out_map.to_str().unwrap()]));
    assert!((f(&flux["results"]["vx"]) - 4.0 / 11.0).abs() < 1e-10);
    assert!((f(&flux["results"]["vy"]) - 2.0 / 11.0).abs() < 1e-10);

    let out = run(&["rationalize", m.to_str().unwrap(), "--hband", "0.5,0.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_on_shipped_maps() {
    for name in ["translation", "third", "twist", "mixed"] {
        let m = maps().join(format!("{name}.map"));
        let out = run(&["verify", m.to_str().unwrap()]);
        let v = json(&out);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", v["results"]);
        assert_eq!(v["results"]["passed"], true);
    }
    assert_eq!(run(&["verify", maps().join("bad_radius.map").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let m = maps().join("mixed.map");
    let a = run(&["--seed", "7", "verify", m.to_str().unwrap()]);
    let b = run(&["--seed", "7", "verify", m.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["--seed", "8", "verify", m.to_str().unwrap()]);
    assert_ne!(a.stdout, c.stdout);

    let t = maps().join("translation.map");
    let args = ["--seed", "3", "scan", t.to_str().unwrap(), "--disk", "0.3,0.7,0.1"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn timings_are_opt_in() {
    let m = maps().join("translation.map");
    let v = json(&run(&["flux", m.to_str().unwrap()]));
    assert!(v.get("timings").is_none());
    let v = json(&run(&["--timings", "flux", m.to_str().unwrap()]));
    assert!(v["timings"]["total_ms"].is_number());
}
