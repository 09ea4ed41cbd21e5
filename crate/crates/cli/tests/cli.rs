use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SWEEP_HEADER: &str = "alpha,cost_per_mw_year,total_gen_mw,bess_mw,bess_mwh,n_ng,lole,prm,fc";

fn mgcap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgcap"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("run mgcap")
}

/// Writes the default config, shrunk to a fast search.
fn quick_config(dir: &Path) -> PathBuf {
    let path = dir.join("quick.toml");
    let out = mgcap(dir, &["init", "--config", "quick.toml"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&path)
        .unwrap()
        .replace("years = 1000", "years = 80")
        .replace("screening_years = 200", "screening_years = 40")
        .replace("swarm_size = 30", "swarm_size = 6")
        .replace("iterations = 40", "iterations = 4");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn init_then_select_reports_qfd_scores() {
    let dir = TempDir::new().unwrap();
    quick_config(dir.path());
    let out = mgcap(
        dir.path(),
        &["--config", "quick.toml", "--out", "sel", "select"],
    );
    assert!(out.status.success());
    let json = fs::read_to_string(dir.path().join("sel/qfd_scores.json")).unwrap();
    for score in ["131", "153", "107", "49", "33"] {
        assert!(json.contains(&format!("\"score\": {score}")), "{json}");
    }
    assert!(dir.path().join("sel/lcoe_curves.csv").exists());
    assert!(dir.path().join("sel/resolved_config.toml").exists());
}

#[test]
fn init_refuses_to_overwrite() {
    let dir = TempDir::new().unwrap();
    quick_config(dir.path());
    let out = mgcap(dir.path(), &["init", "--config", "quick.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("already exists"));
}

#[test]
fn csv_format_skips_json() {
    let dir = TempDir::new().unwrap();
    let out = mgcap(dir.path(), &["--out", "o", "--format", "csv", "select"]);
    assert!(out.status.success());
    assert!(dir.path().join("o/lcoe_curves.csv").exists());
    assert!(!dir.path().join("o/qfd_scores.json").exists());
}

#[test]
fn missing_qfd_section_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let path = quick_config(dir.path());
    let text = fs::read_to_string(&path).unwrap();
    let start = text.find("[qfd]").unwrap();
    let end = text.find("[sweep]").unwrap();
    let trimmed = format!("{}{}", &text[..start], &text[end..]);
    fs::write(&path, trimmed).unwrap();
    let out = mgcap(dir.path(), &["--config", "quick.toml", "select"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("qfd"));
}

#[test]
fn out_of_range_alpha_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = mgcap(dir.path(), &["--out", "o", "size", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn sweep_writes_six_rows_deterministically() {
    let dir = TempDir::new().unwrap();
    quick_config(dir.path());
    let args = |out: &'static str| {
        [
            "--config",
            "quick.toml",
            "--out",
            out,
            "sweep",
            "--alphas",
            "0,0.2,0.5,0.8,0.9,1.0",
        ]
    };
    let first = mgcap(dir.path(), &args("a"));
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert!(mgcap(dir.path(), &args("b")).status.success());
    let csv = fs::read_to_string(dir.path().join("a/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert_eq!(lines.len(), 7);
    for name in ["sweep.csv", "sweep.json", "cost_trend.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn curve_families_are_non_increasing() {
    let dir = TempDir::new().unwrap();
    let out = mgcap(
        dir.path(),
        &[
            "--out",
            "c",
            "--years",
            "60",
            "curve",
            "--plg",
            "0.2,0.5,0.9",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for plg in ["0.2", "0.5", "0.9"] {
        let csv = fs::read_to_string(dir.path().join(format!("c/curve_plg_{plg}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("prm,lole,ci"));
        let lole: Vec<f64> = lines
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(lole.len(), 10);
        assert!(lole.windows(2).all(|w| w[1] <= w[0]), "plg {plg}: {lole:?}");
    }
}

#[test]
fn trace_inputs_replace_models() {
    let dir = TempDir::new().unwrap();
    let path = quick_config(dir.path());
    let mut trace = String::from("dt_hours=1\n");
    for h in 0..24 {
        trace.push_str(&format!(
            "{}\n",
            3.0 + 0.5 * (h as f64 / 24.0 * std::f64::consts::TAU).sin()
        ));
    }
    fs::write(dir.path().join("load.csv"), trace).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let start = text.find("[load]").unwrap();
    let end = text.find("[pv]").unwrap();
    let text = format!("{}{}", &text[..start], &text[end..])
        .replace("\n[inputs]\n", "\n[inputs]\nload = \"load.csv\"\n");
    fs::write(&path, &text).unwrap();
    let out = mgcap(
        dir.path(),
        &[
            "--config",
            "quick.toml",
            "--out",
            "t",
            "size",
            "--alpha",
            "0.5",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("t/solution.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0.5,"));

    // Both a model and a trace for the same signal is ambiguous.
    fs::write(
        &path,
        text.replace(
            "load = \"load.csv\"",
            "load = \"load.csv\"\npv = \"load.csv\"",
        ),
    )
    .unwrap();
    let out = mgcap(dir.path(), &["--config", "quick.toml", "size"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exactly one"));
}
