use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use stratsim::cli::config::ExperimentConfig;
use stratsim::cli::{main_with_args, EXIT_OK, EXIT_USAGE};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> i32 {
    let mut argv = vec!["stratsim".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--out".to_string(), out.display().to_string()]);
    main_with_args(argv)
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shipped_configs_parse_and_build() {
    let mut seen = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "toml") {
            let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap();
            cfg.build_instance().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 8);
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["stable-set", "--scenario", "nope"], dir.path()), EXIT_USAGE);
}

#[test]
fn empty_seeds_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[instance]\nsource = \"scenario\"\nname = \"s1\"\n[engine]\nseeds = []\n").unwrap();
    let code = run(&["simulate", "--config", &cfg.display().to_string()], &dir.path().join("out"));
    assert_ne!(code, EXIT_OK);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(ExperimentConfig::from_toml_str("[instance]\nsource = \"scenario\"\nname = \"s1\"\nbogus = 1\n").is_err());
}

#[test]
fn trust_report_carries_the_gap_and_rehashes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["trust", "--config", &config("s1_strategic.toml")], dir.path()), EXIT_OK);
    let report = read_json(&dir.path().join("trust_report.json"));
    let gap = report["result"]["audit"]["strategization_gap"].as_f64().unwrap();
    assert!((gap - 0.0875).abs() <= 1e-12, "{gap}");
    assert_eq!(report["result"]["trustworthy"], false);
    let embedded: ExperimentConfig = serde_json::from_value(report["config"].clone()).unwrap();
    assert_eq!(embedded.hash(), report["meta"]["config_hash"].as_str().unwrap());
    assert!(dir.path().join("run_meta.json").exists());
}

#[test]
fn reproduce_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["reproduce"], dir.path()), EXIT_OK);
    let report = read_json(&dir.path().join("reproduce_report.json"));
    let props = report["result"]["reports"].as_array().or_else(|| report["result"].as_array()).unwrap();
    assert_eq!(props.len(), 5);
    let table = fs::read_to_string(dir.path().join("reproduce_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
    assert!(table.lines().skip(1).all(|l| l.contains("PASS") || l.contains("true")), "{table}");
}

#[test]
fn simulate_twenty_seeds_converge() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["simulate", "--config", &config("s1_simulate.toml")], dir.path()), EXIT_OK);
    let files = fs::read_dir(dir.path().join("trajectories")).unwrap().count();
    assert_eq!(files, 20);
    let mut rdr = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    let col = rdr.headers().unwrap().iter().position(|h| h == "convergence_step").unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 20);
    for r in &rows {
        assert!(r[col].parse::<usize>().is_ok(), "seed {} did not converge", &r[0]);
    }
    let first = fs::read(dir.path().join("summary.csv")).unwrap();
    let again = tempfile::tempdir().unwrap();
    assert_eq!(run(&["simulate", "--config", &config("s1_simulate.toml")], again.path()), EXIT_OK);
    assert_eq!(first, fs::read(again.path().join("summary.csv")).unwrap());

    let charts = tempfile::tempdir().unwrap();
    let argv = ["stratsim", "charts", "--input", &dir.path().display().to_string(), "--out", &charts.path().display().to_string()];
    assert_eq!(main_with_args(argv), EXIT_OK);
    let svg = fs::read_to_string(charts.path().join("charts/belief_trajectories.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn charts_need_trajectories() {
    let empty = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let argv = ["stratsim", "charts", "--input", &empty.path().display().to_string(), "--out", &out.path().display().to_string()];
    assert_ne!(main_with_args(argv), EXIT_OK);
}

#[test]
fn prop3_report_charts_two_bars() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["reproduce", "--props", "3"], dir.path()), EXIT_OK);
    let out = tempfile::tempdir().unwrap();
    let input = dir.path().join("reproduce_report.json");
    let argv = ["stratsim", "charts", "--input", &input.display().to_string(), "--out", &out.path().display().to_string()];
    assert_eq!(main_with_args(argv), EXIT_OK);
    let data = fs::read_to_string(out.path().join("charts/prop_3_payoffs.csv")).unwrap();
    assert_eq!(data.lines().count(), 3, "{data}");
    assert!(out.path().join("charts/prop_3_payoffs.svg").exists());
}

#[test]
fn counterfactual_needs_its_section() {
    let dir = tempfile::tempdir().unwrap();
    assert_ne!(run(&["counterfactual", "--scenario", "s1"], dir.path()), EXIT_OK);
}
