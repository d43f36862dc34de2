use std::fs;
use std::path::Path;

use serde_json::Value;
use vrsim::scenarios::{load_config, run_scenario, Scenario};

fn config(scenario: Scenario, out: &Path, extra: &[&str]) -> vrsim::scenarios::ScenarioConfig {
    let mut overrides = vec![format!("output_dir=\"{}\"", out.display())];
    overrides.extend(extra.iter().map(|s| s.to_string()));
    load_config(scenario, None, &overrides).unwrap()
}

fn read_summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn levels_two_photon_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(Scenario::LevelsTwoPhoton, tmp.path(), &["sweep.points=31"]);
    let out = run_scenario(&c).unwrap();
    assert!(out.passed(), "{:?}", out.summary.checks);
    assert_eq!(out.dir, tmp.path().join("levels_two_photon"));

    let gap = out.result("gap").unwrap().as_f64().unwrap();
    assert!((gap - 6.8e-3).abs() < 0.1 * 6.8e-3);

    let csv = fs::read_to_string(out.dir.join("levels.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "omega_q,E0,E1,E2,E3,E4,E5,E6,E7");
    assert_eq!(lines.count(), 31);
    assert!(out.dir.join("levels_inset.csv").exists());
    assert!(out.dir.join("splitting.json").exists());
    let summary = read_summary(&out.dir);
    assert_eq!(summary["scenario"], "levels_two_photon");
    assert_eq!(summary["passed"], true);
}

#[test]
fn identical_config_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        Scenario::DynamicsTwoPhoton,
        tmp.path(),
        &["time.samples=41", "n_states=16", "time.omega_eff_t_end=3.2"],
    );
    let snapshot = |dir: &Path| {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let first = run_scenario(&c).unwrap();
    let a = snapshot(&first.dir);
    let second = run_scenario(&c).unwrap();
    let b = snapshot(&second.dir);
    assert_eq!(a.len(), 5);
    assert_eq!(a, b);

    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(&"dynamics_ideal.csv"));
    assert!(names.contains(&"dynamics_cavity_loss.csv"));
    let csv = String::from_utf8(a.iter().find(|(n, _)| n == "dynamics_ideal.csv").unwrap().1.clone()).unwrap();
    assert!(csv.starts_with("t,omega_eff_t,exp_atom,exp_photon,exp_phonon,g2_qp,trace,purity\n"));
}

#[test]
fn failed_checks_still_write_summary() {
    let tmp = tempfile::tempdir().unwrap();
    // κ = λ = 0.02 moves the gap far from the reference value
    let c = config(
        Scenario::LevelsTwoPhoton,
        tmp.path(),
        &["sweep.points=11", "model.kappa=0.02", "model.lambda=0.02"],
    );
    let out = run_scenario(&c).unwrap();
    assert!(!out.passed());
    assert!(!out.check("gap").unwrap().passed);
    let summary = read_summary(&out.dir);
    assert_eq!(summary["passed"], false);
    assert!(summary["checks"].as_array().unwrap().len() >= 3);
}

#[test]
fn converge_scenario_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_scenario(&config(Scenario::Converge, tmp.path(), &[])).unwrap();
    assert!(out.passed());
    let rel = out.result("relative_change").unwrap().as_f64().unwrap();
    assert!(rel < 0.01);
    let csv = fs::read_to_string(out.dir.join("converge.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn splitting_vs_coupling_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        Scenario::SplittingVsCoupling,
        tmp.path(),
        &["sweep.start=0.02", "sweep.stop=0.08", "sweep.points=4"],
    );
    let out = run_scenario(&c).unwrap();
    assert!(out.passed(), "{:?}", out.summary.checks);
    let csv = fs::read_to_string(out.dir.join("splitting_vs_coupling.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,omega_q_min,numeric_gap,perturbative_gap,rel_diff"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    // gap grows roughly quadratically with the coupling
    assert!(rows.windows(2).all(|w| w[1][2] > w[0][2]));
    assert!(rows.iter().all(|r| r[4] < 0.1));
}

#[test]
fn driven_scenario_runs_single_case() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        Scenario::DrivenDynamics,
        tmp.path(),
        &[
            "n_states=20",
            "time.samples=41",
            "time.omega_eff_t_end=1.0",
            r#"cases=[{"name": "weak", "amplitude": 0.5}]"#,
        ],
    );
    let out = run_scenario(&c).unwrap();
    assert!(out.dir.join("dynamics_weak.csv").exists());
    assert!(out.check("weak.max_exp_photon").unwrap().passed);
    let sigma = out.result("sigma_pulse").unwrap().as_f64().unwrap();
    let omega_eff = out.result("omega_eff").unwrap().as_f64().unwrap();
    assert!((sigma * 10.0 * omega_eff - 1.0).abs() < 1e-9);
}

#[test]
fn invalid_scenario_requirements() {
    let tmp = tempfile::tempdir().unwrap();
    let out = format!("output_dir=\"{}\"", tmp.path().display());
    for (s, o) in [
        (Scenario::DrivenDynamics, "drive=null"),
        (Scenario::DynamicsTwoPhoton, "time=null"),
        (Scenario::LevelsTwoPhoton, "sweep=null"),
        (Scenario::LevelsOnePhoton, "model.coupling_kind=\"two_photon\""),
        (Scenario::DynamicsTwoPhoton, r#"cases=[{"name": "a/b"}]"#),
    ] {
        assert!(load_config(s, None, &[out.clone(), o.to_string()]).is_err(), "{o}");
    }
}
