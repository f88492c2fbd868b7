//! End-to-end runs of the `commonbath` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_commonbath"))
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    bin().args(args).arg("--out-dir").arg(out_dir).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn scenario(input: &str, channel: &str, grid: &str, extra: &str, outputs: &str) -> String {
    format!(
        r#"{{
  "version": 1,
  "channel": {channel},
  "input_state": {input},
  "time_grid": {grid},
  {extra}
  "outputs": {outputs}
}}"#
    )
}

const ANTI: &str = r#"{"type": "coherent", "alpha1": [1.0, 0.0], "alpha2": [-1.0, 0.0]}"#;
const COLD: &str = r#"{"gamma": 1.0, "n0": 0.0}"#;

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn antisymmetric_input_stays_pure() {
    let dir = TempDir::new().unwrap();
    let s = scenario(ANTI, COLD, r#"{"t_max": 1.0, "n_points": 5}"#, "", r#"["purity", "dfs"]"#);
    let file = write_scenario(dir.path(), "anti.json", &s);
    let out = run(&["run", file.to_str().unwrap()], dir.path());
    assert_ok(&out);
    let (h, rows) = read_csv(&dir.path().join("anti_purity.csv"));
    assert_eq!(h, ["generator", "t", "purity"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((f(&r[col(&h, "purity")]) - 1.0).abs() < 1e-6);
    }
    let (h, rows) = read_csv(&dir.path().join("anti_dfs.csv"));
    for r in &rows {
        assert!(f(&r[col(&h, "trace_distance")]) < 1e-6);
    }
}

#[test]
fn single_point_grid_reports_input_values() {
    let dir = TempDir::new().unwrap();
    let input = r#"{"type": "entangled_coherent", "alpha": [0.7, 0.1], "phi": 0.5, "sign": "+"}"#;
    let s = scenario(
        input,
        r#"{"gamma": 2.0, "n0": 0.4}"#,
        r#"{"t_max": 1.0, "n_points": 1}"#,
        r#""generator": "both","#,
        r#"["purity", "fidelity", "dfs"]"#,
    );
    let file = write_scenario(dir.path(), "origin.json", &s);
    assert_ok(&run(&["run", file.to_str().unwrap()], dir.path()));
    for (name, column, expect) in [("purity", "purity", 1.0), ("fidelity", "fidelity", 1.0), ("dfs", "trace_distance", 0.0)] {
        let (h, rows) = read_csv(&dir.path().join(format!("origin_{name}.csv")));
        assert_eq!(rows.len(), 2, "{name}");
        for r in &rows {
            assert_eq!(f(&r[col(&h, "t")]), 0.0);
            assert!((f(&r[col(&h, column)]) - expect).abs() < 1e-9, "{name}: {}", r[col(&h, column)]);
        }
    }
}

#[test]
fn correlated_fidelity_beats_independent() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        ANTI,
        COLD,
        r#"{"t_max": 1.0, "n_points": 5}"#,
        r#""generator": "both","#,
        r#"["fidelity"]"#,
    );
    let file = write_scenario(dir.path(), "both.json", &s);
    assert_ok(&run(&["run", file.to_str().unwrap()], dir.path()));
    let (h, rows) = read_csv(&dir.path().join("both_fidelity.csv"));
    let (g, t, v) = (col(&h, "generator"), col(&h, "t"), col(&h, "fidelity"));
    let series = |name: &str| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r[g] == name).map(|r| (f(&r[t]), f(&r[v]))).collect()
    };
    let (corr, ind) = (series("correlated"), series("independent"));
    assert_eq!(corr.len(), 5);
    for (a, b) in corr.iter().zip(&ind).skip(1) {
        assert_eq!(a.0, b.0);
        assert!(a.1 >= b.1 && a.1 > 1.0 - 1e-6, "t = {}: {} vs {}", a.0, a.1, b.1);
    }
}

#[test]
fn config_errors_exit_2_with_position() {
    let dir = TempDir::new().unwrap();
    let s = scenario(ANTI, r#"{"gamma": 1.0, "nO": 0.0}"#, r#"{"t_max": 1.0, "n_points": 3}"#, "", r#"["purity"]"#);
    let file = write_scenario(dir.path(), "typo.json", &s);
    let out = run(&["run", file.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nO") && err.contains("line 3"), "{err}");

    let missing = run(&["run", dir.path().join("absent.json").to_str().unwrap()], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    let s = scenario(
        ANTI,
        COLD,
        r#"{"t_max": 1.0, "n_points": 3}"#,
        r#""sweep": {"field": "n0", "values": []},"#,
        r#"["fidelity"]"#,
    );
    let file = write_scenario(dir.path(), "empty_sweep.json", &s);
    let out = run(&["sweep", file.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn small_cutoff_exits_4_naming_amplitude() {
    let dir = TempDir::new().unwrap();
    let input = r#"{"type": "coherent", "alpha1": [2.5, 0.0], "alpha2": [0.0, 0.0]}"#;
    let s = scenario(input, COLD, r#"{"t_max": 1.0, "n_points": 3}"#, r#""cutoff": [8, 8],"#, r#"["purity"]"#);
    let file = write_scenario(dir.path(), "small.json", &s);
    let out = run(&["run", file.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("|alpha| = 2.5"));
}

#[test]
fn unstable_step_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = r#"{"type": "coherent", "alpha1": [1.0, 0.0], "alpha2": [1.0, 0.0]}"#;
    let s = scenario(
        input,
        r#"{"gamma": 1.0, "n0": 1.0}"#,
        r#"{"t_max": 2.0, "n_points": 3}"#,
        r#""integrator": {"dt": 0.25},"#,
        r#"["purity"]"#,
    );
    let file = write_scenario(dir.path(), "unstable.json", &s);
    let out = run(&["run", file.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("unstable_purity.csv").exists());
}

#[test]
fn sweep_over_n0_follows_antisymmetric_fidelity() {
    let dir = TempDir::new().unwrap();
    let input = r#"{"type": "coherent", "alpha1": [0.6, 0.0], "alpha2": [-0.6, 0.0]}"#;
    let s = scenario(
        input,
        COLD,
        r#"{"t_max": 0.8, "n_points": 3}"#,
        r#""sweep": {"field": "n0", "values": [0.0, 0.5, 1.0]},"#,
        r#"["fidelity"]"#,
    );
    let file = write_scenario(dir.path(), "n0.json", &s);
    assert_ok(&run(&["sweep", file.to_str().unwrap()], dir.path()));
    let (h, rows) = read_csv(&dir.path().join("n0_sweep.csv"));
    assert_eq!(h, ["swept_field", "swept_value", "generator", "t", "observable", "value"]);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r[0], "n0");
        let (n0, t, v) = (f(&r[1]), f(&r[3]), f(&r[5]));
        // Sum mode thermalizes at rate 2 Gamma; the difference mode is untouched.
        let noise = n0 * (1.0 - (-2.0 * t).exp());
        assert!((v - 1.0 / (1.0 + noise)).abs() < 1e-5, "n0 = {n0}, t = {t}: {v}");
    }
}

#[test]
fn sweep_over_alpha_gives_gaussian_fidelity_law() {
    let dir = TempDir::new().unwrap();
    let input = r#"{"type": "coherent", "alpha1": [1.0, 0.0], "alpha2": [1.0, 0.0]}"#;
    let s = scenario(
        input,
        COLD,
        r#"{"t_max": 0.5, "n_points": 2}"#,
        r#""sweep": {"field": "alpha", "values": [0.3, 0.6, 0.9, 1.2]},"#,
        r#"["fidelity"]"#,
    );
    let file = write_scenario(dir.path(), "alpha.json", &s);
    assert_ok(&run(&["sweep", file.to_str().unwrap()], dir.path()));
    let (_, rows) = read_csv(&dir.path().join("alpha_sweep.csv"));
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| f(&r[3]) == 0.5)
        .map(|r| (f(&r[1]).powi(2), f(&r[5]).ln()))
        .collect();
    assert_eq!(pts.len(), 4);
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    // |a, a> puts amplitude sqrt(2) a in the sum mode, which decays by e^{-Gamma t}.
    let expect = -2.0 * (1.0 - (-0.5f64).exp()).powi(2);
    assert!((slope / expect - 1.0).abs() < 0.01, "slope {slope} vs {expect}");
}

#[test]
fn qgrid_vacuum_and_single_point() {
    let dir = TempDir::new().unwrap();
    let vacuum = r#"{"type": "coherent", "alpha1": [0.0, 0.0], "alpha2": [0.0, 0.0]}"#;
    let s = scenario(vacuum, r#"{"gamma": 1.0, "n0": 0.3}"#, r#"{"t_max": 0.5, "n_points": 2}"#, "", r#"["purity"]"#);
    let file = write_scenario(dir.path(), "vac.json", &s);
    assert_ok(&run(&["qgrid", file.to_str().unwrap(), "--xmin", "-1", "--xmax", "1", "--step", "1", "--time", "0"], dir.path()));
    let (h, rows) = read_csv(&dir.path().join("vac_qgrid.csv"));
    assert_eq!(h, ["re_delta1", "im_delta1", "re_delta2", "im_delta2", "q_analytic", "q_numeric", "abs_diff"]);
    assert_eq!(rows.len(), 81);
    let peak = rows.iter().max_by(|a, b| f(&a[4]).total_cmp(&f(&b[4]))).unwrap();
    assert!(peak[..4].iter().all(|x| f(x) == 0.0));
    let inv_pi2 = 1.0 / std::f64::consts::PI.powi(2);
    assert!((f(&peak[4]) - inv_pi2).abs() < 1e-15);
    // 17 significant digits, scientific notation.
    assert_eq!(peak[4].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    for r in &rows {
        assert_eq!(f(&r[6]), (f(&r[4]) - f(&r[5])).abs());
        assert!(f(&r[6]) < 1e-6);
    }

    assert_ok(&run(&["qgrid", file.to_str().unwrap(), "--xmin", "0", "--xmax", "0", "--step", "0.5"], dir.path()));
    let (_, rows) = read_csv(&dir.path().join("vac_qgrid.csv"));
    assert_eq!(rows.len(), 1);

    let bad = run(&["qgrid", file.to_str().unwrap(), "--xmin", "1", "--xmax", "0", "--step", "0.5"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn warm_qgrid_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let input = r#"{"type": "superposition", "terms": [
        {"coeff": [1.0, 0.0], "alpha1": [0.5, 0.0], "alpha2": [0.0, 0.5]},
        {"coeff": [0.0, 1.0], "alpha1": [-0.5, 0.0], "alpha2": [0.0, -0.5]}]}"#;
    let s = scenario(input, r#"{"gamma": 1.0, "n0": 0.5}"#, r#"{"t_max": 0.6, "n_points": 2}"#, "", r#"["purity"]"#);
    let file = write_scenario(dir.path(), "warm.json", &s);
    assert_ok(&run(&["qgrid", file.to_str().unwrap(), "--xmin", "-1", "--xmax", "1", "--step", "1"], dir.path()));
    let (_, rows) = read_csv(&dir.path().join("warm_qgrid.csv"));
    let worst = rows.iter().map(|r| f(&r[6])).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn outputs_identical_across_thread_counts_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = r#"{"type": "entangled_coherent", "alpha": [0.6, 0.2], "phi": 1.1, "sign": "-"}"#;
    let s = scenario(
        input,
        r#"{"gamma": 1.0, "n0": 0.2}"#,
        r#"{"t_max": 0.6, "n_points": 3}"#,
        r#""generator": "both", "phase_grid": {"min": -1.0, "max": 1.0, "step": 1.0},"#,
        r#"["purity", "fidelity", "chi_grid", "q_grid", "dfs"]"#,
    );
    let file = write_scenario(dir.path(), "det.json", &s);
    let (one, four) = (dir.path().join("t1"), dir.path().join("t4"));
    assert_ok(&run(&["--threads", "1", "run", file.to_str().unwrap()], &one));
    assert_ok(&run(&["--threads", "4", "run", file.to_str().unwrap()], &four));
    for name in ["purity", "fidelity", "chi_grid", "q_grid", "dfs"] {
        let a = std::fs::read(one.join(format!("det_{name}.csv"))).unwrap();
        let b = std::fs::read(four.join(format!("det_{name}.csv"))).unwrap();
        assert_eq!(a, b, "{name}");
    }

    let (h, rows) = read_csv(&one.join("det_chi_grid.csv"));
    assert_eq!(rows.len(), 2 * 3 * 81);
    for r in &rows {
        let num = (f(&r[col(&h, "re_chi_numeric")]), f(&r[col(&h, "im_chi_numeric")]));
        let ana = (f(&r[col(&h, "re_chi_analytic")]), f(&r[col(&h, "im_chi_analytic")]));
        let diff = (num.0 - ana.0).hypot(num.1 - ana.1);
        assert_eq!(f(&r[col(&h, "abs_diff")]), diff);
        if r[0] == "correlated" {
            assert!(diff < 1e-5);
        }
    }
    let (h, rows) = read_csv(&one.join("det_q_grid.csv"));
    for r in &rows {
        let d = (f(&r[col(&h, "q_analytic")]) - f(&r[col(&h, "q_numeric")])).abs();
        assert_eq!(f(&r[col(&h, "abs_diff")]), d);
    }
}

#[test]
fn verify_subset_and_injected_fault() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("report.json");
    let out = run(&["verify", "--criteria", "1", "--json", json.to_str().unwrap()], dir.path());
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS criterion 1"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["criteria"][0]["id"], 1);

    let out = run(
        &["verify", "--criteria", "1", "--inject-fault", "gamma-sign", "--json", json.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL criterion 1"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let deviation = report["criteria"][0]["checks"][0]["value"].as_f64().unwrap();
    assert!(deviation > 1e-6, "{deviation}");

    let out = run(&["verify", "--criteria", "9"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bundled_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            commonbath_cli::scenario::Scenario::load(&path).unwrap();
            n += 1;
        }
    }
    assert!(n >= 4);
}
