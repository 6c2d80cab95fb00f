use std::fs;
use std::path::Path;
use std::process::Command;

use visco3d::energy::LABELS;
use visco3d::harness::{generate_initial_data, run, simulate, theorem_norm, InitialData, Mode, RunConfig};
use visco3d::model::{structure_residuals, State};

fn small(dir: &Path, mode: Mode) -> RunConfig {
    RunConfig {
        n: 8,
        t_end: 0.05,
        dt: 5e-3,
        adaptive: false,
        snapshot_every: 1,
        output_dir: dir.to_path_buf(),
        mode,
        identity_samples: 2,
        ..RunConfig::default()
    }
}

const SUMMARY_KEYS: [&str; 37] = [
    "mode",
    "seed",
    "n",
    "length",
    "mu",
    "c",
    "gamma0",
    "epsilon",
    "band",
    "t_end",
    "t_final",
    "steps",
    "snapshots",
    "rejected",
    "rejection_time",
    "rejection_reason",
    "theorem_norm",
    "E",
    "E_w",
    "E_s",
    "E_a",
    "E_total",
    "E_total_initial",
    "K",
    "min_rho_tilde",
    "min_det_f",
    "max_divergence_ratio",
    "max_pressure_iterations",
    "rho_mean_drift",
    "max_dissipation_relative",
    "structure_residuals",
    "decay_exponents",
    "interpolation",
    "strong_dissipation",
    "last_decade_fraction",
    "last_log_decade_fraction",
    "g_gap",
];

#[test]
fn config_file_overrides_defaults() {
    let cfg = RunConfig::parse("# small run\nn = 16\n\nepsilon = 0.005\ninitial = flow-map  # trailing\n").unwrap();
    assert_eq!(cfg.n, 16);
    assert_eq!(cfg.epsilon, 0.005);
    assert_eq!(cfg.initial, InitialData::FlowMap);
    assert_eq!(cfg.t_end, RunConfig::default().t_end);
    assert!(RunConfig::parse("n = sixteen").is_err());
    assert!(RunConfig::parse("mode = explode").is_err());
}

#[test]
fn zero_epsilon_stays_at_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { epsilon: 0.0, ..small(dir.path(), Mode::Simulate) };
    let sim = simulate(&cfg).unwrap();
    let grid = cfg.grid().unwrap();
    assert_eq!(sim.initial, State::equilibrium(&grid));
    assert_eq!(sim.state.u.max_abs(), 0.0);
    assert_eq!(sim.state.f_minus_identity().max_abs(), 0.0);
    assert_eq!(sim.summary.e_total, 0.0);
}

#[test]
fn initial_data_is_seeded_and_sized() {
    for initial in [InitialData::Generic, InitialData::FlowMap] {
        let cfg = RunConfig { n: 16, initial, ..RunConfig::default() };
        let grid = cfg.grid().unwrap();
        let a = generate_initial_data(&cfg, &grid).unwrap();
        let b = generate_initial_data(&cfg, &grid).unwrap();
        assert_eq!(a, b);
        let other = generate_initial_data(&RunConfig { seed: 2, ..cfg.clone() }, &grid).unwrap();
        assert_ne!(a, other);
        assert!((theorem_norm(&grid, &a) - cfg.epsilon).abs() < 1e-12, "{initial:?}");
        assert!(grid.div(&a.u).max_abs() < 1e-12 * a.u.max_abs());
    }
}

#[test]
fn generic_data_breaks_the_structures_flow_map_data_keeps_them() {
    let base = RunConfig { n: 16, ..RunConfig::default() };
    let grid = base.grid().unwrap();
    let generic = structure_residuals(&grid, &generate_initial_data(&base, &grid).unwrap());
    let floor = 1e-3 * base.epsilon;
    assert!(generic.r_state > floor && generic.r_div > floor && generic.r_curl > floor, "{generic:?}");
    let flow = RunConfig { initial: InitialData::FlowMap, ..base };
    let kept = structure_residuals(&grid, &generate_initial_data(&flow, &grid).unwrap());
    assert!(kept.r_state < 1e-12, "{kept:?}");
}

fn check_csv(text: &str) {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut want = vec!["t"];
    want.extend(LABELS);
    want.extend(["E", "E_w", "E_s", "E_a", "E_total", "dissipation_residual"]);
    assert_eq!(header, want);
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len());
        for c in cells {
            assert!(c.parse::<f64>().is_ok(), "{c}");
            if c != "NaN" {
                let mantissa = c.trim_start_matches('-').split('e').next().unwrap();
                assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{c}");
            }
        }
        rows += 1;
    }
    assert!(rows >= 3);
}

#[test]
fn simulate_writes_csv_and_summary_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), Mode::Simulate);
    let report = run(&cfg).unwrap();
    assert!(report.success);
    let csv = fs::read_to_string(dir.path().join("energies.csv")).unwrap();
    check_csv(&csv);
    let json = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    let mut want = SUMMARY_KEYS.to_vec();
    want.sort_unstable();
    assert_eq!(keys, want);
    assert_eq!(v["mode"], "simulate");
    assert_eq!(v["steps"], 10);

    let again = tempfile::tempdir().unwrap();
    run(&small(again.path(), Mode::Simulate)).unwrap();
    assert_eq!(fs::read_to_string(again.path().join("energies.csv")).unwrap(), csv);
    assert_eq!(fs::read_to_string(again.path().join("summary.json")).unwrap(), json);
}

#[test]
fn identities_mode_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&small(dir.path(), Mode::Identities)).unwrap();
    assert!(report.success, "{}", report.text);
    assert!(report.summary.is_none());
    let csv = fs::read_to_string(dir.path().join("identities.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "name,grid,samples,residual,threshold,pass");
    assert_eq!(lines.count(), report.identities.len());
}

#[test]
fn dissipation_and_decay_modes_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    run(&small(dir.path(), Mode::Dissipation)).unwrap();
    let csv = fs::read_to_string(dir.path().join("dissipation.csv")).unwrap();
    assert!(csv.starts_with("t,residual,relative,residual_quadratic,relative_quadratic\n"));
    assert_eq!(csv.lines().count(), 12);

    let dir = tempfile::tempdir().unwrap();
    let report = run(&small(dir.path(), Mode::DecayReport)).unwrap();
    assert!(report.text.contains("decay exponents"));
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn command_line_runs_and_rejects_bad_input() {
    let exe = env!("CARGO_BIN_EXE_visco3d");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "t_end = 0.02\nadaptive = false\ndt = 0.01\nsnapshot_every = 1\n").unwrap();
    let out = dir.path().join("out");
    let status = Command::new(exe)
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--n", "8", "--eps", "0.01", "--tend", "0.03", "--out"])
        .arg(&out)
        .env("RUST_LOG", "warn")
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["n"], 8);
    assert_eq!(v["t_final"], 0.03);

    let bad = Command::new(exe).args(["simulate", "--bogus"]).output().unwrap();
    assert!(!bad.status.success());
    let invalid = Command::new(exe).args(["simulate", "--n", "7", "--out"]).arg(&out).output().unwrap();
    assert!(!invalid.status.success());
}
