//! Run configuration, initial data, orchestration and output files.
//!
//! A run writes into `output_dir`:
//!
//! - `energies.csv`: one row per snapshot. Columns are `t`, the
//!   [`LABELS`] norms, `E,E_w,E_s,E_a,E_total`, and
//!   `dissipation_residual` (`dE/dt + mu ||grad u||^2` of the physical energy).
//!   Values carry 17 significant digits.
//! - `summary.json`: the fields of [`RunSummary`], always the same keys.
//! - `energies.gp`: a gnuplot script plotting the energies from the CSV.
//!
//! The `identities` mode writes `identities.csv` instead, and `dissipation`
//! adds `dissipation.csv`. Outputs depend only on the configuration.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{
    self, check_interpolation, dissipation_check, fit_decay_rate, DissipationPoint, EnergyHistory, InterpolationReport,
    Omega, LABELS,
};
use crate::error::{Error, Result};
use crate::identities::{identity_table, IdentityRow};
use crate::integrator::{cfl_dt, step_dt, StepperConfig};
use crate::model::{effective_tensor, flow_map_state, structure_residuals, ModelParams, State, StructureResiduals};
use crate::pressure::PressureConfig;
use crate::spectral::{random, Grid, TensorField33};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Simulate,
    Identities,
    Dissipation,
    DecayReport,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Self::Simulate),
            "identities" => Ok(Self::Identities),
            "dissipation" => Ok(Self::Dissipation),
            "decay-report" => Ok(Self::DecayReport),
            _ => Err(Error::InvalidConfig(format!("unknown mode `{s}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Simulate => "simulate",
            Self::Identities => "identities",
            Self::Dissipation => "dissipation",
            Self::DecayReport => "decay-report",
        })
    }
}

/// How the initial perturbation is built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    /// Independent random `rho`, `u`, `F - I`; violates the classical structures.
    #[default]
    Generic,
    /// `F`, `rho~` from a random label map (see [`flow_map_state`]), random `u`.
    FlowMap,
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Self::Generic),
            "flow-map" => Ok(Self::FlowMap),
            _ => Err(Error::InvalidConfig(format!("unknown initial data `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub length: f64,
    pub mu: f64,
    pub c: f64,
    pub gamma0: f64,
    /// Size of the initial data in the norm
    /// `|| |D|^-1 rho ||_H3 + || |D|^-1 u ||_H3 + || |D|^-1 (F - I) ||_H3`.
    pub epsilon: f64,
    pub t_end: f64,
    /// Step size, or its upper bound when `adaptive`.
    pub dt: f64,
    pub cfl: f64,
    pub adaptive: bool,
    /// Steps between snapshots.
    pub snapshot_every: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub mode: Mode,
    /// Per-axis band limit of the random initial data; 0 picks a third of Nyquist.
    pub band: i64,
    pub initial: InitialData,
    /// Evolve `G` with its own equation instead of recomputing it from the state.
    pub co_evolve_g: bool,
    /// Random samples per identity check.
    pub identity_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 32,
            length: 2.0 * std::f64::consts::PI,
            mu: 1.0,
            c: 1.0,
            gamma0: 0.25,
            epsilon: 1e-2,
            t_end: 50.0,
            dt: 1e-2,
            cfl: 0.4,
            adaptive: true,
            snapshot_every: 10,
            seed: 1,
            output_dir: PathBuf::from("out"),
            mode: Mode::Simulate,
            band: 0,
            initial: InitialData::Generic,
            co_evolve_g: false,
            identity_samples: 20,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Set one field from its textual value; keys are the field names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse(key, value)?,
            "length" => self.length = parse(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "gamma0" => self.gamma0 = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "t_end" => self.t_end = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "cfl" => self.cfl = parse(key, value)?,
            "adaptive" => self.adaptive = parse(key, value)?,
            "snapshot_every" => self.snapshot_every = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "mode" => self.mode = value.parse()?,
            "band" => self.band = parse(key, value)?,
            "initial" => self.initial = value.parse()?,
            "co_evolve_g" => self.co_evolve_g = parse(key, value)?,
            "identity_samples" => self.identity_samples = parse(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Defaults overridden by `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return bad(format!("n must be even and at least 8, got {}", self.n));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length must be positive, got {}", self.length));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 0.5) {
            return bad(format!("gamma0 must lie in (0, 1/2), got {}", self.gamma0));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be non-negative, got {}", self.epsilon));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be at least 1".into());
        }
        if self.band < 0 {
            return bad(format!("band must be non-negative, got {}", self.band));
        }
        self.params().validate()?;
        self.stepper().validate()
    }

    pub fn params(&self) -> ModelParams {
        ModelParams { mu: self.mu, c: self.c, nonlinear_enabled: true }
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            dt: self.dt,
            cfl: self.cfl,
            adaptive: self.adaptive,
            co_evolve_g: self.co_evolve_g,
            pressure: PressureConfig::default(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.length)
    }

    /// The band limit actually used for `grid`.
    pub fn band_for(&self, grid: &Grid) -> i64 {
        if self.band == 0 {
            random::third_band(grid)
        } else {
            self.band.min(grid.max_mode())
        }
    }
}

/// `|| |D|^-1 rho ||_H3 + || |D|^-1 u ||_H3 + || |D|^-1 (F - I) ||_H3`.
pub fn theorem_norm(grid: &Grid, state: &State) -> f64 {
    let norm = |comps: Vec<_>| comps.iter().map(|c| energy::sobolev_sq_hat(grid, c, -1.0, 3.0)).sum::<f64>().sqrt();
    let h = state.f_minus_identity();
    norm(vec![grid.forward(&state.rho())])
        + norm(state.u.components().iter().map(|c| grid.forward(c)).collect())
        + norm((0..9).map(|c| grid.forward(&h[c])).collect())
}

fn generic_data(grid: &Grid, rng: &mut ChaCha8Rng, band: i64, epsilon: f64) -> State {
    let r = random::random_scalar(grid, rng, band);
    let u = random::random_div_free(grid, rng, band);
    let h = random::random_tensor(grid, rng, band);
    let unit = State { rho_tilde: r.map(|v| 1.0 + v), u, f: TensorField33::identity(grid).add(&h), t: 0.0 };
    // every term of the norm is linear in the perturbation
    let s = epsilon / theorem_norm(grid, &unit);
    State {
        rho_tilde: r.map(|v| 1.0 + s * v),
        u: unit.u.scale(s),
        f: TensorField33::identity(grid).add(&h.scale(s)),
        t: 0.0,
    }
}

fn flow_map_data(grid: &Grid, rng: &mut ChaCha8Rng, band: i64, epsilon: f64) -> Result<State> {
    let psi = random::random_vector(grid, rng, band);
    let u = random::random_div_free(grid, rng, band);
    let build = |a: f64| -> Result<State> {
        let mut st = flow_map_state(grid, &psi.scale(a))?;
        st.u = u.scale(a);
        Ok(st)
    };
    let measure = |a: f64| build(a).map(|st| theorem_norm(grid, &st) - epsilon);
    // the norm is nonlinear in the amplitude; the secant method starting
    // from the linear estimate converges in a few steps
    let mut a0 = 0.0;
    let mut f0 = -epsilon;
    let mut a1 = epsilon / (measure(1e-6)? + epsilon) * 1e-6;
    let mut f1 = measure(a1)?;
    for _ in 0..50 {
        if f1.abs() <= 1e-14 * epsilon || f1 == f0 {
            break;
        }
        let a2 = a1 - f1 * (a1 - a0) / (f1 - f0);
        (a0, f0) = (a1, f1);
        a1 = a2;
        f1 = measure(a1)?;
    }
    build(a1)
}

/// Seeded initial data of size `cfg.epsilon` in [`theorem_norm`]; `epsilon = 0`
/// gives the equilibrium.
pub fn generate_initial_data(cfg: &RunConfig, grid: &Grid) -> Result<State> {
    if cfg.epsilon == 0.0 {
        return Ok(State::equilibrium(grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let band = cfg.band_for(grid);
    let state = match cfg.initial {
        InitialData::Generic => generic_data(grid, &mut rng, band, cfg.epsilon),
        InitialData::FlowMap => flow_map_data(grid, &mut rng, band, cfg.epsilon)?,
    };
    let r = structure_residuals(grid, &state);
    log::info!(
        "initial data: norm {:e}, r_state {:e}, r_div {:e}, r_curl {:e}",
        theorem_norm(grid, &state),
        r.r_state,
        r.r_div,
        r.r_curl
    );
    Ok(state)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DecayExponents {
    /// Slope of `log ||grad u||^2` against `log(1+t)`.
    pub dissipation: Option<f64>,
    pub grad_u_h1_sq: Option<f64>,
    pub grad2_u_h1_sq: Option<f64>,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub seed: u64,
    pub n: usize,
    pub length: f64,
    pub mu: f64,
    pub c: f64,
    pub gamma0: f64,
    pub epsilon: f64,
    pub band: i64,
    pub t_end: f64,
    pub t_final: f64,
    pub steps: usize,
    pub snapshots: usize,
    pub rejected: bool,
    pub rejection_time: Option<f64>,
    pub rejection_reason: Option<String>,
    pub theorem_norm: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_w")]
    pub e_w: f64,
    #[serde(rename = "E_s")]
    pub e_s: f64,
    #[serde(rename = "E_a")]
    pub e_a: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    #[serde(rename = "E_total_initial")]
    pub e_total_initial: f64,
    /// `max_t E_total(t) / E_total(0)`.
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub min_rho_tilde: f64,
    pub min_det_f: f64,
    pub max_divergence_ratio: f64,
    pub max_pressure_iterations: usize,
    pub rho_mean_drift: f64,
    pub max_dissipation_relative: Option<f64>,
    pub structure_residuals: StructureResiduals,
    pub decay_exponents: DecayExponents,
    pub interpolation: InterpolationReport,
    /// `int_0^T (1+t)^2 ||grad^2 u||_H1^2 dt`.
    pub strong_dissipation: f64,
    /// Share of `strong_dissipation` collected over the final 10 time units.
    pub last_decade_fraction: Option<f64>,
    /// Share collected over `[T/10, T]`.
    pub last_log_decade_fraction: Option<f64>,
    /// `||G_evolved - (rho~ F F^T - I)||_L2` at the end, when `G` is co-evolved.
    pub g_gap: Option<f64>,
}

/// In-memory result of a simulation.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub initial: State,
    pub state: State,
    /// Co-evolved effective tensor, if requested.
    pub g: Option<TensorField33>,
    pub history: EnergyHistory,
    /// Empty when fewer than three snapshots were taken.
    pub dissipation: Vec<DissipationPoint>,
    pub summary: RunSummary,
}

/// Accumulated value of `S` at time `t`, interpolating linearly between records.
fn accumulated_at(history: &EnergyHistory, t: f64) -> f64 {
    let r = &history.records;
    match r.iter().position(|rec| rec.t >= t) {
        None => r.last().map_or(0.0, |rec| rec.strong_dissipation),
        Some(0) => r[0].strong_dissipation,
        Some(i) => {
            let (a, b) = (&r[i - 1], &r[i]);
            let w = (t - a.t) / (b.t - a.t);
            a.strong_dissipation + w * (b.strong_dissipation - a.strong_dissipation)
        }
    }
}

fn tail_fraction(history: &EnergyHistory, from: f64) -> Option<f64> {
    let total = history.last()?.strong_dissipation;
    (total > 0.0).then(|| (total - accumulated_at(history, from)) / total)
}

fn fit_series(history: &EnergyHistory, value: impl Fn(&energy::EnergySnapshot) -> f64) -> Option<f64> {
    let series: Vec<(f64, f64)> = history.snapshots.iter().map(|s| (s.t, value(s))).collect();
    fit_decay_rate(&series).ok()
}

struct Monitor {
    min_rho: f64,
    min_det: f64,
    max_div: f64,
}

impl Monitor {
    fn observe(&mut self, grid: &Grid, st: &State) {
        self.min_rho = self.min_rho.min(st.rho_tilde.min());
        self.min_det = self.min_det.min(st.min_det_f());
        self.max_div = self.max_div.max(st.divergence_ratio(grid));
    }
}

/// Integrate the initial data of `cfg` to `cfg.t_end`, recording snapshots.
/// A rejected step ends the run early and is reported in the summary, not as
/// an error.
pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let params = cfg.params();
    let scfg = cfg.stepper();
    let initial = generate_initial_data(cfg, &grid)?;
    let structure = structure_residuals(&grid, &initial);
    let norm0 = theorem_norm(&grid, &initial);

    let mut st = initial.clone();
    let mut g = cfg.co_evolve_g.then(|| effective_tensor(&st));
    let mut history = EnergyHistory::new();
    let mut monitor = Monitor { min_rho: f64::INFINITY, min_det: f64::INFINITY, max_div: 0.0 };
    let snap = |st: &State, g: &Option<TensorField33>| {
        let direct;
        let g = match g {
            Some(g) => g,
            None => {
                direct = effective_tensor(st);
                &direct
            }
        };
        energy::snapshot(&grid, st, g, &params, cfg.gamma0)
    };
    history.push(snap(&st, &g)?)?;
    monitor.observe(&grid, &st);

    let mut steps = 0;
    let mut max_iters = 0;
    let mut rejection = None;
    let tiny = 1e-12 * cfg.t_end;
    while st.t < cfg.t_end - tiny {
        let h = if cfg.adaptive { cfl_dt(&grid, &st, &params, &scfg) } else { cfg.dt };
        let h = h.min(cfg.t_end - st.t);
        let out = match step_dt(&grid, &st, g.as_ref(), &params, h, &scfg.pressure) {
            Ok(out) => out,
            Err(err) => {
                log::warn!("{err}");
                rejection = Some((st.t, err.to_string()));
                break;
            }
        };
        steps += 1;
        max_iters = max_iters.max(out.pressure_iterations);
        st = out.state;
        g = out.g;
        let last = st.t >= cfg.t_end - tiny;
        if last {
            st.t = cfg.t_end;
        }
        if steps % cfg.snapshot_every == 0 || last {
            match snap(&st, &g) {
                Ok(s) => {
                    let rec = history.push(s)?;
                    log::debug!("t = {:.4}: E_total = {:e}", rec.t, rec.e_total);
                }
                Err(err) => {
                    rejection = Some((st.t, err.to_string()));
                    break;
                }
            }
            monitor.observe(&grid, &st);
        }
    }

    let dissipation =
        if history.snapshots.len() >= 3 { dissipation_check(&history, &params, Omega::Zero)? } else { Vec::new() };
    let first = history.records[0];
    let rec = *history.last().expect("initial snapshot");
    let t_final = st.t;
    let summary = RunSummary {
        mode: cfg.mode,
        seed: cfg.seed,
        n: cfg.n,
        length: cfg.length,
        mu: cfg.mu,
        c: cfg.c,
        gamma0: cfg.gamma0,
        epsilon: cfg.epsilon,
        band: cfg.band_for(&grid),
        t_end: cfg.t_end,
        t_final,
        steps,
        snapshots: history.len(),
        rejected: rejection.is_some(),
        rejection_time: rejection.as_ref().map(|r| r.0),
        rejection_reason: rejection.map(|r| r.1),
        theorem_norm: norm0,
        e: rec.e,
        e_w: rec.e_w,
        e_s: rec.e_s,
        e_a: rec.e_a,
        e_total: rec.e_total,
        e_total_initial: first.e_total,
        k: (first.e_total > 0.0).then(|| history.records.iter().map(|r| r.e_total).fold(0.0, f64::max) / first.e_total),
        min_rho_tilde: monitor.min_rho,
        min_det_f: monitor.min_det,
        max_divergence_ratio: monitor.max_div,
        max_pressure_iterations: max_iters,
        rho_mean_drift: (st.rho_tilde.mean() - initial.rho_tilde.mean()).abs(),
        max_dissipation_relative: dissipation.iter().map(|d| d.relative).reduce(f64::max),
        structure_residuals: structure,
        decay_exponents: DecayExponents {
            dissipation: fit_series(&history, |s| s.dissipation()),
            grad_u_h1_sq: fit_series(&history, |s| s.get("grad_u_H1").map_or(0.0, |v| v * v)),
            grad2_u_h1_sq: fit_series(&history, |s| s.get("grad2_u_H1").map_or(0.0, |v| v * v)),
        },
        interpolation: check_interpolation(&history),
        strong_dissipation: rec.strong_dissipation,
        last_decade_fraction: tail_fraction(&history, (t_final - 10.0).max(0.0)),
        last_log_decade_fraction: tail_fraction(&history, t_final / 10.0),
        g_gap: g.as_ref().map(|g| effective_tensor(&st).sub(g).l2_norm(&grid)),
    };
    Ok(Simulation { initial, state: st, g, history, dissipation, summary })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `energies.csv` contents.
pub fn energies_csv(sim: &Simulation) -> String {
    let mut out = String::from("t");
    for label in LABELS.iter().chain(&["E", "E_w", "E_s", "E_a", "E_total", "dissipation_residual"]) {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (i, (snap, rec)) in sim.history.snapshots.iter().zip(&sim.history.records).enumerate() {
        let residual = sim.dissipation.get(i).map_or(f64::NAN, |d| d.residual);
        let row: Vec<String> = std::iter::once(snap.t)
            .chain(snap.values)
            .chain([rec.e, rec.e_w, rec.e_s, rec.e_a, rec.e_total, residual])
            .map(num)
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

const GNUPLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel 't'
set ylabel 'energy'
plot 'energies.csv' using 1:15 with lines, '' using 1:16 with lines, \\
     '' using 1:17 with lines, '' using 1:18 with lines, '' using 1:19 with lines lw 2
pause -1
";

fn write_simulation(sim: &Simulation, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("energies.csv"), energies_csv(sim))?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&sim.summary)? + "\n")?;
    fs::write(dir.join("energies.gp"), GNUPLOT)?;
    Ok(())
}

/// Everything a run produced, for the command line to print.
#[derive(Clone, Debug)]
pub struct Report {
    pub summary: Option<RunSummary>,
    pub identities: Vec<IdentityRow>,
    pub text: String,
    /// False when a step was rejected or an identity failed.
    pub success: bool,
}

fn identities_report(cfg: &RunConfig) -> Result<Report> {
    let rows = identity_table(cfg.seed, cfg.identity_samples)?;
    let mut csv = String::from("name,grid,samples,residual,threshold,pass\n");
    let mut text =
        format!("{:<24} {:>4} {:>7} {:>12} {:>9}  result\n", "identity", "n", "samples", "residual", "limit");
    for r in &rows {
        writeln!(csv, "{},{},{},{},{},{}", r.name, r.grid, r.samples, num(r.residual), num(r.threshold), r.pass)
            .expect("write to string");
        writeln!(
            text,
            "{:<24} {:>4} {:>7} {:>12.3e} {:>9.0e}  {}",
            r.name,
            r.grid,
            r.samples,
            r.residual,
            r.threshold,
            if r.pass { "pass" } else { "FAIL" }
        )
        .expect("write to string");
    }
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("identities.csv"), csv)?;
    let success = rows.iter().all(|r| r.pass);
    Ok(Report { summary: None, identities: rows, text, success })
}

fn summary_text(s: &RunSummary) -> String {
    let mut text = format!("t = {} after {} steps, E_total = {:e}", s.t_final, s.steps, s.e_total);
    if let Some(k) = s.k {
        write!(text, ", K = {k:.4}").expect("write to string");
    }
    if let (Some(t), Some(why)) = (s.rejection_time, &s.rejection_reason) {
        write!(text, "\nrejected at t = {t}: {why}").expect("write to string");
    }
    text
}

fn dissipation_csv(sim: &Simulation, params: &ModelParams) -> Result<String> {
    let quadratic = dissipation_check(&sim.history, params, Omega::Quadratic)?;
    let mut out = String::from("t,residual,relative,residual_quadratic,relative_quadratic\n");
    for (a, b) in sim.dissipation.iter().zip(&quadratic) {
        writeln!(out, "{},{},{},{},{}", num(a.t), num(a.residual), num(a.relative), num(b.residual), num(b.relative))
            .expect("write to string");
    }
    Ok(out)
}

/// Run `cfg.mode` and write its files to `cfg.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.mode == Mode::Identities {
        return identities_report(cfg);
    }
    let sim = simulate(cfg)?;
    write_simulation(&sim, &cfg.output_dir)?;
    let s = &sim.summary;
    let mut text = summary_text(s);
    match cfg.mode {
        Mode::Dissipation => {
            if sim.dissipation.is_empty() {
                text.push_str("\ntoo few snapshots for the dissipation check");
            } else {
                fs::write(cfg.output_dir.join("dissipation.csv"), dissipation_csv(&sim, &cfg.params())?)?;
                let worst = sim.dissipation.iter().max_by(|a, b| a.relative.total_cmp(&b.relative));
                if let Some(w) = worst {
                    write!(text, "\nmax relative dissipation residual {:e} at t = {}", w.relative, w.t)
                        .expect("write to string");
                }
            }
        }
        Mode::DecayReport => {
            let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
            let d = &s.decay_exponents;
            write!(
                text,
                "\ndecay exponents in (1+t): ||grad u||^2 {}, ||grad u||_H1^2 {}, ||grad^2 u||_H1^2 {}\n\
                 int (1+t)^2 ||grad^2 u||_H1^2 = {:e}; share of the last 10 time units {}, of [T/10, T] {}",
                show(d.dissipation),
                show(d.grad_u_h1_sq),
                show(d.grad2_u_h1_sq),
                s.strong_dissipation,
                show(s.last_decade_fraction),
                show(s.last_log_decade_fraction),
            )
            .expect("write to string");
        }
        Mode::Simulate | Mode::Identities => {}
    }
    Ok(Report { success: !s.rejected, summary: Some(sim.summary), identities: Vec::new(), text })
}
