//! Second-order integrating-factor Runge–Kutta (Heun) stepping.
//!
//! The velocity equation is split as `u_t = mu lap u + N(state)` where `N`
//! collects everything else, including the variable-coefficient remainder
//! `mu (1/rho~ - 1) lap u` and the pressure gradient. With
//! `E = exp(-mu |k|^2 dt)` one step reads
//!
//! ```text
//! u*      = P E (u_n + dt N_n)
//! u_{n+1} = P (E u_n + dt/2 (E N_n + N*))
//! ```
//!
//! where `P` is the Leray projection. Density and deformation gradient take
//! plain Heun steps with the same stages. Pressure is solved once per stage.

use crate::error::{Error, Result};
use crate::model::{self, effective_tensor, ModelParams, State};
use crate::pressure::{self, PressureConfig};
use crate::spectral::{Grid, Spectrum, TensorField33, TensorSpectrum, VectorField, VectorSpectrum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    /// Fixed step, or the upper bound on the step when `adaptive`.
    pub dt: f64,
    pub cfl: f64,
    pub adaptive: bool,
    /// Advance `G` alongside the state with its own evolution equation.
    pub co_evolve_g: bool,
    pub pressure: PressureConfig,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self { dt: 1e-2, cfl: 0.4, adaptive: true, co_evolve_g: false, pressure: PressureConfig::default() }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidConfig(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        Ok(())
    }
}

/// Lower bound on the signal speed, so a motionless state still gets a finite step.
pub const SPEED_FLOOR: f64 = 1e-12;

/// `min(cfg.dt, cfl h / max(|u|_inf, c (1 + |G|_inf^{1/2}), floor))`, with
/// `|G|_inf` the largest absolute entry of the effective tensor.
pub fn cfl_dt(grid: &Grid, state: &State, params: &ModelParams, cfg: &StepperConfig) -> f64 {
    let umax = state.u.max_abs();
    let gmax = effective_tensor(state).max_abs();
    let speed = umax.max(params.c * (1.0 + gmax.sqrt())).max(SPEED_FLOOR);
    cfg.dt.min(cfg.cfl * grid.spacing() / speed)
}

/// Result of one accepted step.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: State,
    /// Co-evolved effective tensor, when one was supplied.
    pub g: Option<TensorField33>,
    pub dt: f64,
    /// Pressure iterations summed over both stages.
    pub pressure_iterations: usize,
}

struct Stage {
    /// `N` in spectral space.
    n_u: VectorSpectrum,
    drho: Spectrum,
    df: TensorSpectrum,
    grad_u: TensorField33,
    pressure_iterations: usize,
}

fn stage(grid: &Grid, fields: &model::Spectral<'_>, params: &ModelParams, pcfg: &PressureConfig) -> Result<Stage> {
    let t = model::tendencies_hat(grid, fields, params)?;
    let sol = pressure::solve_hat(grid, &t.inv_rho, &grid.div_hat(&t.forcing), pcfg)?;
    let k2 = grid.k2();
    let n_u = std::array::from_fn(|i| {
        // f - (1/rho~) grad p, minus the mu lap u that the integrating factor handles exactly
        let u_hat = &fields.u_hat[i];
        t.forcing[i].sub(&sol.flux[i]).map_indexed(|idx, d| d + params.mu * k2[idx] * u_hat[idx])
    });
    Ok(Stage { n_u, drho: t.drho, df: t.df, grad_u: t.grad_u, pressure_iterations: sol.iterations })
}

fn integrating_factor(grid: &Grid, mu: f64, dt: f64) -> Vec<f64> {
    grid.k2().iter().map(|&k2| (-mu * k2 * dt).exp()).collect()
}

fn scale_by(s: &Spectrum, e: &[f64]) -> Spectrum {
    s.map_indexed(|idx, c| c * e[idx])
}

fn rejected(t: f64, err: Error) -> Error {
    match err {
        Error::StepRejected { .. } => err,
        other => Error::StepRejected { t, reason: other.to_string() },
    }
}

/// `G + dt/2 (rhs_G(u_0, G) + rhs_G(u_1, G + dt rhs_G(u_0, G)))`: the Heun
/// update of `G` given the velocities at the two stages.
pub fn evolve_g_step(grid: &Grid, u_stages: [&VectorField; 2], g: &TensorField33, dt: f64) -> TensorField33 {
    let grads = [grid.grad_vec(u_stages[0]), grid.grad_vec(u_stages[1])];
    evolve_g_with(grid, u_stages, [&grads[0], &grads[1]], g, dt)
}

fn evolve_g_with(
    grid: &Grid,
    u: [&VectorField; 2],
    grad_u: [&TensorField33; 2],
    g: &TensorField33,
    dt: f64,
) -> TensorField33 {
    let k1 = model::rhs_g_with(grid, u[0], grad_u[0], g);
    let g_star = g.zip_map(&k1, |a, b| a.add(&b.scale(dt)));
    let k2 = model::rhs_g_with(grid, u[1], grad_u[1], &g_star);
    TensorField33(std::array::from_fn(|c| g[c].add(&k1[c].add(&k2[c]).scale(0.5 * dt))))
}

fn to_state(grid: &Grid, u: &VectorSpectrum, rho: &Spectrum, h: &TensorSpectrum, t: f64) -> State {
    let mut f = grid.inverse_tensor(h);
    for i in 0..3 {
        f.get_mut(i, i).as_mut_slice().iter_mut().for_each(|v| *v += 1.0);
    }
    State { rho_tilde: grid.inverse(rho).map(|r| 1.0 + r), u: grid.inverse_vector(u), f, t }
}

/// One step of size `dt`. Any failure (non-finite values, density or `det F`
/// reaching zero, pressure non-convergence) comes back as `StepRejected`.
pub fn step_dt(
    grid: &Grid,
    state: &State,
    g: Option<&TensorField33>,
    params: &ModelParams,
    dt: f64,
    pcfg: &PressureConfig,
) -> Result<StepOutput> {
    let t0 = state.t;
    let e = integrating_factor(grid, params.mu, dt);
    let u_hat = grid.forward_vector(&state.u);
    // Perturbations are carried in spectral space: the mean of F is O(1) and
    // rounding its increments at that scale shows up as noise in int tr(F - I).
    let rho_hat = grid.forward(&state.rho());
    let h_hat = grid.forward_tensor(&state.f_minus_identity());

    let fields = model::Spectral { state, u_hat: &u_hat, rho_hat: &rho_hat, h_hat: &h_hat };
    let s1 = stage(grid, &fields, params, pcfg).map_err(|err| rejected(t0, err))?;
    let mut u1_hat: VectorSpectrum = std::array::from_fn(|i| {
        let mut v = u_hat[i].clone();
        v.axpy(dt, &s1.n_u[i]);
        scale_by(&v, &e)
    });
    grid.leray_hat(&mut u1_hat);
    let rho1_hat = rho_hat.add(&s1.drho.scale(dt));
    let h1_hat: TensorSpectrum = std::array::from_fn(|c| h_hat[c].add(&s1.df[c].scale(dt)));
    let predictor = to_state(grid, &u1_hat, &rho1_hat, &h1_hat, t0 + dt);
    predictor.check().map_err(|err| rejected(t0, err))?;

    let fields = model::Spectral { state: &predictor, u_hat: &u1_hat, rho_hat: &rho1_hat, h_hat: &h1_hat };
    let s2 = stage(grid, &fields, params, pcfg).map_err(|err| rejected(t0, err))?;
    let half = 0.5 * dt;
    let mut u2_hat: VectorSpectrum = std::array::from_fn(|i| {
        let mut v = scale_by(&u_hat[i].add(&s1.n_u[i].scale(half)), &e);
        v.axpy(half, &s2.n_u[i]);
        v
    });
    grid.leray_hat(&mut u2_hat);
    let rho2_hat = rho_hat.add(&s1.drho.add(&s2.drho).scale(half));
    let h2_hat: TensorSpectrum = std::array::from_fn(|c| h_hat[c].add(&s1.df[c].add(&s2.df[c]).scale(half)));
    let next = to_state(grid, &u2_hat, &rho2_hat, &h2_hat, t0 + dt);
    next.check().map_err(|err| rejected(t0, err))?;

    let g_next = g.map(|g| evolve_g_with(grid, [&state.u, &predictor.u], [&s1.grad_u, &s2.grad_u], g, dt));
    if let Some(g) = &g_next {
        g.check_finite("G").map_err(|err| rejected(t0, err))?;
    }
    Ok(StepOutput { state: next, g: g_next, dt, pressure_iterations: s1.pressure_iterations + s2.pressure_iterations })
}

/// One step with the size chosen by `cfg` (fixed, or CFL-limited when adaptive).
pub fn step(grid: &Grid, state: &State, params: &ModelParams, cfg: &StepperConfig) -> Result<State> {
    let dt = if cfg.adaptive { cfl_dt(grid, state, params, cfg) } else { cfg.dt };
    Ok(step_dt(grid, state, None, params, dt, &cfg.pressure)?.state)
}

/// Advance to `t_end` with fixed steps of (at most) `dt`, the last one shortened to land exactly.
pub fn integrate(
    grid: &Grid,
    state: &State,
    g: Option<&TensorField33>,
    params: &ModelParams,
    dt: f64,
    t_end: f64,
    pcfg: &PressureConfig,
) -> Result<(State, Option<TensorField33>)> {
    let mut st = state.clone();
    let mut g = g.cloned();
    while st.t < t_end - 1e-12 * dt {
        let h = dt.min(t_end - st.t);
        let out = step_dt(grid, &st, g.as_ref(), params, h, pcfg)?;
        st = out.state;
        g = out.g;
    }
    st.t = t_end;
    Ok((st, g))
}
