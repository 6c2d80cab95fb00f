//! Right-hand sides of the inhomogeneous viscoelastic system and of its
//! effective-tensor reformulation.
//!
//! Unknowns are the density `rho~`, the velocity `u` and the deformation
//! gradient `F`:
//!
//! ```text
//! rho~_t + u . grad rho~ = 0
//! rho~ (u_t + u . grad u) + grad p = mu lap u + c^2 div(rho~ F F^T)
//! F_t + u . grad F = (grad u) F
//! div u = 0
//! ```
//!
//! Conventions: `(grad u)_ij = d_j u_i`, `(div T)_i = sum_j d_j T_ij`, so
//! `((grad u) F)_ij = sum_k d_k u_i F_kj`. The effective tensor is
//! `G = rho~ F F^T - I`; it obeys `G_t + u . grad G + Q(grad u, G) = 2 D(u)`
//! with `Q(grad u, G) = -(grad u) G - G (grad u)^T` and `D(u)` the symmetric
//! part of `grad u`.
//!
//! All advection terms are in convective form and every nonlinear product is
//! dealiased with the 2/3 rule.

use crate::error::{Error, Result};
use crate::pressure::{self, PressureConfig};
use crate::spectral::{
    mat_det, mat_inverse, random, Grid, Mat3, ScalarField, Spectrum, TensorField33, TensorSpectrum, VectorField,
    VectorSpectrum, IDENTITY,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Shear viscosity.
    pub mu: f64,
    /// Elastic wave speed.
    pub c: f64,
    /// When false the model degenerates to unsteady Stokes flow: density and
    /// deformation are frozen and only `mu lap u - grad p` drives `u`.
    pub nonlinear_enabled: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { mu: 1.0, c: 1.0, nonlinear_enabled: true }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Solution snapshot `(rho~, u, F)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub rho_tilde: ScalarField,
    pub u: VectorField,
    pub f: TensorField33,
    pub t: f64,
}

impl State {
    /// The rest state `(1, 0, I)`.
    pub fn equilibrium(grid: &Grid) -> Self {
        Self {
            rho_tilde: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid),
            f: TensorField33::identity(grid),
            t: 0.0,
        }
    }

    /// `(1 + r, u, I + H)` with seeded random fields band-limited to `kmax`,
    /// `u` divergence-free, each of `r`, `u`, `H` scaled to sup-norm `amplitude`.
    pub fn random<R: rand::Rng + ?Sized>(grid: &Grid, rng: &mut R, kmax: i64, amplitude: f64) -> Self {
        let scaled = |m: f64| if m == 0.0 { 0.0 } else { amplitude / m };
        let r = random::random_scalar(grid, rng, kmax);
        let u = random::random_div_free(grid, rng, kmax);
        let h = random::random_tensor(grid, rng, kmax);
        let (sr, su, sh) = (scaled(r.max_abs()), scaled(u.max_abs()), scaled(h.max_abs()));
        Self {
            rho_tilde: r.map(|v| 1.0 + sr * v),
            u: u.scale(su),
            f: TensorField33::identity(grid).add(&h.scale(sh)),
            t: 0.0,
        }
    }

    /// Density perturbation `rho = rho~ - 1`.
    pub fn rho(&self) -> ScalarField {
        self.rho_tilde.map(|r| r - 1.0)
    }

    /// Deformation perturbation `F - I`.
    pub fn f_minus_identity(&self) -> TensorField33 {
        let mut h = self.f.clone();
        for i in 0..3 {
            h.get_mut(i, i).as_mut_slice().iter_mut().for_each(|v| *v -= 1.0);
        }
        h
    }

    pub fn min_det_f(&self) -> f64 {
        (0..self.rho_tilde.len()).map(|p| mat_det(&self.f.at(p))).fold(f64::INFINITY, f64::min)
    }

    /// `||div u||_L2 / ||grad u||_L2` (0 for a motionless state).
    pub fn divergence_ratio(&self, grid: &Grid) -> f64 {
        let uh = grid.forward_vector(&self.u);
        let div = grid.l2_sq_hat(&grid.div_hat(&uh)).sqrt();
        let grad: f64 = (0..3).map(|i| grid.weighted_energy_hat(&uh[i], |k2| k2)).sum::<f64>().sqrt();
        if grad == 0.0 {
            0.0
        } else {
            div / grad
        }
    }

    /// Finite values, positive density and positive `det F`.
    pub fn check(&self) -> Result<()> {
        self.rho_tilde.check_finite("rho_tilde")?;
        self.u.check_finite("u")?;
        self.f.check_finite("F")?;
        let min = self.rho_tilde.min();
        if min <= 0.0 {
            return Err(Error::DensityNonpositive { min });
        }
        let det = self.min_det_f();
        if det <= 0.0 {
            return Err(Error::StepRejected { t: self.t, reason: format!("det F reached {det:e}") });
        }
        Ok(())
    }
}

/// `G = rho~ F F^T - I`, evaluated pointwise from the perturbations
/// `rho = rho~ - 1`, `H = F - I` as `rho I + rho~ (H + H^T + H H^T)`.
pub fn effective_tensor(state: &State) -> TensorField33 {
    let n = state.rho_tilde.len();
    let mut out: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; n]);
    for p in 0..n {
        let r = state.rho_tilde.as_slice()[p];
        let mut h = state.f.at(p);
        for (i, row) in h.iter_mut().enumerate() {
            row[i] -= 1.0;
        }
        for i in 0..3 {
            for j in i..3 {
                let hht: f64 = (0..3).map(|k| h[i][k] * h[j][k]).sum();
                let mut g = r * (h[i][j] + h[j][i] + hht);
                if i == j {
                    g += r - 1.0;
                }
                out[3 * i + j][p] = g;
                out[3 * j + i][p] = g;
            }
        }
    }
    TensorField33(out.map(ScalarField::from_raw))
}

/// `Q(grad u, G) = -(grad u) G - G (grad u)^T`, pointwise.
pub fn q_term(grad_u: &TensorField33, g: &TensorField33) -> TensorField33 {
    let n = g[0].len();
    let mut out: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; n]);
    for p in 0..n {
        let a = grad_u.at(p);
        let gm = g.at(p);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[i][k] * gm[k][j] + gm[i][k] * a[j][k];
                }
                out[3 * i + j][p] = -s;
            }
        }
    }
    TensorField33(out.map(ScalarField::from_raw))
}

/// `D(u) = (grad u + grad u^T) / 2`.
pub fn strain_rate(grid: &Grid, u: &VectorField) -> TensorField33 {
    let grad_u = grid.grad_vec(u);
    symmetric_part(&grad_u)
}

fn symmetric_part(a: &TensorField33) -> TensorField33 {
    TensorField33(std::array::from_fn(|c| {
        let (i, j) = (c / 3, c % 3);
        a.get(i, j).zip_map(a.get(j, i), |x, y| 0.5 * (x + y))
    }))
}

/// `g(rho) = rho / (rho + 1)`, the variable coefficient of the reformulated momentum equation.
pub fn g_coeff(rho: &ScalarField) -> Result<ScalarField> {
    let min = rho.min() + 1.0;
    if min <= 0.0 {
        return Err(Error::DensityNonpositive { min });
    }
    Ok(rho.map(|r| r / (r + 1.0)))
}

/// Tendencies of `(rho~, u, F)`.
#[derive(Clone, Debug)]
pub struct Rhs {
    pub drho: ScalarField,
    pub du: VectorField,
    pub df: TensorField33,
}

/// Spectral pieces shared by the public right-hand sides and the stepper.
pub(crate) struct Tendencies {
    /// Momentum forcing without pressure, `f`, dealiased.
    pub forcing: VectorSpectrum,
    pub drho: Spectrum,
    pub df: TensorSpectrum,
    /// Coefficient `1/rho~` of the pressure gradient (unity in Stokes mode).
    pub inv_rho: ScalarField,
    /// `grad u` in real space, `(i, j) = d_j u_i`.
    pub grad_u: TensorField33,
}

/// A state together with the spectra of `u` and of the perturbations
/// `rho~ - 1` and `F - I` (only their gradients are used).
pub(crate) struct Spectral<'a> {
    pub state: &'a State,
    pub u_hat: &'a VectorSpectrum,
    pub rho_hat: &'a Spectrum,
    pub h_hat: &'a TensorSpectrum,
}

/// `sum_k a_k (d_k b)` for a real vector `a` and the spectral gradient of `b`.
fn directional(grid: &Grid, a: &VectorField, b_hat: &Spectrum) -> ScalarField {
    let gb = grid.inverse_vector(&grid.grad_hat(b_hat));
    dot_rows(a, [&gb[0], &gb[1], &gb[2]])
}

/// `sum_k a_k b_k` pointwise.
fn dot_rows(a: &VectorField, b: [&ScalarField; 3]) -> ScalarField {
    let n = a[0].len();
    let mut out = vec![0.0; n];
    for k in 0..3 {
        for ((o, &ak), &bk) in out.iter_mut().zip(a[k].as_slice()).zip(b[k].as_slice()) {
            *o += ak * bk;
        }
    }
    ScalarField::from_raw(out)
}

/// `(grad u) B` pointwise for a tensor field `B`.
fn left_multiply(grad_u: &TensorField33, b: &TensorField33) -> TensorField33 {
    let n = b[0].len();
    let mut out: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; n]);
    for p in 0..n {
        let a = grad_u.at(p);
        let bm = b.at(p);
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j][p] = (0..3).map(|k| a[i][k] * bm[k][j]).sum();
            }
        }
    }
    TensorField33(out.map(ScalarField::from_raw))
}

pub(crate) fn tendencies(grid: &Grid, state: &State, params: &ModelParams) -> Result<Tendencies> {
    let u_hat = grid.forward_vector(&state.u);
    let rho_hat = grid.forward(&state.rho());
    let h_hat = grid.forward_tensor(&state.f_minus_identity());
    tendencies_hat(grid, &Spectral { state, u_hat: &u_hat, rho_hat: &rho_hat, h_hat: &h_hat }, params)
}

pub(crate) fn tendencies_hat(grid: &Grid, s: &Spectral<'_>, params: &ModelParams) -> Result<Tendencies> {
    let state = s.state;
    let min = state.rho_tilde.min();
    if !(min > 0.0) {
        return Err(Error::DensityNonpositive { min });
    }
    let grad_u = grid.inverse_tensor(&grid.grad_vec_hat(s.u_hat));
    let mu_lap_u: VectorSpectrum = std::array::from_fn(|i| grid.laplacian_hat(&s.u_hat[i]).scale(params.mu));

    if !params.nonlinear_enabled {
        return Ok(Tendencies {
            forcing: mu_lap_u,
            drho: Spectrum::zeros(grid),
            df: std::array::from_fn(|_| Spectrum::zeros(grid)),
            inv_rho: ScalarField::constant(grid, 1.0),
            grad_u,
        });
    }

    let inv_rho = state.rho_tilde.map(|r| 1.0 / r);
    let c2 = params.c * params.c;

    // (1/rho~)(mu lap u + c^2 div G) - u . grad u
    let g = effective_tensor(state);
    // G is symmetric by construction
    let mut g_hat: TensorSpectrum =
        std::array::from_fn(|c| if c % 3 >= c / 3 { grid.forward_dealiased(&g[c]) } else { Spectrum::zeros(grid) });
    for i in 1..3 {
        for j in 0..i {
            g_hat[3 * i + j] = g_hat[3 * j + i].clone();
        }
    }
    let div_g = grid.div_tensor_hat(&g_hat);
    let stress = grid.inverse_vector(&std::array::from_fn(|i| {
        let mut v = mu_lap_u[i].clone();
        v.axpy(c2, &div_g[i]);
        v
    }));
    let forcing = std::array::from_fn(|i| {
        let adv = dot_rows(&state.u, [grad_u.get(i, 0), grad_u.get(i, 1), grad_u.get(i, 2)]);
        let accel = ScalarField::from_raw(
            stress[i]
                .as_slice()
                .iter()
                .zip(inv_rho.as_slice())
                .zip(adv.as_slice())
                .map(|((&st, &ir), &a)| ir * st - a)
                .collect(),
        );
        grid.forward_dealiased(&accel)
    });

    let drho = grid.forward_dealiased(&directional(grid, &state.u, s.rho_hat)).scale(-1.0);

    let stretch = left_multiply(&grad_u, &state.f);
    let df = std::array::from_fn(|c| {
        let adv = directional(grid, &state.u, &s.h_hat[c]);
        grid.forward_dealiased(&stretch[c].sub(&adv))
    });

    Ok(Tendencies { forcing, drho, df, inv_rho, grad_u })
}

/// Momentum forcing `f = (1/rho~)(mu lap u + c^2 div(rho~ F F^T)) - u . grad u`,
/// i.e. the velocity tendency before the pressure gradient is subtracted.
pub fn momentum_forcing(grid: &Grid, state: &State, params: &ModelParams) -> Result<VectorField> {
    Ok(grid.inverse_vector(&tendencies(grid, state, params)?.forcing))
}

/// Tendencies of the original system for a given pressure.
///
/// For the divergence constraint to hold, `pressure` must come from
/// [`crate::pressure::solve_pressure`] for the same state.
pub fn rhs_full(grid: &Grid, state: &State, params: &ModelParams, pressure: &ScalarField) -> Result<Rhs> {
    let t = tendencies(grid, state, params)?;
    let gp = grid.inverse_vector(&grid.grad_hat(&grid.forward(pressure)));
    let du: VectorSpectrum = std::array::from_fn(|i| t.forcing[i].sub(&grid.forward_dealiased(&gp[i].mul(&t.inv_rho))));
    Ok(Rhs { drho: grid.inverse(&t.drho), du: grid.inverse_vector(&du), df: grid.inverse_tensor(&t.df) })
}

/// Tendencies with the pressure solved for the current state.
pub fn rhs_with_pressure(
    grid: &Grid,
    state: &State,
    params: &ModelParams,
    cfg: &PressureConfig,
) -> Result<(Rhs, ScalarField)> {
    let t = tendencies(grid, state, params)?;
    let sol = pressure::solve_hat(grid, &t.inv_rho, &grid.div_hat(&t.forcing), cfg)?;
    let du: VectorSpectrum = std::array::from_fn(|i| t.forcing[i].sub(&sol.flux[i]));
    let rhs = Rhs { drho: grid.inverse(&t.drho), du: grid.inverse_vector(&du), df: grid.inverse_tensor(&t.df) };
    Ok((rhs, grid.inverse(&sol.p_hat)))
}

/// `G_t = -u . grad G - Q(grad u, G) + 2 D(u)`, nonlinear terms dealiased.
pub fn rhs_g(grid: &Grid, u: &VectorField, g: &TensorField33) -> TensorField33 {
    rhs_g_with(grid, u, &grid.grad_vec(u), g)
}

/// [`rhs_g`] with `grad u` already at hand.
pub(crate) fn rhs_g_with(grid: &Grid, u: &VectorField, grad_u: &TensorField33, g: &TensorField33) -> TensorField33 {
    // a symmetric G has a symmetric tendency; the lower triangle is mirrored
    let symmetric = (0..3).all(|i| (i + 1..3).all(|j| g.get(i, j) == g.get(j, i)));
    let q = q_term(grad_u, g);
    let two_d = symmetric_part(grad_u).scale(2.0);
    let component = |c: usize| {
        let adv = directional(grid, u, &grid.forward(&g[c]));
        let nonlinear = grid.dealias(&adv.add(&q[c]).scale(-1.0));
        nonlinear.add(&two_d[c])
    };
    let mut out: [Option<ScalarField>; 9] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = Some(if symmetric && j < i {
                out[3 * j + i].clone().expect("upper triangle first")
            } else {
                component(3 * i + j)
            });
        }
    }
    TensorField33(out.map(|c| c.expect("all components set")))
}

/// State transported from a uniform reference configuration by the label map
/// `X(x) = x - psi(x)`: `F = (I - grad psi)^{-1}`, `rho~ = det(I - grad psi)`,
/// `u = 0`. Such data satisfies all three structures of [`structure_residuals`]
/// (the first one pointwise exactly).
pub fn flow_map_state(grid: &Grid, psi: &VectorField) -> Result<State> {
    let grad = grid.grad_vec(psi);
    let n = grid.num_points();
    let mut rho = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for p in 0..n {
        let dpsi = grad.at(p);
        let a: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| IDENTITY[i][j] - dpsi[i][j]));
        let det = mat_det(&a);
        if !(det > 0.0) {
            return Err(Error::DensityNonpositive { min: det });
        }
        rho.push(det);
        f.push(mat_inverse(&a).expect("positive determinant"));
    }
    Ok(State {
        rho_tilde: ScalarField::from_raw(rho),
        u: VectorField::zeros(grid),
        f: TensorField33::from_matrices(&f),
        t: 0.0,
    })
}

/// Sup-norm violations of the classical structural assumptions on initial data.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct StructureResiduals {
    /// `rho~ det F - 1`
    pub r_state: f64,
    /// `div(rho~ F^T)`
    pub r_div: f64,
    /// `F_lk d_l F_ij - F_lj d_l F_ik`
    pub r_curl: f64,
}

/// Measure (never enforce) the "initial state", "div" and "curl" structures.
pub fn structure_residuals(grid: &Grid, state: &State) -> StructureResiduals {
    let n = state.rho_tilde.len();
    let r_state =
        (0..n).map(|p| (state.rho_tilde.as_slice()[p] * mat_det(&state.f.at(p)) - 1.0).abs()).fold(0.0, f64::max);

    // (div(rho~ F^T))_i = sum_j d_j (rho~ F_ji)
    let rho_ft = state.f.transpose().map(|c| c.mul(&state.rho_tilde));
    let r_div = grid.div_tensor(&rho_ft).max_abs();

    // dF[l][c] = d_l F_c
    let df: Vec<[ScalarField; 3]> = (0..9)
        .map(|c| {
            let g = grid.grad(&state.f[c]);
            g.0
        })
        .collect();
    let mut r_curl: f64 = 0.0;
    for p in 0..n {
        let fm = state.f.at(p);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut s = 0.0;
                    for l in 0..3 {
                        s += fm[l][k] * df[3 * i + j][l].as_slice()[p] - fm[l][j] * df[3 * i + k][l].as_slice()[p];
                    }
                    r_curl = r_curl.max(s.abs());
                }
            }
        }
    }
    StructureResiduals { r_state, r_div, r_curl }
}
