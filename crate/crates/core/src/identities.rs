//! Numerical checks of the algebraic identities behind the reformulation.
//!
//! Each check assembles both sides independently from the spectral
//! primitives and returns a relative L2 residual. Inputs are meant to be
//! band-limited to a third of the Nyquist range, so every product is exactly
//! representable and the residuals sit at round-off.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{self, effective_tensor, q_term, ModelParams, State};
use crate::spectral::{random, Grid, ScalarField, TensorField33, VectorField};

/// `||a - b|| / max(||a||, ||b||)`, 0 when both vanish.
fn relative_gap(grid: &Grid, a: &VectorField, b: &VectorField) -> f64 {
    let scale = a.l2_norm(grid).max(b.l2_norm(grid));
    if scale == 0.0 {
        0.0
    } else {
        a.sub(b).l2_norm(grid) / scale
    }
}

fn relative_gap_tensor(grid: &Grid, a: &TensorField33, b: &TensorField33) -> f64 {
    let scale = a.l2_norm(grid).max(b.l2_norm(grid));
    if scale == 0.0 {
        0.0
    } else {
        a.sub(b).l2_norm(grid) / scale
    }
}

/// `sum_l a_l d_l f`.
fn advect(grid: &Grid, a: &VectorField, f: &ScalarField) -> ScalarField {
    let g = grid.grad(f);
    a[0].mul(&g[0]).add(&a[1].mul(&g[1])).add(&a[2].mul(&g[2]))
}

/// Residual of
///
/// ```text
/// P div(u . grad F) = P(u . grad P div F) + P(grad u . grad F) - P(grad u . grad lap^{-1} div div F)
/// ```
///
/// with `[grad u . grad F]_i = sum_{j,k} d_j u_k d_k F_ij` and
/// `[grad u . grad phi]_i = sum_k d_i u_k d_k phi`, for divergence-free `u`.
/// Products are dealiased on both sides.
pub fn check_commutator(grid: &Grid, u: &VectorField, f: &TensorField33) -> f64 {
    let grad_u = grid.grad_vec(u);

    let adv_f = TensorField33(std::array::from_fn(|c| grid.dealias(&advect(grid, u, &f[c]))));
    let lhs = grid.leray_project(&grid.div_tensor(&adv_f));

    let w = grid.leray_project(&grid.div_tensor(f));
    let term1 = VectorField(std::array::from_fn(|i| grid.dealias(&advect(grid, u, &w[i]))));

    let grad_f: Vec<VectorField> = (0..9).map(|c| grid.grad(&f[c])).collect();
    let term2 = VectorField(std::array::from_fn(|i| {
        let mut acc = ScalarField::zeros(grid);
        for j in 0..3 {
            for k in 0..3 {
                acc = acc.add(&grad_u.get(k, j).mul(&grad_f[3 * i + j][k]));
            }
        }
        grid.dealias(&acc)
    }));

    let fh = grid.forward_tensor(f);
    let divdiv = grid.div_hat(&grid.div_tensor_hat(&fh));
    let phi = grid.inverse(&grid.inv_laplacian_hat(&divdiv));
    let grad_phi = grid.grad(&phi);
    let term3 = VectorField(std::array::from_fn(|i| {
        let mut acc = ScalarField::zeros(grid);
        for k in 0..3 {
            acc = acc.add(&grad_u.get(k, i).mul(&grad_phi[k]));
        }
        grid.dealias(&acc)
    }));

    let rhs = grid.leray_project(&term1.add(&term2).sub(&term3));
    relative_gap(grid, &lhs, &rhs)
}

/// Worst relative residuals of the projection and multiplier algebra over random samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ProjectionResiduals {
    /// `||P P v - P v|| / ||v||`
    pub idempotence: f64,
    /// `||div P v|| / ||grad v||`
    pub divergence: f64,
    /// `||P grad phi|| / ||grad phi||`
    pub gradient: f64,
    /// Real-space against spectral-side L2 norm.
    pub parseval: f64,
    /// `||Lambda^-s Lambda^s f - (f - mean f)|| / ||f||`, `|s| <= 2`.
    pub riesz_roundtrip: f64,
}

impl ProjectionResiduals {
    pub fn max(&self) -> f64 {
        [self.idempotence, self.divergence, self.gradient, self.parseval, self.riesz_roundtrip]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Spectral algebra on `samples` seeded random fields using the full mode range.
pub fn check_projection_algebra(grid: &Grid, samples: usize, seed: u64) -> ProjectionResiduals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = grid.max_mode();
    let mut r = ProjectionResiduals::default();
    for _ in 0..samples {
        let v = random::random_vector(grid, &mut rng, kmax);
        let pv = grid.leray_project(&v);
        let vn = v.l2_norm(grid);
        r.idempotence = r.idempotence.max(grid.leray_project(&pv).sub(&pv).l2_norm(grid) / vn);
        let grad_norm: f64 = (0..3).map(|i| grid.grad(&v[i]).sum_sq()).sum::<f64>().sqrt();
        let div_norm = grid.div(&pv).as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        r.divergence = r.divergence.max(div_norm / grad_norm);

        let phi = random::random_scalar(grid, &mut rng, kmax);
        let gphi = grid.grad(&phi);
        r.gradient = r.gradient.max(grid.leray_project(&gphi).l2_norm(grid) / gphi.l2_norm(grid));

        let real = phi.l2_norm(grid);
        let spectral = grid.l2_sq_hat(&grid.forward(&phi)).sqrt();
        r.parseval = r.parseval.max((real - spectral).abs() / real);

        // add a mean so the round trip has something to remove; negative
        // orders only accept mean-free input
        let f = phi.map(|x| x + 0.3);
        let want = grid.remove_mean(&f);
        let s: f64 = rng.gen_range(-2.0..=2.0);
        let input = if s < 0.0 { &want } else { &f };
        let there = grid.riesz(input, s).expect("non-negative order or zero mean");
        let back = grid.riesz(&there, -s).expect("output of a nonzero order is mean-free");
        let err = if s == 0.0 { back.sub(&f) } else { back.sub(&want) };
        r.riesz_roundtrip = r.riesz_roundtrip.max(err.l2_norm(grid) / f.l2_norm(grid));
    }
    r
}

/// Residual between `d/dt (rho~ F F^T)`, assembled by the product rule from
/// the transport equations for `rho~` and `F`, and
/// `-u . grad G - Q(grad u, G) + 2 D(u)` with `G = rho~ F F^T - I`.
///
/// `u` is assumed divergence-free. The nonlinear parts of both sides are
/// dealiased the same way, the linear `2 D(u)` is not.
pub fn check_g_derivation(grid: &Grid, state: &State) -> crate::Result<f64> {
    let t = model::tendencies(grid, state, &ModelParams::default())?;
    let drho = grid.inverse(&t.drho);
    let df = grid.inverse_tensor(&t.df);
    let n = grid.num_points();
    let mut lhs: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; n]);
    for p in 0..n {
        let r = state.rho_tilde.as_slice()[p];
        let dr = drho.as_slice()[p];
        let fm = state.f.at(p);
        let dfm = df.at(p);
        for i in 0..3 {
            for j in 0..3 {
                let mut outer = 0.0;
                let mut prod = 0.0;
                for k in 0..3 {
                    outer += fm[i][k] * fm[j][k];
                    prod += dfm[i][k] * fm[j][k] + fm[i][k] * dfm[j][k];
                }
                lhs[3 * i + j][p] = dr * outer + r * prod;
            }
        }
    }
    let lhs = TensorField33(lhs.map(ScalarField::from_raw));
    let two_d = model::strain_rate(grid, &state.u).scale(2.0);
    let lhs = lhs.sub(&two_d).map(|c| grid.dealias(c)).add(&two_d);

    let rhs = model::rhs_g(grid, &state.u, &effective_tensor(state));
    Ok(relative_gap_tensor(grid, &lhs, &rhs))
}

/// Residual of `div G_t = lap u - div(u . grad G) - div Q(grad u, G)` with
/// `G_t` from [`model::rhs_g`]; holds for divergence-free `u`.
pub fn check_divg_evolution(grid: &Grid, u: &VectorField, g: &TensorField33) -> f64 {
    let lhs = grid.div_tensor(&model::rhs_g(grid, u, g));
    let lap_u = VectorField(std::array::from_fn(|i| grid.laplacian(&u[i])));
    let adv = TensorField33(std::array::from_fn(|c| grid.dealias(&advect(grid, u, &g[c]))));
    let q = q_term(&grid.grad_vec(u), g).map(|c| grid.dealias(c));
    let rhs = lap_u.sub(&grid.div_tensor(&adv)).sub(&grid.div_tensor(&q));
    relative_gap(grid, &lhs, &rhs)
}

/// One row of the identity table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRow {
    pub name: &'static str,
    pub grid: usize,
    pub samples: usize,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl IdentityRow {
    fn new(name: &'static str, grid: usize, samples: usize, residual: f64, threshold: f64) -> Self {
        Self { name, grid, samples, residual, threshold, pass: residual <= threshold }
    }
}

/// Random band-limited state for the identity checks.
pub fn random_state(grid: &Grid, rng: &mut ChaCha8Rng, amplitude: f64) -> State {
    State::random(grid, rng, random::third_band(grid), amplitude)
}

/// Run every identity on seeded random inputs and tabulate the worst residuals.
pub fn identity_table(seed: u64, samples: usize) -> crate::Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    for n in [8, 32] {
        let grid = Grid::periodic(n)?;
        let r = check_projection_algebra(&grid, samples, seed);
        rows.push(IdentityRow::new("projection_idempotence", n, samples, r.idempotence, 1e-12));
        rows.push(IdentityRow::new("projection_divergence", n, samples, r.divergence, 1e-12));
        rows.push(IdentityRow::new("projection_gradient", n, samples, r.gradient, 1e-12));
        rows.push(IdentityRow::new("parseval", n, samples, r.parseval, 1e-12));
        rows.push(IdentityRow::new("riesz_roundtrip", n, samples, r.riesz_roundtrip, 1e-12));
    }

    let grid = Grid::periodic(16)?;
    let kmax = random::third_band(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut comm, mut deriv, mut divg) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let u = random::random_div_free(&grid, &mut rng, kmax);
        let f = random::random_tensor(&grid, &mut rng, kmax);
        comm = comm.max(check_commutator(&grid, &u, &f));
        let st = random_state(&grid, &mut rng, 0.1);
        deriv = deriv.max(check_g_derivation(&grid, &st)?);
        divg = divg.max(check_divg_evolution(&grid, &st.u, &effective_tensor(&st)));
    }
    rows.push(IdentityRow::new("commutator", 16, samples, comm, 1e-10));
    rows.push(IdentityRow::new("g_derivation", 16, samples, deriv, 1e-9));
    rows.push(IdentityRow::new("divg_evolution", 16, samples, divg, 1e-9));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases_vanish() {
        let g = Grid::periodic(8).unwrap();
        let f = TensorField33::from_fn(&g, |x| [[x[0].sin(), 0.0, 0.0], [0.0, x[1].cos(), 0.0], [0.0, 0.0, 0.0]]);
        assert_eq!(check_commutator(&g, &VectorField::zeros(&g), &f), 0.0);
        let u = VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let c = TensorField33::constant(&g, [[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [3.0, 0.0, 1.0]]);
        assert!(check_commutator(&g, &u, &c) < 1e-15);
        assert_eq!(check_g_derivation(&g, &State::equilibrium(&g)).unwrap(), 0.0);
        assert_eq!(check_divg_evolution(&g, &VectorField::zeros(&g), &TensorField33::zeros(&g)), 0.0);
    }

    #[test]
    fn divg_with_zero_tensor_is_laplacian() {
        let g = Grid::periodic(8).unwrap();
        let u = VectorField::from_fn(&g, |x| [(x[1] + x[2]).sin(), x[2].cos(), x[0].sin()]);
        assert!(check_divg_evolution(&g, &u, &TensorField33::zeros(&g)) < 1e-14);
    }
}
