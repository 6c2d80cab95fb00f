//! Variable-density pressure solve and the one-dimensional pressure transform.
//!
//! The velocity tendency is `f - (1/rho~) grad p`; requiring it to be
//! divergence-free gives `div((1/rho~) grad p) = div f`. We solve this with a
//! fixed point preconditioned by the constant-coefficient Laplacian,
//!
//! ```text
//! p <- lap^{-1} [ div f - div((1/rho~ - 1) grad p) ],
//! ```
//!
//! which contracts whenever `||1/rho~ - 1||_inf < 1`. The product is dealiased
//! exactly as in the momentum equation, so the reported residual is the
//! divergence the stepper will actually see. `p` has zero mean.

use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField, Spectrum, VectorField, VectorSpectrum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureConfig {
    /// Relative residual target, measured against `||div f||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PressureConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct PressureSolution {
    pub p: ScalarField,
    /// Iterations performed; the initial constant-density guess counts as one.
    pub iterations: usize,
    /// `||div((1/rho~) grad p) - div f|| / ||div f||` (0 when `div f = 0`).
    pub residual: f64,
}

pub(crate) struct SpectralSolution {
    pub p_hat: Spectrum,
    /// Dealiased `(1/rho~) grad p` for the returned `p`.
    pub flux: VectorSpectrum,
    pub iterations: usize,
    pub residual: f64,
}

// A residual this large means the iteration is diverging, not converging slowly.
const BLOWUP: f64 = 1e10;

/// `a grad p` with the product dealiased.
fn flux(grid: &Grid, a: &ScalarField, p_hat: &Spectrum) -> VectorSpectrum {
    let gp = grid.inverse_vector(&grid.grad_hat(p_hat));
    std::array::from_fn(|i| grid.forward_dealiased(&gp[i].mul(a)))
}

pub(crate) fn solve_hat(
    grid: &Grid,
    inv_rho: &ScalarField,
    div_f: &Spectrum,
    cfg: &PressureConfig,
) -> Result<SpectralSolution> {
    let norm = grid.l2_sq_hat(div_f).sqrt();
    if norm == 0.0 {
        let zero = || Spectrum::zeros(grid);
        return Ok(SpectralSolution { p_hat: zero(), flux: [zero(), zero(), zero()], iterations: 0, residual: 0.0 });
    }
    let mut p_hat = grid.inv_laplacian_hat(div_f);
    let mut iterations = 1;
    loop {
        let q = flux(grid, inv_rho, &p_hat);
        let r_hat = div_f.sub(&grid.div_hat(&q));
        let residual = grid.l2_sq_hat(&r_hat).sqrt() / norm;
        log::trace!("pressure iteration {iterations}: residual {residual:e}");
        if residual <= cfg.tol {
            return Ok(SpectralSolution { p_hat, flux: q, iterations, residual });
        }
        if !residual.is_finite() || residual > BLOWUP || iterations >= cfg.max_iter {
            return Err(Error::NoConvergence { iterations, residual });
        }
        // lap^{-1}[div f - div((a-1) grad p)] = p + lap^{-1}[div f - div(a grad p)]
        p_hat = p_hat.add(&grid.inv_laplacian_hat(&r_hat));
        iterations += 1;
    }
}

/// Solve `div((1/rho~) grad p) = div f` for zero-mean `p`.
pub fn solve_pressure(
    grid: &Grid,
    rho_tilde: &ScalarField,
    f: &VectorField,
    cfg: &PressureConfig,
) -> Result<PressureSolution> {
    let min = rho_tilde.min();
    if !(min > 0.0) {
        return Err(Error::DensityNonpositive { min });
    }
    let inv_rho = rho_tilde.map(|r| 1.0 / r);
    let sol = solve_hat(grid, &inv_rho, &grid.div_hat(&grid.forward_vector(f)), cfg)?;
    log::debug!("pressure solve: {} iterations, residual {:e}", sol.iterations, sol.residual);
    Ok(PressureSolution { p: grid.inverse(&sol.p_hat), iterations: sol.iterations, residual: sol.residual })
}

/// Output of [`pressure_transform_1d`].
#[derive(Clone, Debug, PartialEq)]
pub struct Transform1d {
    pub p_tilde: Vec<f64>,
    /// Mean of `rho_x p / (rho+1)^2` removed so the antiderivative is periodic.
    pub removed_mean: f64,
}

/// Fourth-order periodic central difference.
pub fn periodic_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let at = |o: isize| f[(i as isize + o).rem_euclid(n as isize) as usize];
            (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
        })
        .collect()
}

/// One-dimensional transformed pressure on the periodic grid `x_i = i L / n`:
///
/// ```text
/// p~ = p / (rho+1) + int_0^x rho_x p / (rho+1)^2 dx'
/// ```
///
/// so that `p~_x = p_x / (rho+1)`. Derivatives are fourth-order central
/// differences and the antiderivative is the trapezoid rule with its
/// endpoint correction, also fourth order. The integrand's mean is removed
/// (and returned) so the antiderivative is periodic; `p~` is returned with zero
/// mean.
pub fn pressure_transform_1d(rho: &[f64], p: &[f64], length: f64) -> Result<Transform1d> {
    let n = rho.len();
    if p.len() != n {
        return Err(Error::ShapeMismatch { expected: n, got: p.len() });
    }
    if n < 5 {
        return Err(Error::InsufficientData { needed: 5, got: n });
    }
    let min = rho.iter().fold(f64::INFINITY, |m, &r| m.min(r + 1.0));
    if !(min > 0.0) {
        return Err(Error::DensityNonpositive { min });
    }
    let h = length / n as f64;
    let rho_x = periodic_derivative(rho, h);
    let mut q: Vec<f64> = (0..n).map(|i| rho_x[i] * p[i] / (rho[i] + 1.0).powi(2)).collect();
    let removed_mean = q.iter().sum::<f64>() / n as f64;
    q.iter_mut().for_each(|v| *v -= removed_mean);

    let q_x = periodic_derivative(&q, h);
    let mut p_tilde = Vec::with_capacity(n);
    let mut trapezoid = 0.0;
    for i in 0..n {
        if i > 0 {
            trapezoid += 0.5 * h * (q[i - 1] + q[i]);
        }
        let integral = trapezoid - h * h / 12.0 * (q_x[i] - q_x[0]);
        p_tilde.push(p[i] / (rho[i] + 1.0) + integral);
    }
    let mean = p_tilde.iter().sum::<f64>() / n as f64;
    p_tilde.iter_mut().for_each(|v| *v -= mean);
    Ok(Transform1d { p_tilde, removed_mean })
}
