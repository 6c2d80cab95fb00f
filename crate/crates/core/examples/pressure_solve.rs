//! Variable-density pressure solve and the one-dimensional pressure transform.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use visco3d::pressure::{periodic_derivative, pressure_transform_1d, solve_pressure, PressureConfig};
use visco3d::spectral::{random, Grid, ScalarField};

fn main() -> visco3d::Result<()> {
    let grid = Grid::periodic(32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random::random_vector(&grid, &mut rng, 6);
    let cfg = PressureConfig::default();

    for amp in [0.05, 0.3, 0.6] {
        let rho = ScalarField::from_fn(&grid, |x| 1.0 + amp * x[0].cos());
        let sol = solve_pressure(&grid, &rho, &f, &cfg)?;
        println!("rho~ = 1 + {amp} cos x1: {} iterations, residual {:.2e}", sol.iterations, sol.residual);
    }
    let rho = ScalarField::from_fn(&grid, |x| (1.0 + 1.5 * x[0].cos()).max(0.05));
    match solve_pressure(&grid, &rho, &f, &cfg) {
        Ok(_) => println!("strong contrast converged"),
        Err(e) => println!("strong contrast: {e}"),
    }

    // p~_x = p_x / (rho + 1), checked on refining grids
    for n in [64, 128, 256] {
        let h = 2.0 * PI / n as f64;
        let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let rho: Vec<f64> = x.iter().map(|x| 0.2 * x.sin()).collect();
        let p: Vec<f64> = x.iter().map(|x| (2.0 * x).cos()).collect();
        let t = pressure_transform_1d(&rho, &p, 2.0 * PI)?;
        let (dpt, dp) = (periodic_derivative(&t.p_tilde, h), periodic_derivative(&p, h));
        let err = (0..n).map(|i| (dpt[i] - dp[i] / (rho[i] + 1.0)).abs()).fold(0.0, f64::max);
        println!("n = {n:4}: |p~_x - p_x/(rho+1)|_inf = {err:.3e} (mean removed {:.1e})", t.removed_mean);
    }
    Ok(())
}
