//! Brute-force oracles shared by the integration tests. Apart from the
//! 1D transform residual, nothing here goes through the library.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visco3d::spectral::{Grid, ScalarField, VectorField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer wavevectors kept by the grid: `|k_i| <= n/2 - 1`.
pub fn modes(grid: &Grid) -> Vec<[i64; 3]> {
    let m = grid.n() as i64 / 2 - 1;
    let mut out = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                out.push([a, b, c]);
            }
        }
    }
    out
}

pub fn wavevector(grid: &Grid, k: [i64; 3]) -> [f64; 3] {
    let s = 2.0 * std::f64::consts::PI / grid.length();
    k.map(|v| v as f64 * s)
}

/// `n^-3 sum_x f(x) exp(-i k . x)` by direct summation.
pub fn dft(grid: &Grid, f: &ScalarField, k: [i64; 3]) -> Complex64 {
    let kv = wavevector(grid, k);
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, x) in grid.points().enumerate() {
        let phase = -(kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2]);
        acc += f.as_slice()[p] * Complex64::from_polar(1.0, phase);
    }
    acc / grid.num_points() as f64
}

/// All retained coefficients of `f`.
pub fn coefficients(grid: &Grid, f: &ScalarField) -> Vec<([i64; 3], Complex64)> {
    modes(grid).into_iter().map(|k| (k, dft(grid, f, k))).collect()
}

/// Real part of `sum_k c_k exp(i k . x)` on the grid.
pub fn synthesize(grid: &Grid, coeffs: &[([i64; 3], Complex64)]) -> ScalarField {
    let kvs: Vec<_> = coeffs.iter().map(|(k, c)| (wavevector(grid, *k), *c)).collect();
    ScalarField::from_fn(grid, |x| {
        kvs.iter().map(|(kv, c)| (c * Complex64::from_polar(1.0, kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2])).re).sum()
    })
}

/// Apply the mode-wise multiplier `m(k)` to `f` through the oracle DFT.
pub fn apply_multiplier(grid: &Grid, f: &ScalarField, m: impl Fn([f64; 3]) -> Complex64) -> ScalarField {
    let c: Vec<_> = coefficients(grid, f).into_iter().map(|(k, c)| (k, c * m(wavevector(grid, k)))).collect();
    synthesize(grid, &c)
}

/// Uniform noise in `[-1, 1]` at every grid point (not band-limited).
pub fn noise(grid: &Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let data = (0..grid.num_points()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    ScalarField::from_vec(grid, data).unwrap()
}

pub fn noise_vector(grid: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField(std::array::from_fn(|_| noise(grid, rng)))
}

/// `f` with all its retained modes kept: drops the Nyquist content the grid
/// cannot represent, so the library and the oracle see the same field.
pub fn project_retained(grid: &Grid, f: &ScalarField) -> ScalarField {
    synthesize(grid, &coefficients(grid, f))
}

pub fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Observed order from errors at successive halvings.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Derivative of the trigonometric interpolant of periodic samples on
/// `[0, length)`, by direct DFT (the Nyquist mode is dropped).
pub fn spectral_derivative_1d(f: &[f64], length: f64) -> Vec<f64> {
    let n = f.len();
    let m = (n as i64 - 1) / 2;
    let w = 2.0 * std::f64::consts::PI / length;
    let h = length / n as f64;
    let coeffs: Vec<(f64, Complex64)> = (-m..=m)
        .map(|k| {
            let kk = k as f64 * w;
            let c: Complex64 =
                f.iter().enumerate().map(|(j, v)| v * Complex64::from_polar(1.0, -kk * j as f64 * h)).sum();
            (kk, c / n as f64)
        })
        .collect();
    (0..n)
        .map(|j| {
            let x = j as f64 * h;
            coeffs.iter().map(|(kk, c)| (Complex64::new(0.0, *kk) * c * Complex64::from_polar(1.0, kk * x)).re).sum()
        })
        .collect()
}

/// `||d_x p~ - p_x / (rho+1)||_inf` for `rho = 0.2 sin x`, `p = cos 2x`.
pub fn transform_residual(n: usize) -> f64 {
    let x: Vec<f64> = (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect();
    let rho: Vec<f64> = x.iter().map(|x| 0.2 * x.sin()).collect();
    let p: Vec<f64> = x.iter().map(|x| (2.0 * x).cos()).collect();
    let t = visco3d::pressure::pressure_transform_1d(&rho, &p, std::f64::consts::TAU).unwrap();
    let d = spectral_derivative_1d(&t.p_tilde, std::f64::consts::TAU);
    x.iter().zip(&d).zip(&rho).map(|((x, d), r)| (d - (-2.0 * (2.0 * x).sin()) / (r + 1.0)).abs()).fold(0.0, f64::max)
}
