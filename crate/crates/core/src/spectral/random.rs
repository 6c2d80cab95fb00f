//! Seeded band-limited random fields.
//!
//! Spectrum: unit amplitude and uniformly random phase on every retained mode
//! with `0 < max_i |k_i| <= kmax`, Hermitian symmetric, zero mean. The result
//! is deterministic given the RNG state.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::field::{ScalarField, Spectrum, TensorField33, VectorField};
use super::grid::Grid;

/// Largest per-axis wavenumber such that cubic products of fields limited to
/// it stay strictly below Nyquist (roughly a third of the Nyquist range).
pub fn third_band(grid: &Grid) -> i64 {
    (grid.n() as i64 - 2) / 6
}

pub fn random_spectrum<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, kmax: i64) -> Spectrum {
    let kmax = kmax.min(grid.max_mode());
    let mut s = Spectrum::zeros(grid);
    for a in -kmax..=kmax {
        for b in -kmax..=kmax {
            for c in 0..=kmax {
                // in the k3 = 0 plane only draw one of each conjugate pair
                if c == 0 && (a < 0 || (a == 0 && b <= 0)) {
                    continue;
                }
                let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                let value = Complex64::from_polar(1.0, phase);
                let slot = grid.slot_of([a, b, c]).expect("mode within retained range");
                s[slot] = value;
                if c == 0 {
                    let partner = grid.slot_of([-a, -b, 0]).expect("mode within retained range");
                    s[partner] = value.conj();
                }
            }
        }
    }
    s
}

pub fn random_scalar<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, kmax: i64) -> ScalarField {
    grid.inverse(&random_spectrum(grid, rng, kmax))
}

pub fn random_vector<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, kmax: i64) -> VectorField {
    VectorField(std::array::from_fn(|_| random_scalar(grid, rng, kmax)))
}

pub fn random_tensor<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, kmax: i64) -> TensorField33 {
    TensorField33(std::array::from_fn(|_| random_scalar(grid, rng, kmax)))
}

/// Leray projection of a random vector field.
pub fn random_div_free<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, kmax: i64) -> VectorField {
    let mut vh: [Spectrum; 3] = std::array::from_fn(|_| random_spectrum(grid, rng, kmax));
    grid.leray_hat(&mut vh);
    grid.inverse_vector(&vh)
}

/// Rescale so that the field's maximum absolute value is `amplitude`.
pub fn normalized(f: &ScalarField, amplitude: f64) -> ScalarField {
    let m = f.max_abs();
    if m == 0.0 {
        f.clone()
    } else {
        f.scale(amplitude / m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_fields_are_band_limited_and_mean_free() {
        let grid = Grid::periodic(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_scalar(&grid, &mut rng, 2);
        assert!(f.mean().abs() < 1e-14);
        let s = grid.forward(&f);
        for idx in 0..grid.num_modes() {
            if grid.mode(idx).iter().any(|c| c.abs() > 2) {
                assert!(s[idx].norm() < 1e-14);
            }
        }
        let back = grid.inverse(&s);
        assert!(back.sub(&f).max_abs() < 1e-13);
    }

    #[test]
    fn same_seed_same_field() {
        let grid = Grid::periodic(8).unwrap();
        let a = random_vector(&grid, &mut ChaCha8Rng::seed_from_u64(3), 3);
        let b = random_vector(&grid, &mut ChaCha8Rng::seed_from_u64(3), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn third_band_values() {
        assert_eq!(third_band(&Grid::periodic(8).unwrap()), 1);
        assert_eq!(third_band(&Grid::periodic(16).unwrap()), 2);
        assert_eq!(third_band(&Grid::periodic(32).unwrap()), 5);
    }
}
