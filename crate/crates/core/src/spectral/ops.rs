//! Fourier-multiplier operators.
//!
//! Each operator comes in two flavours: a `*_hat` version acting on
//! [`Spectrum`] values (used inside the solver to avoid redundant transforms)
//! and a field-level version that transforms, applies the multiplier, and
//! transforms back.

use num_complex::Complex64;

use super::field::{ScalarField, Spectrum, TensorField33, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

/// Relative size of the zero mode below which a field counts as mean-free.
pub const MEAN_TOLERANCE: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub type VectorSpectrum = [Spectrum; 3];
pub type TensorSpectrum = [Spectrum; 9];

impl Grid {
    pub fn forward_vector(&self, v: &VectorField) -> VectorSpectrum {
        std::array::from_fn(|i| self.forward(&v[i]))
    }

    pub fn inverse_vector(&self, s: &VectorSpectrum) -> VectorField {
        VectorField(std::array::from_fn(|i| self.inverse(&s[i])))
    }

    pub fn forward_tensor(&self, t: &TensorField33) -> TensorSpectrum {
        std::array::from_fn(|c| self.forward(&t[c]))
    }

    pub fn inverse_tensor(&self, s: &TensorSpectrum) -> TensorField33 {
        TensorField33(std::array::from_fn(|c| self.inverse(&s[c])))
    }

    /// Multiply by `i k_axis`.
    pub fn deriv_hat(&self, s: &Spectrum, axis: usize) -> Spectrum {
        let kv = self.wavevectors();
        // i k c, written out to skip the complex multiply
        s.map_indexed(|idx, c| {
            let k = kv[idx][axis];
            Complex64::new(-k * c.im, k * c.re)
        })
    }

    pub fn grad_hat(&self, s: &Spectrum) -> VectorSpectrum {
        std::array::from_fn(|axis| self.deriv_hat(s, axis))
    }

    pub fn div_hat(&self, v: &VectorSpectrum) -> Spectrum {
        let kv = self.wavevectors();
        let mut out = Spectrum::zeros(self);
        for (idx, c) in out.as_mut_slice().iter_mut().enumerate() {
            let k = kv[idx];
            *c = I * (k[0] * v[0][idx] + k[1] * v[1][idx] + k[2] * v[2][idx]);
        }
        out
    }

    /// Row divergence: `(div T)_i = sum_j d_j T_ij`.
    pub fn div_tensor_hat(&self, t: &TensorSpectrum) -> VectorSpectrum {
        std::array::from_fn(|i| self.div_hat(&[t[3 * i].clone(), t[3 * i + 1].clone(), t[3 * i + 2].clone()]))
    }

    /// Velocity gradient with entry `(i, j) = d_j u_i`.
    pub fn grad_vec_hat(&self, u: &VectorSpectrum) -> TensorSpectrum {
        std::array::from_fn(|c| self.deriv_hat(&u[c / 3], c % 3))
    }

    pub fn laplacian_hat(&self, s: &Spectrum) -> Spectrum {
        let k2 = self.k2();
        s.map_indexed(|idx, c| -k2[idx] * c)
    }

    /// `-c / |k|^2`, zero mode mapped to zero. No mean check.
    pub fn inv_laplacian_hat(&self, s: &Spectrum) -> Spectrum {
        let k2 = self.k2();
        s.map_indexed(|idx, c| if k2[idx] > 0.0 { -c / k2[idx] } else { Complex64::new(0.0, 0.0) })
    }

    /// Multiply by `|k|^s`; the zero mode is zeroed whenever `s != 0`. No mean check.
    pub fn riesz_hat(&self, f: &Spectrum, s: f64) -> Spectrum {
        if s == 0.0 {
            return f.clone();
        }
        let k2 = self.k2();
        f.map_indexed(|idx, c| if k2[idx] > 0.0 { c * k2[idx].powf(0.5 * s) } else { Complex64::new(0.0, 0.0) })
    }

    /// Leray projection in place: `v - k (k . v) / |k|^2`, zero mode untouched.
    pub fn leray_hat(&self, v: &mut VectorSpectrum) {
        let kv = self.wavevectors();
        let k2 = self.k2();
        for idx in 0..self.num_modes() {
            if k2[idx] == 0.0 {
                continue;
            }
            let k = kv[idx];
            let kdotv = (k[0] * v[0][idx] + k[1] * v[1][idx] + k[2] * v[2][idx]) / k2[idx];
            for (a, comp) in v.iter_mut().enumerate() {
                comp[idx] -= k[a] * kdotv;
            }
        }
    }

    /// Zero every mode with some `|k_i|` above the 2/3 cutoff.
    pub fn dealias_hat(&self, s: &mut Spectrum) {
        for (c, &keep) in s.as_mut_slice().iter_mut().zip(self.dealias_mask()) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Transform a real-space product and dealias it.
    pub fn forward_dealiased(&self, f: &ScalarField) -> Spectrum {
        self.forward_band(f, self.dealias_cutoff())
    }

    /// `V * sum_k w(k) |c_k|^2` over the full spectrum, with `w` a function of `|k|^2`.
    /// The zero mode gets `w(0)`.
    pub fn weighted_energy_hat(&self, s: &Spectrum, w: impl Fn(f64) -> f64) -> f64 {
        let k2 = self.k2();
        let pw = self.parseval_weights();
        let sum: f64 = s
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(idx, _)| pw[*idx] > 0.0)
            .map(|(idx, c)| pw[idx] * w(k2[idx]) * c.norm_sqr())
            .sum();
        self.volume() * sum
    }

    /// Squared L2 norm computed on the spectral side (Parseval).
    pub fn l2_sq_hat(&self, s: &Spectrum) -> f64 {
        self.weighted_energy_hat(s, |_| 1.0)
    }

    /// Error unless the zero mode is negligible next to the field's RMS.
    pub fn check_zero_mean(&self, s: &Spectrum) -> std::result::Result<(), f64> {
        let mean = s[Grid::ZERO_MODE].re;
        let rms = (self.l2_sq_hat(s) / self.volume()).sqrt();
        if mean.abs() <= MEAN_TOLERANCE * rms || mean == 0.0 {
            Ok(())
        } else {
            Err(mean)
        }
    }

    /// `Lambda^s f`, the Fourier multiplier `|k|^s`.
    pub fn riesz(&self, f: &ScalarField, s: f64) -> Result<ScalarField> {
        let fh = self.forward(f);
        if s < 0.0 {
            self.check_zero_mean(&fh).map_err(|mean| Error::NegativeOrderOnNonzeroMean { mean })?;
        }
        Ok(self.inverse(&self.riesz_hat(&fh, s)))
    }

    pub fn grad(&self, f: &ScalarField) -> VectorField {
        self.inverse_vector(&self.grad_hat(&self.forward(f)))
    }

    pub fn div(&self, v: &VectorField) -> ScalarField {
        self.inverse(&self.div_hat(&self.forward_vector(v)))
    }

    pub fn div_tensor(&self, t: &TensorField33) -> VectorField {
        self.inverse_vector(&self.div_tensor_hat(&self.forward_tensor(t)))
    }

    pub fn grad_vec(&self, u: &VectorField) -> TensorField33 {
        self.inverse_tensor(&self.grad_vec_hat(&self.forward_vector(u)))
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        self.inverse(&self.laplacian_hat(&self.forward(f)))
    }

    pub fn leray_project(&self, v: &VectorField) -> VectorField {
        let mut vh = self.forward_vector(v);
        self.leray_hat(&mut vh);
        self.inverse_vector(&vh)
    }

    pub fn inv_laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        let fh = self.forward(f);
        self.check_zero_mean(&fh).map_err(|mean| Error::NonzeroMean { mean })?;
        Ok(self.inverse(&self.inv_laplacian_hat(&fh)))
    }

    pub fn dealias(&self, f: &ScalarField) -> ScalarField {
        self.inverse(&self.forward_dealiased(f))
    }

    /// Scalar field minus its mean.
    pub fn remove_mean(&self, f: &ScalarField) -> ScalarField {
        let m = f.mean();
        f.map(|v| v - m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::periodic(16).unwrap()
    }

    fn close(a: &ScalarField, b: &ScalarField, tol: f64) -> bool {
        let scale = a.max_abs().max(b.max_abs()).max(1e-300);
        a.sub(b).max_abs() / scale <= tol
    }

    #[test]
    fn riesz_unit_wavenumber_is_identity() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        for s in [-1.5, -0.3, 0.25, 1.0, 2.0] {
            assert!(close(&g.riesz(&f, s).unwrap(), &f, 1e-13));
        }
    }

    #[test]
    fn riesz_negative_order_halves_mode_two() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let want = f.scale(0.5);
        assert!(close(&g.riesz(&f, -1.0).unwrap(), &want, 1e-13));
    }

    #[test]
    fn riesz_negative_order_needs_zero_mean() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x| 1.0 + x[0].cos());
        assert!(matches!(g.riesz(&f, -1.0), Err(Error::NegativeOrderOnNonzeroMean { .. })));
        // positive orders just drop the mean
        let r = g.riesz(&f, 1.0).unwrap();
        assert!(r.mean().abs() < 1e-14);
    }

    #[test]
    fn gradient_of_sine() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x| x[1].sin());
        let gr = g.grad(&f);
        assert!(gr[0].max_abs() < 1e-14);
        assert!(close(&gr[1], &ScalarField::from_fn(&g, |x| x[1].cos()), 1e-13));
        assert!(gr[2].max_abs() < 1e-14);
    }

    #[test]
    fn shear_flow_is_divergence_free() {
        let g = grid();
        let u = VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!(g.div(&u).max_abs() < 1e-14);
    }

    #[test]
    fn projection_annihilates_gradients() {
        let g = grid();
        let v = g.grad(&ScalarField::from_fn(&g, |x| (x[0] + x[2]).sin()));
        assert!(g.leray_project(&v).max_abs() < 1e-14);
    }

    #[test]
    fn projection_keeps_divergence_free_fields_and_constants() {
        let g = grid();
        let v = VectorField::from_fn(&g, |x| [x[1].sin() + 0.7, (x[2] - x[0]).cos(), 0.2]);
        let p = g.leray_project(&v);
        for i in 0..3 {
            assert!(close(&p[i], &v[i], 1e-13));
        }
    }

    #[test]
    fn inverse_laplacian_of_cosines() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!(close(&g.inv_laplacian(&f).unwrap(), &f.scale(-1.0), 1e-13));
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        assert!(close(&g.inv_laplacian(&f).unwrap(), &f.scale(-0.25), 1e-13));
        let f = ScalarField::from_fn(&g, |x| 0.1 + x[0].cos());
        assert!(matches!(g.inv_laplacian(&f), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn dealias_keeps_low_and_drops_high_modes() {
        let g = grid();
        // cutoff for n = 16 is 5
        let low = ScalarField::from_fn(&g, |x| (5.0 * x[0]).sin() + (3.0 * x[1] - 2.0 * x[2]).cos());
        assert!(close(&g.dealias(&low), &low, 1e-13));
        let high = ScalarField::from_fn(&g, |x| (6.0 * x[2]).cos());
        assert!(g.dealias(&high).max_abs() < 1e-14);
        let once = g.dealias(&low.add(&high));
        assert!(close(&g.dealias(&once), &once, 1e-14));
    }

    #[test]
    fn parseval_on_cosine() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        let spectral = g.l2_sq_hat(&g.forward(&f)).sqrt();
        let want = (g.volume() / 2.0).sqrt();
        assert!((spectral - want).abs() < 1e-12 * want);
        assert!((f.l2_norm(&g) - want).abs() < 1e-12 * want);
    }
}
