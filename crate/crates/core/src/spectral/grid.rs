use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{ScalarField, Spectrum};
use crate::error::{Error, Result};

/// Periodic box `[0, L)^3` sampled on `n` points per axis.
///
/// Spectral data uses the real-to-complex layout: the last axis (`x3`) keeps
/// the `n/2 + 1` non-negative modes, the first two axes keep all `n` modes in
/// FFT order. Index `(i1, i2, i3)` lives at `(i3 * n + i2) * n + i1`, so each
/// `k3` plane is a contiguous `n x n` block with `k1` running fastest.
///
/// The mode set is truncated symmetrically: the Nyquist index on every axis is
/// dropped by [`Grid::forward`], so retained wavenumbers satisfy
/// `|k_i| <= n/2 - 1` (in units of `2 pi / L`). Every Fourier multiplier is then
/// Hermitian and the transform round trip is exact for band-limited fields.
///
/// Normalization: `forward` divides by `n^3`, so the coefficients are Fourier
/// series coefficients (`cos(x1)` maps to `1/2` at `k = (+-1, 0, 0)`) and
/// `inverse` is a plain sum.
pub struct Grid {
    n: usize,
    length: f64,
    half: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    modes: Vec<[i64; 3]>,
    wavevectors: Vec<[f64; 3]>,
    k2: Vec<f64>,
    retained: Vec<bool>,
    dealias_mask: Vec<bool>,
    parseval_weight: Vec<f64>,
    dealias_cutoff: i64,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("length", &self.length).finish()
    }
}

thread_local! {
    // Work buffers are a few hundred KiB at typical sizes; reusing them avoids
    // fresh page faults on every transform.
    static POOL: RefCell<Vec<Vec<Complex64>>> = const { RefCell::new(Vec::new()) };
}

fn take_buffer() -> Vec<Complex64> {
    POOL.with(|p| p.borrow_mut().pop()).unwrap_or_default()
}

fn return_buffer(mut buf: Vec<Complex64>) {
    buf.clear();
    POOL.with(|p| {
        let mut pool = p.borrow_mut();
        if pool.len() < 4 {
            pool.push(buf);
        }
    });
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("modes per axis must be even and >= 4, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidConfig(format!("box length must be positive, got {length}")));
        }
        let half = n / 2 + 1;
        let mut planner = FftPlanner::<f64>::new();

        let nyq = (n / 2) as i64;
        let cutoff = ((n as i64) - 1) / 3;
        let unit = 2.0 * PI / length;
        let fold = |i: usize| -> i64 {
            let i = i as i64;
            if i < nyq {
                i
            } else {
                i - n as i64
            }
        };

        let len = n * n * half;
        let mut modes = Vec::with_capacity(len);
        let mut wavevectors = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut retained = Vec::with_capacity(len);
        let mut dealias_mask = Vec::with_capacity(len);
        let mut parseval_weight = Vec::with_capacity(len);
        for i3 in 0..half {
            for i2 in 0..n {
                for i1 in 0..n {
                    let m = [fold(i1), fold(i2), i3 as i64];
                    let keep = i1 as i64 != nyq && i2 as i64 != nyq && i3 as i64 != nyq;
                    let kv = if keep { [m[0] as f64 * unit, m[1] as f64 * unit, m[2] as f64 * unit] } else { [0.0; 3] };
                    modes.push(m);
                    wavevectors.push(kv);
                    k2.push(kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]);
                    retained.push(keep);
                    dealias_mask.push(keep && m.iter().all(|c| c.abs() <= cutoff));
                    parseval_weight.push(match (keep, i3) {
                        (false, _) => 0.0,
                        (true, 0) => 1.0,
                        (true, _) => 2.0,
                    });
                }
            }
        }

        Ok(Self {
            n,
            length,
            half,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            modes,
            wavevectors,
            k2,
            retained,
            dealias_mask,
            parseval_weight,
            dealias_cutoff: cutoff,
        })
    }

    /// Grid on the `2 pi` box.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn num_points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn num_modes(&self) -> usize {
        self.n * self.n * self.half
    }

    /// Largest retained integer wavenumber per axis.
    pub fn max_mode(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    /// Largest integer wavenumber per axis kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        self.dealias_cutoff
    }

    /// Coordinates of real-space point `p` (flat index).
    pub fn point(&self, p: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.spacing();
        [(p / (n * n)) as f64 * h, ((p / n) % n) as f64 * h, (p % n) as f64 * h]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.num_points()).map(move |p| self.point(p))
    }

    /// Integer mode of spectral slot `idx`.
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        self.modes[idx]
    }

    /// Physical wavevector of spectral slot `idx` (zero on dropped Nyquist slots).
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        self.wavevectors[idx]
    }

    pub fn wavevectors(&self) -> &[[f64; 3]] {
        &self.wavevectors
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        self.retained[idx]
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias_mask
    }

    /// Multiplicity of a half-spectrum slot in the full spectrum (1 or 2, 0 if dropped).
    pub fn parseval_weights(&self) -> &[f64] {
        &self.parseval_weight
    }

    /// Spectral slot of the zero mode.
    pub const ZERO_MODE: usize = 0;

    /// Slot holding the integer mode `k`, if it is stored in the half spectrum.
    pub fn slot_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        if k[2] < 0 || k.iter().any(|c| c.abs() > self.max_mode()) {
            return None;
        }
        let wrap = |c: i64| c.rem_euclid(n) as usize;
        Some((k[2] as usize * self.n + wrap(k[1])) * self.n + wrap(k[0]))
    }

    /// Real-space samples to Fourier coefficients; Nyquist slots are zeroed.
    pub fn forward(&self, f: &ScalarField) -> Spectrum {
        self.forward_band(f, self.max_mode())
    }

    /// Forward transform computing only modes with every `|k_i| <= kmax`;
    /// all other slots come back zero.
    pub(crate) fn forward_band(&self, f: &ScalarField, kmax: i64) -> Spectrum {
        let n = self.n;
        debug_assert_eq!(f.len(), self.num_points());
        let kmax = kmax.min(self.max_mode());
        let k = kmax as usize;
        let planes = k + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_modes()];
        self.rows_forward(f.as_slice(), &mut out, planes);

        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let live = &mut out[..planes * n * n];
        // x2 lines are contiguous
        self.fft.process_with_scratch(live, &mut scratch);
        // x1 lines become contiguous after transposing each plane, which also
        // leaves k1 running fastest; only in-band k2 rows are needed
        for plane in live.chunks_exact_mut(n * n) {
            transpose(plane, n);
            self.fft.process_with_scratch(&mut plane[..planes * n], &mut scratch);
            if k > 0 {
                self.fft.process_with_scratch(&mut plane[(n - k) * n..], &mut scratch);
            }
        }

        let scale = 1.0 / self.num_points() as f64;
        let mask: &[bool] = if kmax == self.max_mode() {
            &self.retained
        } else if kmax == self.dealias_cutoff {
            &self.dealias_mask
        } else {
            &self.band_mask(kmax)
        };
        for (c, &keep) in live.iter_mut().zip(mask) {
            *c = if keep { *c * scale } else { Complex64::new(0.0, 0.0) };
        }
        Spectrum::from_vec(out)
    }

    fn band_mask(&self, kmax: i64) -> Vec<bool> {
        self.retained.iter().zip(&self.modes).map(|(&r, m)| r && m.iter().all(|c| c.abs() <= kmax)).collect()
    }

    /// Fourier coefficients to real-space samples.
    ///
    /// Planes and lines of the spectrum that are entirely zero (typical for
    /// dealiased data) are skipped.
    pub fn inverse(&self, s: &Spectrum) -> ScalarField {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        let mut work = take_buffer();
        work.extend_from_slice(s.as_slice());
        let mut scratch = vec![zero; self.ifft.get_inplace_scratch_len()];
        for plane in work.chunks_exact_mut(n * n) {
            if plane.iter().all(|c| *c == zero) {
                continue;
            }
            for line in plane.chunks_exact_mut(n) {
                if line.iter().any(|c| *c != zero) {
                    self.ifft.process_with_scratch(line, &mut scratch);
                }
            }
            transpose(plane, n);
            self.ifft.process_with_scratch(plane, &mut scratch);
        }
        let mut out = Vec::with_capacity(self.num_points());
        self.rows_inverse(&work, &mut out);
        return_buffer(work);
        ScalarField::from_raw(out)
    }

    /// Real FFT of every `x3` row, two rows packed into one complex transform;
    /// the first `planes` values of `k3` are stored.
    fn rows_forward(&self, f: &[f64], out: &mut [Complex64], planes: usize) {
        let n = self.n;
        let plane = n * n;
        let mut buf = take_buffer();
        buf.reserve(plane / 2 * n);
        for pair in f.chunks_exact(2 * n) {
            let (a, b) = pair.split_at(n);
            buf.extend(a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)));
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        let minus_half_i = Complex64::new(0.0, -0.5);
        for (q, z) in buf.chunks_exact(n).enumerate() {
            for k in 0..planes {
                let zk = z[k];
                let zc = z[(n - k) % n].conj();
                let slot = k * plane + 2 * q;
                out[slot] = 0.5 * (zk + zc);
                out[slot + 1] = (zk - zc) * minus_half_i;
            }
        }
        return_buffer(buf);
    }

    /// Inverse of [`Grid::rows_forward`]; the DC and Nyquist bins are taken as real.
    fn rows_inverse(&self, data: &[Complex64], out: &mut Vec<f64>) {
        let n = self.n;
        let half = self.half;
        let plane = n * n;
        let mut buf = take_buffer();
        buf.reserve(plane / 2 * n);
        // z = a + i b, with a and b Hermitian-extended from their half spectra
        let join = |a: Complex64, b: Complex64| Complex64::new(a.re - b.im, a.im + b.re);
        let mut a = vec![Complex64::new(0.0, 0.0); half];
        let mut b = a.clone();
        for q in 0..plane / 2 {
            for k in 0..half {
                a[k] = data[k * plane + 2 * q];
                b[k] = data[k * plane + 2 * q + 1];
            }
            buf.push(Complex64::new(a[0].re, b[0].re));
            buf.extend((1..half - 1).map(|k| join(a[k], b[k])));
            buf.push(Complex64::new(a[half - 1].re, b[half - 1].re));
            buf.extend((half..n).map(|k| join(a[n - k].conj(), b[n - k].conj())));
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.ifft.get_inplace_scratch_len()];
        self.ifft.process_with_scratch(&mut buf, &mut scratch);
        for z in buf.chunks_exact(n) {
            out.extend(z.iter().map(|c| c.re));
            out.extend(z.iter().map(|c| c.im));
        }
        return_buffer(buf);
    }
}

/// In-place transpose of a square `n x n` block.
fn transpose(m: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            m.swap(i * n + j, j * n + i);
        }
    }
}
