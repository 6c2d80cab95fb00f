//! Sobolev norms and the time-weighted energies.
//!
//! All `H^k` norms use the Fourier multiplier `(1 + |k|^2)^k`:
//!
//! ```text
//! ||Lambda^s f||_{H^k}^2 = V sum_k (1 + |k|^2)^k |k|^{2s} |f_k|^2
//! ```
//!
//! which is equivalent to the sum-of-derivatives definition
//! `sum_{j<=k} ||grad^j f||^2` with constants `1` and [`c_equiv`]`(k)`.
//! Orders `k` may be fractional. For a vector or tensor the squared norms of
//! the components add up.
//!
//! The energies, with weights exactly as in their definitions:
//!
//! ```text
//! E   = sup (|| |D|^-1 u ||_H3^2 + || |D|^-1 G ||_H3^2)
//!     + int (|| u ||_H3^2 + || |D|^-1 P div G ||_H2^2)
//! E_w = sup (1+t) (|| u ||_H2^2 + || |D|^-1 P div G ||_H2^2)
//!     + int (1+t) (|| grad u ||_H2^2 + || P div G ||_H1^2)
//! E_s = sup (1+t)^2 (|| grad u ||_H1^2 + || P div G ||_H1^2)
//!     + int (1+t)^2 (|| grad^2 u ||_H1^2 + || grad P div G ||_L2^2)
//! E_a = sup (|| |D|^g rho ||_H(2-g)^2 + || |D|^g (F - I) ||_H(2-g)^2)
//! ```
//!
//! Sups and integrals are taken over the recorded snapshots (trapezoid rule).
//! `u` and `G` may carry a small nonzero mean, which `|D|^-1` cannot act on;
//! the zero mode is left out of those two terms.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::spectral::{Grid, ScalarField, Spectrum, TensorField33};

/// `sqrt(V sum (1+|k|^2)^k |k|^{2s} |f_k|^2)`. The zero mode counts only when `s = 0`.
pub fn sobolev_norm(grid: &Grid, f: &ScalarField, s: f64, k: f64) -> Result<f64> {
    let fh = grid.forward(f);
    if s < 0.0 {
        grid.check_zero_mean(&fh).map_err(|mean| Error::NegativeOrderOnNonzeroMean { mean })?;
    }
    Ok(sobolev_sq_hat(grid, &fh, s, k).sqrt())
}

/// Squared norm on spectral data; the zero mode is skipped whenever `s != 0`.
pub fn sobolev_sq_hat(grid: &Grid, fh: &Spectrum, s: f64, k: f64) -> f64 {
    grid.weighted_energy_hat(fh, |k2| {
        if s != 0.0 && k2 == 0.0 {
            0.0
        } else {
            (1.0 + k2).powf(k) * if s == 0.0 { 1.0 } else { k2.powf(s) }
        }
    })
}

fn sum_sq(grid: &Grid, comps: &[Spectrum], s: f64, k: f64) -> f64 {
    comps.iter().map(|c| sobolev_sq_hat(grid, c, s, k)).sum()
}

/// Sharp constant `C` in `sum_{j<=k} x^j <= (1+x)^k <= C sum_{j<=k} x^j`
/// (`x = |k|^2 >= 0`), attained at `x = 1`: `C = 2^k / (k+1)`.
pub fn c_equiv(k: u32) -> f64 {
    2f64.powi(k as i32) / f64::from(k + 1)
}

/// Norm-equivalence constant used for the interpolation check: the largest
/// [`c_equiv`] over the orders entering the energies (`H^1`..`H^3`).
pub fn interpolation_constant() -> f64 {
    (1..=3).map(c_equiv).fold(1.0, f64::max)
}

/// Labels of [`EnergySnapshot::values`], in column order.
pub const LABELS: [&str; 13] = [
    "Hm1_H3_u",
    "Hm1_H3_G",
    "u_H3",
    "Hm1_PdivG_H2",
    "u_H2",
    "grad_u_H2",
    "PdivG_H1",
    "grad_u_H1",
    "grad2_u_H1",
    "grad_PdivG_L2",
    "rho_Hgamma_H2mg",
    "F_Hgamma_H2mg",
    "dissipation",
];

const HM1_H3_U: usize = 0;
const HM1_H3_G: usize = 1;
const U_H3: usize = 2;
const HM1_PDIVG_H2: usize = 3;
const U_H2: usize = 4;
const GRAD_U_H2: usize = 5;
const PDIVG_H1: usize = 6;
const GRAD_U_H1: usize = 7;
const GRAD2_U_H1: usize = 8;
const GRAD_PDIVG_L2: usize = 9;
const RHO_HG: usize = 10;
const F_HG: usize = 11;
const DISSIPATION: usize = 12;

/// Instantaneous norms at one time. Every entry except `dissipation`
/// (`||grad u||_L2^2`) is an unsquared norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySnapshot {
    pub t: f64,
    pub values: [f64; 13],
    /// `int (rho~ |u|^2 / 2 + c^2 rho~ (|F|^2 - 3) / 2)`. The constant
    /// `3 c^2 int rho~ / 2`, conserved by the flow, is dropped to keep the
    /// value at perturbation scale; the result can be negative.
    pub physical_energy: f64,
    /// `int (rho~ - 1)^2`, conserved by transport.
    pub density_variance: f64,
}

impl EnergySnapshot {
    pub fn get(&self, label: &str) -> Option<f64> {
        LABELS.iter().position(|&l| l == label).map(|i| self.values[i])
    }

    pub fn norms(&self) -> BTreeMap<&'static str, f64> {
        LABELS.iter().copied().zip(self.values).collect()
    }

    fn sq(&self, i: usize) -> f64 {
        self.values[i] * self.values[i]
    }

    /// Instantaneous parts under the four sups, unweighted.
    fn sup_terms(&self) -> [f64; 4] {
        [
            self.sq(HM1_H3_U) + self.sq(HM1_H3_G),
            self.sq(U_H2) + self.sq(HM1_PDIVG_H2),
            self.sq(GRAD_U_H1) + self.sq(PDIVG_H1),
            self.sq(RHO_HG) + self.sq(F_HG),
        ]
    }

    /// Integrands of E, E_w, E_s, unweighted.
    fn integrands(&self) -> [f64; 3] {
        [
            self.sq(U_H3) + self.sq(HM1_PDIVG_H2),
            self.sq(GRAD_U_H2) + self.sq(PDIVG_H1),
            self.sq(GRAD2_U_H1) + self.sq(GRAD_PDIVG_L2),
        ]
    }

    pub fn dissipation(&self) -> f64 {
        self.values[DISSIPATION]
    }
}

/// Norms of `state` with `G` supplied by the caller (direct or co-evolved).
pub fn snapshot(
    grid: &Grid,
    state: &State,
    g: &TensorField33,
    params: &ModelParams,
    gamma0: f64,
) -> Result<EnergySnapshot> {
    if !(gamma0 > 0.0 && gamma0 < 0.5) {
        return Err(Error::InvalidConfig(format!("gamma0 must lie in (0, 1/2), got {gamma0}")));
    }
    let u_hat = grid.forward_vector(&state.u);
    let g_hat = grid.forward_tensor(g);
    let mut pdivg = grid.div_tensor_hat(&g_hat);
    grid.leray_hat(&mut pdivg);
    let rho_hat = grid.forward(&state.rho());
    let h = state.f_minus_identity();
    let h_hat = grid.forward_tensor(&h);
    let gm = 2.0 - gamma0;

    let mut values = [0.0; 13];
    values[HM1_H3_U] = sum_sq(grid, &u_hat, -1.0, 3.0);
    values[HM1_H3_G] = sum_sq(grid, &g_hat, -1.0, 3.0);
    values[U_H3] = sum_sq(grid, &u_hat, 0.0, 3.0);
    values[HM1_PDIVG_H2] = sum_sq(grid, &pdivg, -1.0, 2.0);
    values[U_H2] = sum_sq(grid, &u_hat, 0.0, 2.0);
    values[GRAD_U_H2] = sum_sq(grid, &u_hat, 1.0, 2.0);
    values[PDIVG_H1] = sum_sq(grid, &pdivg, 0.0, 1.0);
    values[GRAD_U_H1] = sum_sq(grid, &u_hat, 1.0, 1.0);
    values[GRAD2_U_H1] = sum_sq(grid, &u_hat, 2.0, 1.0);
    values[GRAD_PDIVG_L2] = sum_sq(grid, &pdivg, 1.0, 0.0);
    values[RHO_HG] = sobolev_sq_hat(grid, &rho_hat, gamma0, gm);
    values[F_HG] = sum_sq(grid, &h_hat, gamma0, gm);
    for v in values.iter_mut().take(DISSIPATION) {
        *v = v.sqrt();
    }
    values[DISSIPATION] = sum_sq(grid, &u_hat, 1.0, 0.0);

    let dv = grid.cell_volume();
    let c2 = params.c * params.c;
    // the trace term is first order and cancels to second order in the sum,
    // so plain summation would leave round-off far above the energy changes
    let mut physical = Neumaier::default();
    let mut variance = Neumaier::default();
    for p in 0..grid.num_points() {
        let r = state.rho_tilde.as_slice()[p];
        let u2: f64 = (0..3).map(|i| state.u[i].as_slice()[p].powi(2)).sum();
        let hm = h.at(p);
        let tr = hm[0][0] + hm[1][1] + hm[2][2];
        let h2: f64 = hm.iter().flatten().map(|v| v * v).sum();
        physical.add(0.5 * r * u2);
        physical.add(c2 * r * tr);
        physical.add(0.5 * c2 * r * h2);
        variance.add((r - 1.0).powi(2));
    }
    let snap = EnergySnapshot {
        t: state.t,
        values,
        physical_energy: physical.total() * dv,
        density_variance: variance.total() * dv,
    };
    if let Some(i) = snap.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { field: LABELS[i] });
    }
    Ok(snap)
}

/// Compensated summation.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Running energies after a snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub e: f64,
    pub e_w: f64,
    pub e_s: f64,
    pub e_a: f64,
    pub e_total: f64,
    /// Running `int (1+t)^2 ||grad^2 u||_H1^2`, on its own.
    pub strong_dissipation: f64,
}

#[derive(Clone, Debug, Default)]
pub struct EnergyHistory {
    pub snapshots: Vec<EnergySnapshot>,
    pub records: Vec<EnergyRecord>,
    sups: [f64; 4],
    integrals: [f64; 3],
    strong: f64,
}

impl EnergyHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last(&self) -> Option<&EnergyRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Append a snapshot, updating sups and extending the integrals.
    pub fn push(&mut self, snap: EnergySnapshot) -> Result<&EnergyRecord> {
        let t = snap.t;
        let w = [1.0, 1.0 + t, (1.0 + t).powi(2), 1.0];
        let terms = snap.sup_terms();
        for i in 0..4 {
            self.sups[i] = self.sups[i].max(w[i] * terms[i]);
        }
        if let Some(prev) = self.snapshots.last() {
            if !(t > prev.t) {
                return Err(Error::NonMonotoneTime { prev: prev.t, next: t });
            }
            let tp = prev.t;
            let wp = [1.0, 1.0 + tp, (1.0 + tp).powi(2)];
            let (a, b) = (prev.integrands(), snap.integrands());
            let h = t - tp;
            for i in 0..3 {
                self.integrals[i] += 0.5 * h * (wp[i] * a[i] + w[i] * b[i]);
            }
            self.strong += 0.5 * h * (wp[2] * prev.sq(GRAD2_U_H1) + w[2] * snap.sq(GRAD2_U_H1));
        }
        let e = self.sups[0] + self.integrals[0];
        let e_w = self.sups[1] + self.integrals[1];
        let e_s = self.sups[2] + self.integrals[2];
        let e_a = self.sups[3];
        self.records.push(EnergyRecord {
            t,
            e,
            e_w,
            e_s,
            e_a,
            e_total: e + e_w + e_s + e_a,
            strong_dissipation: self.strong,
        });
        self.snapshots.push(snap);
        Ok(self.records.last().expect("just pushed"))
    }
}

/// Functional form of [`EnergyHistory::push`].
pub fn update_history(mut history: EnergyHistory, snap: EnergySnapshot) -> Result<EnergyHistory> {
    history.push(snap)?;
    Ok(history)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpolationReport {
    /// `max_t (E_w - C sqrt(E E_s))`; non-positive when the inequality holds.
    pub max_violation: f64,
    /// `max_t E_w / sqrt(E E_s)` over records with `E E_s > 0`.
    pub max_ratio: f64,
    pub c_equiv: f64,
}

/// Check `E_w <= C sqrt(E E_s)` at every record, `C` from [`interpolation_constant`].
pub fn check_interpolation(history: &EnergyHistory) -> InterpolationReport {
    let c = interpolation_constant();
    let mut max_violation: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for r in &history.records {
        let bound = (r.e * r.e_s).sqrt();
        max_violation = max_violation.max(r.e_w - c * bound);
        if bound > 0.0 {
            max_ratio = max_ratio.max(r.e_w / bound);
        }
    }
    InterpolationReport { max_violation, max_ratio, c_equiv: c }
}

/// Which `omega(rho~)` enters the total energy of the dissipation law.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Omega {
    #[default]
    Zero,
    /// `omega = (rho~ - 1)^2`; conserved, so the residual should not change.
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DissipationPoint {
    pub t: f64,
    /// `dE/dt + mu ||grad u||^2`.
    pub residual: f64,
    /// `|residual| / (mu ||grad u||^2 + floor)`.
    pub relative: f64,
}

/// Relative floor on the dissipation used in [`DissipationPoint::relative`].
pub const DISSIPATION_FLOOR: f64 = 1e-12;

/// Three-point derivative at `x[i]` on a non-uniform grid (one-sided at the ends).
fn derivative(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    let (a, b, c) = if i == 0 {
        (0, 1, 2)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    let xi = x[i];
    // derivative of the Lagrange interpolant through (a, b, c)
    let l = |j: usize, k: usize, m: usize| ((xi - x[k]) + (xi - x[m])) / ((x[j] - x[k]) * (x[j] - x[m]));
    y[a] * l(a, b, c) + y[b] * l(b, a, c) + y[c] * l(c, a, b)
}

/// Residual of `d/dt int(rho~|u|^2/2 + omega + c^2 rho~|F|^2/2) = -mu ||grad u||^2`
/// at every snapshot, with the time derivative taken by three-point differences.
pub fn dissipation_check(history: &EnergyHistory, params: &ModelParams, omega: Omega) -> Result<Vec<DissipationPoint>> {
    let snaps = &history.snapshots;
    if snaps.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: snaps.len() });
    }
    let t: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let energy: Vec<f64> = snaps
        .iter()
        .map(|s| {
            s.physical_energy
                + match omega {
                    Omega::Zero => 0.0,
                    Omega::Quadratic => s.density_variance,
                }
        })
        .collect();
    let max_diss = snaps.iter().map(|s| params.mu * s.dissipation()).fold(0.0, f64::max);
    let floor = DISSIPATION_FLOOR * max_diss;
    Ok((0..snaps.len())
        .map(|i| {
            let d = params.mu * snaps[i].dissipation();
            let residual = derivative(&t, &energy, i) + d;
            let relative = if residual == 0.0 { 0.0 } else { residual.abs() / (d + floor) };
            DissipationPoint { t: t[i], residual, relative }
        })
        .collect())
}

/// Least-squares slope of `log(value)` against `log(1+t)`.
pub fn fit_decay_rate(series: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        series.iter().filter(|(_, v)| *v > 0.0).map(|&(t, v)| ((1.0 + t).ln(), v.ln())).collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalence_constants() {
        assert_eq!(c_equiv(0), 1.0);
        assert_eq!(c_equiv(1), 1.0);
        assert!((c_equiv(2) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(c_equiv(3), 2.0);
        assert_eq!(interpolation_constant(), 2.0);
        // the bound is attained at x = 1 and never exceeded
        for k in 0..=3 {
            for i in 0..200 {
                let x = i as f64 * 0.05;
                let sum: f64 = (0..=k).map(|j| x.powi(j)).sum();
                assert!((1.0 + x).powi(k) <= c_equiv(k as u32) * sum * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn parseval_single_mode() {
        let g = Grid::periodic(8).unwrap();
        let v = g.volume();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!((sobolev_norm(&g, &f, 0.0, 0.0).unwrap() - (v / 2.0).sqrt()).abs() < 1e-12);
        let f2 = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        assert!((sobolev_norm(&g, &f2, -1.0, 0.0).unwrap() - 0.5 * (v / 2.0).sqrt()).abs() < 1e-12);
        let shifted = f.map(|x| x + 1.0);
        assert!(sobolev_norm(&g, &shifted, -1.0, 0.0).is_err());
    }

    #[test]
    fn trapezoid_on_constant_integrand() {
        let g = Grid::periodic(8).unwrap();
        let mut st = State::equilibrium(&g);
        st.u = crate::spectral::VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let gz = TensorField33::zeros(&g);
        let p = ModelParams::default();
        let mut h = EnergyHistory::new();
        let s0 = snapshot(&g, &st, &gz, &p, 0.25).unwrap();
        let q = s0.integrands()[0];
        h.push(s0).unwrap();
        st.t = 0.5;
        h.push(snapshot(&g, &st, &gz, &p, 0.25).unwrap()).unwrap();
        let sup = h.snapshots[0].sup_terms()[0];
        assert!((h.records[1].e - (sup + 0.5 * q)).abs() < 1e-12 * q);
        st.t = 0.5;
        assert!(matches!(h.push(snapshot(&g, &st, &gz, &p, 0.25).unwrap()), Err(Error::NonMonotoneTime { .. })));
    }

    #[test]
    fn decay_rate_fits() {
        let s: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, (1.0 + i as f64).powi(-2))).collect();
        assert!((fit_decay_rate(&s).unwrap() + 2.0).abs() < 1e-10);
        let c: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 3.0)).collect();
        assert!(fit_decay_rate(&c).unwrap().abs() < 1e-12);
        assert!(fit_decay_rate(&c[..5]).is_err());
    }

    #[test]
    fn nonuniform_derivative_is_exact_on_quadratics() {
        let x = [0.0, 0.1, 0.35, 0.4, 0.9];
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t * t - t + 2.0).collect();
        for i in 0..x.len() {
            assert!((derivative(&x, &y, i) - (6.0 * x[i] - 1.0)).abs() < 1e-12);
        }
    }
}
