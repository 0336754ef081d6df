//! Fourier-space solver. The internal state is always the polariton spectrum;
//! physical fields are views scaled by the instantaneous control amplitude.
//!
//! Conventions: `Psi(z) = int dk e^{ikz} psi(k)`, discretized on a periodic box
//! of `nk` cells of width `dz` centered on the medium. The medium cells are a
//! contiguous slice of the box, so field samples map one to one.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dispersion::{
    chi_minus, delta_k, locking_factors, phase_integral, propagator_prefactor, SpectralModel,
};
use crate::error::{Error, Result};
use crate::params::{Branch, ControlSchedule, MediumParams, Scenario};
use crate::FieldState;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Tolerated excess of `|B|` over one before a gain warning.
pub const GAIN_TOL: f64 = 1e-6;

/// Periodic box and wavenumber grid shared by all spectral operations.
#[derive(Clone)]
pub struct SpectralGrid {
    nz: usize,
    nk: usize,
    dz: f64,
    offset: usize,
    box_start: f64,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("nz", &self.nz)
            .field("nk", &self.nk)
            .field("dz", &self.dz)
            .finish()
    }
}

impl SpectralGrid {
    /// `nz` medium cells of width `dz` starting at z = 0, embedded in a box of
    /// `nk >= nz` cells.
    pub fn new(nz: usize, nk: usize, dz: f64) -> Result<Self> {
        if nz == 0 || nk < nz {
            return Err(Error::Grid(format!(
                "need 0 < nz <= nk (nz = {nz}, nk = {nk})"
            )));
        }
        if !(dz > 0.0) {
            return Err(Error::Grid("dz must be positive".into()));
        }
        let offset = (nk - nz) / 2;
        let box_start = (0.5 - offset as f64) * dz;
        let dk = 2.0 * PI / (nk as f64 * dz);
        let k = (0..nk)
            .map(|m| {
                if m < nk.div_ceil(2) {
                    m as f64 * dk
                } else {
                    (m as f64 - nk as f64) * dk
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(SpectralGrid {
            nz,
            nk,
            dz,
            offset,
            box_start,
            k,
            fwd: planner.plan_fft_forward(nk),
            inv: planner.plan_fft_inverse(nk),
        })
    }

    pub fn for_scenario(s: &Scenario) -> Result<Self> {
        Self::new(s.grid.nz, s.grid.nk, s.dz())
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn nk(&self) -> usize {
        self.nk
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.nk as f64 * self.dz)
    }

    /// Wavenumbers in FFT order.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Medium cell centers.
    pub fn z(&self) -> Vec<f64> {
        (0..self.nz).map(|i| (i as f64 + 0.5) * self.dz).collect()
    }

    /// Spectrum of a field sampled on the medium cells (zero elsewhere in the box).
    pub fn transform(&self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        if field.len() != self.nz {
            return Err(Error::Grid(format!(
                "field has {} samples, expected {}",
                field.len(),
                self.nz
            )));
        }
        let mut buf = vec![ZERO; self.nk];
        buf[self.offset..self.offset + self.nz].copy_from_slice(field);
        self.fwd.process(&mut buf);
        let scale = self.dz / (2.0 * PI);
        for (b, &k) in buf.iter_mut().zip(&self.k) {
            *b *= scale * Complex64::from_polar(1.0, -k * self.box_start);
        }
        Ok(buf)
    }

    /// Field on the medium cells from a spectrum.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        let full = self.inverse_box(spectrum)?;
        Ok(full[self.offset..self.offset + self.nz].to_vec())
    }

    /// Field on the whole periodic box.
    pub fn inverse_box(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        if spectrum.len() != self.nk {
            return Err(Error::Grid(format!(
                "spectrum has {} modes, expected {}",
                spectrum.len(),
                self.nk
            )));
        }
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .zip(&self.k)
            .map(|(&p, &k)| p * Complex64::from_polar(1.0, k * self.box_start))
            .collect();
        self.inv.process(&mut buf);
        let dk = self.dk();
        for b in &mut buf {
            *b *= dk;
        }
        Ok(buf)
    }
}

/// Polariton mode amplitudes at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub t: f64,
    pub k_o: f64,
    pub psi_plus: Vec<Complex64>,
    pub psi_minus: Vec<Complex64>,
}

impl SpectralState {
    /// `sum |psi_+|^2 dk`.
    pub fn norm_plus(&self, grid: &SpectralGrid) -> f64 {
        self.psi_plus.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dk()
    }
}

/// Gaussian probe spectrum at `t_o`, `psi_+ = A_in A(k)` with unit-normalized
/// `A(k) = (l_o/sqrt(pi))^{1/2} exp(-(k l_o)^2/2 - i k z_c + i(theta - phi_+))`,
/// where `z_c` is the probe centroid at `t_o`.
pub fn initial_spectrum(scenario: &Scenario, grid: &SpectralGrid) -> Result<SpectralState> {
    let l_o = scenario.l_o();
    let k_max = PI / grid.dz();
    if k_max * l_o < 8.0 {
        return Err(Error::Grid(format!(
            "k grid does not resolve the probe: k_max l_o = {:.3}",
            k_max * l_o
        )));
    }
    let p = &scenario.probe;
    let norm = (l_o / PI.sqrt()).sqrt() * p.amplitude_in;
    let phase = p.phase - scenario.schedule.phi_plus;
    let psi_plus = grid
        .k()
        .iter()
        .map(|&k| {
            norm * Complex64::from_polar((-0.5 * (k * l_o).powi(2)).exp(), phase - k * p.center_z)
        })
        .collect();
    Ok(SpectralState {
        t: scenario.times.t_o,
        k_o: scenario.medium.k_o,
        psi_plus,
        psi_minus: vec![ZERO; grid.nk()],
    })
}

/// Spectrum of the forward polariton `e^{ik_o z} sqrt(Ng^2) A_+ / Omega_+(t)`
/// computed from a sampled forward field; the backward spectrum follows by
/// mode locking.
pub fn spectrum_from_field(
    a_plus: &[Complex64],
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
    grid: &SpectralGrid,
) -> Result<SpectralState> {
    let (wp, _) = schedule.rabi(t);
    if wp.norm() == 0.0 {
        return Err(Error::Degenerate(
            "forward control is off; polariton undefined".into(),
        ));
    }
    let g = medium.coupling();
    let psi: Vec<Complex64> = a_plus
        .iter()
        .zip(grid.z())
        .map(|(&a, z)| a * g / wp * Complex64::from_polar(1.0, medium.k_o * z))
        .collect();
    let psi_plus = grid.transform(&psi)?;
    let psi_minus = lock_modes(&psi_plus, medium, grid)?;
    Ok(SpectralState {
        t,
        k_o: medium.k_o,
        psi_plus,
        psi_minus,
    })
}

fn lock_modes(
    psi_plus: &[Complex64],
    medium: &MediumParams,
    grid: &SpectralGrid,
) -> Result<Vec<Complex64>> {
    psi_plus
        .iter()
        .zip(grid.k())
        .map(|(&p, &k)| Ok(chi_minus(k, medium)? * p))
        .collect()
}

/// Inputs of a spectral evolution.
#[derive(Debug, Clone)]
pub struct SpectralRun {
    pub medium: MediumParams,
    pub schedule: ControlSchedule,
    pub grid: SpectralGrid,
    pub initial: SpectralState,
    pub output_times: Vec<f64>,
    pub model: SpectralModel,
}

impl SpectralRun {
    pub fn new(scenario: &Scenario, model: SpectralModel) -> Result<Self> {
        let grid = SpectralGrid::for_scenario(scenario)?;
        let initial = initial_spectrum(scenario, &grid)?;
        Ok(SpectralRun {
            medium: scenario.medium,
            schedule: scenario.schedule.clone(),
            grid,
            initial,
            output_times: scenario.snapshot_times(),
            model,
        })
    }
}

/// Outcome of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub states: Vec<SpectralState>,
    /// Largest switching prefactor met; exceeds one only for the eliminated-spin model.
    pub max_prefactor: f64,
    /// Largest `|B|` met. Above one means spurious gain.
    pub max_gain: f64,
    /// Modes outside the validity band of the model, set to zero.
    pub dropped_modes: usize,
}

/// The eliminated-spin relation is an expansion in `dk+-`; beyond
/// `|dk+-| = 1` it develops gain and poles.
const ELIMINATED_BAND: f64 = 1.0;

fn in_band(model: SpectralModel, k: f64, medium: &MediumParams) -> bool {
    match model {
        SpectralModel::DynamicSpin => true,
        SpectralModel::EliminatedSpin => {
            let (dp, dm) = delta_k(k, medium);
            dp.abs().max(dm.abs()) <= ELIMINATED_BAND
        }
    }
}

/// `psi_+(t) = B(k, t) psi_+(t_o)`, `psi_-(t) = chi_-(k) psi_+(t)` at every
/// output time (which must be increasing and not earlier than the initial time).
pub fn evolve(run: &SpectralRun) -> Result<Evolution> {
    let t_o = run.initial.t;
    if run.output_times.iter().any(|&t| t < t_o) {
        return Err(Error::Parameter(
            "output times must not precede the initial state".into(),
        ));
    }
    if run.output_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter("output times must be increasing".into()));
    }
    let nt = run.output_times.len();
    let nk = run.grid.nk();
    let mut plus = vec![vec![ZERO; nk]; nt];
    let mut max_prefactor: f64 = 0.0;
    let mut max_gain: f64 = 0.0;
    let mut dropped_modes = 0;
    for (m, &k) in run.grid.k().iter().enumerate() {
        let psi0 = run.initial.psi_plus[m];
        if psi0 == ZERO {
            continue;
        }
        if !in_band(run.model, k, &run.medium) {
            dropped_modes += 1;
            continue;
        }
        let mut phase = ZERO;
        let mut t_prev = t_o;
        for (n, &t) in run.output_times.iter().enumerate() {
            phase += phase_integral(run.model, k, t_prev, t, &run.medium, &run.schedule)?;
            t_prev = t;
            let pre = propagator_prefactor(run.model, k, t, t_o, &run.medium, &run.schedule)?;
            max_prefactor = max_prefactor.max(pre.norm());
            let b = pre * (-I * phase).exp();
            max_gain = max_gain.max(b.norm());
            plus[n][m] = b * psi0;
        }
    }
    if !max_gain.is_finite() {
        return Err(Error::Divergence {
            time: t_o,
            last_good: t_o,
            detail: "non-finite spectral propagator".into(),
        });
    }
    if max_gain > 1.0 + GAIN_TOL {
        log::warn!("spectral propagator gain |B| = {max_gain:.6e} exceeds one");
    }
    let states = plus
        .into_iter()
        .zip(&run.output_times)
        .map(|(psi_plus, &t)| {
            let psi_minus = lock_modes(&psi_plus, &run.medium, &run.grid)?;
            Ok(SpectralState {
                t,
                k_o: run.medium.k_o,
                psi_plus,
                psi_minus,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Evolution {
        states,
        max_prefactor,
        max_gain,
        dropped_modes,
    })
}

/// Polariton fields `Psi_+-(z)` on the medium cells.
pub fn polaritons(
    spec: &SpectralState,
    grid: &SpectralGrid,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    Ok((
        grid.inverse(&spec.psi_plus)?,
        grid.inverse(&spec.psi_minus)?,
    ))
}

/// Physical fields `A_s = (Omega_s(t)/sqrt(Ng^2)) e^{-+ik_o z} Psi_s`.
pub fn reconstruct(
    spec: &SpectralState,
    t: f64,
    schedule: &ControlSchedule,
    medium: &MediumParams,
    grid: &SpectralGrid,
) -> Result<FieldState> {
    let (wp, wm) = schedule.rabi(t);
    let g = medium.coupling();
    let z = grid.z();
    let (pp, pm) = polaritons(spec, grid)?;
    let a_plus = if wp.norm() == 0.0 {
        vec![ZERO; grid.nz()]
    } else {
        pp.iter()
            .zip(&z)
            .map(|(&p, &z)| wp / g * Complex64::from_polar(1.0, -medium.k_o * z) * p)
            .collect()
    };
    let a_minus = if wm.norm() == 0.0 {
        vec![ZERO; grid.nz()]
    } else {
        pm.iter()
            .zip(&z)
            .map(|(&p, &z)| wm / g * Complex64::from_polar(1.0, medium.k_o * z) * p)
            .collect()
    };
    Ok(FieldState { a_plus, a_minus })
}

/// Ground coherence locked to the polariton spectrum, `P12 = -N(k) psi_+(k)`.
pub fn ground_coherence(
    spec: &SpectralState,
    medium: &MediumParams,
    grid: &SpectralGrid,
) -> Result<Vec<Complex64>> {
    let s: Vec<Complex64> = spec
        .psi_plus
        .iter()
        .zip(grid.k())
        .map(|(&p, &k)| -locking_factors(k, medium).0 * p)
        .collect();
    grid.inverse(&s)
}

/// Value of the nonlocal coupling kernel at separation `x = z - z'`: a smooth
/// part plus the weight of a `delta(x)` term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub smooth: Complex64,
    pub delta_weight: Complex64,
}

fn kernel_constants(m: &MediumParams) -> (Complex64, Complex64, Complex64) {
    let (gp, gm, g3, xi) = (m.gamma_plus(), m.gamma_minus(), m.gamma3, m.xi());
    let decay = xi * g3 / gm - I * m.k_o;
    let amp = gp / gm * 2.0 * (xi * g3 * (gp + gm) / (2.0 * gp * gm) - I * m.k_o);
    (decay, amp, -gp / gm)
}

/// Kernel linking `Psi_-(z)` to `Psi_+(z')`. The smooth part is supported on
/// `z' > z` (x < 0), takes half weight at x = 0 and decays over `l_cor`.
pub fn coupling_kernel(x: f64, medium: &MediumParams) -> KernelValue {
    let (decay, amp, delta_weight) = kernel_constants(medium);
    let gate = if x < 0.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        0.0
    };
    KernelValue {
        smooth: gate * amp * (decay * x).exp(),
        delta_weight,
    }
}

/// `Psi_-(z) = int dz' K(z - z') Psi_+(z')` evaluated in real space on a
/// uniform grid of spacing `dz` (zero outside the samples). The smooth part
/// uses product integration of a cubic interpolant against the exponential;
/// the delta term is added analytically.
pub fn apply_nonlocal_coupling(
    psi_plus: &[Complex64],
    dz: f64,
    medium: &MediumParams,
) -> Vec<Complex64> {
    let n = psi_plus.len();
    let (decay, amp, delta_weight) = kernel_constants(medium);
    let m = exp_moments(decay, dz);
    // Interval weights for the nodes i-1, i, i+1, i+2 (u = s/dz).
    let coef: [[f64; 4]; 4] = [
        [0.0, -1.0 / 3.0, 0.5, -1.0 / 6.0],
        [1.0, -0.5, -1.0, 0.5],
        [0.0, 1.0, 0.5, -0.5],
        [0.0, -1.0 / 6.0, 0.0, 1.0 / 6.0],
    ];
    let mut w = [ZERO; 4];
    for (j, c) in coef.iter().enumerate() {
        for p in 0..4 {
            w[j] += c[p] * m[p] / dz.powi(p as i32);
        }
    }
    let at = |i: isize| -> Complex64 {
        if i < 0 || i >= n as isize {
            ZERO
        } else {
            psi_plus[i as usize]
        }
    };
    let damp = (-decay * dz).exp();
    let mut out = vec![ZERO; n];
    let mut acc = ZERO;
    for i in (0..n).rev() {
        let ii = i as isize;
        let local = w[0] * at(ii - 1) + w[1] * at(ii) + w[2] * at(ii + 1) + w[3] * at(ii + 2);
        acc = local + damp * acc;
        out[i] = amp * acc + delta_weight * psi_plus[i];
    }
    out
}

/// `int_0^h e^{-a s} s^p ds` for p = 0..3.
fn exp_moments(a: Complex64, h: f64) -> [Complex64; 4] {
    let x = a * h;
    let mut m = [ZERO; 4];
    if x.norm() < 1.0 {
        for (p, mp) in m.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = ZERO;
            for j in 0..40 {
                sum += term / (p + j + 1) as f64;
                term *= -x / (j + 1) as f64;
            }
            *mp = sum * h.powi(p as i32 + 1);
        }
    } else {
        let e = (-x).exp();
        m[0] = (1.0 - e) / a;
        for p in 1..4 {
            m[p] = (p as f64 * m[p - 1] - h.powi(p as i32) * e) / a;
        }
    }
    m
}

/// Green function of the polariton evolution sampled on the grid offsets
/// `x = j dz`, `|j| < nz`.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub branch: Branch,
    pub dz: f64,
    values: Vec<Complex64>,
    nz: usize,
}

impl GreenFunction {
    /// `G(x) = (2 pi)^{-1} int dk e^{ikx} chi_s(k) B(k)` as a trapezoid sum
    /// over the spectral grid.
    pub fn new(
        grid: &SpectralGrid,
        t: f64,
        t_o: f64,
        medium: &MediumParams,
        schedule: &ControlSchedule,
        branch: Branch,
        model: SpectralModel,
    ) -> Result<Self> {
        let weights: Vec<Complex64> = grid
            .k()
            .iter()
            .map(|&k| {
                let b = crate::dispersion::propagator(model, k, t, t_o, medium, schedule)?;
                let chi = match branch {
                    Branch::Forward => Complex64::new(1.0, 0.0),
                    Branch::Backward => chi_minus(k, medium)?,
                };
                Ok(chi * b)
            })
            .collect::<Result<_>>()?;
        let nz = grid.nz();
        let scale = grid.dk() / (2.0 * PI);
        let values = (0..2 * nz - 1)
            .map(|j| {
                let x = (j as f64 - (nz as f64 - 1.0)) * grid.dz();
                weights
                    .iter()
                    .zip(grid.k())
                    .map(|(&w, &k)| w * Complex64::from_polar(1.0, k * x))
                    .sum::<Complex64>()
                    * scale
            })
            .collect();
        Ok(GreenFunction {
            branch,
            dz: grid.dz(),
            values,
            nz,
        })
    }

    /// Value at offset `j dz`.
    pub fn at_offset(&self, j: isize) -> Complex64 {
        let idx = j + self.nz as isize - 1;
        if idx < 0 || idx as usize >= self.values.len() {
            ZERO
        } else {
            self.values[idx as usize]
        }
    }

    /// Offsets and values, ordered by offset.
    pub fn samples(&self) -> Vec<(f64, Complex64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| ((j as f64 - (self.nz as f64 - 1.0)) * self.dz, v))
            .collect()
    }

    /// `Psi_s(z_i) = sum_j G(z_i - z_j) Psi_+(t_o, z_j) dz`.
    pub fn convolve(&self, initial: &[Complex64]) -> Vec<Complex64> {
        let n = initial.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.at_offset(i as isize - j as isize) * initial[j])
                    .sum::<Complex64>()
                    * self.dz
            })
            .collect()
    }
}

/// Single evaluation of the Green function at an arbitrary separation.
pub fn green_function(
    x: f64,
    t: f64,
    t_o: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
    branch: Branch,
    grid: &SpectralGrid,
    model: SpectralModel,
) -> Result<Complex64> {
    let mut sum = ZERO;
    for &k in grid.k() {
        let b = crate::dispersion::propagator(model, k, t, t_o, medium, schedule)?;
        let chi = match branch {
            Branch::Forward => Complex64::new(1.0, 0.0),
            Branch::Backward => chi_minus(k, medium)?,
        };
        sum += chi * b * Complex64::from_polar(1.0, k * x);
    }
    Ok(sum * grid.dk() / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{default_scenario, ControlProfile};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    fn centroid(z: &[f64], f: &[Complex64]) -> f64 {
        let w: f64 = f.iter().map(|c| c.norm_sqr()).sum();
        z.iter().zip(f).map(|(z, c)| z * c.norm_sqr()).sum::<f64>() / w
    }

    #[test]
    fn initial_spectrum_is_normalized() {
        let mut s = default_scenario();
        s.probe.amplitude_in = 1.0;
        let grid = SpectralGrid::for_scenario(&s).unwrap();
        let spec = initial_spectrum(&s, &grid).unwrap();
        assert_relative_eq!(spec.norm_plus(&grid), 1.0, max_relative = 1e-8);
        let peak = spec.psi_plus[0].norm();
        assert_relative_eq!(peak, (1.0 / PI.sqrt()).sqrt(), max_relative = 1e-14);
        assert!(spec.psi_minus.iter().all(|c| *c == ZERO));
    }

    #[test]
    fn initial_field_is_the_entry_gaussian() {
        let mut s = default_scenario();
        s.probe.phase = 0.3;
        let grid = SpectralGrid::for_scenario(&s).unwrap();
        let spec = initial_spectrum(&s, &grid).unwrap();
        let f = reconstruct(&spec, s.times.t_o, &s.schedule, &s.medium, &grid).unwrap();
        let a0 = s.probe.peak_field(s.medium.c);
        let l = s.l_o();
        for (z, a) in grid.z().iter().zip(&f.a_plus) {
            let expect = a0
                * Complex64::from_polar(
                    (-0.5 * ((z - s.probe.center_z) / l).powi(2)).exp(),
                    0.3 - s.medium.k_o * z,
                );
            assert!((a - expect).norm() < 1e-10 * a0);
        }
        assert!(f.a_minus.iter().all(|c| *c == ZERO));
    }

    #[test]
    fn transform_round_trip() {
        let grid = SpectralGrid::new(64, 256, 0.1).unwrap();
        let f: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let back = grid.inverse(&grid.transform(&f).unwrap()).unwrap();
        assert!(rel_l2(&back, &f) < 1e-13);
        // Parseval
        let spec = grid.transform(&f).unwrap();
        let ek: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dk();
        let ez: f64 = f.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dz();
        assert_relative_eq!(2.0 * PI * ek, ez, max_relative = 1e-12);
    }

    #[test]
    fn single_control_translates_pulse() {
        let mut s = default_scenario();
        s.schedule.omega_minus = ControlProfile::constant(0.0);
        let mut run = SpectralRun::new(&s, SpectralModel::EliminatedSpin).unwrap();
        run.output_times = vec![s.times.t_o, s.times.t_o + 2.0];
        let ev = evolve(&run).unwrap();
        let (p0, _) = polaritons(&ev.states[0], &run.grid).unwrap();
        let (p1, _) = polaritons(&ev.states[1], &run.grid).unwrap();
        let z = run.grid.z();
        assert_relative_eq!(
            centroid(&z, &p1) - centroid(&z, &p0),
            2.0,
            max_relative = 1e-6
        );
        let moduli = |v: &[Complex64]| {
            v.iter()
                .map(|c| Complex64::new(c.norm(), 0.0))
                .collect::<Vec<_>>()
        };
        let err = rel_l2(&moduli(&p1[80..]), &moduli(&p0[..z.len() - 80]));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn stationary_trap_holds_centroid() {
        let s = default_scenario();
        for model in [SpectralModel::EliminatedSpin, SpectralModel::DynamicSpin] {
            let mut run = SpectralRun::new(&s, model).unwrap();
            run.output_times = vec![5.5, 7.0, 8.5, 10.0];
            let ev = evolve(&run).unwrap();
            let z = run.grid.z();
            let c: Vec<f64> = ev
                .states
                .iter()
                .map(|st| {
                    let (p, m) = polaritons(st, &run.grid).unwrap();
                    let both: Vec<Complex64> = p.iter().chain(m.iter()).copied().collect();
                    let zz: Vec<f64> = z.iter().chain(z.iter()).copied().collect();
                    centroid(&zz, &both)
                })
                .collect();
            let drift = c.iter().fold(f64::MIN, |a, &b| a.max(b))
                - c.iter().fold(f64::MAX, |a, &b| a.min(b));
            assert!(drift < 0.05 * s.l_o(), "{model:?} drift {drift}");
        }
    }

    #[test]
    fn backward_release_converts_the_pulse() {
        let s = crate::params::builtin_scenario("fig2cd").unwrap();
        let mut run = SpectralRun::new(&s, SpectralModel::DynamicSpin).unwrap();
        let t_after = s.times.t_1 + s.schedule.ramp_time;
        run.output_times = vec![t_after];
        let ev = evolve(&run).unwrap();
        let f = reconstruct(&ev.states[0], t_after, &s.schedule, &s.medium, &run.grid).unwrap();
        assert!(f.a_plus.iter().all(|c| *c == ZERO));
        let e_minus: f64 = f.a_minus.iter().map(|c| c.norm_sqr()).sum();
        let f0 = reconstruct(&run.initial, s.times.t_o, &s.schedule, &s.medium, &run.grid).unwrap();
        let e0: f64 = f0.a_plus.iter().map(|c| c.norm_sqr()).sum();
        // short trap: nearly complete conversion
        assert!(e_minus / e0 > 0.9, "{}", e_minus / e0);
    }

    #[test]
    fn mode_locking_holds_on_stored_states() {
        let s = default_scenario();
        let mut run = SpectralRun::new(&s, SpectralModel::DynamicSpin).unwrap();
        run.output_times = vec![6.0, 8.0];
        for st in evolve(&run).unwrap().states {
            for ((p, m), &k) in st.psi_plus.iter().zip(&st.psi_minus).zip(run.grid.k()) {
                assert_eq!(*m, chi_minus(k, &s.medium).unwrap() * p);
            }
        }
    }

    #[test]
    fn reconstruct_vanishes_without_control_and_scales_with_it() {
        let s = default_scenario();
        let grid = SpectralGrid::for_scenario(&s).unwrap();
        let spec = initial_spectrum(&s, &grid).unwrap();
        let f = reconstruct(&spec, s.times.t_o, &s.schedule, &s.medium, &grid).unwrap();
        assert!(f.a_minus.iter().all(|c| *c == ZERO));
        let mut doubled = s.schedule.clone();
        doubled.omega_plus = ControlProfile::constant(200.0);
        let f2 = reconstruct(&spec, s.times.t_o, &doubled, &s.medium, &grid).unwrap();
        for (a, b) in f.a_plus.iter().zip(&f2.a_plus) {
            assert!((2.0 * a - b).norm() < 1e-15 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn kernel_shape() {
        let m = default_scenario().medium;
        assert_eq!(coupling_kernel(0.3, &m).smooth, ZERO);
        let k = coupling_kernel(-0.3, &m);
        assert!(k.smooth.norm() > 0.0);
        assert!((k.delta_weight + m.gamma_plus() / m.gamma_minus()).norm() < 1e-15);
        let half = coupling_kernel(0.0, &m).smooth;
        let left = coupling_kernel(-1e-12, &m).smooth;
        assert!((2.0 * half - left).norm() < 1e-9 * left.norm());
    }

    #[test]
    fn kernel_decay_length_matches_correlation_length() {
        let m = default_scenario().medium;
        let xs: Vec<f64> = (1..=50).map(|i| -0.01 * i as f64).collect();
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &x in &xs {
            let y = coupling_kernel(x, &m).smooth.norm().ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let n = xs.len() as f64;
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let length = 1.0 / slope;
        let l_cor = m.correlation_length();
        assert!((length - l_cor).abs() < 0.1 * l_cor, "{length} vs {l_cor}");
    }

    fn spectral_route(psi: &[Complex64], grid: &SpectralGrid, m: &MediumParams) -> Vec<Complex64> {
        let spec = grid.transform(psi).unwrap();
        let locked = lock_modes(&spec, m, grid).unwrap();
        grid.inverse(&locked).unwrap()
    }

    #[test]
    fn nonlocal_coupling_matches_spectral_route() {
        let mut m = default_scenario().medium;
        for &(dp, dm) in &[(50.0, -50.0), (0.0, 0.0), (200.0, 1000.0)] {
            m.delta_plus = dp;
            m.delta_minus = dm;
            let grid = SpectralGrid::new(400, 1600, 0.025).unwrap();
            let psi: Vec<Complex64> = grid
                .z()
                .iter()
                .map(|z| Complex64::from_polar((-0.5 * (z - 5.0).powi(2)).exp(), 0.4 * z))
                .collect();
            let real = apply_nonlocal_coupling(&psi, grid.dz(), &m);
            let spec = spectral_route(&psi, &grid, &m);
            let err = rel_l2(&real, &spec);
            assert!(err < 1e-6, "({dp},{dm}) err {err}");
        }
        assert!(apply_nonlocal_coupling(&[ZERO; 32], 0.1, &m)
            .iter()
            .all(|c| *c == ZERO));
    }

    #[test]
    fn long_pulse_is_copied_up_to_the_separation() {
        // chi_-(k) ~ chi_-(0) e^{ikD}: the backward polariton is the forward one
        // shifted by D = (gamma+ + gamma-)/(gamma3 xi)
        let m = default_scenario().medium;
        let grid = SpectralGrid::new(400, 1600, 0.025).unwrap();
        let gauss = |z: f64| Complex64::new((-0.5 * (z - 5.0).powi(2)).exp(), 0.0);
        let psi: Vec<Complex64> = grid.z().iter().map(|&z| gauss(z)).collect();
        let out = apply_nonlocal_coupling(&psi, grid.dz(), &m);
        let d = ((m.gamma_plus() + m.gamma_minus()) / (m.gamma3 * m.xi())).re;
        assert!((d - 0.2).abs() < 1e-12);
        let c0 = chi_minus(0.0, &m).unwrap();
        let copy: Vec<Complex64> = grid.z().iter().map(|&z| c0 * gauss(z + d)).collect();
        assert!(rel_l2(&out, &copy) < 0.05, "{}", rel_l2(&out, &copy));
        let plain: Vec<Complex64> = psi.iter().map(|p| c0 * p).collect();
        assert!(rel_l2(&out, &plain) > 0.1);
    }

    #[test]
    fn delta_input_spreads_over_correlation_length() {
        let m = default_scenario().medium;
        let dz = 0.005;
        let n = 2000;
        let mut psi = vec![ZERO; n];
        psi[1500] = Complex64::new(1.0 / dz, 0.0);
        let out = apply_nonlocal_coupling(&psi, dz, &m);
        // smooth response lives at z < z_1500, decaying over l_cor
        let smooth: Vec<f64> = (0..1500).map(|i| out[i].norm()).collect();
        let peak = smooth[1499];
        let idx = smooth
            .iter()
            .rposition(|&v| v < peak / std::f64::consts::E)
            .unwrap();
        let width = (1499 - idx) as f64 * dz;
        let l_cor = m.correlation_length();
        assert!((width - l_cor).abs() < 0.1 * l_cor, "width {width}");
    }

    #[test]
    fn green_function_is_identity_at_start_and_transports() {
        let s = default_scenario();
        let mut single = s.schedule.clone();
        single.omega_minus = ControlProfile::constant(0.0);
        let grid = SpectralGrid::new(100, 400, 0.1).unwrap();
        let g0 = GreenFunction::new(
            &grid,
            2.0,
            2.0,
            &s.medium,
            &single,
            Branch::Forward,
            SpectralModel::EliminatedSpin,
        )
        .unwrap();
        assert_relative_eq!(g0.at_offset(0).re, 1.0 / grid.dz(), max_relative = 1e-12);
        assert!(g0.at_offset(3).norm() < 1e-10);
        let g = GreenFunction::new(
            &grid,
            4.0,
            2.0,
            &s.medium,
            &single,
            Branch::Forward,
            SpectralModel::EliminatedSpin,
        )
        .unwrap();
        let (x_peak, _) = g
            .samples()
            .into_iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((x_peak - 2.0).abs() < grid.dz());
        let direct = green_function(
            0.5,
            4.0,
            2.0,
            &s.medium,
            &single,
            Branch::Forward,
            &grid,
            SpectralModel::EliminatedSpin,
        )
        .unwrap();
        assert!((direct - g.at_offset(5)).norm() < 1e-9 * (1.0 + direct.norm()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn reconstruction_is_linear(scale in -3.0f64..3.0, t in 5.0f64..12.0) {
            let s = default_scenario();
            let grid = SpectralGrid::new(100, 400, 0.1).unwrap();
            let spec = initial_spectrum(&s, &grid).unwrap();
            let mut scaled = spec.clone();
            for p in scaled.psi_plus.iter_mut() { *p *= scale; }
            let a = reconstruct(&spec, t, &s.schedule, &s.medium, &grid).unwrap();
            let b = reconstruct(&scaled, t, &s.schedule, &s.medium, &grid).unwrap();
            for (x, y) in a.a_plus.iter().zip(&b.a_plus) {
                prop_assert!((x * scale - y).norm() <= 1e-12 * (1.0 + x.norm()));
            }
        }

        #[test]
        fn dynamic_spin_norm_never_grows(t1 in 5.0f64..8.0, dt in 0.0f64..6.0, dp in -200.0f64..200.0) {
            let mut s = default_scenario();
            s.medium.delta_plus = dp;
            s.medium.delta_minus = -dp;
            s.grid.nz = 100;
            s.grid.nk = 400;
            let mut run = SpectralRun::new(&s, SpectralModel::DynamicSpin).unwrap();
            run.output_times = vec![t1, t1 + dt];
            let ev = evolve(&run).unwrap();
            let n0 = run.initial.norm_plus(&run.grid);
            let n1 = ev.states[0].norm_plus(&run.grid);
            let n2 = ev.states[1].norm_plus(&run.grid);
            prop_assert!(n1 <= n0 * (1.0 + 1e-9));
            prop_assert!(n2 <= n1 * (1.0 + 1e-9));
        }
    }
}
