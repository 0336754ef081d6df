//! Frequency-domain objects of the coupled two-color system: the
//! nonstationary dispersion relation and its limits, the mode-coupling factor
//! `chi_minus`, the spectral propagator and the unified group velocity.
//!
//! Wavenumbers enter through `dk_pm = (k +- k_o) / xi`. Spectral amplitudes
//! evolve as `exp(-i omega t)`, so absorption means `Im omega <= 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{Branch, ControlSchedule, MediumParams};
use crate::quadrature::{integrate_piecewise, Tolerance};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this modulus a denominator is treated as a pole.
const POLE_EPS: f64 = 1e-300;

/// Sign choice for the `mu` function of the decay term of the full dispersion
/// relation. `Plus` is the printed combination; `Minus` negates it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuBranch {
    #[default]
    Plus,
    Minus,
}

/// How the ground coherence is treated when the polariton spectrum is evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralModel {
    /// Ground coherence slaved to the fields: the full dispersion relation
    /// with the switching prefactor of the propagator.
    EliminatedSpin,
    /// Ground coherence kept dynamic, optical coherences and field
    /// retardation eliminated. Spectral amplitudes are continuous across
    /// switching, so the propagator has no prefactor.
    #[default]
    DynamicSpin,
}

/// Normalized wavenumber offsets `(dk_plus, dk_minus)`.
pub fn delta_k(k: f64, medium: &MediumParams) -> (f64, f64) {
    let xi = medium.xi();
    ((k + medium.k_o) / xi, (k - medium.k_o) / xi)
}

fn beta_from(wp: f64, wm: f64, m: &MediumParams) -> Complex64 {
    let (gp, gm) = (m.gamma_plus(), m.gamma_minus());
    gp * gm * m.gamma2 + gm * (wp * wp) + gp * (wm * wm)
}

/// Combined spin relaxation `gamma2 gamma+ gamma- + gamma- Omega+^2 + gamma+ Omega-^2`.
pub fn beta_s(t: f64, medium: &MediumParams, schedule: &ControlSchedule) -> Complex64 {
    let (wp, wm) = schedule.amplitudes(t);
    beta_from(wp, wm, medium)
}

/// `(alpha_plus, alpha_minus) = gamma3 Omega_pm^2 / beta_s`.
pub fn alpha_tilde(
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<(Complex64, Complex64)> {
    let (wp, wm) = schedule.amplitudes(t);
    alphas_from(wp, wm, medium)
}

fn alphas_from(wp: f64, wm: f64, m: &MediumParams) -> Result<(Complex64, Complex64)> {
    let beta = beta_from(wp, wm, m);
    if beta.norm() < POLE_EPS {
        return Err(Error::Singularity(
            "beta_s vanishes (no control field and no ground decay)".into(),
        ));
    }
    Ok((m.gamma3 * wp * wp / beta, m.gamma3 * wm * wm / beta))
}

/// Full nonstationary dispersion relation for given control amplitudes.
pub fn omega_full_at(
    k: f64,
    wp: f64,
    wm: f64,
    m: &MediumParams,
    branch: MuBranch,
) -> Result<Complex64> {
    let (gp, gm, g3) = (m.gamma_plus(), m.gamma_minus(), m.gamma3);
    let (dkp, dkm) = delta_k(k, m);
    let beta = beta_from(wp, wm, m);
    let (ap, am) = alphas_from(wp, wm, m)?;
    let mut mu = gp / g3 * dkm - gm / g3 * dkp;
    if branch == MuBranch::Minus {
        mu = -mu;
    }
    let j = 1.0 - m.gamma2 * gp * gm / beta
        + I * ((gp / g3).powi(2) * dkm * am - (gm / g3).powi(2) * dkp * ap);
    if j.norm() < POLE_EPS {
        return Err(Error::Singularity(format!("J vanishes at k = {k}")));
    }
    let decay = -I * m.gamma2 * (1.0 + I * mu) / j;
    let transport = beta * (ap * dkm - am * dkp - I * dkp * dkm) / (g3 * g3 * j);
    Ok(decay + transport)
}

/// `omega_{k,k_o}(t)` with the printed `mu` combination.
pub fn omega_full(
    k: f64,
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    omega_full_branch(k, t, medium, schedule, MuBranch::Plus)
}

pub fn omega_full_branch(
    k: f64,
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
    branch: MuBranch,
) -> Result<Complex64> {
    let (wp, wm) = schedule.amplitudes(t);
    omega_full_at(k, wp, wm, medium, branch)
}

/// Slow-light limit with one control: `-i gamma2 +- v (k -+ k_o)`.
pub fn omega_single_control(
    k: f64,
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
    which: Branch,
) -> Result<Complex64> {
    let (wp, wm) = schedule.amplitudes(t);
    let (omega, s) = match which {
        Branch::Forward => (wp, 1.0),
        Branch::Backward => (wm, -1.0),
    };
    if omega == 0.0 {
        return Err(Error::Degenerate(
            "the selected control field is off".into(),
        ));
    }
    let v = medium.slow_velocity(omega);
    Ok(Complex64::new(s * v * (k - s * medium.k_o), -medium.gamma2))
}

/// Optically dense limit `J = 1`, `mu = 0`: linear in `k`.
pub fn omega_simplified(
    k: f64,
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    let (wp, wm) = schedule.amplitudes(t);
    let scale = medium.c / medium.ng2;
    let re = scale * (wp * wp - wm * wm) * k - scale * (wp * wp + wm * wm) * medium.k_o;
    Ok(Complex64::new(re, -medium.gamma2))
}

/// Small ground-splitting limit, keeping the `k^2` diffusion term.
pub fn omega_small_splitting(
    k: f64,
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    let (wp, wm) = schedule.amplitudes(t);
    let (gp, gm, g3, xi) = (
        medium.gamma_plus(),
        medium.gamma_minus(),
        medium.gamma3,
        medium.xi(),
    );
    let beta = beta_from(wp, wm, medium);
    let (ap, am) = alphas_from(wp, wm, medium)?;
    let den = g3 * g3 * (xi + I * (am * (gp / g3).powi(2) - ap * (gm / g3).powi(2)) * k);
    if den.norm() < POLE_EPS {
        return Err(Error::Singularity(format!(
            "small-splitting denominator vanishes at k = {k}"
        )));
    }
    Ok(beta * ((ap - am) * k - I * k * k / xi) / den)
}

/// Dispersion with a dynamic ground coherence:
/// `-i gamma2 + (Omega+^2/gamma3) dk_-/N - (Omega-^2/gamma3) dk_+/D`,
/// where `N = 1 + i (gamma+/gamma3) dk_-` and `D = 1 - i (gamma-/gamma3) dk_+`.
pub fn omega_reduced_at(k: f64, wp: f64, wm: f64, m: &MediumParams) -> Result<Complex64> {
    let (n, d) = locking_factors(k, m);
    if n.norm() < POLE_EPS || d.norm() < POLE_EPS {
        return Err(Error::Singularity(format!(
            "locking factor vanishes at k = {k}"
        )));
    }
    let (dkp, dkm) = delta_k(k, m);
    let g3 = m.gamma3;
    Ok(Complex64::new(0.0, -m.gamma2) + (wp * wp / g3) * dkm / n - (wm * wm / g3) * dkp / d)
}

pub fn omega_reduced(
    k: f64,
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    let (wp, wm) = schedule.amplitudes(t);
    omega_reduced_at(k, wp, wm, medium)
}

/// `(N, D)`: the forward and backward polaritons are `-s/N` and `-s/D` of the
/// ground-coherence amplitude `s`.
pub fn locking_factors(k: f64, m: &MediumParams) -> (Complex64, Complex64) {
    let (dkp, dkm) = delta_k(k, m);
    let g3 = m.gamma3;
    (
        1.0 + I * (m.gamma_plus() / g3) * dkm,
        1.0 - I * (m.gamma_minus() / g3) * dkp,
    )
}

/// Mode-locking factor `psi_-(k) = chi_minus(k) psi_+(k)`.
///
/// Uses `dk_-` in the numerator and `dk_+` in the denominator, which makes it
/// the exact Fourier transform of [`crate::spectral::coupling_kernel`].
pub fn chi_minus(k: f64, medium: &MediumParams) -> Result<Complex64> {
    let (n, d) = locking_factors(k, medium);
    if d.norm() < POLE_EPS {
        return Err(Error::Singularity(format!("chi_minus pole at k = {k}")));
    }
    Ok(n / d)
}

pub fn omega_model_at(
    model: SpectralModel,
    k: f64,
    wp: f64,
    wm: f64,
    m: &MediumParams,
) -> Result<Complex64> {
    match model {
        SpectralModel::EliminatedSpin => omega_full_at(k, wp, wm, m, MuBranch::Plus),
        SpectralModel::DynamicSpin => omega_reduced_at(k, wp, wm, m),
    }
}

/// `int_{t_o}^{t} omega(k, t') dt'` by adaptive quadrature split at the
/// schedule's ramp boundaries.
pub fn phase_integral(
    model: SpectralModel,
    k: f64,
    t_o: f64,
    t: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    let breaks = schedule.breakpoints();
    let mut failure = None;
    let value = integrate_piecewise(
        |s| {
            let (wp, wm) = schedule.amplitudes(s);
            match omega_model_at(model, k, wp, wm, medium) {
                Ok(w) => w,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        t_o,
        t,
        &breaks,
        Tolerance::default(),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Switching prefactor of the propagator.
pub fn propagator_prefactor(
    model: SpectralModel,
    k: f64,
    t: f64,
    t_o: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    match model {
        SpectralModel::DynamicSpin => Ok(Complex64::new(1.0, 0.0)),
        SpectralModel::EliminatedSpin => {
            let (gp, gm) = (medium.gamma_plus(), medium.gamma_minus());
            let (ap0, _) = alpha_tilde(t_o, medium, schedule)?;
            let (ap, am) = alpha_tilde(t, medium, schedule)?;
            let den = gm * ap + gp * am * chi_minus(k, medium)?;
            if den.norm() < POLE_EPS {
                return Err(Error::Singularity(format!(
                    "propagator prefactor pole at k = {k}"
                )));
            }
            Ok(gm * ap0 / den)
        }
    }
}

/// Transfer amplitude of the forward polariton mode from `t_o` to `t`.
pub fn propagator(
    model: SpectralModel,
    k: f64,
    t: f64,
    t_o: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    if t < t_o {
        return Err(Error::Parameter("propagator requires t >= t_o".into()));
    }
    let pre = propagator_prefactor(model, k, t, t_o, medium, schedule)?;
    let phase = phase_integral(model, k, t_o, t, medium, schedule)?;
    Ok(pre * (-I * phase).exp())
}

/// The spectral propagator built from the full dispersion relation and its
/// switching prefactor.
pub fn propagator_b(
    k: f64,
    t: f64,
    t_o: f64,
    medium: &MediumParams,
    schedule: &ControlSchedule,
) -> Result<Complex64> {
    propagator(SpectralModel::EliminatedSpin, k, t, t_o, medium, schedule)
}

/// Unified group velocity `c (Omega+^2 - Omega-^2) / (N g^2)`.
pub fn group_velocity(t: f64, medium: &MediumParams, schedule: &ControlSchedule) -> f64 {
    let (wp, wm) = schedule.amplitudes(t);
    medium.c * (wp * wp - wm * wm) / medium.ng2
}
