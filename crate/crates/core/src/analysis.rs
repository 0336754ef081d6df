//! Closed-form envelope laws and measured observables.
//!
//! Predictions assume the Gaussian probe state at `t_o` and the small-`k_o`
//! regime. Measured quantities work on any sampled fields and are used to
//! compare the two solvers.

use num_complex::Complex64;

use crate::dispersion::{alpha_tilde, beta_s, group_velocity, propagator, SpectralModel};
use crate::error::{Error, Result};
use crate::params::{Branch, MediumParams, Scenario};
use crate::quadrature::{integrate_piecewise, Tolerance};
use crate::spectral::{reconstruct, Evolution, SpectralGrid};
use crate::timedomain::TdRun;
use crate::FieldState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Edge-to-peak ratio above which a pulse counts as clipped by the window.
pub const CONTAINMENT_TOL: f64 = 1e-3;

/// Reference norm below which a branch is ignored by per-time comparisons,
/// relative to the largest branch norm of the run.
pub const NEGLIGIBLE: f64 = 1e-6;

/// Predicted envelopes at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePrediction {
    pub t: f64,
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
    /// Complex centroids relative to the probe's centroid at `t_o`.
    pub centroid_plus: Complex64,
    pub centroid_minus: Complex64,
    pub width: Complex64,
    pub separation: Complex64,
}

/// Separation `D = z_+ - z_- = (gamma+ + gamma-)/(gamma3 xi)`; `2/xi` for
/// symmetric detunings.
pub fn separation(medium: &MediumParams) -> Complex64 {
    (medium.gamma_plus() + medium.gamma_minus()) / (medium.gamma3 * medium.xi())
}

/// Centroid `z_s(t) = s gamma_s/(gamma3 xi) + int_{t_o}^t v dt'`. The real part
/// is the position, the imaginary part a stationary phase modulation.
pub fn centroid_z(t: f64, scenario: &Scenario, branch: Branch) -> Result<Complex64> {
    let m = &scenario.medium;
    let t_o = scenario.times.t_o;
    let gamma = match branch {
        Branch::Forward => m.gamma_plus(),
        Branch::Backward => m.gamma_minus(),
    };
    let offset = branch.sign() * gamma / (m.gamma3 * m.xi());
    Ok(offset + transport(t_o, t, scenario)?)
}

/// `int_{t_o}^t v(t') dt'`.
pub fn transport(t_o: f64, t: f64, scenario: &Scenario) -> Result<f64> {
    let s = &scenario.schedule;
    let v = integrate_piecewise(
        |x| Complex64::new(group_velocity(x, &scenario.medium, s), 0.0),
        t_o,
        t,
        &s.breakpoints(),
        Tolerance::default(),
    )?;
    Ok(v.re)
}

/// `chi(t) = gamma3^-2 int_{t_o}^t beta_s M dt'` with
/// `M = 1 - (a+ - a-)(a+ (gamma-/gamma3)^2 - a- (gamma+/gamma3)^2)`.
pub fn chi_integral(t: f64, scenario: &Scenario) -> Result<Complex64> {
    let m = &scenario.medium;
    let s = &scenario.schedule;
    let (gp, gm) = (m.gamma_plus() / m.gamma3, m.gamma_minus() / m.gamma3);
    let mut failure = None;
    let value = integrate_piecewise(
        |x| match alpha_tilde(x, m, s) {
            Ok((ap, am)) => {
                let big_m = 1.0 - (ap - am) * (ap * gm * gm - am * gp * gp);
                beta_s(x, m, s) * big_m
            }
            Err(e) => {
                failure.get_or_insert(e);
                ZERO
            }
        },
        scenario.times.t_o,
        t,
        &s.breakpoints(),
        Tolerance::default(),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value / (m.gamma3 * m.gamma3)),
    }
}

/// Complex width `l(t) = sqrt(l_o^2 + 2 chi(t)/xi^2)` for any schedule.
pub fn width_complex(t: f64, scenario: &Scenario) -> Result<Complex64> {
    if t < scenario.times.t_o {
        return Err(Error::Parameter("width requires t >= t_o".into()));
    }
    let xi = scenario.medium.xi();
    let l_o = scenario.l_o();
    Ok((l_o * l_o + 2.0 * chi_integral(t, scenario)? / (xi * xi)).sqrt())
}

/// `|l(t)|` for the scenario's schedule.
pub fn width_l(t: f64, scenario: &Scenario) -> Result<f64> {
    Ok(width_complex(t, scenario)?.norm())
}

/// `|l|` of a stationary trap after `elapsed` time:
/// `((l_o^2 + 4 v_o t/xi)^2 + 4 (v_o t (D+ + D-)/(xi gamma3))^2)^{1/4}`.
pub fn width_stationary(elapsed: f64, l_o: f64, v_o: f64, medium: &MediumParams) -> f64 {
    let xi = medium.xi();
    let a = broadened_width(l_o, v_o / xi, elapsed).powi(2);
    let b = v_o * elapsed * (medium.delta_plus + medium.delta_minus) / (xi * medium.gamma3);
    (a * a + 4.0 * b * b).sqrt().sqrt()
}

/// `sqrt(l_o^2 + 4 rate t)`: the symmetric branch of the broadening law.
pub fn broadened_width(l_o: f64, rate: f64, elapsed: f64) -> f64 {
    (l_o * l_o + 4.0 * rate * elapsed).sqrt()
}

fn carrier(k_o: f64, z: f64, branch: Branch) -> Complex64 {
    Complex64::from_polar(1.0, -branch.sign() * k_o * z)
}

/// Predicted envelope `A_s(t, z)`:
/// `A_o (Omega_s(t)/Omega_+(t_o)) (l_o/l) exp(i theta - (z - z_c - dz_s)^2/(2 l^2)) e^{-+ik_o z}`,
/// where `z_c` is the probe centroid at `t_o` and `dz_s = z_s(t) - z_+(t_o)`.
/// Referencing the centroids to `z_+(t_o)` recovers the pre-switch Gaussian
/// exactly at `t_o`; it shifts both branches by the constant `gamma+/(gamma3 xi)`.
pub fn gaussian_envelope(t: f64, z: f64, scenario: &Scenario, branch: Branch) -> Result<Complex64> {
    let p = envelope_parameters(t, scenario, branch)?;
    Ok(p.at(z, scenario.medium.k_o))
}

struct EnvelopeParameters {
    amplitude: Complex64,
    center: Complex64,
    width: Complex64,
    branch: Branch,
}

impl EnvelopeParameters {
    fn at(&self, z: f64, k_o: f64) -> Complex64 {
        let x = z - self.center;
        self.amplitude
            * (-0.5 * x * x / (self.width * self.width)).exp()
            * carrier(k_o, z, self.branch)
    }
}

fn envelope_parameters(t: f64, scenario: &Scenario, branch: Branch) -> Result<EnvelopeParameters> {
    let s = &scenario.schedule;
    let t_o = scenario.times.t_o;
    let (wp0, _) = s.rabi(t_o);
    if wp0.norm() == 0.0 {
        return Err(Error::Degenerate("forward control is off at t_o".into()));
    }
    let (wp, wm) = s.rabi(t);
    let w = match branch {
        Branch::Forward => wp,
        Branch::Backward => wm,
    };
    let width = width_complex(t, scenario)?;
    let l_o = scenario.l_o();
    let p = &scenario.probe;
    let a_o = p.peak_field(scenario.medium.c) * Complex64::from_polar(1.0, p.phase - s.phi_plus);
    let shift = centroid_z(t, scenario, branch)? - centroid_z(t_o, scenario, Branch::Forward)?;
    Ok(EnvelopeParameters {
        amplitude: a_o * (w / wp0.norm()) * (l_o / width),
        center: p.center_z + shift,
        width,
        branch,
    })
}

/// Both predicted envelopes on the points `z`.
pub fn envelope_prediction(t: f64, z: &[f64], scenario: &Scenario) -> Result<EnvelopePrediction> {
    let k_o = scenario.medium.k_o;
    let fp = envelope_parameters(t, scenario, Branch::Forward)?;
    let fm = envelope_parameters(t, scenario, Branch::Backward)?;
    let z_ref = centroid_z(scenario.times.t_o, scenario, Branch::Forward)?;
    Ok(EnvelopePrediction {
        t,
        a_plus: z.iter().map(|&x| fp.at(x, k_o)).collect(),
        a_minus: z.iter().map(|&x| fm.at(x, k_o)).collect(),
        centroid_plus: centroid_z(t, scenario, Branch::Forward)? - z_ref,
        centroid_minus: centroid_z(t, scenario, Branch::Backward)? - z_ref,
        width: fp.width,
        separation: separation(&scenario.medium),
    })
}

/// Reading of the broadening rate in the conversion-probability law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BroadeningReading {
    /// `v_o`, consistent with the width law.
    #[default]
    EntryVelocity,
    /// `gamma2`, as printed in the conversion formula.
    CoherenceDecay,
}

/// `P = l_o / l(t_1) = (1 + 4 l_o^-2 (r/xi)(t_1 - t_o))^{-1/2}` with `r = v_o`
/// or `gamma2` depending on `reading`.
pub fn conversion_probability(
    t_1: f64,
    t_o: f64,
    scenario: &Scenario,
    reading: BroadeningReading,
) -> Result<f64> {
    if t_1 < t_o {
        return Err(Error::Parameter("conversion requires t_1 >= t_o".into()));
    }
    let m = &scenario.medium;
    if m.gamma2 * (t_1 - t_o) > 0.1 {
        log::warn!(
            "gamma2 (t_1 - t_o) = {:.3} is not small",
            m.gamma2 * (t_1 - t_o)
        );
    }
    let rate = match reading {
        BroadeningReading::EntryVelocity => scenario.entry_velocity(),
        BroadeningReading::CoherenceDecay => m.gamma2,
    };
    let l_o = scenario.l_o();
    Ok(l_o / broadened_width(l_o, rate / m.xi(), t_1 - t_o))
}

/// `-i eps(t_1, t_o)` for a stationary trap of level `omega` at `k = s k_o`
/// (closed form valid to second order in `k_o/xi`).
pub fn epsilon_stationary(
    elapsed: f64,
    omega: f64,
    medium: &MediumParams,
    branch: Branch,
) -> Complex64 {
    let i = Complex64::i();
    let (gp, gm) = (medium.gamma_plus(), medium.gamma_minus());
    let g_other = match branch {
        Branch::Forward => gm,
        Branch::Backward => gp,
    };
    let (xi, g3, k_o) = (medium.xi(), medium.gamma3, medium.k_o);
    let sum = gp + gm;
    let inner = i - 2.0 * k_o * g_other.conj().powi(2) * sum / (xi * g3 * sum.norm_sqr());
    let den = (1.0 - 2.0 * i * k_o * g_other * g_other / (xi * g3 * sum)).norm_sqr();
    elapsed * (-medium.gamma2 + 2.0 * omega * omega * k_o / (g3 * xi) * inner / den)
}

/// Area ratio `theta_s(t)/theta_+(t_o)` for a stationary trap on
/// `[t_o, t_1]` followed by single-control propagation, where the ground
/// coherence keeps decaying at `gamma2`. The trap level is read at the
/// midpoint of the trap.
pub fn area_ratio_prediction(
    t: f64,
    t_o: f64,
    t_1: f64,
    scenario: &Scenario,
    branch: Branch,
) -> Result<Complex64> {
    if !(t_o <= t_1 && t_1 <= t) {
        return Err(Error::Parameter(
            "area ratio requires t_o <= t_1 <= t".into(),
        ));
    }
    let (wp, wm) = scenario.schedule.amplitudes(0.5 * (t_o + t_1));
    let omega = (0.5 * (wp * wp + wm * wm)).sqrt();
    let eps = epsilon_stationary(t_1 - t_o, omega, &scenario.medium, branch);
    Ok((eps - scenario.medium.gamma2 * (t - t_1)).exp())
}

/// The same ratio from the propagator at `k = s k_o`, integrating the
/// dispersion relation of `model` over the actual schedule.
pub fn area_ratio_quadrature(
    t: f64,
    scenario: &Scenario,
    branch: Branch,
    model: SpectralModel,
) -> Result<Complex64> {
    let k = branch.sign() * scenario.medium.k_o;
    propagator(
        model,
        k,
        t,
        scenario.times.t_o,
        &scenario.medium,
        &scenario.schedule,
    )
}

/// Complex area from a snapshot: `v^-1 int A dz` (midpoint rule on cells).
pub fn pulse_area(field: &[Complex64], dz: f64, v: f64) -> Result<Complex64> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::Parameter("area needs a nonzero velocity".into()));
    }
    check_containment(field)?;
    Ok(field.iter().sum::<Complex64>() * dz / v.abs())
}

/// Complex area from a time trace at a fixed plane (trapezoid rule).
pub fn pulse_area_trace(t: &[f64], values: &[Complex64]) -> Result<Complex64> {
    if t.len() != values.len() {
        return Err(Error::Parameter(
            "trace times and values differ in length".into(),
        ));
    }
    check_containment(values)?;
    Ok(t.windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (v[0] + v[1]) * (0.5 * (t[1] - t[0])))
        .sum())
}

fn check_containment(values: &[Complex64]) -> Result<()> {
    let peak = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 || values.len() < 2 {
        return Ok(());
    }
    let edge = values[0].norm().max(values[values.len() - 1].norm()) / peak;
    if edge > CONTAINMENT_TOL {
        return Err(Error::Containment { edge_ratio: edge });
    }
    Ok(())
}

/// `<A_s^+(t', z') A_s(t, z)> = A_s*(t', z') A_s(t, z)` in the mean-field limit.
pub fn first_order_correlation(at_primed: Complex64, at: Complex64) -> Complex64 {
    at_primed.conj() * at
}

/// `int |A|^2 dz`.
pub fn energy(field: &[Complex64], dz: f64) -> f64 {
    field.iter().map(|c| c.norm_sqr()).sum::<f64>() * dz
}

/// Centroid and width (`sqrt(2)` times the rms) of the weight `|A+|^2 + |A-|^2`.
/// `None` for an empty pulse.
pub fn centroid_width(z: &[f64], fields: &FieldState) -> Option<(f64, f64)> {
    let w: Vec<f64> = fields
        .a_plus
        .iter()
        .zip(&fields.a_minus)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return None;
    }
    let c = z.iter().zip(&w).map(|(z, w)| z * w).sum::<f64>() / total;
    let var = z
        .iter()
        .zip(&w)
        .map(|(z, w)| (z - c).powi(2) * w)
        .sum::<f64>()
        / total;
    Some((c, (2.0 * var).sqrt()))
}

/// Observables of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMetrics {
    pub t: f64,
    /// `int A dz / v_o`; equals the area whenever `|v| = v_o`.
    pub area_plus: Complex64,
    pub area_minus: Complex64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    /// Joint centroid; NaN for an empty pulse.
    pub centroid: f64,
    pub width: f64,
    /// Backward energy over the forward energy of the first snapshot.
    pub conversion: f64,
}

/// Fields of one run sampled on a common grid at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTime {
    pub z: Vec<f64>,
    pub times: Vec<f64>,
    pub fields: Vec<FieldState>,
    /// Optional ground coherence per time.
    pub p12: Option<Vec<Vec<Complex64>>>,
}

impl SpaceTime {
    pub fn from_timedomain(run: &TdRun, z: Vec<f64>) -> Self {
        SpaceTime {
            z,
            times: run.snapshots.iter().map(|s| s.t).collect(),
            fields: run.snapshots.iter().map(|s| s.fields.clone()).collect(),
            p12: Some(run.snapshots.iter().map(|s| s.atoms.p12.clone()).collect()),
        }
    }

    pub fn from_spectral(ev: &Evolution, scenario: &Scenario, grid: &SpectralGrid) -> Result<Self> {
        let mut fields = Vec::with_capacity(ev.states.len());
        let mut p12 = Vec::with_capacity(ev.states.len());
        for st in &ev.states {
            fields.push(reconstruct(
                st,
                st.t,
                &scenario.schedule,
                &scenario.medium,
                grid,
            )?);
            p12.push(crate::spectral::ground_coherence(
                st,
                &scenario.medium,
                grid,
            )?);
        }
        Ok(SpaceTime {
            z: grid.z(),
            times: ev.states.iter().map(|s| s.t).collect(),
            fields,
            p12: Some(p12),
        })
    }

    pub fn dz(&self) -> f64 {
        if self.z.len() > 1 {
            self.z[1] - self.z[0]
        } else {
            0.0
        }
    }

    /// Metrics at every time; areas normalized by `v_o`.
    pub fn metrics(&self, v_o: f64) -> Vec<PulseMetrics> {
        let dz = self.dz();
        let e0 = self
            .fields
            .first()
            .map(|f| energy(&f.a_plus, dz))
            .unwrap_or(0.0);
        self.times
            .iter()
            .zip(&self.fields)
            .map(|(&t, f)| {
                let (centroid, width) = centroid_width(&self.z, f).unwrap_or((f64::NAN, f64::NAN));
                let e_minus = energy(&f.a_minus, dz);
                PulseMetrics {
                    t,
                    area_plus: f.a_plus.iter().sum::<Complex64>() * dz / v_o,
                    area_minus: f.a_minus.iter().sum::<Complex64>() * dz / v_o,
                    energy_plus: energy(&f.a_plus, dz),
                    energy_minus: e_minus,
                    centroid,
                    width,
                    conversion: if e0 > 0.0 { e_minus / e0 } else { 0.0 },
                }
            })
            .collect()
    }
}

/// Relative L2 distance of the moduli, `|| |a| - |b| || / || |a| ||`, with `a`
/// the reference. `None` when the reference vanishes.
pub fn relative_l2(reference: &[Complex64], other: &[Complex64]) -> Option<f64> {
    let (num, den) = modulus_sums(reference, other);
    (den > 0.0).then(|| (num / den).sqrt())
}

fn modulus_sums(reference: &[Complex64], other: &[Complex64]) -> (f64, f64) {
    reference
        .iter()
        .zip(other)
        .fold((0.0, 0.0), |(n, d), (a, b)| {
            (n + (a.norm() - b.norm()).powi(2), d + a.norm_sqr())
        })
}

/// One row of a [`ComparisonReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    /// `None` where the reference branch is negligible.
    pub rel_plus: Option<f64>,
    pub rel_minus: Option<f64>,
    pub reference: PulseMetrics,
    pub other: PulseMetrics,
}

/// Solver comparison over a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Relative L2 over all times and both branches.
    pub aggregate: f64,
    pub worst_plus: f64,
    pub worst_minus: f64,
}

impl std::fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.8e}"));
        writeln!(f, "aggregate_rel_l2 = {:.8e}", self.aggregate)?;
        writeln!(f, "worst_rel_l2_plus = {:.8e}", self.worst_plus)?;
        writeln!(f, "worst_rel_l2_minus = {:.8e}", self.worst_minus)?;
        writeln!(
            f,
            "t,rel_plus,rel_minus,centroid_ref,centroid_other,width_ref,width_other,area_ref,area_other,energy_ref,energy_other"
        )?;
        for r in &self.rows {
            let (a, b) = (&r.reference, &r.other);
            writeln!(
                f,
                "{:.8e},{},{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                r.t,
                opt(r.rel_plus),
                opt(r.rel_minus),
                a.centroid,
                b.centroid,
                a.width,
                b.width,
                (a.area_plus + a.area_minus).norm(),
                (b.area_plus + b.area_minus).norm(),
                a.energy_plus + a.energy_minus,
                b.energy_plus + b.energy_minus,
            )?;
        }
        Ok(())
    }
}

/// Compares `other` against `reference`; both must share the grid and times.
pub fn compare_runs(
    reference: &SpaceTime,
    other: &SpaceTime,
    v_o: f64,
) -> Result<ComparisonReport> {
    if reference.z.len() != other.z.len()
        || reference
            .z
            .iter()
            .zip(&other.z)
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::Comparison("spatial grids differ".into()));
    }
    if reference.times.len() != other.times.len()
        || reference
            .times
            .iter()
            .zip(&other.times)
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::Comparison("output times differ".into()));
    }
    let peak = reference
        .fields
        .iter()
        .flat_map(|f| [energy(&f.a_plus, 1.0), energy(&f.a_minus, 1.0)])
        .fold(0.0, f64::max);
    let (ma, mb) = (reference.metrics(v_o), other.metrics(v_o));
    let (mut num, mut den) = (0.0, 0.0);
    let mut rows = Vec::with_capacity(reference.times.len());
    for (i, (fa, fb)) in reference.fields.iter().zip(&other.fields).enumerate() {
        let branch = |a: &[Complex64], b: &[Complex64]| {
            let (n, d) = modulus_sums(a, b);
            let rel = (d > NEGLIGIBLE * peak && d > 0.0).then(|| (n / d).sqrt());
            (n, d, rel)
        };
        let (n1, d1, rel_plus) = branch(&fa.a_plus, &fb.a_plus);
        let (n2, d2, rel_minus) = branch(&fa.a_minus, &fb.a_minus);
        num += n1 + n2;
        den += d1 + d2;
        rows.push(ComparisonRow {
            t: reference.times[i],
            rel_plus,
            rel_minus,
            reference: ma[i],
            other: mb[i],
        });
    }
    let worst =
        |f: fn(&ComparisonRow) -> Option<f64>| rows.iter().filter_map(f).fold(0.0, f64::max);
    Ok(ComparisonReport {
        aggregate: if den > 0.0 { (num / den).sqrt() } else { 0.0 },
        worst_plus: worst(|r| r.rel_plus),
        worst_minus: worst(|r| r.rel_minus),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{default_scenario, ControlProfile, ControlSchedule, ReleaseMode};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn symmetric() -> Scenario {
        default_scenario()
    }

    #[test]
    fn stationary_width_and_conversion_examples() {
        let s = symmetric();
        let m = &s.medium;
        assert_relative_eq!(
            width_stationary(5.0, 1.0, 1.0, m),
            3f64.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(width_stationary(0.0, 1.0, 1.0, m), 1.0);
        let p = conversion_probability(10.0, 5.0, &s, BroadeningReading::EntryVelocity).unwrap();
        assert_relative_eq!(p, 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(
            p,
            s.l_o() / width_stationary(5.0, s.l_o(), 1.0, m),
            max_relative = 1e-15
        );
        assert_eq!(
            conversion_probability(5.0, 5.0, &s, BroadeningReading::EntryVelocity).unwrap(),
            1.0
        );
        // short traps convert with probability close to one
        let p = conversion_probability(5.01, 5.0, &s, BroadeningReading::EntryVelocity).unwrap();
        assert_relative_eq!(p, 1.0 - 0.5 * 4.0 * 0.1 * 0.01, max_relative = 1e-5);
        let p = conversion_probability(10.0, 5.0, &s, BroadeningReading::CoherenceDecay).unwrap();
        assert_eq!(p, 1.0);
        assert!(conversion_probability(4.0, 5.0, &s, BroadeningReading::EntryVelocity).is_err());
    }

    #[test]
    fn symmetric_detuning_minimizes_width() {
        let mut m = symmetric().medium;
        let sym = width_stationary(5.0, 1.0, 1.0, &m);
        for (dp, dm) in [(1000.0, 1000.0), (50.0, 50.0), (-50.0, -50.0), (50.0, 0.0)] {
            m.delta_plus = dp;
            m.delta_minus = dm;
            assert!(width_stationary(5.0, 1.0, 1.0, &m) > sym, "({dp}, {dm})");
        }
    }

    #[test]
    fn separation_is_two_over_xi() {
        let s = symmetric();
        let d = separation(&s.medium);
        assert_relative_eq!(d.re, 0.2, max_relative = 1e-15);
        assert_eq!(d.im, 0.0);
        let z_p = centroid_z(7.0, &s, Branch::Forward).unwrap();
        let z_m = centroid_z(7.0, &s, Branch::Backward).unwrap();
        assert!((z_p - z_m - d).norm() < 1e-14);
        // independent of the control levels
        let mut t = s.clone();
        t.schedule = ControlSchedule::two_sided(30.0, 70.0, 5.0, 10.0, ReleaseMode::Forward, 0.25);
        let z_p = centroid_z(8.0, &t, Branch::Forward).unwrap();
        let z_m = centroid_z(8.0, &t, Branch::Backward).unwrap();
        assert!((z_p - z_m - d).norm() < 1e-12);
    }

    #[test]
    fn centroids_are_fixed_in_a_balanced_trap() {
        let s = symmetric();
        let a = centroid_z(6.0, &s, Branch::Forward).unwrap();
        let b = centroid_z(9.5, &s, Branch::Forward).unwrap();
        assert!((a - b).norm() < 1e-12);
        // before the backward control arrives the pulse moves at v_o
        assert_relative_eq!(transport(3.0, 4.0, &s).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn general_width_follows_the_stationary_law() {
        let s = symmetric();
        assert_relative_eq!(width_l(5.0, &s).unwrap(), s.l_o(), max_relative = 1e-15);
        let h = 1e-3;
        let l2 = |t: f64| width_complex(t, &s).unwrap().powi(2);
        let slope = (l2(8.0 + h) - l2(8.0 - h)) / (2.0 * h);
        assert_relative_eq!(slope.re, 4.0 * 1.0 / 10.0, max_relative = 1e-3);
        let mut last = 0.0;
        for i in 0..=20 {
            let l = width_l(5.0 + 0.25 * i as f64, &s).unwrap();
            assert!(l >= last - 1e-12);
            last = l;
        }
    }

    #[test]
    fn envelope_before_and_at_the_switch() {
        let s = symmetric();
        let a_o = s.probe.peak_field(s.medium.c);
        for z in [2.0, 4.0, 5.5] {
            let a = gaussian_envelope(5.0, z, &s, Branch::Forward).unwrap();
            let expected = a_o
                * (-0.5 * (z - 4.0f64).powi(2)).exp()
                * Complex64::from_polar(1.0, -s.medium.k_o * z);
            assert!((a - expected).norm() < 1e-14 * a_o);
            assert_eq!(
                gaussian_envelope(5.0, z, &s, Branch::Backward)
                    .unwrap()
                    .norm(),
                0.0
            );
        }
        let pred = envelope_prediction(5.0, &[4.0], &s).unwrap();
        assert!((pred.centroid_plus).norm() < 1e-15);
        assert_relative_eq!(pred.width.re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn amplitude_follows_the_control_ratio() {
        let mut s = symmetric();
        s.schedule = ControlSchedule {
            omega_plus: ControlProfile::constant(100.0).with_switch(5.0, 200.0),
            omega_minus: ControlProfile::constant(0.0).with_switch(5.0, 200.0),
            phi_plus: 0.0,
            phi_minus: 0.0,
            ramp_time: 0.25,
        };
        let a_o = s.probe.peak_field(s.medium.c);
        let p = envelope_parameters(7.0, &s, Branch::Forward).unwrap();
        let l = width_complex(7.0, &s).unwrap();
        assert_relative_eq!(
            p.amplitude.norm(),
            a_o * 2.0 * s.l_o() / l.norm(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gaussian_snapshot_area() {
        let mut s = symmetric();
        s.medium.k_o = 0.0;
        s.probe.center_z = 5.0;
        let z = s.z();
        let field: Vec<Complex64> = z
            .iter()
            .map(|&x| gaussian_envelope(5.0, x, &s, Branch::Forward).unwrap())
            .collect();
        let area = pulse_area(&field, s.dz(), 1.0).unwrap();
        let a_o = s.probe.peak_field(s.medium.c);
        assert_relative_eq!(area.re, a_o * (2.0 * PI).sqrt(), max_relative = 1e-5);
        assert!(area.im.abs() < 1e-12 * area.re);
        assert_eq!(pulse_area(&vec![ZERO; 10], 0.1, 1.0).unwrap(), ZERO);
        let clipped: Vec<Complex64> = field
            .iter()
            .map(|a| *a * 0.0 + Complex64::new(1.0, 0.0))
            .collect();
        assert!(matches!(
            pulse_area(&clipped, 0.1, 1.0),
            Err(Error::Containment { .. })
        ));
        assert!(pulse_area(&field, 0.1, 0.0).is_err());
    }

    #[test]
    fn time_trace_area() {
        let t: Vec<f64> = (0..=400).map(|i| -10.0 + 0.05 * i as f64).collect();
        let v: Vec<Complex64> = t
            .iter()
            .map(|&x| Complex64::new(0.0, (-0.5 * x * x).exp()))
            .collect();
        let a = pulse_area_trace(&t, &v).unwrap();
        assert_relative_eq!(a.im, (2.0 * PI).sqrt(), max_relative = 1e-12);
        assert!(pulse_area_trace(&t[1..], &v).is_err());
    }

    #[test]
    fn area_ratio_examples() {
        let mut s = symmetric();
        s.medium.k_o = 0.0;
        let r = area_ratio_prediction(15.0, 5.0, 10.0, &s, Branch::Forward).unwrap();
        assert!((r - 1.0).norm() < 1e-15);
        s.medium.gamma2 = 0.01;
        let r = area_ratio_prediction(15.0, 5.0, 10.0, &s, Branch::Forward).unwrap();
        assert_relative_eq!(r.norm(), (-0.1f64).exp(), max_relative = 1e-15);
        s.medium.k_o = 1e-3;
        let r = area_ratio_prediction(15.0, 5.0, 10.0, &s, Branch::Forward).unwrap();
        assert_relative_eq!(r.norm(), (-0.1f64).exp(), max_relative = 1e-6);
        assert!(area_ratio_prediction(9.0, 5.0, 10.0, &s, Branch::Forward).is_err());
    }

    #[test]
    fn area_ratio_matches_quadrature_at_the_splitting() {
        use crate::dispersion::phase_integral;
        let mut s = symmetric();
        s.medium.k_o = 0.05;
        s.schedule = ControlSchedule {
            omega_plus: ControlProfile::constant(100.0),
            omega_minus: ControlProfile::constant(100.0),
            phi_plus: 0.0,
            phi_minus: 0.0,
            ramp_time: 0.25,
        };
        for branch in [Branch::Forward, Branch::Backward] {
            let k = branch.sign() * s.medium.k_o;
            let pred = area_ratio_prediction(10.0, 5.0, 10.0, &s, branch).unwrap();
            let phase = phase_integral(
                SpectralModel::EliminatedSpin,
                k,
                5.0,
                10.0,
                &s.medium,
                &s.schedule,
            )
            .unwrap();
            let quad = (-Complex64::i() * phase).exp();
            assert!((pred - quad).norm() < 1e-9, "{branch:?}: {pred} vs {quad}");
            // the dynamic-spin relation differs only at second order in k_o
            let dynamic =
                area_ratio_quadrature(10.0, &s, branch, SpectralModel::DynamicSpin).unwrap();
            assert_relative_eq!(dynamic.arg(), pred.arg(), max_relative = 1e-3);
            assert!((dynamic.norm() - pred.norm()).abs() < 4.0 * (1.0 - pred.norm()));
        }
    }

    #[test]
    fn correlation_identities() {
        let a = Complex64::new(0.3, -1.2);
        let b = Complex64::new(-2.0, 0.5);
        assert_eq!(
            first_order_correlation(a, a),
            Complex64::new(a.norm_sqr(), 0.0)
        );
        assert_eq!(first_order_correlation(ZERO, b), ZERO);
        assert_eq!(
            first_order_correlation(a, b),
            first_order_correlation(b, a).conj()
        );
    }

    fn run_of(scale: f64) -> SpaceTime {
        let z: Vec<f64> = (0..64).map(|i| 0.1 * i as f64).collect();
        let g = |x: f64, c: f64| Complex64::new((-(x - c).powi(2)).exp() * scale, 0.0);
        SpaceTime {
            times: vec![0.0, 1.0],
            fields: [3.0, 3.5]
                .iter()
                .map(|&c| FieldState {
                    a_plus: z.iter().map(|&x| g(x, c)).collect(),
                    a_minus: z.iter().map(|&x| g(x, c - 1.0) * 0.5).collect(),
                })
                .collect(),
            z,
            p12: None,
        }
    }

    #[test]
    fn comparison_identities() {
        let a = run_of(1.0);
        let r = compare_runs(&a, &a, 1.0).unwrap();
        assert_eq!(r.aggregate, 0.0);
        assert_eq!(r.worst_plus, 0.0);
        let r = compare_runs(&a, &run_of(0.8), 1.0).unwrap();
        assert_relative_eq!(r.aggregate, 0.2, max_relative = 1e-12);
        assert_relative_eq!(r.worst_minus, 0.2, max_relative = 1e-12);
        assert_relative_eq!(r.rows[1].rel_plus.unwrap(), 0.2, max_relative = 1e-12);
        let text = r.to_string();
        assert!(text.starts_with("aggregate_rel_l2 = 2.00000000e-1\n"));
        let mut shifted = run_of(1.0);
        shifted.z[3] += 0.01;
        assert!(matches!(
            compare_runs(&a, &shifted, 1.0),
            Err(Error::Comparison(_))
        ));
        let mut fewer = run_of(1.0);
        fewer.times[1] = 2.0;
        assert!(matches!(
            compare_runs(&a, &fewer, 1.0),
            Err(Error::Comparison(_))
        ));
    }

    #[test]
    fn metrics_of_a_gaussian() {
        let a = run_of(1.0);
        let m = a.metrics(2.0);
        assert_relative_eq!(m[0].energy_plus, (0.5 * PI).sqrt(), max_relative = 1e-9);
        assert_relative_eq!(m[0].area_plus.re, PI.sqrt() / 2.0, max_relative = 1e-4);
        assert_relative_eq!(m[0].conversion, 0.25, max_relative = 1e-4);
        let (c, _) = centroid_width(&a.z, &a.fields[0]).unwrap();
        assert_relative_eq!(c, (3.0 + 0.25 * 2.0) / 1.25, max_relative = 1e-4);
        assert!(centroid_width(&a.z, &FieldState::zeros(64)).is_none());
    }

    #[test]
    fn width_measure_matches_gaussian_half_width() {
        let z: Vec<f64> = (0..2000).map(|i| 0.005 * i as f64).collect();
        let f = FieldState {
            a_plus: z
                .iter()
                .map(|&x| Complex64::new((-0.5 * (x - 5.0f64).powi(2) / 0.64).exp(), 0.0))
                .collect(),
            a_minus: vec![ZERO; z.len()],
        };
        let (c, w) = centroid_width(&z, &f).unwrap();
        assert_relative_eq!(c, 5.0, max_relative = 1e-12);
        assert_relative_eq!(w, 0.8, max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn conversion_is_a_probability(elapsed in 0.0f64..100.0, l_o in 0.1f64..5.0) {
            let mut s = symmetric();
            s.probe.duration = l_o;
            let p = conversion_probability(5.0 + elapsed, 5.0, &s, BroadeningReading::EntryVelocity).unwrap();
            prop_assert!(p > 0.0 && p <= 1.0);
            let l = broadened_width(l_o, 0.1, elapsed);
            prop_assert!((p - l_o / l).abs() < 1e-14);
        }

        #[test]
        fn stationary_width_is_monotone(t in 0.0f64..50.0, dt in 0.0f64..5.0, dp in -500.0f64..500.0, dm in -500.0f64..500.0) {
            let mut m = symmetric().medium;
            m.delta_plus = dp;
            m.delta_minus = dm;
            prop_assert!(width_stationary(t + dt, 1.0, 1.0, &m) >= width_stationary(t, 1.0, 1.0, &m));
            m.delta_minus = -dp;
            let sym = width_stationary(t, 1.0, 1.0, &m);
            m.delta_minus = dm;
            prop_assert!(width_stationary(t, 1.0, 1.0, &m) >= sym - 1e-12);
        }

        #[test]
        fn correlation_is_hermitian(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, d in -10.0f64..10.0) {
            let (x, y) = (Complex64::new(a, b), Complex64::new(c, d));
            prop_assert_eq!(first_order_correlation(x, y), first_order_correlation(y, x).conj());
            prop_assert!(first_order_correlation(x, x).re >= 0.0);
        }

        #[test]
        fn relative_l2_of_a_scaled_copy(s in 0.0f64..3.0) {
            let a: Vec<Complex64> = (0..50).map(|i| Complex64::from_polar(1.0 + (i as f64).sin(), i as f64)).collect();
            let b: Vec<Complex64> = a.iter().map(|x| x * s).collect();
            prop_assert!((relative_l2(&a, &b).unwrap() - (1.0 - s).abs()).abs() < 1e-12);
        }
    }
}
