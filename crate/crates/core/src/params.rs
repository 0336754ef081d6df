//! Domain types shared by every solver: medium constants, control schedules,
//! the probe pulse, discretization grids and complete scenarios.
//!
//! All quantities are in nondimensional simulation units anchored on the
//! initial slow-light group velocity `v_o = 1`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin at or above which a physics-regime condition counts as satisfied.
pub const PASS_MARGIN: f64 = 10.0;

/// Atomic and medium constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Optical coherence decay rate of the |1>-|3> transition.
    pub gamma3: f64,
    /// Ground coherence decay rate of |1>-|2>.
    pub gamma2: f64,
    /// Detuning of the forward carrier from |1>-|3>.
    pub delta_plus: f64,
    /// Detuning of the backward carrier.
    pub delta_minus: f64,
    /// Collective coupling N g^2.
    pub ng2: f64,
    /// Vacuum light speed.
    pub c: f64,
    /// Ground-splitting wavenumber omega_21 / c.
    pub k_o: f64,
    /// Medium length.
    pub length: f64,
}

impl MediumParams {
    /// Resonant amplitude absorption coefficient `N g^2 / (c gamma3)`.
    pub fn xi(&self) -> f64 {
        self.ng2 / (self.c * self.gamma3)
    }

    pub fn gamma_plus(&self) -> Complex64 {
        Complex64::new(self.gamma3, -self.delta_plus)
    }

    pub fn gamma_minus(&self) -> Complex64 {
        Complex64::new(self.gamma3, -self.delta_minus)
    }

    /// Collective coupling amplitude `sqrt(N g^2)`; the solvers normalize the
    /// atomic coherences so that this is the only coupling constant.
    pub fn coupling(&self) -> f64 {
        self.ng2.sqrt()
    }

    /// Slow-light group velocity `c Omega^2 / (N g^2)` for a single control of
    /// Rabi amplitude `omega`.
    pub fn slow_velocity(&self, omega: f64) -> f64 {
        self.c * omega * omega / self.ng2
    }

    /// Correlation length of the forward/backward coupling kernel.
    pub fn correlation_length(&self) -> f64 {
        let g3 = self.gamma3;
        ((self.delta_minus * self.delta_minus + g3 * g3) / (g3 * g3)).sqrt() / self.xi()
    }

    pub fn check(&self) -> Result<()> {
        let all = [
            self.gamma3,
            self.gamma2,
            self.delta_plus,
            self.delta_minus,
            self.ng2,
            self.c,
            self.k_o,
            self.length,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("medium constants must be finite".into()));
        }
        if self.gamma3 <= 0.0 {
            return Err(Error::Parameter("gamma3 must be positive".into()));
        }
        if self.gamma2 < 0.0 {
            return Err(Error::Parameter("gamma2 must be nonnegative".into()));
        }
        if self.c <= 0.0 || self.ng2 <= 0.0 || self.length <= 0.0 {
            return Err(Error::Parameter(
                "c, ng2 and length must be positive".into(),
            ));
        }
        if self.k_o < 0.0 {
            return Err(Error::Parameter("k_o must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Parameters derived from the medium for a given control amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub xi: f64,
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    pub v_o: f64,
    pub l_cor: f64,
}

pub fn derive_parameters(medium: &MediumParams, omega: f64) -> Result<DerivedParams> {
    if !omega.is_finite() {
        return Err(Error::Parameter("Rabi amplitude must be finite".into()));
    }
    if omega < 0.0 {
        return Err(Error::Parameter(
            "Rabi amplitude must be nonnegative".into(),
        ));
    }
    medium.check()?;
    Ok(DerivedParams {
        xi: medium.xi(),
        gamma_plus: medium.gamma_plus(),
        gamma_minus: medium.gamma_minus(),
        v_o: medium.slow_velocity(omega),
        l_cor: medium.correlation_length(),
    })
}

/// Which control field survives after the release time `t_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReleaseMode {
    /// The backward control is switched off; the pulse resumes forward.
    Forward,
    /// The forward control is switched off; the pulse leaves backward at the
    /// second carrier frequency.
    Backward,
}

impl fmt::Display for ReleaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReleaseMode::Forward => f.write_str("forward"),
            ReleaseMode::Backward => f.write_str("backward"),
        }
    }
}

/// Propagation direction of one of the two weak fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Forward,
    Backward,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Forward => 1.0,
            Branch::Backward => -1.0,
        }
    }
}

/// A level change starting at `time`; the transition is a cosine ramp of the
/// schedule's `ramp_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Switch {
    pub time: f64,
    pub level: f64,
}

/// Piecewise-smooth Rabi amplitude of one control field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlProfile {
    pub initial: f64,
    #[serde(default)]
    pub switches: Vec<Switch>,
}

impl ControlProfile {
    pub fn constant(level: f64) -> Self {
        ControlProfile {
            initial: level,
            switches: Vec::new(),
        }
    }

    pub fn with_switch(mut self, time: f64, level: f64) -> Self {
        self.switches.push(Switch { time, level });
        self
    }

    pub fn value(&self, t: f64, ramp: f64) -> f64 {
        let mut level = self.initial;
        for s in &self.switches {
            if t < s.time {
                break;
            }
            if t < s.time + ramp {
                let w = 0.5 * (1.0 - (PI * (t - s.time) / ramp).cos());
                return level + (s.level - level) * w;
            }
            level = s.level;
        }
        level
    }

    fn check(&self, ramp: f64, name: &str) -> Result<()> {
        if !self.initial.is_finite() || self.initial < 0.0 {
            return Err(Error::Scenario(format!(
                "{name}: initial level must be finite and nonnegative"
            )));
        }
        let mut last_end = f64::NEG_INFINITY;
        for s in &self.switches {
            if !s.time.is_finite() || !s.level.is_finite() || s.level < 0.0 {
                return Err(Error::Scenario(format!(
                    "{name}: switch levels must be finite and nonnegative"
                )));
            }
            if s.time < last_end {
                return Err(Error::Scenario(format!(
                    "{name}: switch at t = {} overlaps the previous ramp",
                    s.time
                )));
            }
            last_end = s.time + ramp;
        }
        Ok(())
    }
}

/// Time-dependent Rabi amplitudes and constant phases of both controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSchedule {
    pub omega_plus: ControlProfile,
    pub omega_minus: ControlProfile,
    #[serde(default)]
    pub phi_plus: f64,
    #[serde(default)]
    pub phi_minus: f64,
    pub ramp_time: f64,
}

impl ControlSchedule {
    /// Forward control on from the start, backward control switched on at
    /// `t_o`, one of them switched off at `t_1` according to `release`.
    pub fn two_sided(
        omega_plus: f64,
        omega_minus: f64,
        t_o: f64,
        t_1: f64,
        release: ReleaseMode,
        ramp_time: f64,
    ) -> Self {
        let plus = ControlProfile::constant(omega_plus);
        let minus = ControlProfile::constant(0.0).with_switch(t_o, omega_minus);
        let (plus, minus) = match release {
            ReleaseMode::Forward => (plus, minus.with_switch(t_1, 0.0)),
            ReleaseMode::Backward => (plus.with_switch(t_1, 0.0), minus),
        };
        ControlSchedule {
            omega_plus: plus,
            omega_minus: minus,
            phi_plus: 0.0,
            phi_minus: 0.0,
            ramp_time,
        }
    }

    /// Real amplitudes `(Omega_{+,0}(t), Omega_{-,0}(t))`.
    pub fn amplitudes(&self, t: f64) -> (f64, f64) {
        (
            self.omega_plus.value(t, self.ramp_time),
            self.omega_minus.value(t, self.ramp_time),
        )
    }

    /// Complex Rabi frequencies including the constant phases.
    pub fn rabi(&self, t: f64) -> (Complex64, Complex64) {
        let (p, m) = self.amplitudes(t);
        (
            Complex64::from_polar(p, self.phi_plus),
            Complex64::from_polar(m, self.phi_minus),
        )
    }

    /// Times at which the schedule stops being smooth, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .omega_plus
            .switches
            .iter()
            .chain(self.omega_minus.switches.iter())
            .flat_map(|s| [s.time, s.time + self.ramp_time])
            .collect();
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup();
        out
    }

    pub fn check(&self) -> Result<()> {
        if !(self.ramp_time > 0.0) || !self.ramp_time.is_finite() {
            return Err(Error::Scenario("ramp_time must be positive".into()));
        }
        if !self.phi_plus.is_finite() || !self.phi_minus.is_finite() {
            return Err(Error::Scenario("control phases must be finite".into()));
        }
        self.omega_plus.check(self.ramp_time, "omega_plus")?;
        self.omega_minus.check(self.ramp_time, "omega_minus")
    }
}

/// The weak probe pulse entering the medium on the forward control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbePulse {
    /// Input amplitude in photon-flux normalization.
    pub amplitude_in: f64,
    /// Temporal duration (Gaussian 1/e half-width of the amplitude).
    pub duration: f64,
    /// Centroid position inside the medium at `t_o`.
    pub center_z: f64,
    /// Constant phase of the envelope.
    #[serde(default)]
    pub phase: f64,
}

impl ProbePulse {
    /// Spatial size `l_o = v_o dt_o` inside the medium.
    pub fn spatial_size(&self, v_o: f64) -> f64 {
        v_o * self.duration
    }

    /// Peak field amplitude inside the medium, independent of the group velocity.
    pub fn peak_field(&self, c: f64) -> f64 {
        (2.0 * PI.sqrt() / (c * self.duration)).sqrt() * self.amplitude_in
    }

    /// Time at which the envelope maximum crosses the entrance plane z = 0.
    pub fn entry_time(&self, t_o: f64, v_o: f64) -> f64 {
        t_o - self.center_z / v_o
    }
}

/// Space, time and spectral discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub nz: usize,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub nk: usize,
}

impl Grid {
    pub fn dz(&self, length: f64) -> f64 {
        length / self.nz as f64
    }

    /// Cell-centered coordinates `z_i = (i + 1/2) dz`.
    pub fn z(&self, length: f64) -> Vec<f64> {
        let dz = self.dz(length);
        (0..self.nz).map(|i| (i as f64 + 0.5) * dz).collect()
    }

    /// Largest resolved wavenumber.
    pub fn k_max(&self, length: f64) -> f64 {
        PI / self.dz(length)
    }

    /// Time step at the advection stability limit.
    pub fn cfl_dt(nz: usize, length: f64, c: f64) -> f64 {
        length / nz as f64 / c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchTimes {
    /// Backward control switched on.
    pub t_o: f64,
    /// One of the controls switched off.
    pub t_1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPlan {
    /// Spacing of the stored snapshots, starting at `t_o`.
    pub snapshot_interval: f64,
}

/// A complete, serializable experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub medium: MediumParams,
    pub schedule: ControlSchedule,
    pub probe: ProbePulse,
    pub grid: Grid,
    pub times: SwitchTimes,
    pub release_mode: ReleaseMode,
    pub output: OutputPlan,
}

impl Scenario {
    /// Group velocity of the probe when it enters, on the forward control alone.
    pub fn entry_velocity(&self) -> f64 {
        let (plus, _) = self.schedule.amplitudes(self.times.t_o);
        self.medium.slow_velocity(plus)
    }

    /// Initial spatial size of the probe, `l_o = v_o dt_o`.
    pub fn l_o(&self) -> f64 {
        self.probe.spatial_size(self.entry_velocity())
    }

    pub fn dz(&self) -> f64 {
        self.grid.dz(self.medium.length)
    }

    pub fn z(&self) -> Vec<f64> {
        self.grid.z(self.medium.length)
    }

    /// Snapshot times from `t_o` to `t_end` at the planned interval.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let dt = self.output.snapshot_interval;
        let n = ((self.grid.t_end - self.times.t_o) / dt + 1e-9).floor() as usize;
        (0..=n).map(|i| self.times.t_o + i as f64 * dt).collect()
    }

    /// Midpoint of the window in which both controls may be on.
    pub fn trap_midpoint(&self) -> f64 {
        0.5 * (self.times.t_o + self.times.t_1)
    }

    /// Same scenario with the standard two-sided schedule released the other way.
    pub fn with_release(&self, release: ReleaseMode) -> Scenario {
        let (plus, _) = self.schedule.amplitudes(self.times.t_o);
        let (_, minus) = self.schedule.amplitudes(self.trap_midpoint());
        let mut s = self.clone();
        let phases = (s.schedule.phi_plus, s.schedule.phi_minus);
        s.schedule = ControlSchedule::two_sided(
            plus,
            minus,
            self.times.t_o,
            self.times.t_1,
            release,
            self.schedule.ramp_time,
        );
        s.schedule.phi_plus = phases.0;
        s.schedule.phi_minus = phases.1;
        s.release_mode = release;
        s
    }

    /// Checks the structural invariants; physics-regime conditions are left to
    /// [`validate_scenario`].
    pub fn check_structure(&self) -> Result<()> {
        self.medium.check()?;
        self.schedule.check()?;
        let (g, t) = (&self.grid, &self.times);
        if !(g.t_start < t.t_o && t.t_o < t.t_1 && t.t_1 < g.t_end) {
            return Err(Error::Scenario(format!(
                "times must satisfy t_start < t_o < t_1 < t_end (got {}, {}, {}, {})",
                g.t_start, t.t_o, t.t_1, g.t_end
            )));
        }
        if g.nz < 4 {
            return Err(Error::Grid("nz must be at least 4".into()));
        }
        if !(g.dt > 0.0) {
            return Err(Error::Grid("dt must be positive".into()));
        }
        let cfl = self.dz() / self.medium.c;
        if g.dt > cfl * (1.0 + 1e-9) {
            return Err(Error::Grid(format!(
                "dt = {:.6e} exceeds the advection bound dz/c = {:.6e}",
                g.dt, cfl
            )));
        }
        if g.nk < g.nz {
            return Err(Error::Grid("nk must be at least nz".into()));
        }
        if !(self.probe.duration > 0.0) || !self.probe.amplitude_in.is_finite() {
            return Err(Error::Scenario(
                "probe duration must be positive and its amplitude finite".into(),
            ));
        }
        let v_o = self.entry_velocity();
        if !(v_o > 0.0) {
            return Err(Error::Scenario(
                "the forward control must be on when the probe enters".into(),
            ));
        }
        let l_o = self.l_o();
        if g.k_max(self.medium.length) * l_o < 8.0 {
            return Err(Error::Grid(format!(
                "k grid does not resolve the pulse: k_max l_o = {:.3}",
                g.k_max(self.medium.length) * l_o
            )));
        }
        let (lo, hi) = (
            self.probe.center_z - 3.0 * l_o,
            self.probe.center_z + 3.0 * l_o,
        );
        if lo < 0.0 || hi > self.medium.length {
            return Err(Error::Scenario(format!(
                "probe [{lo:.3}, {hi:.3}] is not inside the medium at t_o"
            )));
        }
        if !(self.output.snapshot_interval > 0.0) {
            return Err(Error::Scenario("snapshot_interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Warn,
}

/// One physics-regime condition with its margin (ratio to one).
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub description: &'static str,
    pub margin: f64,
    pub status: Status,
}

impl Condition {
    fn new(name: &'static str, description: &'static str, margin: f64) -> Self {
        let status = if margin >= PASS_MARGIN {
            Status::Pass
        } else {
            Status::Warn
        };
        Condition {
            name,
            description,
            margin,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub conditions: Vec<Condition>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.status == Status::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.conditions {
            let flag = match c.status {
                Status::Pass => "pass",
                Status::Warn => "WARN",
            };
            writeln!(
                f,
                "{:<22} {:>14.6e}  {}  {}",
                c.name, c.margin, flag, c.description
            )?;
        }
        Ok(())
    }
}

/// Structural violations are errors; regime violations become warnings in the
/// returned report.
pub fn validate_scenario(s: &Scenario) -> Result<ValidationReport> {
    s.check_structure()?;
    let m = &s.medium;
    let (gp, gm) = (m.gamma_plus(), m.gamma_minus());
    let dt_o = s.probe.duration;
    let l_o = s.l_o();

    let optical = gp.norm().min(gm.norm()) * dt_o;
    let t_mid = s.trap_midpoint();
    let spin = dt_o * (crate::dispersion::beta_s(t_mid, m, &s.schedule) / (gp * gm)).norm();
    let splitting = 2.0 / (m.xi() * l_o * l_o * m.k_o);
    let slow = m.c / s.entry_velocity();
    let carriers = (m.delta_plus - m.delta_minus).abs() * dt_o;
    let coherence = 1.0 / (m.gamma2 * (s.times.t_1 - s.times.t_o));

    Ok(ValidationReport {
        conditions: vec![
            Condition::new("optical_adiabaticity", "|gamma_pm| dt_o >> 1", optical),
            Condition::new(
                "spin_adiabaticity",
                "dt_o |beta_s/(gamma+ gamma-)| >> 1 during the trap",
                spin,
            ),
            Condition::new("weak_splitting", "omega_21 << 2c/(xi l_o^2)", splitting),
            Condition::new("slow_light", "v_o << c", slow),
            Condition::new(
                "carrier_separation",
                "|Delta+ - Delta-| dt_o >> 1",
                carriers,
            ),
            Condition::new("ground_coherence", "gamma2 (t_1 - t_o) << 1", coherence),
        ],
    })
}

fn base_scenario(name: &str) -> Scenario {
    let medium = MediumParams {
        gamma3: 1000.0,
        gamma2: 0.0,
        delta_plus: 50.0,
        delta_minus: -50.0,
        ng2: 1.0e7,
        c: 1000.0,
        k_o: 1.0e-3,
        length: 10.0,
    };
    let nz = 400;
    Scenario {
        name: name.to_string(),
        medium,
        schedule: ControlSchedule::two_sided(100.0, 100.0, 5.0, 10.0, ReleaseMode::Forward, 0.25),
        probe: ProbePulse {
            amplitude_in: 0.01,
            duration: 1.0,
            center_z: 4.0,
            phase: 0.0,
        },
        grid: Grid {
            nz,
            dt: Grid::cfl_dt(nz, medium.length, medium.c),
            t_start: -3.0,
            t_end: 15.0,
            nk: 4 * nz,
        },
        times: SwitchTimes {
            t_o: 5.0,
            t_1: 10.0,
        },
        release_mode: ReleaseMode::Forward,
        output: OutputPlan {
            snapshot_interval: 0.5,
        },
    }
}

/// The canonical desk-scale scenario: stationary trap between t_o = 5 and
/// t_1 = 10, forward release.
pub fn default_scenario() -> Scenario {
    base_scenario("fig2ab")
}

/// Names accepted by [`builtin_scenario`].
pub const BUILTIN_SCENARIOS: [&str; 3] = ["fig2ab", "fig2cd", "fig3-decay"];

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    match name {
        "fig2ab" => Some(default_scenario()),
        "fig2cd" => {
            // Direct hand-over: the forward control goes off right after the
            // backward one is fully on.
            let mut s = base_scenario("fig2cd");
            let ramp = s.schedule.ramp_time;
            s.times.t_1 = s.times.t_o + ramp;
            s.schedule = ControlSchedule::two_sided(
                100.0,
                100.0,
                s.times.t_o,
                s.times.t_1,
                ReleaseMode::Backward,
                ramp,
            );
            s.release_mode = ReleaseMode::Backward;
            Some(s)
        }
        "fig3-decay" => {
            let mut s = base_scenario("fig3-decay");
            s.medium.gamma2 = 0.01;
            Some(s)
        }
        _ => None,
    }
}
