//! Method-of-lines integrator for the reduced Maxwell-Bloch system
//!
//! ```text
//! dP+/dt  = -gamma+ P+ + i G A+ + i Omega+ e^{-ik_o z} P12
//! dP-/dt  = -gamma- P- + i G A- + i Omega- e^{+ik_o z} P12
//! dP12/dt = -gamma2 P12 + i (Omega+* e^{ik_o z} P+ + Omega-* e^{-ik_o z} P-)
//! (d/dt +- c d/dz) A+- = i G P+-
//! ```
//!
//! with `G = sqrt(N g^2)`. Cells are centered at `(i + 1/2) dz`; advection is
//! first-order upwind, time stepping classical RK4. The adiabatic mode
//! replaces `P+-` by their quasi-static values.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{Branch, ControlSchedule, MediumParams, Scenario};
use crate::spectral::{ground_coherence, initial_spectrum, reconstruct, SpectralGrid};
use crate::{AtomicState, FieldState};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Level of the weak-field monitor above which a warning is raised.
pub const P12_WARN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Optical coherences integrated explicitly.
    #[default]
    Full,
    /// Optical coherences slaved to the fields and the ground coherence.
    Adiabatic,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "adiabatic" => Ok(Mode::Adiabatic),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected full|adiabatic)"
            ))),
        }
    }
}

/// Fields and atomic coherences at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub fields: FieldState,
    pub atoms: AtomicState,
}

impl SimulationState {
    pub fn zeros(t: f64, nz: usize) -> Self {
        SimulationState {
            t,
            fields: FieldState::zeros(nz),
            atoms: AtomicState::zeros(nz),
        }
    }
}

/// Boundary source: a Gaussian in time entering on one of the two fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injection {
    pub branch: Branch,
    pub amplitude: Complex64,
    pub peak_time: f64,
    pub duration: f64,
}

impl Injection {
    /// The scenario's probe entering at z = 0 so that its peak would sit at
    /// `center_z` at `t_o` on the forward control alone.
    pub fn from_scenario(s: &Scenario) -> Self {
        Injection {
            branch: Branch::Forward,
            amplitude: Complex64::from_polar(s.probe.peak_field(s.medium.c), s.probe.phase),
            peak_time: s.probe.entry_time(s.times.t_o, s.entry_velocity()),
            duration: s.probe.duration,
        }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        let x = (t - self.peak_time) / self.duration;
        self.amplitude * (-0.5 * x * x).exp()
    }
}

/// Per-step health record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    /// `int |A+|^2 dz`
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub p12_max: f64,
    /// `(dz/c) / dt`; must stay >= 1.
    pub cfl_margin: f64,
}

/// Time series of both fields at a fixed plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneTrace {
    pub z: f64,
    pub t: Vec<f64>,
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
}

/// Time integrals of the fields through fixed planes, accumulated by the
/// trapezoid rule at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneIntegral {
    pub z: f64,
    pub plus: Complex64,
    pub minus: Complex64,
}

/// Cumulative boundary fluxes at one snapshot time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFlux {
    pub t: f64,
    /// `int A+(t, L) dt` since the start: forward area that has left.
    pub exited_plus: Complex64,
    /// `int A-(t, 0) dt` since the start: backward area that has left.
    pub exited_minus: Complex64,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub mode: Mode,
    /// Snapshot times; each is hit exactly.
    pub output_times: Vec<f64>,
    pub injection: Option<Injection>,
    /// Start from this state instead of an empty medium at `t_start`.
    pub initial: Option<SimulationState>,
    /// Time step; defaults to the scenario grid's.
    pub dt: Option<f64>,
    /// Diagnostics every this many steps (0 disables).
    pub diag_every: usize,
    /// Planes at which time traces and time integrals are recorded.
    pub planes: Vec<f64>,
    /// Trace sample every this many steps.
    pub trace_every: usize,
}

impl Options {
    pub fn for_scenario(s: &Scenario, mode: Mode) -> Self {
        Options {
            mode,
            output_times: s.snapshot_times(),
            injection: Some(Injection::from_scenario(s)),
            initial: None,
            dt: None,
            diag_every: 100,
            planes: Vec::new(),
            trace_every: 10,
        }
    }

    /// Starts from [`seeded_state`] at `t_o` with no boundary source.
    pub fn seeded(s: &Scenario, mode: Mode) -> Result<Self> {
        Ok(Options {
            injection: None,
            initial: Some(seeded_state(s)?),
            ..Options::for_scenario(s, mode)
        })
    }
}

#[derive(Debug, Clone)]
pub struct TdRun {
    pub snapshots: Vec<SimulationState>,
    pub fluxes: Vec<BoundaryFlux>,
    pub diagnostics: Vec<Diagnostic>,
    pub traces: Vec<PlaneTrace>,
    pub plane_integrals: Vec<PlaneIntegral>,
    pub p12_max: f64,
    pub warnings: Vec<String>,
    pub steps: usize,
}

struct System {
    nz: usize,
    mode: Mode,
    c_over_dz: f64,
    g: f64,
    gp: Complex64,
    gm: Complex64,
    g2: f64,
    /// `e^{-ik_o z}` and `e^{+ik_o z}` on the cells.
    ep: Vec<Complex64>,
    em: Vec<Complex64>,
    schedule: ControlSchedule,
    source: Source,
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Pulse(Injection),
    Fixed(Complex64, Complex64),
}

impl From<Option<Injection>> for Source {
    fn from(inj: Option<Injection>) -> Self {
        match inj {
            Some(p) => Source::Pulse(p),
            None => Source::Fixed(ZERO, ZERO),
        }
    }
}

impl System {
    fn new(
        m: &MediumParams,
        schedule: &ControlSchedule,
        nz: usize,
        dz: f64,
        mode: Mode,
        source: Source,
    ) -> Self {
        let z: Vec<f64> = (0..nz).map(|i| (i as f64 + 0.5) * dz).collect();
        System {
            nz,
            mode,
            c_over_dz: m.c / dz,
            g: m.coupling(),
            gp: m.gamma_plus(),
            gm: m.gamma_minus(),
            g2: m.gamma2,
            ep: z
                .iter()
                .map(|&z| Complex64::from_polar(1.0, -m.k_o * z))
                .collect(),
            em: z
                .iter()
                .map(|&z| Complex64::from_polar(1.0, m.k_o * z))
                .collect(),
            schedule: schedule.clone(),
            source,
        }
    }

    fn blocks(&self) -> usize {
        match self.mode {
            Mode::Full => 5,
            Mode::Adiabatic => 3,
        }
    }

    fn inflow(&self, t: f64) -> (Complex64, Complex64) {
        match self.source {
            Source::Pulse(inj) => match inj.branch {
                Branch::Forward => (inj.value(t), ZERO),
                Branch::Backward => (ZERO, inj.value(t)),
            },
            Source::Fixed(a, b) => (a, b),
        }
    }

    /// Optical coherences: explicit in full mode, quasi-static otherwise.
    fn optical(&self, t: f64, y: &[Complex64], i: usize) -> (Complex64, Complex64) {
        let n = self.nz;
        match self.mode {
            Mode::Full => (y[3 * n + i], y[4 * n + i]),
            Mode::Adiabatic => {
                let (wp, wm) = self.schedule.rabi(t);
                let s = y[2 * n + i];
                (
                    I / self.gp * (self.g * y[i] + wp * self.ep[i] * s),
                    I / self.gm * (self.g * y[n + i] + wm * self.em[i] * s),
                )
            }
        }
    }

    // First-order upwind: A+ takes its left neighbour, A- its right one.
    fn advect(
        dap: &mut [Complex64],
        dam: &mut [Complex64],
        ap: &[Complex64],
        am: &[Complex64],
        cd: f64,
        in_plus: Complex64,
        in_minus: Complex64,
    ) {
        let n = ap.len();
        dap[0] -= cd * (ap[0] - in_plus);
        for ((d, a), l) in dap[1..].iter_mut().zip(&ap[1..]).zip(&ap[..n - 1]) {
            *d -= cd * (a - l);
        }
        dam[n - 1] += cd * (in_minus - am[n - 1]);
        for ((d, a), r) in dam[..n - 1].iter_mut().zip(&am[..n - 1]).zip(&am[1..]) {
            *d += cd * (r - a);
        }
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let n = self.nz;
        let (wp, wm) = self.schedule.rabi(t);
        let (in_plus, in_minus) = self.inflow(t);
        let (ap, rest) = y.split_at(n);
        let (am, rest) = rest.split_at(n);
        let s = &rest[..n];
        let (dap, drest) = dy.split_at_mut(n);
        let (dam, drest) = drest.split_at_mut(n);
        let (ds, dp) = drest.split_at_mut(n);
        let ig = I * self.g;
        let cd = self.c_over_dz;
        match self.mode {
            Mode::Full => {
                let (pp, pm) = rest[n..].split_at(n);
                let (dpp, dpm) = dp.split_at_mut(n);
                let (iwp, iwm) = (I * wp, I * wm);
                let (iwpc, iwmc) = (I * wp.conj(), I * wm.conj());
                let (gp, gm, g2) = (self.gp, self.gm, self.g2);
                let (ep, em) = (&self.ep[..n], &self.em[..n]);
                let (pp, pm, ap, am) = (&pp[..n], &pm[..n], &ap[..n], &am[..n]);
                let (dpp, dpm, ds) = (&mut dpp[..n], &mut dpm[..n], &mut ds[..n]);
                let (dap, dam) = (&mut dap[..n], &mut dam[..n]);
                for i in 0..n {
                    let (epi, emi, si, ppi, pmi) = (ep[i], em[i], s[i], pp[i], pm[i]);
                    dpp[i] = -gp * ppi + ig * ap[i] + iwp * (epi * si);
                    dpm[i] = -gm * pmi + ig * am[i] + iwm * (emi * si);
                    ds[i] = -g2 * si + iwpc * (emi * ppi) + iwmc * (epi * pmi);
                    dap[i] = ig * ppi;
                    dam[i] = ig * pmi;
                }
                Self::advect(dap, dam, ap, am, cd, in_plus, in_minus);
            }
            Mode::Adiabatic => {
                let (igp, igm) = (I / self.gp, I / self.gm);
                let (g, g2) = (self.g, self.g2);
                let (iwpc, iwmc) = (I * wp.conj(), I * wm.conj());
                let (ep, em) = (&self.ep[..n], &self.em[..n]);
                let (ap, am, ds) = (&ap[..n], &am[..n], &mut ds[..n]);
                let (dap, dam) = (&mut dap[..n], &mut dam[..n]);
                for i in 0..n {
                    let (epi, emi, si) = (ep[i], em[i], s[i]);
                    let pp = igp * (g * ap[i] + wp * (epi * si));
                    let pm = igm * (g * am[i] + wm * (emi * si));
                    dap[i] = ig * pp;
                    dam[i] = ig * pm;
                    ds[i] = -g2 * si + iwpc * (emi * pp) + iwmc * (epi * pm);
                }
                Self::advect(dap, dam, ap, am, cd, in_plus, in_minus);
            }
        }
    }

    fn pack(&self, st: &SimulationState) -> Vec<Complex64> {
        let mut y = Vec::with_capacity(self.blocks() * self.nz);
        y.extend_from_slice(&st.fields.a_plus);
        y.extend_from_slice(&st.fields.a_minus);
        y.extend_from_slice(&st.atoms.p12);
        if self.mode == Mode::Full {
            y.extend_from_slice(&st.atoms.p_plus);
            y.extend_from_slice(&st.atoms.p_minus);
        }
        y
    }

    fn unpack(&self, t: f64, y: &[Complex64]) -> SimulationState {
        let n = self.nz;
        let (p_plus, p_minus) = match self.mode {
            Mode::Full => (y[3 * n..4 * n].to_vec(), y[4 * n..5 * n].to_vec()),
            Mode::Adiabatic => (0..n).map(|i| self.optical(t, y, i)).unzip(),
        };
        SimulationState {
            t,
            fields: FieldState {
                a_plus: y[..n].to_vec(),
                a_minus: y[n..2 * n].to_vec(),
            },
            atoms: AtomicState {
                p_plus,
                p_minus,
                p12: y[2 * n..3 * n].to_vec(),
            },
        }
    }
}

struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

const FLUSH: f64 = 1e-150;

impl Rk4 {
    fn new(len: usize) -> Self {
        Rk4 {
            k1: vec![ZERO; len],
            k2: vec![ZERO; len],
            k3: vec![ZERO; len],
            k4: vec![ZERO; len],
            tmp: vec![ZERO; len],
        }
    }

    fn step(&mut self, sys: &System, t: f64, dt: f64, y: &mut [Complex64]) {
        let h = dt * 0.5;
        sys.rhs(t, y, &mut self.k1);
        for ((t_, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t_ = y + k * h;
        }
        sys.rhs(t + h, &self.tmp, &mut self.k2);
        for ((t_, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t_ = y + k * h;
        }
        sys.rhs(t + h, &self.tmp, &mut self.k3);
        for ((t_, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t_ = y + k * dt;
        }
        sys.rhs(t + dt, &self.tmp, &mut self.k4);
        let w = dt / 6.0;
        for i in 0..y.len() {
            let v = y[i] + (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]) * w;
            // Leading tails would otherwise decay into subnormals, which are very slow.
            y[i] = if v.re.abs() + v.im.abs() < FLUSH {
                ZERO
            } else {
                v
            };
        }
    }
}

/// Time derivative of `state` with explicit boundary inflows `(A+(0), A-(L))`.
pub fn rhs(
    state: &SimulationState,
    medium: &MediumParams,
    schedule: &ControlSchedule,
    dz: f64,
    inflow: (Complex64, Complex64),
    mode: Mode,
) -> SimulationState {
    let nz = state.fields.len();
    let sys = System::new(
        medium,
        schedule,
        nz,
        dz,
        mode,
        Source::Fixed(inflow.0, inflow.1),
    );
    let y = sys.pack(state);
    let mut dy = vec![ZERO; y.len()];
    sys.rhs(state.t, &y, &mut dy);
    let n = nz;
    SimulationState {
        t: state.t,
        fields: FieldState {
            a_plus: dy[..n].to_vec(),
            a_minus: dy[n..2 * n].to_vec(),
        },
        atoms: AtomicState {
            p_plus: if mode == Mode::Full {
                dy[3 * n..4 * n].to_vec()
            } else {
                vec![ZERO; n]
            },
            p_minus: if mode == Mode::Full {
                dy[4 * n..5 * n].to_vec()
            } else {
                vec![ZERO; n]
            },
            p12: dy[2 * n..3 * n].to_vec(),
        },
    }
}

/// One RK4 step of size `dt` with the scenario's probe as boundary source.
pub fn step(
    state: &SimulationState,
    dt: f64,
    scenario: &Scenario,
    mode: Mode,
) -> Result<SimulationState> {
    let nz = state.fields.len();
    let dz = scenario.medium.length / nz as f64;
    if dt > dz / scenario.medium.c * (1.0 + 1e-9) {
        return Err(Error::Grid(format!(
            "dt = {dt:.6e} exceeds dz/c = {:.6e}",
            dz / scenario.medium.c
        )));
    }
    let sys = System::new(
        &scenario.medium,
        &scenario.schedule,
        nz,
        dz,
        mode,
        Source::Pulse(Injection::from_scenario(scenario)),
    );
    let mut y = sys.pack(state);
    Rk4::new(y.len()).step(&sys, state.t, dt, &mut y);
    if !all_finite(&y) {
        return Err(Error::Divergence {
            time: state.t + dt,
            last_good: state.t,
            detail: "non-finite state after one step".into(),
        });
    }
    Ok(sys.unpack(state.t + dt, &y))
}

fn all_finite(y: &[Complex64]) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// The probe already inside the medium at `t_o` in the Gaussian state of the
/// spectral solver: fields and ground coherence from the initial spectrum,
/// optical coherences at their quasi-static values.
pub fn seeded_state(scenario: &Scenario) -> Result<SimulationState> {
    let grid = SpectralGrid::for_scenario(scenario)?;
    let spec = initial_spectrum(scenario, &grid)?;
    let t = spec.t;
    let m = &scenario.medium;
    let fields = reconstruct(&spec, t, &scenario.schedule, m, &grid)?;
    let p12 = ground_coherence(&spec, m, &grid)?;
    let (wp, wm) = scenario.schedule.rabi(t);
    let g = m.coupling();
    let (gp, gm) = (m.gamma_plus(), m.gamma_minus());
    let z = scenario.z();
    let p_plus = (0..z.len())
        .map(|i| {
            I / gp
                * (g * fields.a_plus[i] + wp * Complex64::from_polar(1.0, -m.k_o * z[i]) * p12[i])
        })
        .collect();
    let p_minus = (0..z.len())
        .map(|i| {
            I / gm
                * (g * fields.a_minus[i] + wm * Complex64::from_polar(1.0, m.k_o * z[i]) * p12[i])
        })
        .collect();
    Ok(SimulationState {
        t,
        fields,
        atoms: AtomicState {
            p_plus,
            p_minus,
            p12,
        },
    })
}

/// Runs the scenario with default options.
pub fn run(scenario: &Scenario, mode: Mode) -> Result<TdRun> {
    run_with(scenario, &Options::for_scenario(scenario, mode))
}

pub fn run_with(scenario: &Scenario, opts: &Options) -> Result<TdRun> {
    scenario.check_structure()?;
    let nz = scenario.grid.nz;
    let dz = scenario.dz();
    let dt_max = opts.dt.unwrap_or(scenario.grid.dt);
    if !(dt_max > 0.0) || dt_max > dz / scenario.medium.c * (1.0 + 1e-9) {
        return Err(Error::Grid(format!(
            "dt = {dt_max:.6e} violates 0 < dt <= dz/c"
        )));
    }
    let sys = System::new(
        &scenario.medium,
        &scenario.schedule,
        nz,
        dz,
        opts.mode,
        opts.injection.into(),
    );
    let start = opts
        .initial
        .clone()
        .unwrap_or_else(|| SimulationState::zeros(scenario.grid.t_start, nz));
    if start.fields.len() != nz {
        return Err(Error::Grid("initial state does not match nz".into()));
    }
    let mut t = start.t;
    if opts.output_times.iter().any(|&s| s < t) || opts.output_times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::Parameter(
            "output times must be increasing and not before the start".into(),
        ));
    }
    let mut y = sys.pack(&start);
    let mut rk = Rk4::new(y.len());

    let plane_idx: Vec<usize> = opts
        .planes
        .iter()
        .map(|&z| ((z / dz - 0.5).round().max(0.0) as usize).min(nz - 1))
        .collect();
    let mut traces: Vec<PlaneTrace> = plane_idx
        .iter()
        .map(|&i| PlaneTrace {
            z: (i as f64 + 0.5) * dz,
            t: Vec::new(),
            a_plus: Vec::new(),
            a_minus: Vec::new(),
        })
        .collect();
    let mut plane_integrals: Vec<PlaneIntegral> = traces
        .iter()
        .map(|tr| PlaneIntegral {
            z: tr.z,
            plus: ZERO,
            minus: ZERO,
        })
        .collect();

    let mut out = TdRun {
        snapshots: Vec::with_capacity(opts.output_times.len()),
        fluxes: Vec::with_capacity(opts.output_times.len()),
        diagnostics: Vec::new(),
        traces: Vec::new(),
        plane_integrals: Vec::new(),
        p12_max: 0.0,
        warnings: Vec::new(),
        steps: 0,
    };
    let mut exited_plus = ZERO;
    let mut exited_minus = ZERO;
    let mut boundary = (y[nz - 1], y[nz]);
    let mut plane_prev: Vec<(Complex64, Complex64)> =
        plane_idx.iter().map(|&i| (y[i], y[nz + i])).collect();
    let mut warned = false;

    let record_trace = |traces: &mut Vec<PlaneTrace>, t: f64, y: &[Complex64]| {
        for (tr, &i) in traces.iter_mut().zip(&plane_idx) {
            tr.t.push(t);
            tr.a_plus.push(y[i]);
            tr.a_minus.push(y[nz + i]);
        }
    };
    record_trace(&mut traces, t, &y);

    for &target in &opts.output_times {
        let span = target - t;
        let n_steps = if span > 0.0 {
            (span / dt_max * (1.0 - 1e-12)).ceil() as usize
        } else {
            0
        };
        let h = if n_steps > 0 {
            span / n_steps as f64
        } else {
            0.0
        };
        for j in 0..n_steps {
            let t0 = t;
            rk.step(&sys, t0, h, &mut y);
            t = if j + 1 == n_steps { target } else { t0 + h };
            out.steps += 1;

            let p12_max = y[2 * nz..3 * nz]
                .iter()
                .map(|c| c.norm_sqr())
                .fold(0.0, f64::max)
                .sqrt();
            if !p12_max.is_finite() || !all_finite(&y[..2 * nz]) {
                return Err(Error::Divergence {
                    time: t,
                    last_good: t0,
                    detail: "non-finite field or coherence".into(),
                });
            }
            out.p12_max = out.p12_max.max(p12_max);
            if p12_max > P12_WARN && !warned {
                warned = true;
                let msg =
                    format!("weak-field regime violated: |P12| = {p12_max:.3e} at t = {t:.4}");
                log::warn!("{msg}");
                out.warnings.push(msg);
            }

            let now = (y[nz - 1], y[nz]);
            exited_plus += (boundary.0 + now.0) * (0.5 * h);
            exited_minus += (boundary.1 + now.1) * (0.5 * h);
            boundary = now;
            for ((acc, prev), &i) in plane_integrals
                .iter_mut()
                .zip(plane_prev.iter_mut())
                .zip(&plane_idx)
            {
                let now = (y[i], y[nz + i]);
                acc.plus += (prev.0 + now.0) * (0.5 * h);
                acc.minus += (prev.1 + now.1) * (0.5 * h);
                *prev = now;
            }
            if opts.trace_every > 0 && out.steps % opts.trace_every == 0 {
                record_trace(&mut traces, t, &y);
            }
            if opts.diag_every > 0 && out.steps % opts.diag_every == 0 {
                out.diagnostics.push(Diagnostic {
                    t,
                    energy_plus: y[..nz].iter().map(|c| c.norm_sqr()).sum::<f64>() * dz,
                    energy_minus: y[nz..2 * nz].iter().map(|c| c.norm_sqr()).sum::<f64>() * dz,
                    p12_max,
                    cfl_margin: dz / scenario.medium.c / h,
                });
            }
        }
        out.snapshots.push(sys.unpack(t, &y));
        out.fluxes.push(BoundaryFlux {
            t,
            exited_plus,
            exited_minus,
        });
    }
    out.traces = traces;
    out.plane_integrals = plane_integrals;
    Ok(out)
}
