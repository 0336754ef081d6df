//! Two-color stationary light in a double-Lambda EIT medium.
//!
//! Two independent solvers for the mean-field reduced Maxwell-Bloch system
//! under time-dependent counter-propagating control fields:
//!
//! * [`timedomain`]: method-of-lines integration of the fields and atomic
//!   coherences (first-order upwind advection, RK4 in time);
//! * [`spectral`]: evolution of the polariton spectrum mode by mode through
//!   the dispersion relations of [`dispersion`].
//!
//! [`analysis`] holds the closed-form envelope laws and the observables used
//! to compare them with simulations. [`cli`] drives everything from scenario
//! files and writes CSV.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod spectral;
pub mod timedomain;

pub use error::{Error, Result};
pub use params::{
    builtin_scenario, default_scenario, derive_parameters, validate_scenario, Branch,
    ControlProfile, ControlSchedule, DerivedParams, Grid, MediumParams, ProbePulse, ReleaseMode,
    Scenario, ValidationReport,
};

use num_complex::Complex64;

/// Complex envelopes of the two weak fields on the medium grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
}

impl FieldState {
    pub fn zeros(nz: usize) -> Self {
        FieldState {
            a_plus: vec![Complex64::new(0.0, 0.0); nz],
            a_minus: vec![Complex64::new(0.0, 0.0); nz],
        }
    }

    pub fn len(&self) -> usize {
        self.a_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_plus.is_empty()
    }

    pub fn branch(&self, b: Branch) -> &[Complex64] {
        match b {
            Branch::Forward => &self.a_plus,
            Branch::Backward => &self.a_minus,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a_plus
            .iter()
            .chain(self.a_minus.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Atomic coherences on the medium grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicState {
    pub p_plus: Vec<Complex64>,
    pub p_minus: Vec<Complex64>,
    pub p12: Vec<Complex64>,
}

impl AtomicState {
    pub fn zeros(nz: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); nz];
        AtomicState {
            p_plus: z.clone(),
            p_minus: z.clone(),
            p12: z,
        }
    }

    pub fn max_p12(&self) -> f64 {
        self.p12.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
