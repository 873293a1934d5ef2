//! Gaussian video pulse and its spectrum.
//!
//! Time is measured in units of a/c and frequency as κ = ωa/c, so the pulse
//! parameter g is stored as g·a/c and the duration at the 1/e level is
//! cτ/a = 2/g.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    g: f64,
    kappa_max: f64,
}

impl PulseSpec {
    pub fn new(g: f64, kappa_max: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pulse parameter g must be positive, got {g}"
            )));
        }
        if !(kappa_max >= 0.0 && kappa_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kappa_max must be finite and >= 0, got {kappa_max}"
            )));
        }
        Ok(Self { g, kappa_max })
    }

    /// Pulse from its normalized duration cτ/a.
    pub fn from_c_tau(c_tau_over_a: f64, kappa_max: f64) -> Result<Self> {
        if !(c_tau_over_a > 0.0) {
            return Err(Error::InvalidArgument(
                "pulse duration must be positive".into(),
            ));
        }
        Self::new(2.0 / c_tau_over_a, kappa_max)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// cτ/a
    pub fn tau(&self) -> f64 {
        2.0 / self.g
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    pub fn with_kappa_max(&self, kappa_max: f64) -> Result<Self> {
        Self::new(self.g, kappa_max)
    }

    /// f(t, z) = exp[−g²(z − t)²] with t in a/c and z in a.
    pub fn pulse_value(&self, t: f64, z: f64) -> f64 {
        let u = self.g * (z - t);
        (-u * u).exp()
    }

    /// S(κ) = (√π/g)·exp(−κ²/4g²), in units of a/c.
    pub fn spectrum_value(&self, kappa: f64) -> f64 {
        let u = kappa / (2.0 * self.g);
        PI.sqrt() / self.g * (-u * u).exp()
    }

    /// Fraction of the one-sided spectral integral lying above κ_max.
    pub fn truncation_fraction(&self) -> f64 {
        erfc(self.kappa_max / (2.0 * self.g))
    }

    /// The same ratio by direct numerical integration of the spectrum.
    pub fn truncation_fraction_quadrature(&self) -> f64 {
        // the spectrum is below e^-1600 of its peak past 80g
        let end = 80.0 * self.g;
        let f = |k: f64| self.spectrum_value(k);
        let total = adaptive_real(f, &[0.0, 2.0 * self.g, end], 0.0, 1e-14);
        if self.kappa_max >= end {
            return 0.0;
        }
        let mut bp = vec![self.kappa_max];
        if 2.0 * self.g > self.kappa_max {
            bp.push(2.0 * self.g);
        }
        bp.push(end);
        let tail = adaptive_real(f, &bp, 1e-300, 1e-13);
        tail / total
    }
}
