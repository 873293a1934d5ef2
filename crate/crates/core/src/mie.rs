//! Exact series for nose-on backscatter from a conducting sphere, bare or
//! with one concentric dielectric shell.
//!
//! The amplitude convention matches the surface solver: time dependence
//! e^{+iωt}, σ_back / (πa²) = |ê|² with a = 1 the length unit, and the phase
//! referenced to the sphere centre. In the Rayleigh limit ê → 3κ² r³.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{riccati_phi, riccati_psi};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub core_radius: f64,
    /// Zero for a bare conductor.
    pub shell_thickness: f64,
    pub permittivity: f64,
}

impl SphereSpec {
    pub fn bare(radius: f64) -> Self {
        Self {
            core_radius: radius,
            shell_thickness: 0.0,
            permittivity: 1.0,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        self.core_radius + self.shell_thickness
    }

    fn validate(&self) -> Result<()> {
        if !(self.core_radius > 0.0) {
            return Err(Error::InvalidArgument(
                "core radius must be positive".into(),
            ));
        }
        if !(self.shell_thickness >= 0.0) {
            return Err(Error::InvalidArgument(
                "shell thickness must be >= 0".into(),
            ));
        }
        if !(self.permittivity >= 1.0) {
            return Err(Error::InvalidArgument("permittivity must be >= 1".into()));
        }
        Ok(())
    }
}

/// Number of retained multipoles, ⌈κ + 4κ^{1/3} + 10⌉, evaluated with the
/// outer radius and the densest medium.
pub fn series_order(kappa: f64, spec: &SphereSpec) -> usize {
    let k_outer = kappa * spec.outer_radius() * spec.permittivity.sqrt();
    (k_outer + 4.0 * k_outer.cbrt() + 10.0).ceil() as usize
}

/// Backscatter amplitude of a unit-radius conducting sphere.
pub fn pec_sphere_fsr(kappa: f64) -> Result<Complex64> {
    coated_sphere_fsr(kappa, &SphereSpec::bare(1.0))
}

pub fn coated_sphere_fsr(kappa: f64, spec: &SphereSpec) -> Result<Complex64> {
    let order = series_order(kappa, spec);
    sphere_fsr_with_order(kappa, spec, order)
}

/// Series truncated after `order` multipoles.
pub fn sphere_fsr_with_order(kappa: f64, spec: &SphereSpec, order: usize) -> Result<Complex64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    spec.validate()?;
    let n = order.max(1);
    let m = spec.permittivity.sqrt();
    let x = kappa * spec.outer_radius();
    let xc = m * kappa * spec.core_radius;
    let xm = m * x;

    let (psi, dpsi) = riccati_psi(n, x);
    let (phi, dphi) = riccati_phi(n, x);
    let (psi_m, dpsi_m) = riccati_psi(n, xm);
    let (phi_m, dphi_m) = riccati_phi(n, xm);
    let (psi_c, dpsi_c) = riccati_psi(n, xc);
    let (phi_c, dphi_c) = riccati_phi(n, xc);

    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=n {
        let xi = Complex64::new(psi[k], phi[k]);
        let dxi = Complex64::new(dpsi[k], dphi[k]);
        // Shell radial functions vanishing (TE) or with vanishing derivative
        // (TM) on the conducting core.
        let ca = dpsi_c[k] / dphi_c[k];
        let cb = psi_c[k] / phi_c[k];
        let ua = psi_m[k] - ca * phi_m[k];
        let dua = dpsi_m[k] - ca * dphi_m[k];
        let ub = psi_m[k] - cb * phi_m[k];
        let dub = dpsi_m[k] - cb * dphi_m[k];

        let a = (m * ua * dpsi[k] - psi[k] * dua) / (m * ua * dxi - xi * dua);
        let b = (ub * dpsi[k] - m * psi[k] * dub) / (ub * dxi - m * xi * dub);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += (a - b) * ((2 * k + 1) as f64 * sign);
    }
    // e^{-iωt} series amplitude, conjugated into the e^{+iωt} convention
    let e = Complex64::new(0.0, -1.0) * sum / kappa;
    if !e.re.is_finite() || !e.im.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "series diverged at kappa = {kappa}"
        )));
    }
    Ok(e.conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rayleigh_amplitude_scales_as_kappa_squared() {
        let a = pec_sphere_fsr(0.01).unwrap();
        let b = pec_sphere_fsr(0.02).unwrap();
        assert!((a.norm() / b.norm() - 0.25).abs() < 0.01 * 0.25);
        // ê → 3κ²
        assert!((a - Complex64::new(3e-4, 0.0)).norm() < 1e-3 * 3e-4 * 10.0);
    }

    #[test]
    fn optical_limit() {
        let n = 2001;
        let mean: f64 = (0..n)
            .map(|i| {
                pec_sphere_fsr(20.0 + 10.0 * i as f64 / (n - 1) as f64)
                    .unwrap()
                    .norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
        // specular return from the front face carries phase e^{+2iκ}
        let k = 25.0;
        let spec: Complex64 = (0..200)
            .map(|i| {
                let kk = k + 0.05 * i as f64;
                pec_sphere_fsr(kk).unwrap() * Complex64::new(0.0, -2.0 * kk).exp()
            })
            .sum::<Complex64>()
            / 200.0;
        assert!((spec + 1.0).norm() < 0.1, "{spec}");
    }

    #[test]
    fn truncation_converged() {
        let spec = SphereSpec::bare(1.0);
        let n = series_order(2.25, &spec);
        let a = sphere_fsr_with_order(2.25, &spec, n).unwrap();
        let b = sphere_fsr_with_order(2.25, &spec, n + 10).unwrap();
        assert!((a - b).norm() < 1e-10);
        let coated = SphereSpec {
            core_radius: 1.0,
            shell_thickness: 0.3,
            permittivity: 4.0,
        };
        let n = series_order(2.25, &coated);
        let a = sphere_fsr_with_order(2.25, &coated, n).unwrap();
        let b = sphere_fsr_with_order(2.25, &coated, n + 10).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn transparent_or_empty_shell_is_bare() {
        for &k in &[0.05, 0.5, 1.0, 2.25, 7.0] {
            let bare = pec_sphere_fsr(k).unwrap();
            let vacuum_shell = coated_sphere_fsr(
                k,
                &SphereSpec {
                    core_radius: 1.0,
                    shell_thickness: 0.4,
                    permittivity: 1.0,
                },
            )
            .unwrap();
            let thin = coated_sphere_fsr(
                k,
                &SphereSpec {
                    core_radius: 1.0,
                    shell_thickness: 0.0,
                    permittivity: 3.0,
                },
            )
            .unwrap();
            assert!((bare - vacuum_shell).norm() < 1e-10, "k={k}");
            assert!((bare - thin).norm() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn continuous_in_kappa() {
        let spec = SphereSpec {
            core_radius: 1.0,
            shell_thickness: 0.3,
            permittivity: 2.0,
        };
        // fixed pseudo-random sample points in (0, 3]
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for _ in 0..20 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let k = 3.0 * ((state >> 11) as f64 / (1u64 << 53) as f64).max(1e-3);
            for s in [&spec, &SphereSpec::bare(1.0)] {
                let a = coated_sphere_fsr(k, s).unwrap();
                let b = coated_sphere_fsr(k + 1e-4, s).unwrap();
                assert!(a.norm().is_finite());
                assert!((a - b).norm() < 1e-2 * (1.0 + a.norm()), "k={k}");
            }
        }
    }

    #[test]
    fn rejects_nonpositive_kappa() {
        assert!(pec_sphere_fsr(0.0).is_err());
        assert!(pec_sphere_fsr(-1.0).is_err());
    }
}
