//! The JSON run description.

use std::path::{Path, PathBuf};

use borscat::geometry::{build_profiles, mesh_profile, GeometrySpec, TimeOrigin};
use borscat::pulse::PulseSpec;
use borscat::synthesis::TimeGrid;
use borscat::{BorMesh, GeneratrixProfile};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub body: Body,
    pub permittivities: Vec<f64>,
    pub kappa_grid: KappaGrid,
    pub pulse: PulseConfig,
    pub points_per_wavelength: f64,
    pub time_grid: TimeGridConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_threshold")]
    pub threshold_fraction: f64,
    /// Axial placement of cones; spheres are always centred on the origin.
    #[serde(default)]
    pub time_origin: TimeOrigin,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_threshold() -> f64 {
    borscat::echo::DEFAULT_THRESHOLD
}

fn default_base_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Body {
    Cone {
        half_angle_deg: f64,
        #[serde(default = "default_base_radius")]
        base_radius: f64,
        rounding: f64,
        coating: f64,
    },
    Sphere {
        radius: f64,
        #[serde(default)]
        coating: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl KappaGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub c_tau_over_a: f64,
    pub kappa_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

/// Meshes for one permittivity.
pub struct Meshes {
    pub pec: BorMesh,
    pub coat: Option<BorMesh>,
}

impl RunSpec {
    /// The 23° coated cone at ε = 1, 2, 4 with cτ/a = 4 and κ_max = 2.25.
    pub fn reference_cone() -> Self {
        Self {
            body: Body::Cone {
                half_angle_deg: 11.5,
                base_radius: 1.0,
                rounding: 0.32,
                coating: 0.6,
            },
            permittivities: vec![1.0, 2.0, 4.0],
            kappa_grid: KappaGrid {
                min: 2.25 / 64.0,
                max: 2.25,
                count: 64,
            },
            pulse: PulseConfig {
                c_tau_over_a: 4.0,
                kappa_max: 2.25,
            },
            points_per_wavelength: 15.0,
            time_grid: TimeGridConfig {
                start: -2.0,
                end: 14.0,
                step: 0.02,
            },
            output_dir: default_output_dir(),
            threshold_fraction: default_threshold(),
            time_origin: TimeOrigin::OuterTip,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("run spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_json(&crate::io::read_to_string(path)?)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.permittivities.is_empty() {
            return bad("no permittivities given".into());
        }
        for &eps in &self.permittivities {
            if !(eps >= 1.0 && eps.is_finite()) {
                return bad(format!("permittivity {eps} must be >= 1"));
            }
            if let Some(g) = self.geometry(eps) {
                g.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            }
        }
        if let Body::Sphere { radius, coating } = self.body {
            if !(radius > 0.0 && coating >= 0.0) {
                return bad("sphere radius must be positive and coating >= 0".into());
            }
        }
        let g = self.kappa_grid;
        if !(g.min > 0.0 && g.max > g.min && g.count >= 2) {
            return bad(format!(
                "kappa grid needs 0 < min < max and count >= 2, got {g:?}"
            ));
        }
        self.pulse_spec()?;
        if self.pulse.kappa_max > g.max {
            return bad(format!(
                "pulse kappa_max {} exceeds the frequency grid maximum {}",
                self.pulse.kappa_max, g.max
            ));
        }
        if !(self.points_per_wavelength >= 10.0) {
            return bad("points_per_wavelength must be >= 10".into());
        }
        self.time_grid()?;
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return bad("threshold_fraction must lie in (0, 1)".into());
        }
        Ok(())
    }

    pub fn pulse_spec(&self) -> CliResult<PulseSpec> {
        PulseSpec::from_c_tau(self.pulse.c_tau_over_a, self.pulse.kappa_max)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn time_grid(&self) -> CliResult<TimeGrid> {
        let t = self.time_grid;
        TimeGrid::spanning(t.start, t.end, t.step).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Cone parameters at one permittivity; `None` for spheres.
    pub fn geometry(&self, eps: f64) -> Option<GeometrySpec> {
        match self.body {
            Body::Cone {
                half_angle_deg,
                base_radius,
                rounding,
                coating,
            } => Some(
                GeometrySpec {
                    half_angle: half_angle_deg.to_radians(),
                    base_radius,
                    rounding,
                    coating,
                    permittivity: eps,
                    tip_z: 0.0,
                }
                .placed(self.time_origin),
            ),
            Body::Sphere { .. } => None,
        }
    }

    /// Whether the dielectric layer is electromagnetically present at `eps`.
    pub fn is_coated(&self, eps: f64) -> bool {
        let coating = match self.body {
            Body::Cone { coating, .. } | Body::Sphere { coating, .. } => coating,
        };
        coating > 0.0 && eps > 1.0
    }

    pub fn profiles(&self, eps: f64) -> CliResult<(GeneratrixProfile, Option<GeneratrixProfile>)> {
        let (pec, coat) = match self.body {
            Body::Cone { .. } => {
                let g = self.geometry(eps).expect("cone geometry");
                build_profiles(&g)?
            }
            Body::Sphere { radius, coating } => {
                let pec = GeneratrixProfile::sphere(radius, 0.0)?;
                let coat = if coating > 0.0 {
                    Some(pec.offset(coating)?)
                } else {
                    None
                };
                (pec, coat)
            }
        };
        Ok((pec, if self.is_coated(eps) { coat } else { None }))
    }

    pub fn meshes(&self, eps: f64) -> CliResult<Meshes> {
        let (pec, coat) = self.profiles(eps)?;
        let index = if coat.is_some() { eps.sqrt() } else { 1.0 };
        let kmax = self.kappa_grid.max;
        let ppw = self.points_per_wavelength;
        Ok(Meshes {
            pec: mesh_profile(&pec, kmax, ppw, index)?,
            coat: coat
                .map(|c| mesh_profile(&c, kmax, ppw, index))
                .transpose()?,
        })
    }
}
