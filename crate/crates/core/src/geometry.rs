//! Meridian curves of the coated rounded cone and their discretization.
//!
//! All curves live in the (ρ, z) half-plane. The symmetry axis is z and the
//! vertex points toward −z, i.e. toward the incoming wave.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Relative curvature jump above which a segment junction is flagged.
pub const CURVATURE_JUMP_TOLERANCE: f64 = 1e-6;

const AXIS_TOLERANCE: f64 = 1e-12;

/// The five scalars of the coated rounded cone plus the axial placement of
/// the body. Lengths are in units of the base radius unless `base_radius`
/// says otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    /// Half of the vertex angle, radians.
    pub half_angle: f64,
    pub base_radius: f64,
    /// Radius of both the vertex cap and the base-edge rounding.
    pub rounding: f64,
    /// Coating thickness; zero means a bare conductor.
    pub coating: f64,
    pub permittivity: f64,
    /// z coordinate of the conductor's vertex tip. The far-field phase is
    /// referenced to z = 0.
    #[serde(default)]
    pub tip_z: f64,
}

impl GeometrySpec {
    /// 2α = 23°, r = 0.32a, d = 0.6a.
    pub fn reference_cone(permittivity: f64) -> Self {
        Self {
            half_angle: 11.5_f64.to_radians(),
            base_radius: 1.0,
            rounding: 0.32,
            coating: 0.6,
            permittivity,
            tip_z: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.half_angle,
            self.base_radius,
            self.rounding,
            self.coating,
            self.permittivity,
            self.tip_z,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Geometry("non-finite parameter".into()));
        }
        if !(self.half_angle > 0.0 && self.half_angle < FRAC_PI_2) {
            return Err(Error::Geometry(format!(
                "half angle {} must lie in (0, pi/2)",
                self.half_angle
            )));
        }
        if self.base_radius <= 0.0 {
            return Err(Error::Geometry("base radius must be positive".into()));
        }
        if !(self.rounding > 0.0 && self.rounding < self.base_radius) {
            return Err(Error::Geometry(format!(
                "rounding radius {} must lie in (0, {})",
                self.rounding, self.base_radius
            )));
        }
        if self.coating < 0.0 {
            return Err(Error::Geometry("coating thickness must be >= 0".into()));
        }
        if self.permittivity < 1.0 {
            return Err(Error::Geometry("permittivity must be >= 1".into()));
        }
        Ok(())
    }

    /// True when the coating is electromagnetically present.
    pub fn is_coated(&self) -> bool {
        self.coating > 0.0 && self.permittivity > 1.0
    }

    /// Copy shifted along the axis so that the chosen tip sits
    /// at z = 0.
    pub fn placed(&self, origin: TimeOrigin) -> Self {
        let tip_z = match origin {
            TimeOrigin::OuterTip if self.is_coated() => self.coating,
            _ => 0.0,
        };
        Self { tip_z, ..*self }
    }
}

/// Which point of the body the pulse peak passes at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOrigin {
    /// First point of contact: the coating tip, or the conductor tip when
    /// the body is bare.
    #[default]
    OuterTip,
    ConductorTip,
}

/// One piece of a generatrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        start: [f64; 2],
        end: [f64; 2],
    },
    /// Points are `center + radius * (cos θ, sin θ)` in (ρ, z); θ runs from
    /// `start_angle` to `end_angle` (counter-clockwise when increasing).
    Arc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
}

/// Position, unit tangent and signed curvature at one point of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub rho: f64,
    pub z: f64,
    /// (dρ/ds, dz/ds)
    pub tangent: [f64; 2],
    pub curvature: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => (end[0] - start[0]).hypot(end[1] - start[1]),
            Segment::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle).abs(),
        }
    }

    /// Point at arc length `s` from the segment start.
    pub fn point_at(&self, s: f64) -> CurvePoint {
        match *self {
            Segment::Line { start, end } => {
                let len = self.length();
                let t = [(end[0] - start[0]) / len, (end[1] - start[1]) / len];
                CurvePoint {
                    rho: start[0] + s * t[0],
                    z: start[1] + s * t[1],
                    tangent: t,
                    curvature: 0.0,
                }
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let dir = if end_angle >= start_angle { 1.0 } else { -1.0 };
                let theta = start_angle + dir * s / radius;
                let (sin, cos) = theta.sin_cos();
                CurvePoint {
                    rho: center[0] + radius * cos,
                    z: center[1] + radius * sin,
                    tangent: [-dir * sin, dir * cos],
                    curvature: dir / radius,
                }
            }
        }
    }

    fn end_point(&self) -> CurvePoint {
        self.point_at(self.length())
    }

    /// Offset along the left-hand normal (tangent rotated by −90°), which is
    /// the outward normal for the profiles built here.
    fn offset(&self, d: f64) -> Result<Segment> {
        match *self {
            Segment::Line { start, end } => {
                let p = self.point_at(0.0);
                let n = [p.tangent[1], -p.tangent[0]];
                Ok(Segment::Line {
                    start: [start[0] + d * n[0], start[1] + d * n[1]],
                    end: [end[0] + d * n[0], end[1] + d * n[1]],
                })
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let new_radius = if end_angle >= start_angle {
                    radius + d
                } else {
                    radius - d
                };
                if new_radius <= 0.0 {
                    return Err(Error::Geometry(format!(
                        "concave arc of radius {radius} cannot be offset by {d}"
                    )));
                }
                Ok(Segment::Arc {
                    center,
                    radius: new_radius,
                    start_angle,
                    end_angle,
                })
            }
        }
    }

    fn translated(&self, dz: f64) -> Segment {
        match *self {
            Segment::Line { start, end } => Segment::Line {
                start: [start[0], start[1] + dz],
                end: [end[0], end[1] + dz],
            },
            Segment::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => Segment::Arc {
                center: [center[0], center[1] + dz],
                radius,
                start_angle,
                end_angle,
            },
        }
    }
}

/// A curvature-discontinuity circle on a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discontinuity {
    pub arc_position: f64,
    pub rho: f64,
    pub z: f64,
}

/// Tangent-continuous meridian curve running from the axis back to the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratrixProfile {
    segments: Vec<Segment>,
    starts: Vec<f64>,
    total_length: f64,
}

impl GeneratrixProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Geometry("profile has no segments".into()));
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for seg in &segments {
            let len = seg.length();
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::Geometry(format!("segment {seg:?} has length {len}")));
            }
            starts.push(acc);
            acc += len;
        }
        let profile = Self {
            segments,
            starts,
            total_length: acc,
        };
        profile.check()?;
        Ok(profile)
    }

    /// Half circle of `radius` centred on the axis at `center_z`.
    pub fn sphere(radius: f64, center_z: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Geometry("sphere radius must be positive".into()));
        }
        Self::new(vec![Segment::Arc {
            center: [0.0, center_z],
            radius,
            start_angle: -FRAC_PI_2,
            end_angle: FRAC_PI_2,
        }])
    }

    fn check(&self) -> Result<()> {
        let scale = self.total_length.max(1.0);
        let first = self.point(0.0);
        let last = self.point(self.total_length);
        if first.rho.abs() > AXIS_TOLERANCE * scale || last.rho.abs() > AXIS_TOLERANCE * scale {
            return Err(Error::Geometry(
                "profile must start and end on the symmetry axis".into(),
            ));
        }
        for pair in self.segments.windows(2) {
            let a = pair[0].end_point();
            let b = pair[1].point_at(0.0);
            let gap = (a.rho - b.rho).hypot(a.z - b.z);
            let turn = (a.tangent[0] - b.tangent[0]).hypot(a.tangent[1] - b.tangent[1]);
            if gap > 1e-9 * scale || turn > 1e-7 {
                return Err(Error::Geometry(format!(
                    "segments are not tangent-continuous (gap {gap:.2e}, turn {turn:.2e})"
                )));
            }
        }
        for seg in &self.segments {
            for k in 0..=16 {
                let p = seg.point_at(seg.length() * k as f64 / 16.0);
                if p.rho < -AXIS_TOLERANCE * scale {
                    return Err(Error::Geometry("profile crosses the axis".into()));
                }
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Arc length at which each segment starts.
    pub fn segment_starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    fn locate(&self, s: f64) -> usize {
        let idx = self.starts.partition_point(|&x| x <= s);
        idx.saturating_sub(1).min(self.segments.len() - 1)
    }

    /// Point at arc length `s`, clamped to the curve.
    pub fn point(&self, s: f64) -> CurvePoint {
        let s = s.clamp(0.0, self.total_length);
        let i = self.locate(s);
        let local = (s - self.starts[i]).min(self.segments[i].length());
        self.segments[i].point_at(local)
    }

    /// Point at arc length `s` evaluated on a specific segment, so that
    /// quadrature nodes near a junction see the right curvature.
    pub fn point_on(&self, segment: usize, s: f64) -> CurvePoint {
        self.segments[segment].point_at(s - self.starts[segment])
    }

    /// Outward offset by `d`. Convex arcs grow to radius + d.
    pub fn offset(&self, d: f64) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .map(|s| s.offset(d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(segments)
    }

    /// Same curve shifted by `dz` along the axis.
    pub fn translated(&self, dz: f64) -> Self {
        Self {
            segments: self.segments.iter().map(|s| s.translated(dz)).collect(),
            starts: self.starts.clone(),
            total_length: self.total_length,
        }
    }

    /// Junctions whose curvature jumps by more than
    /// [`CURVATURE_JUMP_TOLERANCE`] (relative).
    pub fn curvature_discontinuities(&self) -> Vec<Discontinuity> {
        let mut out = Vec::new();
        for (i, pair) in self.segments.windows(2).enumerate() {
            let a = pair[0].end_point();
            let b = pair[1].point_at(0.0);
            let scale = a.curvature.abs().max(b.curvature.abs());
            if scale > 0.0 && (a.curvature - b.curvature).abs() > CURVATURE_JUMP_TOLERANCE * scale {
                out.push(Discontinuity {
                    arc_position: self.starts[i + 1],
                    rho: b.rho,
                    z: b.z,
                });
            }
        }
        out
    }

    /// Dense samples (used by tests and plots).
    pub fn sample(&self, count: usize) -> Vec<CurvePoint> {
        (0..count)
            .map(|k| self.point(self.total_length * k as f64 / (count - 1).max(1) as f64))
            .collect()
    }
}

/// Free function form of [`GeneratrixProfile::curvature_discontinuities`].
pub fn curvature_discontinuities(profile: &GeneratrixProfile) -> Vec<Discontinuity> {
    profile.curvature_discontinuities()
}

/// Builds the conductor meridian and, when the coating has thickness, its
/// outer surface.
///
/// Construction order along the curve: spherical vertex cap, lateral line,
/// base-edge rounding, flat base back to the axis. The coating covers the
/// whole body including the base.
pub fn build_profiles(
    spec: &GeometrySpec,
) -> Result<(GeneratrixProfile, Option<GeneratrixProfile>)> {
    spec.validate()?;
    let alpha = spec.half_angle;
    let (sin_a, cos_a) = alpha.sin_cos();
    let r = spec.rounding;
    let a = spec.base_radius;
    let z0 = spec.tip_z;

    // Cap sphere centre on the axis, tip at z0.
    let cap_center = [0.0, z0 + r];
    // Virtual apex of the sharp cone tangent to the cap.
    let apex_z = cap_center[1] - r / sin_a;
    // Edge rounding centre: at radius a − r, a distance r inside the lateral line.
    let edge_rho = a - r;
    let edge_z = apex_z + (edge_rho * cos_a + r) / sin_a;

    let cap_tangent = [r * cos_a, cap_center[1] - r * sin_a];
    let edge_tangent = [edge_rho + r * cos_a, edge_z - r * sin_a];
    let lateral_len = (edge_tangent[0] - cap_tangent[0]).hypot(edge_tangent[1] - cap_tangent[1]);
    let along =
        (edge_tangent[0] - cap_tangent[0]) * sin_a + (edge_tangent[1] - cap_tangent[1]) * cos_a;
    if !(along > 1e-9 * a) || lateral_len <= 1e-9 * a {
        return Err(Error::Geometry(format!(
            "rounding radius {r} is too large for half angle {alpha}: the vertex cap and edge rounding overlap"
        )));
    }
    let base_z = edge_z + r;

    let segments = vec![
        Segment::Arc {
            center: cap_center,
            radius: r,
            start_angle: -FRAC_PI_2,
            end_angle: -alpha,
        },
        Segment::Line {
            start: cap_tangent,
            end: edge_tangent,
        },
        Segment::Arc {
            center: [edge_rho, edge_z],
            radius: r,
            start_angle: -alpha,
            end_angle: FRAC_PI_2,
        },
        Segment::Line {
            start: [edge_rho, base_z],
            end: [0.0, base_z],
        },
    ];
    let pec = GeneratrixProfile::new(segments)?;
    let coat = if spec.coating > 0.0 {
        Some(pec.offset(spec.coating)?)
    } else {
        None
    };
    Ok((pec, coat))
}

/// Discretized generatrix. Nodes sit on every segment junction; basis
/// functions live on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BorMesh {
    profile: GeneratrixProfile,
    /// Arc-length coordinates of the nodes, first and last on the axis.
    pub nodes: Vec<f64>,
    /// Geometry at each node.
    pub points: Vec<CurvePoint>,
    /// Index of the profile segment carrying each mesh element.
    pub element_segment: Vec<usize>,
    /// Wavenumber (in the densest medium) the mesh was sized for.
    pub kappa_design: f64,
    pub points_per_wavelength: f64,
}

impl BorMesh {
    pub fn profile(&self) -> &GeneratrixProfile {
        &self.profile
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// One triangle per interior node.
    pub fn basis_count(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn element_length(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn max_element_length(&self) -> f64 {
        (0..self.element_count())
            .map(|e| self.element_length(e))
            .fold(0.0, f64::max)
    }

    pub fn translated(&self, dz: f64) -> Self {
        let mut m = self.clone();
        m.profile = self.profile.translated(dz);
        for p in &mut m.points {
            p.z += dz;
        }
        m
    }
}

/// Meshes `profile` so that no element exceeds λ/ppw, where λ is the
/// wavelength at normalized frequency `kappa_max` in a medium of refractive
/// index `index` (use the densest medium touching the surface).
pub fn mesh_profile(
    profile: &GeneratrixProfile,
    kappa_max: f64,
    points_per_wavelength: f64,
    index: f64,
) -> Result<BorMesh> {
    if !(kappa_max > 0.0) {
        return Err(Error::InvalidArgument("kappa_max must be positive".into()));
    }
    if !(points_per_wavelength >= 10.0) {
        return Err(Error::InvalidArgument(
            "points per wavelength must be at least 10".into(),
        ));
    }
    if !(index >= 1.0) {
        return Err(Error::InvalidArgument(
            "refractive index must be >= 1".into(),
        ));
    }
    if !(profile.total_length() > 0.0) {
        return Err(Error::Geometry("profile has zero length".into()));
    }
    let wavelength = 2.0 * PI / (kappa_max * index);
    let h_max = wavelength / points_per_wavelength;

    let mut nodes = vec![0.0];
    let mut element_segment = Vec::new();
    for (i, seg) in profile.segments().iter().enumerate() {
        let start = profile.segment_starts()[i];
        let len = seg.length();
        let n = (len / h_max).ceil().max(1.0) as usize;
        for k in 1..=n {
            let s = if k == n {
                start + len
            } else {
                start + len * k as f64 / n as f64
            };
            nodes.push(s);
            element_segment.push(i);
        }
    }
    let last = nodes.len() - 1;
    nodes[last] = profile.total_length();
    if nodes.len() < 3 {
        return Err(Error::Geometry("mesh needs at least two elements".into()));
    }
    let points = nodes
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let seg = if j == 0 { 0 } else { element_segment[j - 1] };
            profile.point_on(seg, s)
        })
        .collect();
    Ok(BorMesh {
        profile: profile.clone(),
        nodes,
        points,
        element_segment,
        kappa_design: kappa_max * index,
        points_per_wavelength,
    })
}
