//! Sampled frequency-domain backscatter response and its CSV form.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One complex backscatter sample, E = A·exp(iφ), at normalized frequency
/// κ = ωa/c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsrSample {
    pub kappa: f64,
    pub e: Complex64,
}

impl FsrSample {
    pub fn new(kappa: f64, e: Complex64) -> Self {
        Self { kappa, e }
    }

    pub fn from_polar(kappa: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            kappa,
            e: Complex64::from_polar(amplitude, phase),
        }
    }

    /// A(ω)
    pub fn amplitude(&self) -> f64 {
        self.e.norm()
    }

    /// φ(ω), in (−π, π]
    pub fn phase(&self) -> f64 {
        self.e.arg()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsrMetadata {
    pub geometry_hash: String,
    pub permittivity: f64,
    pub points_per_wavelength: f64,
    pub solver_version: String,
    /// Where the samples came from (`bor`, `mie`, `synthetic`).
    pub source: String,
    /// Set once low-frequency samples have been prepended.
    pub extended: bool,
}

impl FsrMetadata {
    pub fn synthetic() -> Self {
        Self {
            geometry_hash: "none".into(),
            permittivity: 1.0,
            points_per_wavelength: 0.0,
            solver_version: "none".into(),
            source: "synthetic".into(),
            extended: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsrTable {
    samples: Vec<FsrSample>,
    pub meta: FsrMetadata,
}

impl FsrTable {
    pub fn new(samples: Vec<FsrSample>, meta: FsrMetadata) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty FSR table".into()));
        }
        for s in &samples {
            if !(s.kappa >= 0.0 && s.kappa.is_finite() && s.e.re.is_finite() && s.e.im.is_finite())
            {
                return Err(Error::InvalidArgument(format!("bad sample {s:?}")));
            }
        }
        if samples.windows(2).any(|w| !(w[1].kappa > w[0].kappa)) {
            return Err(Error::InvalidArgument(
                "kappa grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { samples, meta })
    }

    /// Table built from a closure over a grid; handy for analytic responses.
    pub fn from_fn<F>(kappas: &[f64], meta: FsrMetadata, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Complex64,
    {
        Self::new(
            kappas.iter().map(|&k| FsrSample::new(k, f(k))).collect(),
            meta,
        )
    }

    pub fn samples(&self) -> &[FsrSample] {
        &self.samples
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.kappa).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn kappa_min(&self) -> f64 {
        self.samples[0].kappa
    }

    pub fn kappa_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].kappa
    }

    /// Largest spacing between consecutive samples.
    pub fn max_spacing(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].kappa - w[0].kappa)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| FsrSample::new(s.kappa, s.e * factor))
                .collect(),
            meta: self.meta.clone(),
        }
    }

    /// Cubic (four-point Lagrange) interpolation of Re E and Im E.
    /// `kappa` must lie inside the sampled range.
    pub fn interpolate(&self, kappa: f64) -> Complex64 {
        let n = self.samples.len();
        if n == 1 {
            return self.samples[0].e;
        }
        let i = self
            .samples
            .partition_point(|s| s.kappa <= kappa)
            .saturating_sub(1)
            .min(n - 2);
        self.interpolate_in(i, kappa)
    }

    /// Interpolation on interval `[κ_i, κ_{i+1}]`.
    pub(crate) fn interpolate_in(&self, i: usize, kappa: f64) -> Complex64 {
        let n = self.samples.len();
        let order = n.min(4);
        let lo = if order < 4 {
            0
        } else {
            i.saturating_sub(1).min(n - 4)
        };
        let pts = &self.samples[lo..lo + order];
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, pa) in pts.iter().enumerate() {
            let mut l = 1.0;
            for (b, pb) in pts.iter().enumerate() {
                if a != b {
                    l *= (kappa - pb.kappa) / (pa.kappa - pb.kappa);
                }
            }
            acc += pa.e * l;
        }
        acc
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        out.push_str("# borscat frequency-domain scattering response\n");
        let _ = writeln!(out, "# geometry_hash={}", m.geometry_hash);
        let _ = writeln!(out, "# permittivity={:?}", m.permittivity);
        let _ = writeln!(out, "# points_per_wavelength={:?}", m.points_per_wavelength);
        let _ = writeln!(out, "# solver_version={}", m.solver_version);
        let _ = writeln!(out, "# source={}", m.source);
        let _ = writeln!(out, "# extended={}", m.extended);
        out.push_str("kappa,re,im,amplitude,phase\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?}",
                s.kappa,
                s.e.re,
                s.e.im,
                s.amplitude(),
                s.phase()
            );
        }
        out
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut meta = FsrMetadata::synthetic();
        let mut samples = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, value)) = rest.trim().split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "geometry_hash" => meta.geometry_hash = value.to_string(),
                        "permittivity" => meta.permittivity = parse_f64(value, lineno)?,
                        "points_per_wavelength" => {
                            meta.points_per_wavelength = parse_f64(value, lineno)?
                        }
                        "solver_version" => meta.solver_version = value.to_string(),
                        "source" => meta.source = value.to_string(),
                        "extended" => {
                            meta.extended = value.parse().map_err(|_| {
                                Error::Parse(format!("line {}: bad flag {value}", lineno + 1))
                            })?
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if !line.starts_with("kappa") {
                    return Err(Error::Parse(format!(
                        "line {}: expected column header",
                        lineno + 1
                    )));
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 3 {
                return Err(Error::Parse(format!(
                    "line {}: too few columns",
                    lineno + 1
                )));
            }
            let kappa = parse_f64(cols[0], lineno)?;
            let re = parse_f64(cols[1], lineno)?;
            let im = parse_f64(cols[2], lineno)?;
            samples.push(FsrSample::new(kappa, Complex64::new(re, im)));
        }
        Self::new(samples, meta)
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 1)))
}
