//! Truncated Fourier synthesis of the transient backscattered field.
//!
//! The response to the Gaussian pulse is
//!
//! Ȧ(T) = (1/π) ∫₀^{κ_max} Re[E(κ) S(κ) e^{2iκT}] dκ,
//!
//! with T = ct/2a. This is the one-sided form of the two-sided inverse
//! transform, valid because E(−κ) = conj E(κ) for a real time response. A
//! point scatterer at z₀ (phase e^{−2iκz₀}) produces an echo centred at
//! T = z₀.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fsr::{FsrMetadata, FsrSample, FsrTable};
use crate::pulse::PulseSpec;
use crate::quadrature::mapped;

/// Uniform grid of normalized times ct/2a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite()) || count == 0 {
            return Err(Error::InvalidArgument(format!(
                "bad time grid: start {start}, step {step}, count {count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    /// Grid covering [start, end] with the given step.
    pub fn spanning(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(end >= start) {
            return Err(Error::InvalidArgument(
                "time grid end precedes start".into(),
            ));
        }
        let count = ((end - start) / step).round() as usize + 1;
        Self::new(start, step, count)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.time(self.count - 1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.time(i)).collect()
    }

    pub fn max_abs_time(&self) -> f64 {
        self.start.abs().max(self.end().abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub fsr_meta: FsrMetadata,
    pub pulse: PulseSpec,
}

impl TimeSeries {
    pub fn new(
        grid: TimeGrid,
        values: Vec<f64>,
        fsr_meta: FsrMetadata,
        pulse: PulseSpec,
    ) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} grid points",
                values.len(),
                grid.count
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite sample in time series".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            fsr_meta,
            pulse,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn peak_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_csv_string(&self) -> String {
        let m = &self.fsr_meta;
        let mut out = String::new();
        out.push_str("# borscat transient backscatter\n");
        let _ = writeln!(out, "# geometry_hash={}", m.geometry_hash);
        let _ = writeln!(out, "# permittivity={:?}", m.permittivity);
        let _ = writeln!(out, "# points_per_wavelength={:?}", m.points_per_wavelength);
        let _ = writeln!(out, "# solver_version={}", m.solver_version);
        let _ = writeln!(out, "# source={}", m.source);
        let _ = writeln!(out, "# extended={}", m.extended);
        let _ = writeln!(out, "# pulse_g={:?}", self.pulse.g());
        let _ = writeln!(out, "# pulse_kappa_max={:?}", self.pulse.kappa_max());
        let _ = writeln!(out, "# grid_start={:?}", self.grid.start);
        let _ = writeln!(out, "# grid_step={:?}", self.grid.step);
        out.push_str("ct_over_2a,amplitude\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:?},{:?}", self.grid.time(i), v);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut meta = FsrMetadata::synthetic();
        let (mut g, mut kmax, mut start, mut step) = (None, None, None, None);
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let num = |s: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, value)) = rest.trim().split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "geometry_hash" => meta.geometry_hash = value.to_string(),
                        "permittivity" => meta.permittivity = num(value)?,
                        "points_per_wavelength" => meta.points_per_wavelength = num(value)?,
                        "solver_version" => meta.solver_version = value.to_string(),
                        "source" => meta.source = value.to_string(),
                        "extended" => meta.extended = value == "true",
                        "pulse_g" => g = Some(num(value)?),
                        "pulse_kappa_max" => kmax = Some(num(value)?),
                        "grid_start" => start = Some(num(value)?),
                        "grid_step" => step = Some(num(value)?),
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if !line.starts_with("ct_over_2a") {
                    return Err(Error::Parse(format!(
                        "line {}: expected column header",
                        lineno + 1
                    )));
                }
                header_seen = true;
                continue;
            }
            let (t, v) = line.split_once(',').ok_or_else(|| {
                Error::Parse(format!("line {}: expected two columns", lineno + 1))
            })?;
            times.push(num(t)?);
            values.push(num(v)?);
        }
        if values.is_empty() {
            return Err(Error::Parse("time series has no samples".into()));
        }
        let pulse = match (g, kmax) {
            (Some(g), Some(k)) => PulseSpec::new(g, k)?,
            _ => return Err(Error::Parse("missing pulse provenance".into())),
        };
        let start = start.unwrap_or(times[0]);
        let step = match step {
            Some(s) => s,
            None if times.len() > 1 => {
                (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
            }
            None => 1.0,
        };
        let grid = TimeGrid::new(start, step, values.len())?;
        for (i, &t) in times.iter().enumerate() {
            if (grid.time(i) - t).abs() > 1e-9 * (1.0 + t.abs()) {
                return Err(Error::Parse(format!(
                    "non-uniform time grid at row {}",
                    i + 1
                )));
            }
        }
        Self::new(grid, values, meta, pulse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Minimum Gauss–Legendre points per FSR sample interval.
    pub points_per_interval: usize,
    /// Refuse the result when the estimated interpolation error exceeds
    /// this fraction of the peak output.
    pub rel_tolerance: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            points_per_interval: 8,
            rel_tolerance: 1e-2,
        }
    }
}

pub fn synthesize(fsr: &FsrTable, pulse: &PulseSpec, grid: &TimeGrid) -> Result<TimeSeries> {
    synthesize_with(fsr, pulse, grid, &SynthesisOptions::default())
}

pub fn synthesize_with(
    fsr: &FsrTable,
    pulse: &PulseSpec,
    grid: &TimeGrid,
    opts: &SynthesisOptions,
) -> Result<TimeSeries> {
    let kmax = pulse.kappa_max();
    if kmax > fsr.kappa_max() * (1.0 + 1e-12) {
        return Err(Error::Synthesis(format!(
            "pulse band reaches kappa = {kmax} but the response stops at {}",
            fsr.kappa_max()
        )));
    }
    if fsr.len() < 2 {
        return Err(Error::Synthesis(
            "need at least two response samples".into(),
        ));
    }
    let dk = fsr.max_spacing();
    let limit = PI / dk;
    if grid.max_abs_time() >= limit {
        return Err(Error::Synthesis(format!(
            "times up to |ct/2a| = {} exceed the alias limit {limit:.4} of the frequency sampling",
            grid.max_abs_time()
        )));
    }
    let values = evaluate(fsr, pulse, grid, opts.points_per_interval);

    // Interpolation error estimate: repeat on every other sample. The cubic
    // error scales as h⁴, so the full-grid error is about 1/15 of the change.
    if fsr.len() >= 9 && grid.max_abs_time() < PI / (2.0 * dk) {
        let n = fsr.len();
        let coarse: Vec<FsrSample> = fsr
            .samples()
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == 0 || *i == n - 1)
            .map(|(_, s)| *s)
            .collect();
        let coarse = FsrTable::new(coarse, fsr.meta.clone())?;
        let rough = evaluate(&coarse, pulse, grid, opts.points_per_interval);
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let est = values
            .iter()
            .zip(&rough)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / 15.0;
        if est > opts.rel_tolerance * peak {
            return Err(Error::Synthesis(format!(
                "response sampling too coarse: estimated error {est:.3e} exceeds {:.1e} of the peak {peak:.3e}",
                opts.rel_tolerance
            )));
        }
    }
    TimeSeries::new(*grid, values, fsr.meta.clone(), *pulse)
}

/// Quadrature nodes κ and weighted integrands w·E(κ)·S(κ)/π.
fn spectral_nodes(
    fsr: &FsrTable,
    pulse: &PulseSpec,
    grid: &TimeGrid,
    min_points: usize,
) -> Vec<(f64, Complex64)> {
    let kmax = pulse.kappa_max();
    let tmax = grid.max_abs_time();
    let mut nodes = Vec::new();
    for (i, w) in fsr.samples().windows(2).enumerate() {
        let (a, b) = (w[0].kappa, w[1].kappa.min(kmax));
        if b <= a {
            break;
        }
        // keep several points per oscillation of e^{2iκT}
        let cycles = 2.0 * (b - a) * tmax / (2.0 * PI);
        let order = min_points.max((8.0 * cycles).ceil() as usize).min(128);
        for (k, wt) in mapped(order, a, b) {
            let e = fsr.interpolate_in(i, k);
            nodes.push((k, e * (wt * pulse.spectrum_value(k) / PI)));
        }
    }
    nodes
}

fn evaluate(fsr: &FsrTable, pulse: &PulseSpec, grid: &TimeGrid, min_points: usize) -> Vec<f64> {
    let nodes = spectral_nodes(fsr, pulse, grid, min_points);
    (0..grid.count)
        .into_par_iter()
        .map(|i| {
            let t = grid.time(i);
            nodes
                .iter()
                .map(|(k, c)| {
                    let (s, co) = (2.0 * k * t).sin_cos();
                    c.re * co - c.im * s
                })
                .sum()
        })
        .collect()
}

/// Least-squares slope of ln|E| against ln κ over the `count` lowest samples
/// with κ > 0.
pub fn rayleigh_exponent(fsr: &FsrTable, count: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = fsr
        .samples()
        .iter()
        .filter(|s| s.kappa > 0.0)
        .take(count)
        .map(|s| (s.kappa.ln(), s.e.norm().ln()))
        .collect();
    if pts.len() < 2 || count < 2 {
        return Err(Error::InvalidArgument(
            "need at least two positive-frequency samples".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Largest relative deviation of the lowest three samples from
/// |E| ∝ κ² anchored at the first.
pub fn rayleigh_residual(fsr: &FsrTable) -> f64 {
    let s = fsr.samples();
    let base = s[0];
    s.iter()
        .take(3)
        .map(|p| {
            let expect = base.amplitude() * (p.kappa / base.kappa).powi(2);
            (p.amplitude() / expect - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Fills (0, κ_min) with the Rayleigh law E ∝ κ², continuing the phase
/// linearly, and adds E(0) = 0.
pub fn extend_low_frequency(fsr: &FsrTable) -> Result<FsrTable> {
    let s = fsr.samples();
    if s.iter().filter(|p| p.kappa < 0.5).count() < 3 {
        return Err(Error::InvalidArgument(
            "low-frequency extension needs three samples below kappa = 0.5".into(),
        ));
    }
    let k0 = s[0].kappa;
    if !(k0 > 0.0) {
        return Err(Error::InvalidArgument(
            "response already starts at kappa = 0".into(),
        ));
    }
    let residual = rayleigh_residual(fsr);
    if residual > 0.2 {
        return Err(Error::RayleighFit { residual });
    }
    let mut dphi = (s[1].e / s[0].e).arg();
    if !dphi.is_finite() {
        dphi = 0.0;
    }
    let slope = dphi / (s[1].kappa - k0);
    let step = s[1].kappa - k0;
    let amp0 = s[0].amplitude();
    let phase0 = s[0].phase();

    let mut low = vec![FsrSample::new(0.0, Complex64::new(0.0, 0.0))];
    let count = (k0 / step).ceil() as usize;
    for j in (1..count).rev() {
        let k = k0 - j as f64 * step;
        if k <= 1e-12 * k0 {
            continue;
        }
        let amp = amp0 * (k / k0).powi(2);
        low.push(FsrSample::from_polar(k, amp, phase0 + slope * (k - k0)));
    }
    low.extend_from_slice(s);
    let mut meta = fsr.meta.clone();
    meta.extended = true;
    FsrTable::new(low, meta)
}
