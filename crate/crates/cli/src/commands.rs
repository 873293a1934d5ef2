//! Implementations of the subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use borscat::bor::{self, geometry_hash};
use borscat::echo::{detect_echoes, echoes_from, edge_arrival, predicted_delays, EchoReport};
use borscat::geometry::GeneratrixProfile;
use borscat::mie::{coated_sphere_fsr, SphereSpec};
use borscat::synthesis::{extend_low_frequency, rayleigh_exponent, synthesize, TimeSeries};
use borscat::{FsrMetadata, FsrTable};
use serde::{Deserialize, Serialize};

use crate::cache::{cache_key, Cache, Lookup};
use crate::error::{CliError, CliResult};
use crate::io::{atomic_write, read_to_string};
use crate::plot::transient_svg;
use crate::spec::{Body, RunSpec};

/// Lines describing what a command did, for `run.log`.
#[derive(Debug, Default)]
pub struct RunLog {
    pub lines: Vec<String>,
}

impl RunLog {
    fn push(&mut self, line: String) {
        self.lines.push(line);
    }

    pub fn solver_invocations(&self) -> usize {
        self.lines.iter().filter(|l| l.contains(" solved ")).count()
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

fn eps_tag(eps: f64) -> String {
    format!("eps{eps}")
}

fn at_eps(eps: f64) -> impl Fn(borscat::Error) -> CliError {
    move |source| CliError::Solve { eps, source }
}

/// Frequency sweeps for every permittivity, from the cache where possible.
pub fn sweep_all(
    spec: &RunSpec,
    out_dir: &Path,
    workers: usize,
    log: &mut RunLog,
) -> CliResult<Vec<(f64, FsrTable)>> {
    let cache = Cache::new(out_dir.join("cache"));
    let kappas = spec.kappa_grid.values();
    let mut tables = Vec::new();
    for &eps in &spec.permittivities {
        let key = cache_key(spec, eps);
        let table = match cache.load(&key, &kappas) {
            Lookup::Hit(t) => {
                log.push(format!("{} cache hit {key}", eps_tag(eps)));
                t
            }
            lookup => {
                if let Lookup::Corrupt(why) = lookup {
                    eprintln!("warning: discarding cache entry ({why}); recomputing");
                    log.push(format!("{} cache entry discarded: {why}", eps_tag(eps)));
                }
                let meshes = spec.meshes(eps)?;
                let t = bor::sweep(&meshes.pec, meshes.coat.as_ref(), eps, &kappas, workers)
                    .map_err(at_eps(eps))?;
                log.push(format!(
                    "{} solved {} frequencies",
                    eps_tag(eps),
                    kappas.len()
                ));
                cache.store(&key, &t)?;
                t
            }
        };
        atomic_write(
            &out_dir.join(format!("fsr_{}.csv", eps_tag(eps))),
            table.to_csv_string().as_bytes(),
        )?;
        tables.push((eps, table));
    }
    Ok(tables)
}

/// Low-frequency extension when the table does not reach κ = 0.
pub fn prepare_for_synthesis(table: &FsrTable) -> borscat::Result<FsrTable> {
    if table.kappa_min() > 0.0 {
        extend_low_frequency(table)
    } else {
        Ok(table.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub permittivity: f64,
    pub rayleigh_exponent: f64,
    pub echoes_detected: usize,
    /// Echoes used for the delay/ratio columns: for cones, those from the
    /// lateral/edge junction onward; for spheres, all of them.
    pub analysed: EchoReport,
    pub mie_max_rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub truncation_fraction: f64,
    pub creeping_delay: f64,
    pub entries: Vec<SummaryEntry>,
}

impl RunSummary {
    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "spectrum truncation fraction: {:.6}",
            self.truncation_fraction
        );
        let _ = writeln!(
            s,
            "predicted creeping delay c*dt/2a: {:.3}",
            self.creeping_delay
        );
        let _ = writeln!(
            s,
            "{:>6} {:>9} {:>8} {:>9} {:>9} {:>9} {:>9} {:>12}",
            "eps", "rayleigh", "echoes", "t1", "t2-t1", "|a2/a1|", "signs", "mie_err"
        );
        for e in &self.entries {
            let a = &e.analysed;
            let t1 = a
                .echoes
                .first()
                .map(|e| format!("{:.3}", e.time))
                .unwrap_or_else(|| "-".into());
            let d = a
                .delays
                .first()
                .map(|d| format!("{d:.3}"))
                .unwrap_or_else(|| "-".into());
            let r = a
                .ratios
                .first()
                .map(|r| format!("{r:.3}"))
                .unwrap_or_else(|| "-".into());
            let sg = a
                .alternating
                .first()
                .map(|&x| if x { "opposite" } else { "same" }.to_string())
                .unwrap_or_else(|| "-".into());
            let m = e
                .mie_max_rel_error
                .map(|m| format!("{m:.3e}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:>6} {:>9.3} {:>8} {:>9} {:>9} {:>9} {:>9} {:>12}",
                e.permittivity, e.rayleigh_exponent, e.echoes_detected, t1, d, r, sg, m
            );
        }
        s
    }
}

/// Mie reference for a sphere body at one permittivity, on the given grid.
pub fn mie_table(radius: f64, coating: f64, eps: f64, kappas: &[f64]) -> CliResult<FsrTable> {
    let coated = coating > 0.0 && eps > 1.0;
    let spec = SphereSpec {
        core_radius: radius,
        shell_thickness: if coated { coating } else { 0.0 },
        permittivity: if coated { eps } else { 1.0 },
    };
    let pec = GeneratrixProfile::sphere(radius, 0.0)?;
    let coat = if coated {
        Some(pec.offset(coating)?)
    } else {
        None
    };
    let meta = FsrMetadata {
        geometry_hash: geometry_hash(&pec, coat.as_ref()),
        permittivity: spec.permittivity,
        points_per_wavelength: 0.0,
        solver_version: "mie-series".into(),
        source: "mie".into(),
        extended: false,
    };
    let samples = kappas
        .iter()
        .map(|&k| coated_sphere_fsr(k, &spec).map(|e| borscat::FsrSample::new(k, e)))
        .collect::<borscat::Result<Vec<_>>>()?;
    Ok(FsrTable::new(samples, meta)?)
}

fn mie_error_table(bor: &FsrTable, mie: &FsrTable) -> (String, f64) {
    let mut s = String::from("kappa,bor_re,bor_im,mie_re,mie_im,rel_error\n");
    let mut worst: f64 = 0.0;
    for (b, m) in bor.samples().iter().zip(mie.samples()) {
        let err = (b.e - m.e).norm() / m.e.norm();
        worst = worst.max(err);
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            b.kappa, b.e.re, b.e.im, m.e.re, m.e.im, err
        );
    }
    (s, worst)
}

pub fn run(spec: &RunSpec, out_dir: &Path, workers: usize) -> CliResult<(RunSummary, RunLog)> {
    let mut log = RunLog::default();
    let tables = sweep_all(spec, out_dir, workers, &mut log)?;
    let pulse = spec.pulse_spec()?;
    let grid = spec.time_grid()?;
    let mut series = Vec::new();
    let mut entries = Vec::new();
    for (eps, table) in &tables {
        let eps = *eps;
        let ext = prepare_for_synthesis(table).map_err(at_eps(eps))?;
        let ts = synthesize(&ext, &pulse, &grid).map_err(at_eps(eps))?;
        let report = detect_echoes(&ts, spec.threshold_fraction).map_err(at_eps(eps))?;
        atomic_write(
            &out_dir.join(format!("transient_{}.csv", eps_tag(eps))),
            ts.to_csv_string().as_bytes(),
        )?;
        atomic_write(
            &out_dir.join(format!("echoes_{}.json", eps_tag(eps))),
            report.to_json()?.as_bytes(),
        )?;
        let (analysed, mie_err) = match spec.body {
            Body::Cone { .. } => {
                let geom = spec.geometry(eps).expect("cone geometry");
                let arrival = edge_arrival(&geom).map_err(at_eps(eps))?;
                (echoes_from(&report, arrival, &pulse), None)
            }
            Body::Sphere { radius, coating } => {
                let mie = mie_table(radius, coating, eps, &table.kappas())?;
                let (csv, worst) = mie_error_table(table, &mie);
                atomic_write(
                    &out_dir.join(format!("mie_vs_bor_{}.csv", eps_tag(eps))),
                    csv.as_bytes(),
                )?;
                (report.clone(), Some(worst))
            }
        };
        entries.push(SummaryEntry {
            permittivity: eps,
            rayleigh_exponent: rayleigh_exponent(table, 5).map_err(at_eps(eps))?,
            echoes_detected: report.echoes.len(),
            analysed,
            mie_max_rel_error: mie_err,
        });
        series.push((eps, ts));
    }
    let curves: Vec<(String, &TimeSeries)> = series
        .iter()
        .map(|(e, ts)| (format!("ε = {e}"), ts))
        .collect();
    atomic_write(
        &out_dir.join("transient.svg"),
        transient_svg(&curves).as_bytes(),
    )?;

    let creeping_delay = match spec.geometry(1.0) {
        Some(g) => predicted_delays(&g)?.creeping_delay,
        None => 1.0,
    };
    let summary = RunSummary {
        truncation_fraction: pulse.truncation_fraction(),
        creeping_delay,
        entries,
    };
    atomic_write(&out_dir.join("summary.txt"), summary.text().as_bytes())?;
    atomic_write(
        &out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    atomic_write(&out_dir.join("run.log"), log.text().as_bytes())?;
    Ok((summary, log))
}

pub fn sweep_only(spec: &RunSpec, out_dir: &Path, workers: usize) -> CliResult<RunLog> {
    let mut log = RunLog::default();
    sweep_all(spec, out_dir, workers, &mut log)?;
    atomic_write(&out_dir.join("run.log"), log.text().as_bytes())?;
    Ok(log)
}

pub fn read_fsr(path: &Path) -> CliResult<FsrTable> {
    Ok(FsrTable::read_csv(read_to_string(path)?.as_bytes())?)
}

pub fn read_series(path: &Path) -> CliResult<TimeSeries> {
    Ok(TimeSeries::read_csv(read_to_string(path)?.as_bytes())?)
}

/// Transient response of a stored table using the pulse and time grid of
/// a run spec.
pub fn synth_file(fsr_path: &Path, spec: &RunSpec) -> CliResult<TimeSeries> {
    let table = read_fsr(fsr_path)?;
    let ext = prepare_for_synthesis(&table)?;
    Ok(synthesize(&ext, &spec.pulse_spec()?, &spec.time_grid()?)?)
}

pub fn echoes_file(path: &Path, threshold: f64) -> CliResult<EchoReport> {
    Ok(detect_echoes(&read_series(path)?, threshold)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub compared: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    /// Set when the two tables describe different geometries.
    pub geometry_mismatch: bool,
}

/// Relative error of `a` against `b`, on the samples of `a` inside the
/// common frequency range, with `b` interpolated.
pub fn compare(a: &FsrTable, b: &FsrTable) -> CliResult<CompareReport> {
    let lo = a.kappa_min().max(b.kappa_min());
    let hi = a.kappa_max().min(b.kappa_max());
    if lo > hi {
        return Err(CliError::Usage(format!(
            "frequency ranges do not overlap: [{}, {}] and [{}, {}]",
            a.kappa_min(),
            a.kappa_max(),
            b.kappa_min(),
            b.kappa_max()
        )));
    }
    let errs: Vec<f64> = a
        .samples()
        .iter()
        .filter(|s| s.kappa >= lo && s.kappa <= hi)
        .map(|s| {
            let r = b.interpolate(s.kappa);
            let d = (s.e - r).norm();
            if r.norm() > 0.0 {
                d / r.norm()
            } else {
                d
            }
        })
        .collect();
    if errs.is_empty() {
        return Err(CliError::Usage(
            "no samples of the first table fall inside the common range".into(),
        ));
    }
    Ok(CompareReport {
        kappa_min: lo,
        kappa_max: hi,
        compared: errs.len(),
        max_rel_error: errs.iter().cloned().fold(0.0, f64::max),
        mean_rel_error: errs.iter().sum::<f64>() / errs.len() as f64,
        geometry_mismatch: a.meta.geometry_hash != b.meta.geometry_hash,
    })
}

pub fn output_dir(spec: &RunSpec, flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| spec.output_dir.clone())
}
