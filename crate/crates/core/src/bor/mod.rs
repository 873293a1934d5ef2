//! Frequency-domain surface integral equation solver for a conducting body
//! of revolution, optionally wrapped in a homogeneous dielectric layer, under
//! nose-on plane-wave incidence.
//!
//! Only the azimuthal mode m = 1 is excited. The conductor carries an
//! electric current governed by the EFIE in the layer medium; the layer's
//! outer surface carries equivalent electric and magnetic currents coupled
//! through PMCHWT continuity conditions. Time dependence is e^{+iωt}, lengths
//! are in units of the base radius and the free-space impedance is 1.
//!
//! The incident field is x̂ e^{−iκz}; the returned amplitude ê satisfies
//! σ_back/(πa²) = |ê|² with phase referenced to z = 0.

mod assembly;
mod kernel;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fsr::{FsrMetadata, FsrSample, FsrTable};
use crate::geometry::{BorMesh, GeneratrixProfile, Segment};
use crate::quadrature::adaptive_complex;

pub use kernel::Moments;

pub const SOLVER_VERSION: &str = "bor-m1-efie-pmchwt/1";

/// Systems whose estimated 1-norm condition number exceeds this are refused.
pub const CONDITION_LIMIT: f64 = 1e12;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Azimuthal Fourier coefficient of the free-space Green's function,
/// (1/2π) ∫₀^{2π} e^{−ikR}/(4πR) e^{−imα} dα, between the rings through
/// `src` and `obs` (each given as (ρ, z)).
pub fn modal_green(m: i32, src: (f64, f64), obs: (f64, f64), k: f64) -> Result<Complex64> {
    if src.0 < 0.0 || obs.0 < 0.0 {
        return Err(Error::InvalidArgument("ring radius must be >= 0".into()));
    }
    let (d, beta) = kernel::separation(obs, src);
    if d == 0.0 {
        return Err(Error::InvalidArgument(
            "coincident points: self terms are handled by the assembler".into(),
        ));
    }
    let d2 = d * d;
    let rr4 = 4.0 * obs.0 * src.0;
    let integrand = |alpha: f64| {
        let s = (0.5 * alpha).sin();
        let r = (d2 + rr4 * s * s).sqrt();
        Complex64::new(0.0, -k * r).exp() / (4.0 * PI * r) * (m as f64 * alpha).cos()
    };
    let bp = kernel::alpha_breakpoints(beta);
    let v = adaptive_complex(integrand, &bp, 1e-300, 1e-14);
    Ok(v / PI)
}

/// Raw g_n / f_n moments for n = 0, 1, 2 (see the kernel module docs),
/// exposed for diagnostics and benchmarks.
pub fn ring_moments(src: (f64, f64), obs: (f64, f64), k: f64) -> Moments {
    let mut rule = Vec::new();
    let mut out = [Moments::default()];
    kernel::moments(obs, src, &[k], true, &mut rule, &mut out);
    out[0]
}

/// Short content hash of one or two profiles.
pub fn geometry_hash(pec: &GeneratrixProfile, coat: Option<&GeneratrixProfile>) -> String {
    let mut h = Sha256::new();
    for (tag, p) in [("pec", Some(pec)), ("coat", coat)] {
        let Some(p) = p else { continue };
        h.update(tag.as_bytes());
        for seg in p.segments() {
            let vals: Vec<f64> = match *seg {
                Segment::Line { start, end } => vec![0.0, start[0], start[1], end[0], end[1]],
                Segment::Arc {
                    center,
                    radius,
                    start_angle,
                    end_angle,
                } => vec![1.0, center[0], center[1], radius, start_angle, end_angle],
            };
            for v in vals {
                h.update(v.to_bits().to_le_bytes());
            }
        }
    }
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn check_mesh(mesh: &BorMesh, k: f64) -> Result<()> {
    if k > mesh.kappa_design * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "mesh built for wavenumber {} cannot resolve wavenumber {k}",
            mesh.kappa_design
        )));
    }
    Ok(())
}

/// Backscatter amplitude at one normalized frequency κ = ωa/c.
///
/// With `coat` absent the conductor sits in free space and `eps` is
/// ignored. With `coat` present the region between the two surfaces has
/// relative permittivity `eps` (which may be 1).
pub fn solve_frequency(
    pec: &BorMesh,
    coat: Option<&BorMesh>,
    eps: f64,
    kappa: f64,
) -> Result<FsrSample> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    let e = match coat {
        None => {
            check_mesh(pec, kappa)?;
            solve_bare(pec, kappa)?
        }
        Some(coat) => {
            if !(eps >= 1.0) {
                return Err(Error::InvalidArgument("permittivity must be >= 1".into()));
            }
            let k1 = kappa * eps.sqrt();
            check_mesh(pec, k1)?;
            check_mesh(coat, k1)?;
            solve_coated(pec, coat, eps, kappa)?
        }
    };
    Ok(FsrSample::new(kappa, e))
}

/// Tested incident fields: (⟨W, E_inc⟩, ⟨W, H_inc⟩) for x̂ e^{−ikz}, plus
/// the raw projections used for the far field.
struct Excitation {
    e: Vec<Complex64>,
    h: Vec<Complex64>,
    vt: Vec<Complex64>,
    vp: Vec<Complex64>,
}

fn excitation(mesh: &BorMesh, k0: f64) -> Excitation {
    let (vt, vp) = assembly::axial_projections(mesh, k0);
    let nb = vt.len();
    let mut e = vec![Complex64::new(0.0, 0.0); 2 * nb];
    let mut h = vec![Complex64::new(0.0, 0.0); 2 * nb];
    for j in 0..nb {
        e[j] = vt[j] * PI;
        e[nb + j] = J * vp[j] * PI;
        h[j] = -J * vt[j] * PI;
        h[nb + j] = vp[j] * PI;
    }
    Excitation { e, h, vt, vp }
}

/// ê from the m = 1 coefficients of the outermost surface currents.
fn far_field(k0: f64, ex: &Excitation, j: &[Complex64], m: Option<&[Complex64]>) -> Complex64 {
    let nb = ex.vt.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..nb {
        acc += -j[i] * ex.vt[i] + J * j[nb + i] * ex.vp[i];
        if let Some(m) = m {
            acc += J * m[i] * ex.vt[i] + m[nb + i] * ex.vp[i];
        }
    }
    J * k0 * acc
}

fn solve_bare(pec: &BorMesh, kappa: f64) -> Result<Complex64> {
    let block = assembly::assemble(pec, pec, true, &[kappa], false);
    let a = block.l[0].map(|v| -J * v);
    let ex = excitation(pec, kappa);
    let b = DVector::from_iterator(ex.e.len(), ex.e.iter().map(|v| -v));
    let x = dense_solve(a, b, kappa)?;
    Ok(far_field(kappa, &ex, x.as_slice(), None))
}

fn solve_coated(pec: &BorMesh, coat: &BorMesh, eps: f64, kappa: f64) -> Result<Complex64> {
    let k0 = kappa;
    let k1 = kappa * eps.sqrt();
    let eta1 = 1.0 / eps.sqrt();

    let pp = assembly::assemble(pec, pec, true, &[k1], false);
    let pd = assembly::assemble(pec, coat, false, &[k1], true);
    let dp = assembly::assemble(coat, pec, false, &[k1], true);
    let dd = assembly::assemble(coat, coat, true, &[k0, k1], true);

    let np = 2 * pec.basis_count();
    let nd = 2 * coat.basis_count();
    let n = np + 2 * nd;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let (jp, jd, md) = (0, np, np + nd);

    // conductor: tangential field of the layer medium vanishes
    a.view_mut((jp, jp), (np, np))
        .copy_from(&pp.l[0].map(|v| -J * eta1 * v));
    a.view_mut((jp, jd), (np, nd))
        .copy_from(&pd.l[0].map(|v| J * eta1 * v));
    a.view_mut((jp, md), (np, nd)).copy_from(&pd.k[0]);

    // interface, electric field continuity
    let r = np;
    a.view_mut((r, jp), (nd, np))
        .copy_from(&dp.l[0].map(|v| J * eta1 * v));
    a.view_mut((r, jd), (nd, nd))
        .copy_from(&dd.l[0].zip_map(&dd.l[1], |l0, l1| -J * (l0 + eta1 * l1)));
    a.view_mut((r, md), (nd, nd))
        .copy_from(&dd.k[0].zip_map(&dd.k[1], |k0, k1| -(k0 + k1)));

    // interface, magnetic field continuity
    let r = np + nd;
    a.view_mut((r, jp), (nd, np))
        .copy_from(&dp.k[0].map(|v| -v));
    a.view_mut((r, jd), (nd, nd))
        .copy_from(&(&dd.k[0] + &dd.k[1]));
    a.view_mut((r, md), (nd, nd))
        .copy_from(&dd.l[0].zip_map(&dd.l[1], |l0, l1| -J * (l0 + l1 / eta1)));

    let ex = excitation(coat, k0);
    let mut b = DVector::<Complex64>::zeros(n);
    for i in 0..nd {
        b[np + i] = -ex.e[i];
        b[np + nd + i] = -ex.h[i];
    }
    let x = dense_solve(a, b, kappa)?;
    let xs = x.as_slice();
    Ok(far_field(k0, &ex, &xs[jd..jd + nd], Some(&xs[md..md + nd])))
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn dense_solve(
    a: DMatrix<Complex64>,
    b: DVector<Complex64>,
    kappa: f64,
) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    let anorm = norm1(&a);
    let lu = a.lu();
    let x = lu.solve(&b).ok_or(Error::IllConditioned {
        kappa,
        estimate: f64::INFINITY,
    })?;
    // lower bound on ‖A⁻¹‖₁ from a few fixed probe vectors
    let mut inv_norm: f64 = 0.0;
    for probe in 0..3u64 {
        let mut state = 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(probe + 1);
        let v = DVector::from_fn(n, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            Complex64::new(
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5,
                ((state >> 3 & 0xff) as f64 / 255.0) - 0.5,
            )
        });
        let vn: f64 = v.iter().map(|c| c.norm()).sum();
        if let Some(y) = lu.solve(&v) {
            let yn: f64 = y.iter().map(|c| c.norm()).sum();
            inv_norm = inv_norm.max(yn / vn);
        } else {
            inv_norm = f64::INFINITY;
        }
    }
    let estimate = anorm * inv_norm;
    if !estimate.is_finite()
        || estimate > CONDITION_LIMIT
        || x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::IllConditioned { kappa, estimate });
    }
    Ok(x)
}

/// Solves every grid frequency on a pool of `workers` threads. The result
/// does not depend on the worker count.
pub fn sweep(
    pec: &BorMesh,
    coat: Option<&BorMesh>,
    eps: f64,
    kappa_grid: &[f64],
    workers: usize,
) -> Result<FsrTable> {
    if kappa_grid.is_empty() {
        return Err(Error::InvalidArgument("empty kappa grid".into()));
    }
    if kappa_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "kappa grid must be strictly increasing".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<FsrSample>> = pool.install(|| {
        kappa_grid
            .par_iter()
            .map(|&k| solve_frequency(pec, coat, eps, k))
            .collect()
    });
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;
    let meta = FsrMetadata {
        geometry_hash: geometry_hash(pec.profile(), coat.map(|c| c.profile())),
        permittivity: if coat.is_some() { eps } else { 1.0 },
        points_per_wavelength: pec.points_per_wavelength,
        solver_version: SOLVER_VERSION.to_string(),
        source: "bor".into(),
        extended: false,
    };
    FsrTable::new(samples, meta)
}
