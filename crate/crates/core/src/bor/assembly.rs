//! Galerkin reaction matrices of the modal L and K operators.
//!
//! Basis functions on each generatrix are triangles T_j(s) on the interior
//! mesh nodes, carried as (T_j/ρ) t̂ e^{iφ} and (T_j/ρ) φ̂ e^{iφ}; testing uses
//! the same functions with e^{−iφ}. Rows and columns are ordered with all
//! t̂ components first, then all φ̂ components.
//!
//! For the operators
//!   L X = k ∫ X G + k⁻¹ ∇ ∫ ∇'·X G,   K X = ∇ × ∫ X G,
//! the matrices hold ⟨W_i, L X_j⟩ and ⟨W_i, K X_j⟩.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::{moments, Moments};
use crate::geometry::{BorMesh, CurvePoint};
use crate::quadrature::{graded, mapped};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

const OBS_ORDER: usize = 4;
const FAR_ORDER: usize = 4;
const NEAR_ORDER: usize = 10;
const SINGULAR_ORDER: usize = 10;
const GRADING: i32 = 4;
/// Source elements closer than this many element lengths use the near rule.
const NEAR_FACTOR: f64 = 2.5;

#[derive(Debug, Clone, Copy)]
struct Point {
    s: f64,
    rho: f64,
    z: f64,
    sin: f64,
    cos: f64,
}

impl Point {
    fn from_curve(s: f64, p: CurvePoint) -> Self {
        Self {
            s,
            rho: p.rho,
            z: p.z,
            sin: p.tangent[0],
            cos: p.tangent[1],
        }
    }

    fn rz(&self) -> (f64, f64) {
        (self.rho, self.z)
    }
}

/// Up to two triangles alive on one element: (basis index, value, slope).
type LocalBasis = [(Option<usize>, f64, f64); 2];

fn point_on(mesh: &BorMesh, elem: usize, s: f64) -> Point {
    Point::from_curve(s, mesh.profile().point_on(mesh.element_segment[elem], s))
}

fn local_basis(mesh: &BorMesh, elem: usize, s: f64) -> LocalBasis {
    let a = mesh.nodes[elem];
    let b = mesh.nodes[elem + 1];
    let len = b - a;
    let nb = mesh.basis_count();
    let left = if elem >= 1 && elem <= nb {
        Some(elem - 1)
    } else {
        None
    };
    let right = if elem < nb { Some(elem) } else { None };
    [
        (left, (b - s) / len, -1.0 / len),
        (right, (s - a) / len, 1.0 / len),
    ]
}

/// Per-wavenumber L and K matrices for one (observation, source) surface pair.
pub(crate) struct Block {
    pub l: Vec<DMatrix<Complex64>>,
    pub k: Vec<DMatrix<Complex64>>,
}

/// Rows contributed by one observation element: for each wavenumber, four
/// rows (two triangles × two components) of length `2 * nb_src`.
struct LocalRows {
    elem: usize,
    l: Vec<Complex64>,
    k: Vec<Complex64>,
}

struct Accumulator<'a> {
    ks: &'a [f64],
    want_k: bool,
    ncols: usize,
    nb_src: usize,
    l: Vec<Complex64>,
    k: Vec<Complex64>,
}

impl<'a> Accumulator<'a> {
    fn new(ks: &'a [f64], want_k: bool, nb_src: usize) -> Self {
        let ncols = 2 * nb_src;
        let size = ks.len() * 4 * ncols;
        Self {
            ks,
            want_k,
            ncols,
            nb_src,
            l: vec![Complex64::new(0.0, 0.0); size],
            k: if want_k {
                vec![Complex64::new(0.0, 0.0); size]
            } else {
                Vec::new()
            },
        }
    }

    #[inline]
    fn idx(&self, ik: usize, row: usize, col: usize) -> usize {
        (ik * 4 + row) * self.ncols + col
    }

    /// Adds one (observation point, source point) product with combined
    /// quadrature weight `w`.
    #[allow(clippy::too_many_arguments)]
    fn add(
        &mut self,
        o: &Point,
        ob: &LocalBasis,
        q: &Point,
        qb: &LocalBasis,
        w: f64,
        moms: &[Moments],
        with_k: bool,
    ) {
        let wt = 2.0 * PI * w;
        let nb = self.nb_src;
        let dz = o.z - q.z;
        for (ik, (&k, m)) in self.ks.iter().zip(moms).enumerate() {
            let i0 = m.g[1];
            let i1 = 0.5 * (m.g[0] + m.g[2]);
            let i2 = 0.5 * (m.g[0] - m.g[2]);
            let (k0, k1, k2) = (m.f[1], 0.5 * (m.f[0] + m.f[2]), 0.5 * (m.f[0] - m.f[2]));
            let inv_k = 1.0 / k;
            for (os, &(oi, to, dto)) in ob.iter().enumerate() {
                if oi.is_none() {
                    continue;
                }
                let row_t = os * 2;
                let row_p = os * 2 + 1;
                for &(qi, ts, dts) in qb {
                    let Some(j) = qi else { continue };
                    let tt = ts * to;
                    let l_tt = (o.sin * q.sin * i1 + o.cos * q.cos * i0) * (k * tt)
                        - i0 * (inv_k * dto * dts);
                    let l_tp = -J * i2 * (k * tt * o.sin) - J * i0 * (inv_k * dto * ts / q.rho);
                    let l_pt = J * i2 * (k * tt * q.sin) + J * i0 * (inv_k * to / o.rho * dts);
                    let l_pp = i1 * (k * tt) - i0 * (inv_k * tt / (o.rho * q.rho));
                    let a = self.idx(ik, row_t, j);
                    self.l[a] += l_tt * wt;
                    let a = self.idx(ik, row_t, nb + j);
                    self.l[a] += l_tp * wt;
                    let a = self.idx(ik, row_p, j);
                    self.l[a] += l_pt * wt;
                    let a = self.idx(ik, row_p, nb + j);
                    self.l[a] += l_pp * wt;
                    if self.want_k && with_k {
                        let k_tt = -J
                            * k2
                            * (tt
                                * (q.cos * o.sin * q.rho - o.cos * q.sin * o.rho
                                    + o.sin * q.sin * dz));
                        let k_pt = (-q.cos * o.rho * k0 + (q.cos * q.rho + q.sin * dz) * k1) * tt;
                        let k_tp = (-o.cos * q.rho * k0 + (o.cos * o.rho - o.sin * dz) * k1) * tt;
                        let k_pp = -J * k2 * (tt * dz);
                        let a = self.idx(ik, row_t, j);
                        self.k[a] += k_tt * wt;
                        let a = self.idx(ik, row_t, nb + j);
                        self.k[a] += k_tp * wt;
                        let a = self.idx(ik, row_p, j);
                        self.k[a] += k_pt * wt;
                        let a = self.idx(ik, row_p, nb + j);
                        self.k[a] += k_pp * wt;
                    }
                }
            }
        }
    }
}

/// Assembles the L (and optionally K) reaction matrices between two meshes
/// for every wavenumber in `ks`. `same` marks the self-surface case, where
/// the logarithmic singularity of the modal kernel is extracted.
pub(crate) fn assemble(
    obs: &BorMesh,
    src: &BorMesh,
    same: bool,
    ks: &[f64],
    want_k: bool,
) -> Block {
    let nb_obs = obs.basis_count();
    let nb_src = src.basis_count();
    let rows: Vec<LocalRows> = (0..obs.element_count())
        .into_par_iter()
        .map(|p| element_rows(obs, src, same, ks, want_k, p))
        .collect();

    let nrows = 2 * nb_obs;
    let ncols = 2 * nb_src;
    let mut l: Vec<DMatrix<Complex64>> = ks.iter().map(|_| DMatrix::zeros(nrows, ncols)).collect();
    let mut k: Vec<DMatrix<Complex64>> = if want_k {
        ks.iter().map(|_| DMatrix::zeros(nrows, ncols)).collect()
    } else {
        Vec::new()
    };
    for local in rows {
        let p = local.elem;
        let slots = [
            if p >= 1 && p <= nb_obs {
                Some(p - 1)
            } else {
                None
            },
            if p < nb_obs { Some(p) } else { None },
        ];
        for ik in 0..ks.len() {
            for (os, slot) in slots.iter().enumerate() {
                let Some(i) = *slot else { continue };
                for comp in 0..2 {
                    let row = comp * nb_obs + i;
                    let base = (ik * 4 + os * 2 + comp) * ncols;
                    for c in 0..ncols {
                        l[ik][(row, c)] += local.l[base + c];
                        if want_k {
                            k[ik][(row, c)] += local.k[base + c];
                        }
                    }
                }
            }
        }
    }
    Block { l, k }
}

fn element_rows(
    obs: &BorMesh,
    src: &BorMesh,
    same: bool,
    ks: &[f64],
    want_k: bool,
    p: usize,
) -> LocalRows {
    let mut acc = Accumulator::new(ks, want_k, src.basis_count());
    let mut rule = Vec::with_capacity(256);
    let mut moms = vec![Moments::default(); ks.len()];
    let (pa, pb) = (obs.nodes[p], obs.nodes[p + 1]);

    for (s_o, w_o) in mapped(OBS_ORDER, pa, pb) {
        let o = point_on(obs, p, s_o);
        let ob = local_basis(obs, p, s_o);
        for q in 0..src.element_count() {
            let (qa, qb) = (src.nodes[q], src.nodes[q + 1]);
            let len_q = qb - qa;
            if same && q == p {
                self_element(
                    &mut acc, src, q, &o, &ob, w_o, ks, want_k, &mut rule, &mut moms,
                );
                continue;
            }
            let nodes: Vec<(f64, f64)> = if same && q + 1 == p {
                // graded toward the shared node qb
                graded(SINGULAR_ORDER, qb, qa, GRADING)
                    .map(|(s, w)| (s, -w))
                    .collect()
            } else if same && q == p + 1 {
                graded(SINGULAR_ORDER, qa, qb, GRADING).collect()
            } else {
                let mid = point_on(src, q, 0.5 * (qa + qb));
                let dist = (mid.rho - o.rho).hypot(mid.z - o.z);
                let order = if dist < NEAR_FACTOR * len_q {
                    NEAR_ORDER
                } else {
                    FAR_ORDER
                };
                mapped(order, qa, qb).collect()
            };
            for (s_q, w_q) in nodes {
                let qpt = point_on(src, q, s_q);
                let qbas = local_basis(src, q, s_q);
                moments(o.rz(), qpt.rz(), ks, want_k, &mut rule, &mut moms);
                acc.add(&o, &ob, &qpt, &qbas, w_o * w_q, &moms, true);
            }
        }
    }
    LocalRows {
        elem: p,
        l: acc.l,
        k: acc.k,
    }
}

/// Source integration over the observation point's own element, split at
/// the observation point. The −ln|s − s'| / (2π√(ρρ')) part of every g_n is
/// removed from the numerical integrand and integrated by product
/// integration against the logarithm.
#[allow(clippy::too_many_arguments)]
fn self_element(
    acc: &mut Accumulator,
    src: &BorMesh,
    q: usize,
    o: &Point,
    ob: &LocalBasis,
    w_o: f64,
    ks: &[f64],
    want_k: bool,
    rule: &mut Vec<(f64, f64)>,
    moms: &mut [Moments],
) {
    let (qa, qb) = (src.nodes[q], src.nodes[q + 1]);
    let mut log_moms = vec![Moments::default(); ks.len()];
    for &end in &[qa, qb] {
        let span = (end - o.s).abs();
        if span <= 0.0 {
            continue;
        }
        let dir = (end - o.s).signum();
        let mut log_sum = 0.0;
        for (u, w) in graded(SINGULAR_ORDER, 0.0, span, GRADING) {
            let s_q = o.s + dir * u;
            let qpt = point_on(src, q, s_q);
            let qbas = local_basis(src, q, s_q);
            moments(o.rz(), qpt.rz(), ks, want_k, rule, moms);
            let c = 1.0 / (2.0 * PI * (o.rho * qpt.rho).sqrt());
            let ln_u = u.ln();
            for m in moms.iter_mut() {
                for g in m.g.iter_mut() {
                    *g += c * ln_u;
                }
            }
            acc.add(o, ob, &qpt, &qbas, w_o * w, moms, true);

            // ∫ ψ(u) ln u du ≈ Σ w (ψ(u) − ψ(0)) ln u + ψ(0)(L ln L − L)
            for m in log_moms.iter_mut() {
                *m = Moments {
                    g: [Complex64::new(-c, 0.0); 3],
                    f: Default::default(),
                };
            }
            acc.add(o, ob, &qpt, &qbas, w_o * w * ln_u, &log_moms, false);
            log_sum += w * ln_u;
        }
        let qpt = point_on(src, q, o.s);
        let qbas = local_basis(src, q, o.s);
        let c = 1.0 / (2.0 * PI * o.rho);
        for m in log_moms.iter_mut() {
            *m = Moments {
                g: [Complex64::new(-c, 0.0); 3],
                f: Default::default(),
            };
        }
        let w0 = span * span.ln() - span - log_sum;
        acc.add(o, ob, &qpt, &qbas, w_o * w0, &log_moms, false);
    }
}

/// Per-basis projections of e^{−ik z} needed for the excitation and the
/// backscattered far field: (∫ T_j sinγ e^{−ikz} ds, ∫ T_j e^{−ikz} ds).
pub(crate) fn axial_projections(mesh: &BorMesh, k: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let nb = mesh.basis_count();
    let mut vt = vec![Complex64::new(0.0, 0.0); nb];
    let mut vp = vec![Complex64::new(0.0, 0.0); nb];
    for e in 0..mesh.element_count() {
        for (s, w) in mapped(8, mesh.nodes[e], mesh.nodes[e + 1]) {
            let p = point_on(mesh, e, s);
            let phase = Complex64::new(0.0, -k * p.z).exp() * w;
            for (idx, t, _) in local_basis(mesh, e, s) {
                if let Some(j) = idx {
                    vt[j] += phase * (t * p.sin);
                    vp[j] += phase * t;
                }
            }
        }
    }
    (vt, vp)
}
