//! Azimuthal moments of the free-space Green's function between two rings.
//!
//! For ring points (ρ, z) and (ρ', z') separated by azimuth α,
//! R² = (ρ − ρ')² + (z − z')² + 4ρρ' sin²(α/2). The solver needs
//!
//! g_n = ∫₀^{2π} G(R) cos nα dα,  f_n = ∫₀^{2π} G'(R)/R cos nα dα,
//!
//! for n = 0, 1, 2, with G = e^{−ikR}/(4πR). Both are evaluated on a
//! Gauss–Legendre rule graded toward α = 0, where the integrand peaks with
//! width d/√(ρρ').

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::mapped;

const FOUR_PI: f64 = 4.0 * PI;
const NEAR_PANEL_ORDER: usize = 8;

/// g_n and f_n for n = 0, 1, 2.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub g: [Complex64; 3],
    pub f: [Complex64; 3],
}

/// Distance in the meridian plane and the peak-width parameter β.
pub(crate) fn separation(obs: (f64, f64), src: (f64, f64)) -> (f64, f64) {
    let d = (obs.0 - src.0).hypot(obs.1 - src.1);
    let rr = obs.0 * src.0;
    let beta = if rr > 0.0 {
        d / rr.sqrt()
    } else {
        f64::INFINITY
    };
    (d, beta)
}

/// Panel boundaries on [0, π]: geometric panels from β up to 1, then one
/// long panel to π.
pub(crate) fn alpha_breakpoints(beta: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    if beta < 1.0 {
        let mut x = beta.max(1e-14);
        while x < 1.0 {
            pts.push(x);
            x *= 2.0;
        }
        pts.push(1.0);
    }
    pts.push(PI);
    pts
}

/// Fills `rule` with nodes and weights on [0, π].
pub(crate) fn alpha_rule(beta: f64, phase_span: f64, rule: &mut Vec<(f64, f64)>) {
    rule.clear();
    let far_order = (16.0 + 1.5 * phase_span).ceil().min(64.0) as usize;
    let bp = alpha_breakpoints(beta);
    let last = bp.len() - 2;
    for (i, w) in bp.windows(2).enumerate() {
        let order = if i == last {
            far_order
        } else {
            NEAR_PANEL_ORDER
        };
        rule.extend(mapped(order, w[0], w[1]));
    }
}

/// Accumulates moments for each wavenumber in `ks` using a prepared rule.
/// `out[i]` receives the moments for `ks[i]`.
pub(crate) fn moments_with_rule(
    obs: (f64, f64),
    src: (f64, f64),
    ks: &[f64],
    want_f: bool,
    rule: &[(f64, f64)],
    out: &mut [Moments],
) {
    let d2 = (obs.0 - src.0).powi(2) + (obs.1 - src.1).powi(2);
    let rr4 = 4.0 * obs.0 * src.0;
    for m in out.iter_mut() {
        *m = Moments::default();
    }
    for &(alpha, w) in rule {
        let (s_half, _) = (0.5 * alpha).sin_cos();
        let r2 = d2 + rr4 * s_half * s_half;
        let r = r2.sqrt();
        let c1 = alpha.cos();
        let c2 = 2.0 * c1 * c1 - 1.0;
        let inv = 1.0 / (FOUR_PI * r);
        for (k, m) in ks.iter().zip(out.iter_mut()) {
            let (sin, cos) = (k * r).sin_cos();
            let e = Complex64::new(cos, -sin);
            let g = e * (inv * w);
            m.g[0] += g;
            m.g[1] += g * c1;
            m.g[2] += g * c2;
            if want_f {
                let f = -(Complex64::new(1.0, k * r)) * g / r2;
                m.f[0] += f;
                m.f[1] += f * c1;
                m.f[2] += f * c2;
            }
        }
    }
    for m in out.iter_mut() {
        for v in m.g.iter_mut().chain(m.f.iter_mut()) {
            *v *= 2.0;
        }
    }
}

/// Moments with an automatically chosen rule.
pub(crate) fn moments(
    obs: (f64, f64),
    src: (f64, f64),
    ks: &[f64],
    want_f: bool,
    rule: &mut Vec<(f64, f64)>,
    out: &mut [Moments],
) {
    let (_, beta) = separation(obs, src);
    let kmax = ks.iter().cloned().fold(0.0, f64::max);
    let span = 2.0 * kmax * (obs.0 * src.0).sqrt();
    alpha_rule(beta, span, rule);
    moments_with_rule(obs, src, ks, want_f, rule, out);
}
