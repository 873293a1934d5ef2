//! Fixed and adaptive quadrature rules shared by the oracle, the solver and
//! the synthesis stage.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

const MAX_CACHED_ORDER: usize = 128;

static RULES: [OnceLock<Vec<(f64, f64)>>; MAX_CACHED_ORDER] =
    [const { OnceLock::new() }; MAX_CACHED_ORDER];

/// Gauss–Legendre nodes and weights on [-1, 1], ascending by node.
pub fn gauss_legendre(order: usize) -> &'static [(f64, f64)] {
    assert!(
        (1..=MAX_CACHED_ORDER).contains(&order),
        "Gauss-Legendre order {order} out of range"
    );
    RULES[order - 1].get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(order).unwrap());
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn mapped(order: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    gauss_legendre(order)
        .iter()
        .map(move |&(x, w)| (mid + half * x, half * w))
}

/// Gauss–Legendre rule on `[a, b]` with nodes graded toward `a` through
/// `s = a + (b - a) u^p`. Used for integrands with an integrable endpoint
/// singularity at `a`.
pub fn graded(order: usize, a: f64, b: f64, power: i32) -> impl Iterator<Item = (f64, f64)> {
    let len = b - a;
    let p = power as f64;
    gauss_legendre(order).iter().map(move |&(x, w)| {
        let u = 0.5 * (x + 1.0);
        let s = a + len * u.powi(power);
        let ds = len * p * u.powi(power - 1) * 0.5 * w;
        (s, ds)
    })
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_panel<F>(f: &mut F, a: f64, b: f64) -> (Complex64, f64)
where
    F: FnMut(f64) -> Complex64,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm())
}

/// Adaptive Gauss–Kronrod integration of a complex integrand over the
/// panels delimited by `breakpoints`. The panel with the largest embedded
/// error estimate is bisected until the summed estimate drops below
/// `max(abs_tol, rel_tol * |integral|)`.
pub fn adaptive_complex<F>(mut f: F, breakpoints: &[f64], abs_tol: f64, rel_tol: f64) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    const MAX_PANELS: usize = 4000;
    let mut panels: Vec<(f64, f64, Complex64, f64)> = breakpoints
        .windows(2)
        .map(|w| {
            let (v, e) = kronrod_panel(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: Complex64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || panels.len() >= MAX_PANELS {
            return total;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .unwrap();
        let (a, b, _, _) = panels[worst];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return total;
        }
        let (vl, el) = kronrod_panel(&mut f, a, m);
        let (vr, er) = kronrod_panel(&mut f, m, b);
        panels[worst] = (a, m, vl, el);
        panels.push((m, b, vr, er));
    }
}

/// Real-valued convenience wrapper around [`adaptive_complex`].
pub fn adaptive_real<F>(mut f: F, breakpoints: &[f64], abs_tol: f64, rel_tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    adaptive_complex(|x| Complex64::new(f(x), 0.0), breakpoints, abs_tol, rel_tol).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let v: f64 = mapped(5, 0.0, 2.0).map(|(x, w)| w * x.powi(9)).sum();
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn graded_rule_handles_log_endpoint() {
        // integral of ln(s) over [0, 1] is -1
        let v: f64 = graded(10, 0.0, 1.0, 5).map(|(s, w)| w * s.ln()).sum();
        assert!((v + 1.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn adaptive_matches_closed_form() {
        let v = adaptive_real(|x| (-x * x).exp(), &[0.0, 1.0, 10.0], 1e-15, 1e-14);
        let exact = 0.5 * std::f64::consts::PI.sqrt() * statrs::function::erf::erf(10.0);
        assert!((v - exact).abs() < 1e-13);
        let osc = adaptive_complex(
            |x| Complex64::new(0.0, 20.0 * x).exp(),
            &[0.0, 1.0],
            1e-14,
            1e-13,
        );
        let exact = (Complex64::new(0.0, 20.0).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((osc - exact).norm() < 1e-12);
    }
}
