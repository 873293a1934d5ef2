//! Spherical Bessel functions of integer order for real arguments.

/// j_0 … j_{nmax} at `x` by normalized downward (Miller) recurrence.
pub fn spherical_j(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax as usize);
    let start = top + 20 + (40.0 * top as f64).sqrt().ceil() as usize;

    let mut next = 0.0; // j_{n+1}
    let mut cur = 1e-300; // j_n
    for n in (1..=start).rev() {
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if n - 1 <= nmax {
            out[n - 1] = cur;
        }
        if cur.abs() > 1e250 {
            let scale = 1.0 / cur.abs();
            cur *= scale;
            next *= scale;
            for v in out.iter_mut().skip(n - 1) {
                *v *= scale;
            }
        }
    }
    // cur = j_0 (unnormalized), next = j_1
    let (sin, cos) = x.sin_cos();
    let j0 = sin / x;
    let j1 = sin / (x * x) - cos / x;
    let scale = if j0.abs() >= j1.abs() {
        j0 / cur
    } else {
        j1 / next
    };
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// y_0 … y_{nmax} at `x` (> 0) by upward recurrence.
pub fn spherical_y(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    let (sin, cos) = x.sin_cos();
    out[0] = -cos / x;
    if nmax >= 1 {
        out[1] = -cos / (x * x) - sin / x;
    }
    for n in 1..nmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    out
}

/// Riccati–Bessel values and derivatives, ψ_n(x) = x j_n(x), for n = 0..=nmax.
pub fn riccati_psi(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    riccati_from(spherical_j(nmax.max(1), x), x, nmax)
}

/// φ_n(x) = x y_n(x) and derivatives.
pub fn riccati_phi(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    riccati_from(spherical_y(nmax.max(1), x), x, nmax)
}

fn riccati_from(f: Vec<f64>, x: f64, nmax: usize) -> (Vec<f64>, Vec<f64>) {
    let val: Vec<f64> = f.iter().map(|v| x * v).collect();
    let mut der = vec![0.0; nmax + 1];
    // (x f_0)' = f_0 - x f_1
    der[0] = f[0] - x * f[1];
    for n in 1..=nmax {
        der[n] = val[n - 1] - n as f64 * val[n] / x;
    }
    (val[..=nmax].to_vec(), der)
}
