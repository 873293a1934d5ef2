//! Echo extraction from transient responses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_profiles, GeometrySpec};
use crate::synthesis::TimeSeries;

pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Echo {
    /// ct/2a of the extremum.
    pub time: f64,
    /// Signed value at the extremum.
    pub amplitude: f64,
    /// 1, 2, ... in time order; `None` when unassigned.
    pub order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoReport {
    pub threshold_fraction: f64,
    pub min_separation: f64,
    pub echoes: Vec<Echo>,
    /// Time between consecutive echoes.
    pub delays: Vec<f64>,
    /// |amplitude| of each echo over that of its predecessor.
    pub ratios: Vec<f64>,
    /// Whether consecutive echoes have opposite signs.
    pub alternating: Vec<bool>,
}

impl EchoReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Echo(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeMetrics {
    pub delays: Vec<f64>,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayPredictions {
    /// Transit across the shadowed base, cΔt/2a.
    pub creeping_delay: f64,
    /// Bounds on the wave speed inside the coating, in units of c.
    pub dielectric_speed_bounds: (f64, f64),
}

/// Local extrema above `threshold_fraction` of the peak, at least a quarter
/// pulse duration apart. When two candidates are closer than that the
/// stronger one wins.
pub fn detect_echoes(series: &TimeSeries, threshold_fraction: f64) -> Result<EchoReport> {
    // pulse duration in ct/2a is cτ/2a = 1/g
    let sep = 0.25 / series.pulse.g();
    detect_echoes_with_separation(series, threshold_fraction, sep)
}

pub fn detect_echoes_with_separation(
    series: &TimeSeries,
    threshold_fraction: f64,
    min_separation: f64,
) -> Result<EchoReport> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    let v = &series.values;
    if v.is_empty() {
        return Err(Error::Echo("empty time series".into()));
    }
    let peak = series.peak_abs();
    let level = threshold_fraction * peak;
    let grid = series.grid;

    let mut candidates = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
        let is_max = b > a && b >= c;
        let is_min = b < a && b <= c;
        if !(is_max || is_min) || b.abs() < level || b == 0.0 {
            continue;
        }
        // parabola through the three samples
        let denom = a - 2.0 * b + c;
        let (dt, val) = if denom != 0.0 {
            let x = 0.5 * (a - c) / denom;
            (x, b - 0.25 * (a - c) * x)
        } else {
            (0.0, b)
        };
        candidates.push(Echo {
            time: grid.time(i) + dt * grid.step,
            amplitude: val,
            order: None,
        });
    }
    candidates.sort_by(|x, y| {
        y.amplitude
            .abs()
            .total_cmp(&x.amplitude.abs())
            .then(x.time.total_cmp(&y.time))
    });
    let mut echoes: Vec<Echo> = Vec::new();
    for c in candidates {
        if echoes
            .iter()
            .all(|e| (e.time - c.time).abs() >= min_separation)
        {
            echoes.push(c);
        }
    }
    echoes.sort_by(|x, y| x.time.total_cmp(&y.time));
    for (i, e) in echoes.iter_mut().enumerate() {
        e.order = Some(i as u32 + 1);
    }
    let delays = echoes.windows(2).map(|w| w[1].time - w[0].time).collect();
    let ratios = echoes
        .windows(2)
        .map(|w| (w[1].amplitude / w[0].amplitude).abs())
        .collect();
    let alternating = echoes
        .windows(2)
        .map(|w| w[0].amplitude.signum() != w[1].amplitude.signum())
        .collect();
    Ok(EchoReport {
        threshold_fraction,
        min_separation,
        echoes,
        delays,
        ratios,
        alternating,
    })
}

pub fn relative_metrics(report: &EchoReport) -> Result<RelativeMetrics> {
    if report.echoes.len() < 2 {
        return Err(Error::Echo(format!(
            "need at least two echoes, found {}",
            report.echoes.len()
        )));
    }
    Ok(RelativeMetrics {
        delays: report.delays.clone(),
        ratios: report.ratios.clone(),
    })
}

pub fn predicted_delays(spec: &GeometrySpec) -> Result<DelayPredictions> {
    spec.validate()?;
    let eps = if spec.is_coated() {
        spec.permittivity
    } else {
        1.0
    };
    Ok(DelayPredictions {
        creeping_delay: 1.0,
        dielectric_speed_bounds: (1.0 / eps.sqrt(), 1.0),
    })
}

/// ct/2a at which the incident peak, reflected at the plane of the
/// lateral/edge curvature jump of the outermost surface, returns to z = 0.
pub fn edge_arrival(spec: &GeometrySpec) -> Result<f64> {
    let (pec, coat) = build_profiles(spec)?;
    let outer = match coat {
        Some(c) if spec.is_coated() => c,
        _ => pec,
    };
    let jumps = outer.curvature_discontinuities();
    jumps
        .get(1)
        .map(|d| d.z)
        .ok_or_else(|| Error::Echo("profile has no lateral/edge junction".into()))
}

/// Echoes from half a pulse before `arrival` onward, renumbered 1, 2, ...
/// Earlier returns (vertex, low-frequency body response) are dropped.
pub fn echoes_from(
    report: &EchoReport,
    arrival: f64,
    pulse: &crate::pulse::PulseSpec,
) -> EchoReport {
    let start = arrival - 0.5 / pulse.g();
    let mut echoes: Vec<Echo> = report
        .echoes
        .iter()
        .copied()
        .filter(|e| e.time >= start)
        .collect();
    for (i, e) in echoes.iter_mut().enumerate() {
        e.order = Some(i as u32 + 1);
    }
    EchoReport {
        threshold_fraction: report.threshold_fraction,
        min_separation: report.min_separation,
        delays: echoes.windows(2).map(|w| w[1].time - w[0].time).collect(),
        ratios: echoes
            .windows(2)
            .map(|w| (w[1].amplitude / w[0].amplitude).abs())
            .collect(),
        alternating: echoes
            .windows(2)
            .map(|w| w[0].amplitude.signum() != w[1].amplitude.signum())
            .collect(),
        echoes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsr::FsrMetadata;
    use crate::pulse::PulseSpec;
    use crate::synthesis::TimeGrid;

    fn series_with<F: Fn(f64) -> f64>(c_tau: f64, f: F) -> TimeSeries {
        let pulse = PulseSpec::from_c_tau(c_tau, 2.25).unwrap();
        let grid = TimeGrid::spanning(-2.0, 12.0, 0.01).unwrap();
        let values = grid.times().iter().map(|&t| f(t)).collect();
        TimeSeries::new(grid, values, FsrMetadata::synthetic(), pulse).unwrap()
    }

    fn series<F: Fn(f64) -> f64>(f: F) -> TimeSeries {
        series_with(4.0, f)
    }

    /// Two opposite echoes, exp(−(gT)²) on the ct/2a axis.
    fn pair(g: f64) -> impl Fn(f64) -> f64 {
        move |t: f64| (-(g * (t - 3.4)).powi(2)).exp() - 0.6 * (-(g * (t - 4.8)).powi(2)).exp()
    }

    fn two_pulses(t: f64) -> f64 {
        pair(2.0)(t)
    }

    #[test]
    fn finds_two_opposite_echoes() {
        let rep = detect_echoes(&series_with(2.0, two_pulses), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(rep.echoes.len(), 2);
        let (a, b) = (rep.echoes[0], rep.echoes[1]);
        assert_eq!((a.order, b.order), (Some(1), Some(2)));
        assert!(a.amplitude > 0.0 && b.amplitude < 0.0);
        assert!(rep.alternating[0]);
        assert!((a.time - 3.4).abs() < 1e-3 && (b.time - 4.8).abs() < 1e-3);
        assert!((rep.delays[0] - 1.4).abs() < 2e-3);
        assert_eq!(relative_metrics(&rep).unwrap().delays, rep.delays);
    }

    #[test]
    fn overlapping_echoes_are_pushed_apart() {
        // with cτ/a = 4 the two pulses overlap and the extrema separate
        let f = pair(1.0);
        let rep = detect_echoes(&series(&f), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(rep.echoes.len(), 2);
        let d = |t: f64| {
            let h = 1e-6;
            f(t + h) - f(t - h)
        };
        let root = |mut lo: f64, mut hi: f64| {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if d(lo).signum() == d(mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let (ta, tb) = (root(2.5, 4.0), root(4.2, 6.0));
        assert!((rep.echoes[0].time - ta).abs() < 1e-3);
        assert!((rep.echoes[1].time - tb).abs() < 1e-3);
        assert!(rep.delays[0] > 1.4);
    }

    #[test]
    fn equal_echoes_have_unit_ratio() {
        let rep = detect_echoes(
            &series(|t| (-(t - 1.0f64).powi(2) * 4.0).exp() + (-(t - 6.0f64).powi(2) * 4.0).exp()),
            0.1,
        )
        .unwrap();
        let m = relative_metrics(&rep).unwrap();
        assert!((m.ratios[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn raising_threshold_never_adds_echoes() {
        let f = |t: f64| (3.0 * t).sin() * (-(t - 5.0f64).powi(2) / 8.0).exp();
        let s = series(f);
        let mut prev: Option<Vec<Echo>> = None;
        for thr in [0.01, 0.05, 0.2, 0.5, 0.9] {
            let rep = detect_echoes(&s, thr).unwrap();
            if let Some(p) = &prev {
                for e in &rep.echoes {
                    assert!(p.iter().any(|q| q.time == e.time));
                }
            }
            prev = Some(rep.echoes);
        }
    }

    #[test]
    fn times_are_scale_invariant() {
        let a = detect_echoes(&series(two_pulses), 0.05).unwrap();
        let b = detect_echoes(&series(|t| -7.25 * two_pulses(t)), 0.05).unwrap();
        let ta: Vec<f64> = a.echoes.iter().map(|e| e.time).collect();
        let tb: Vec<f64> = b.echoes.iter().map(|e| e.time).collect();
        assert_eq!(ta.len(), tb.len());
        for (x, y) in ta.iter().zip(&tb) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(detect_echoes(&series(two_pulses), 0.0).is_err());
        assert!(detect_echoes(&series(two_pulses), 1.0).is_err());
        let one = detect_echoes(&series(|t| (-(t * t)).exp()), 0.05).unwrap();
        assert!(relative_metrics(&one).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let rep = detect_echoes(&series(two_pulses), 0.05).unwrap();
        let back = EchoReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn edge_arrival_follows_placement() {
        use crate::geometry::TimeOrigin;
        let bare = GeometrySpec::reference_cone(1.0);
        let t = edge_arrival(&bare).unwrap();
        // lateral/edge tangent point: apex + (ρ_e cos α + r)/sin α − r sin α
        let (s, c) = bare.half_angle.sin_cos();
        let apex = bare.rounding - bare.rounding / s;
        let expect = apex + ((1.0 - bare.rounding) * c + bare.rounding) / s - bare.rounding * s;
        assert!((t - expect).abs() < 1e-12);
        let coated = GeometrySpec::reference_cone(2.0);
        let a = edge_arrival(&coated.placed(TimeOrigin::ConductorTip)).unwrap();
        let b = edge_arrival(&coated.placed(TimeOrigin::OuterTip)).unwrap();
        assert!((b - a - coated.coating).abs() < 1e-12);
        assert!((a - (expect - coated.coating * s)).abs() < 1e-9);
    }

    #[test]
    fn early_returns_are_dropped() {
        let f = |t: f64| -0.2 * (-(4.0 * t).powi(2)).exp() + pair(2.0)(t);
        let rep = detect_echoes(&series_with(2.0, f), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(rep.echoes.len(), 3);
        let later = echoes_from(&rep, 3.4, &PulseSpec::from_c_tau(2.0, 2.25).unwrap());
        assert_eq!(later.echoes.len(), 2);
        assert_eq!(later.echoes[0].order, Some(1));
        assert!((later.delays[0] - 1.4).abs() < 2e-3);
    }

    #[test]
    fn delay_predictions() {
        let p = predicted_delays(&GeometrySpec::reference_cone(2.0)).unwrap();
        assert_eq!(p.creeping_delay, 1.0);
        assert!((p.dielectric_speed_bounds.0 - 0.5f64.sqrt()).abs() < 1e-15);
        let p = predicted_delays(&GeometrySpec::reference_cone(1.0)).unwrap();
        assert_eq!(p.dielectric_speed_bounds, (1.0, 1.0));
    }
}
