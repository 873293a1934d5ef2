//! Minimal static SVG line plot of transient responses on a ct/2a axis.

use std::fmt::Write as _;

use borscat::synthesis::TimeSeries;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const DASHES: [&str; 4] = ["", "8 5", "10 4 2 4", "2 3"];

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

/// One curve per labelled series, solid, dashed, dash-dotted and dotted
/// in turn.
pub fn transient_svg(curves: &[(String, &TimeSeries)]) -> String {
    let mut t0 = f64::INFINITY;
    let mut t1 = f64::NEG_INFINITY;
    let mut vmax: f64 = 0.0;
    for (_, s) in curves {
        t0 = t0.min(s.grid.start);
        t1 = t1.max(s.grid.end());
        vmax = vmax.max(s.peak_abs());
    }
    if !(t1 > t0) {
        t1 = t0 + 1.0;
    }
    if vmax == 0.0 {
        vmax = 1.0;
    }
    let vmax = vmax * 1.1;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + (t - t0) / (t1 - t0) * pw;
    let y = |v: f64| TOP + (vmax - v) / (2.0 * vmax) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let step = nice_step(t1 - t0, 10);
    let mut t = (t0 / step).ceil() * step;
    while t <= t1 + 1e-9 {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{4}</text>"#,
            x(t),
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 19.0,
            format_tick(t)
        );
        t += step;
    }
    let vstep = nice_step(2.0 * vmax, 6);
    let mut v = (-vmax / vstep).ceil() * vstep;
    while v <= vmax + 1e-12 {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/><text x="{3:.2}" y="{4:.2}" text-anchor="end">{5}</text>"#,
            LEFT - 5.0,
            y(v),
            LEFT,
            LEFT - 8.0,
            y(v) + 4.0,
            format_tick(v)
        );
        v += vstep;
    }
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#999" stroke-width="0.5"/>"##,
        y(0.0),
        LEFT + pw
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">ct/2a</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    for (i, (label, s)) in curves.iter().enumerate() {
        let dash = DASHES[i % DASHES.len()];
        let mut pts = String::new();
        for (t, v) in s.times().iter().zip(&s.values) {
            let _ = write!(pts, "{:.2},{:.2} ", x(*t), y(*v));
        }
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="black" stroke-width="1.3"{dash_attr} points="{}"/>"#,
            pts.trim_end()
        );
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="black" stroke-width="1.3"{dash_attr}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 36.0,
            lx + 42.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn format_tick(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
