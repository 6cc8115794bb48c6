//! Static log-log SVG plots of residual series with their fitted lines.

use std::fmt::Write;

use nambu_core::experiments::{fit_rate, ResidualSeries, ZERO_GUARD};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// `(slope, intercept)` of `log r = intercept + slope log k`, drawn over
    /// the fit window (all levels but the smallest).
    pub fit: Option<(f64, f64)>,
}

impl Curve {
    pub fn from_series(s: &ResidualSeries) -> Self {
        Self {
            label: format!("{} {}", s.setting.label(), s.tuple),
            points: s.ks.iter().map(|k| *k as f64).zip(s.residuals.iter().copied()).collect(),
            fit: s.fit.map(|f| (f.slope, f.intercept)),
        }
    }

    /// Curve from raw points, refitting over all levels but the smallest.
    pub fn from_points(label: String, points: Vec<(f64, f64)>) -> Self {
        let ks: Vec<u32> = points.iter().skip(1).map(|p| p.0 as u32).collect();
        let rs: Vec<f64> = points.iter().skip(1).map(|p| p.1).collect();
        let fit = fit_rate(&ks, &rs).ok().map(|f| (f.slope, f.intercept));
        Self { label, points, fit }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `curves` on shared log-log axes; `reference` is the threshold
/// slope drawn as a dashed guide through the first curve's last point.
pub fn render(title: &str, curves: &[Curve], reference: Option<f64>) -> String {
    let pts: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|c| c.points.iter().copied())
        .filter(|p| p.0 > 0.0 && p.1 > ZERO_GUARD)
        .map(|(k, r)| (k.log10(), r.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        let _ = writeln!(svg, r#"<text x="{LEFT}" y="{}">no positive residuals</text>"#, H / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p.0), b.max(p.0), c.min(p.1), d.max(p.1)),
    );
    let pad = |lo: &mut f64, hi: &mut f64, m: f64| {
        let span = (*hi - *lo).max(m);
        let mid = 0.5 * (*hi + *lo);
        *lo = mid - 0.55 * span;
        *hi = mid + 0.55 * span;
    };
    pad(&mut x0, &mut x1, 0.2);
    pad(&mut y0, &mut y1, 0.5);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    // decade ticks on y, level ticks on x
    for e in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = sy(e as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{e}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let mut ks: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    for k in ks.iter().filter(|k| **k > 0.0) {
        let x = sx(k.log10());
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{k}</text>"##,
            TOP + ph,
            TOP + ph + 4.0,
            TOP + ph + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">k</text>"#,
        LEFT + pw / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">residual</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for (k, r) in c.points.iter().filter(|p| p.0 > 0.0 && p.1 > ZERO_GUARD) {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#,
                sx(k.log10()),
                sy(r.log10())
            );
        }
        if let (Some((slope, icpt)), Some(first), Some(last)) = (c.fit, c.points.get(1), c.points.last()) {
            let line = |k: f64| (sx(k.log10()), sy((icpt + slope * k.ln()) / std::f64::consts::LN_10));
            let (ax, ay) = line(first.0);
            let (bx, by) = line(last.0);
            let _ = writeln!(
                svg,
                r#"<line x1="{ax:.1}" y1="{ay:.1}" x2="{bx:.1}" y2="{by:.1}" stroke="{color}" stroke-width="1.5"/>"#
            );
        }
        let ly = TOP + 14.0 + 30.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let fit = c.fit.map(|f| format!("slope {:.3}", f.0)).unwrap_or_else(|| "no fit".into());
        let _ = writeln!(
            svg,
            r#"<circle cx="{lx:.1}" cy="{:.1}" r="3.5" fill="{color}"/><text x="{:.1}" y="{ly:.1}">{}</text><text x="{:.1}" y="{:.1}">{fit}</text>"#,
            ly - 4.0,
            lx + 8.0,
            escape(&c.label),
            lx + 8.0,
            ly + 13.0
        );
    }
    if let (Some(p), Some(first)) = (reference, curves.first()) {
        if let Some(&(k1, r1)) = first.points.iter().rev().find(|p| p.1 > ZERO_GUARD) {
            let k0 = first.points[0].0;
            let r0 = r1 * (k0 / k1).powf(p);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="5,4"/><text x="{:.1}" y="{:.1}" fill="#888">slope {p}</text>"##,
                sx(k0.log10()),
                sy(r0.log10()),
                sx(k1.log10()),
                sy(r1.log10()),
                sx(k0.log10()) + 4.0,
                sy(r0.log10()) - 6.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_and_fit() {
        let pts: Vec<(f64, f64)> = [4.0, 6.0, 8.0, 10.0, 12.0].iter().map(|k| (*k, 3.0 / k)).collect();
        let c = Curve::from_points("seed=1".into(), pts);
        assert!((c.fit.unwrap().0 + 1.0).abs() < 1e-9);
        let svg = render("demo <a&b>", &[c], Some(-0.7));
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("demo &lt;a&amp;b&gt;"));
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("slope -1.000"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_and_zero_series() {
        let c = Curve::from_points("zero".into(), vec![(2.0, 0.0), (3.0, 0.0)]);
        assert!(render("z", &[c], None).contains("no positive residuals"));
    }
}
