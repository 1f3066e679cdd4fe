//! Minimal log-log line plots written as standalone SVG.

use std::fmt::Write as _;

use crate::power_law::PowerLaw;

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#e6a100", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Drawn as a dashed line across the series' x range.
    pub fit: Option<PowerLaw>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, fit: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Decade-aligned `log10` range covering `vals`.
fn decades(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v.log10());
        hi = hi.max(v.log10());
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}

impl LogLogPlot {
    fn positive(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.series.iter().flat_map(|s| s.points.iter().copied()).filter(|&(x, y)| x > 0.0 && y > 0.0)
    }

    fn render_panel(&self, out: &mut String, x0: f64) {
        let (xl, xh) = decades(self.positive().map(|p| p.0));
        let (yl, yh) = decades(self.positive().map(|p| p.1));
        let w = PANEL_W - MARGIN_L - MARGIN_R;
        let h = PANEL_H - MARGIN_T - MARGIN_B;
        let px = |x: f64| x0 + MARGIN_L + (x.log10() - xl) / (xh - xl) * w;
        let py = |y: f64| MARGIN_T + (yh - y.log10()) / (yh - yl) * h;

        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{MARGIN_T}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
            x0 + MARGIN_L
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            x0 + MARGIN_L + w / 2.0,
            escape(&self.title)
        );
        for k in xl as i32..=xh as i32 {
            let x = px(10f64.powi(k));
            let _ = writeln!(
                out,
                r##"<line x1="{x:.1}" y1="{MARGIN_T}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="12">1e{k}</text>"##,
                MARGIN_T + h,
                MARGIN_T + h + 16.0
            );
        }
        for k in yl as i32..=yh as i32 {
            let y = py(10f64.powi(k));
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="12">1e{k}</text>"##,
                x0 + MARGIN_L,
                x0 + MARGIN_L + w,
                x0 + MARGIN_L - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
            x0 + MARGIN_L + w / 2.0,
            PANEL_H - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle" font-size="13">{}</text>"#,
            x0 + 16.0,
            MARGIN_T + h / 2.0,
            escape(&self.y_label)
        );

        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
            if pts.len() > 1 {
                let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
                let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, path.join(" "));
            }
            for &(x, y) in &pts {
                let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, px(x), py(y));
            }
            if let (Some(fit), Some(a), Some(b)) =
                (s.fit, pts.iter().map(|p| p.0).reduce(f64::min), pts.iter().map(|p| p.0).reduce(f64::max))
            {
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="5,4"/>"#,
                    px(a),
                    py(fit.eval(a)),
                    px(b),
                    py(fit.eval(b))
                );
            }
            let label = match s.fit {
                Some(f) => format!("{} (p = {:.2})", s.label, f.exponent),
                None => s.label.clone(),
            };
            let ly = MARGIN_T + 16.0 + 16.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
                x0 + MARGIN_L + 12.0,
                ly - 4.0,
                x0 + MARGIN_L + 20.0,
                ly,
                escape(&label)
            );
        }
    }
}

/// Panels laid out side by side in one SVG document.
pub fn render_svg(panels: &[LogLogPlot]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        p.render_panel(&mut out, PANEL_W * i as f64);
    }
    out.push_str("</svg>\n");
    out
}
