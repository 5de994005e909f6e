//! Minimal deterministic SVG plots: line charts and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Clone, Debug)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub markers: bool,
    pub series: Vec<Series>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        esc(title)
    );
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str, log_y: bool) {
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let xv = x.0 + f * (x.1 - x.0);
        let yv = y.0 + f * (y.1 - y.0);
        let ylab = if log_y { fmt_tick(10f64.powf(yv)) } else { fmt_tick(yv) };
        let _ = writeln!(
            out,
            r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py}" x2="{LEFT}" y2="{py}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            ylab
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        esc(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(y_label)
    );
}

impl LinePlot {
    pub fn render(&self) -> String {
        let ty = |v: f64| if self.log_y { v.max(1e-300).log10() } else { v };
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let x = range(pts().map(|p| p.0));
        let y = range(pts().map(|p| ty(p.1)).filter(|v| v.is_finite()));
        let y = if self.log_y { y } else { (y.0.min(0.0), y.1 * 1.05) };
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let sx = |v: f64| LEFT + (v - x.0) / (x.1 - x.0) * pw;
        let sy = |v: f64| TOP + ph - (ty(v) - y.0) / (y.1 - y.0) * ph;

        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, x, y, &self.x_label, &self.y_label, self.log_y);
        for (i, s) in self.series.iter().enumerate() {
            let c = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter(|p| ty(p.1).is_finite())
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{c}" stroke-width="1.6"{dash} points="{}"/>"#,
                path.join(" ")
            );
            if self.markers {
                for p in &path {
                    let (a, b) = p.split_once(',').unwrap();
                    let _ = writeln!(out, r#"<circle cx="{a}" cy="{b}" r="3" fill="{c}"/>"#);
                }
            }
            let ly = TOP + 10.0 + 16.0 * i as f64;
            let lx = W - RIGHT + 10.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 18.0,
                lx + 22.0,
                ly + 4.0,
                esc(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Density on a rectangular lattice, first axis horizontal.
#[derive(Clone, Debug)]
pub struct Heatmap {
    pub title: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `values[i * y.len() + j]` at `(x[i], y[j])`.
    pub values: Vec<f64>,
    pub marker: Option<(f64, f64)>,
}

fn viridis(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * 4.0;
    let i = (t.floor() as usize).min(3);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + f * (q - p)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

impl Heatmap {
    pub fn render(&self) -> String {
        let xr = range(self.x.iter().copied());
        let yr = range(self.y.iter().copied());
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let vmax = self.values.iter().copied().fold(0.0, f64::max).max(1e-300);
        // Downsample to at most 128 cells per axis.
        let step_x = self.x.len().div_ceil(128).max(1);
        let step_y = self.y.len().div_ceil(128).max(1);
        let cw = pw / self.x.len().div_ceil(step_x) as f64;
        let ch = ph / self.y.len().div_ceil(step_y) as f64;

        let mut out = String::new();
        header(&mut out, &self.title);
        for (ci, i) in (0..self.x.len()).step_by(step_x).enumerate() {
            for (cj, j) in (0..self.y.len()).step_by(step_y).enumerate() {
                let v = self.values[i * self.y.len() + j] / vmax;
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    LEFT + ci as f64 * cw,
                    TOP + ph - (cj + 1) as f64 * ch,
                    cw + 0.3,
                    ch + 0.3,
                    viridis(v)
                );
            }
        }
        axes(&mut out, xr, yr, "θ₁", "θ₂", false);
        if let Some((mx, my)) = self.marker {
            let px = LEFT + (mx - xr.0) / (xr.1 - xr.0) * pw;
            let py = TOP + ph - (my - yr.0) / (yr.1 - yr.0) * ph;
            let _ = writeln!(
                out,
                r#"<path d="M{} {py} h12 M{px} {} v12" stroke="red" stroke-width="2"/>"#,
                px - 6.0,
                py - 6.0
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let p = LinePlot {
            title: "a < b".into(),
            x_label: "N".into(),
            y_label: "H".into(),
            log_y: true,
            markers: true,
            series: vec![Series {
                name: "mean".into(),
                points: vec![(1.0, 0.5), (2.0, 0.1), (4.0, 0.0)],
                dashed: false,
            }],
        };
        let s = p.render();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s, p.render());
    }

    #[test]
    fn heatmap_colours_span_the_map() {
        let h = Heatmap {
            title: "d".into(),
            x: vec![0.0, 1.0],
            y: vec![0.0, 1.0],
            values: vec![0.0, 1.0, 0.5, 0.25],
            marker: Some((0.5, 0.5)),
        };
        let s = h.render();
        assert!(s.contains("#440154") && s.contains("#fde725"));
    }
}
