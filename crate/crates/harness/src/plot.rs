//! Minimal deterministic SVG charts.
//!
//! Output depends only on the inputs: fixed canvas, fixed number formatting
//! and no timestamps, so identical tables give identical bytes.

use std::fmt::Write;

use nalgebra::DMatrix;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct LineSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<LineSeries>,
    /// Fixed y range; derived from the data when absent.
    pub y_range: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

pub fn line_plot_svg(plot: &LinePlot) -> String {
    let (x0, x1) = bounds(plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = plot
        .y_range
        .unwrap_or_else(|| bounds(plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.1))));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            TOP + ph + 18.0,
            tick_label(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(fy) + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&plot.y_label)
    );
    for (k, series) in plot.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn heat_color(v: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
    // white to dark blue
    let r = (255.0 * (1.0 - t) + 8.0 * t).round() as u8;
    let g = (255.0 * (1.0 - t) + 48.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t) + 107.0 * t).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap with one `rect class="cell"` per matrix entry; row `i` is drawn
/// top to bottom, column `j` left to right.
pub fn heatmap_svg(title: &str, values: &DMatrix<f64>, row_label: &str, col_label: &str) -> String {
    let (rows, cols) = values.shape();
    let cell = (360.0 / rows.max(cols).max(1) as f64).min(40.0);
    let (ox, oy) = (80.0, 60.0);
    let w = ox + cell * cols as f64 + 40.0;
    let h = oy + cell * rows as f64 + 50.0;
    let (lo, hi) = bounds(values.iter().copied());
    let lo = lo.min(0.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    for i in 0..rows {
        for j in 0..cols {
            let v = values[(i, j)];
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="{}" stroke="gray"><title>({i},{j}) {}</title></rect>"#,
                ox + cell * j as f64,
                oy + cell * i as f64,
                heat_color(v, lo, hi),
                tick_label(v)
            );
        }
    }
    for i in 0..rows {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{i}</text>"#,
            ox - 4.0,
            oy + cell * (i as f64 + 0.5) + 4.0
        );
    }
    for j in 0..cols {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{j}</text>"#,
            ox + cell * (j as f64 + 0.5),
            oy - 6.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        ox + cell * cols as f64 / 2.0,
        oy + cell * rows as f64 + 30.0,
        escape(col_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        oy + cell * rows as f64 / 2.0,
        oy + cell * rows as f64 / 2.0,
        escape(row_label)
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> LinePlot {
        LinePlot {
            title: "t".into(),
            x_label: "k".into(),
            y_label: "%".into(),
            series: vec![
                LineSeries { label: "reconstruction".into(), points: vec![(5.0, 100.0), (10.0, 90.0)] },
                LineSeries { label: "causality".into(), points: vec![(5.0, 40.0), (10.0, 60.0)] },
            ],
            y_range: Some((0.0, 100.0)),
        }
    }

    #[test]
    fn line_plot_structure_and_determinism() {
        let a = line_plot_svg(&plot());
        assert_eq!(a, line_plot_svg(&plot()));
        assert_eq!(a.matches("class=\"series\"").count(), 2);
        assert!(a.contains(">reconstruction</text>") && a.contains(">causality</text>"));
    }

    #[test]
    fn heatmap_cell_count() {
        let m = DMatrix::from_fn(10, 10, |i, j| (i * j) as f64);
        let svg = heatmap_svg("adjacency", &m, "target", "source");
        assert_eq!(svg.matches("class=\"cell\"").count(), 100);
    }

    #[test]
    fn degenerate_ranges() {
        let p = LinePlot { y_range: None, series: vec![LineSeries { label: "flat".into(), points: vec![(1.0, 0.0)] }], ..plot() };
        let svg = line_plot_svg(&p);
        assert!(!svg.contains("NaN"));
    }
}
