//! Dependency-free SVG emitters: polyline charts and heatmaps.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Simple polyline chart; set `loglog` to plot log10 of both axes.
pub fn polyline_svg(title: &str, series: &[Series<'_>], loglog: bool) -> String {
    let (w, h) = (640.0, 420.0);
    let margin = 54.0;
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| !loglog || (*x > 0.0 && *y > 0.0))
                .map(|(x, y)| {
                    if loglog {
                        (x.log10(), y.log10())
                    } else {
                        (*x, *y)
                    }
                })
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = mapped.iter().flatten().cloned().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in &all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() || x0 == x1 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if !y0.is_finite() || y0 == y1 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);

    let palette = ["#1b6ca8", "#c23b22", "#2e8540", "#7d3ac1", "#b8860b"];
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = write!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{}</text>",
        margin, title
    );
    // Axes.
    let _ = write!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/><line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = margin,
        b = h - margin,
        r = w - margin,
        t = margin
    );
    for (tick, label_val) in [(x0, x0), (x1, x1)] {
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{label_val:.3}</text>",
            sx(tick) - 12.0,
            h - margin + 16.0
        );
    }
    for tick in [y0, y1] {
        let _ = write!(
            svg,
            "<text x=\"4\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{tick:.3}</text>",
            sy(tick) + 4.0
        );
    }
    for (i, pts) in mapped.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = palette[i % palette.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        let _ = write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            path.join(" ")
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>",
            w - margin - 140.0,
            margin + 16.0 * (i as f64 + 1.0),
            series[i].label
        );
    }
    svg.push_str("</svg>");
    svg
}

/// Heatmap of row-major data, downsampled to at most `max_cells` per axis.
pub fn heatmap_svg(title: &str, data: &[f64], nx: usize, ny: usize) -> String {
    let max_cells = 160usize;
    let step = (nx.max(ny) / max_cells).max(1);
    let (cnx, cny) = (nx.div_ceil(step), ny.div_ceil(step));
    let cell = 3.0f64.max(480.0 / cnx as f64);
    let (w, h) = (cell * cnx as f64, cell * cny as f64 + 30.0);

    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-300);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = write!(
        svg,
        "<text x=\"4\" y=\"18\" font-family=\"monospace\" font-size=\"13\">{title} [{lo:.3e}, {hi:.3e}]</text>"
    );
    for cy in 0..cny {
        for cx in 0..cnx {
            // Block average.
            let mut acc = 0.0;
            let mut count = 0;
            for iy in (cy * step)..((cy + 1) * step).min(ny) {
                for ix in (cx * step)..((cx + 1) * step).min(nx) {
                    acc += data[iy * nx + ix];
                    count += 1;
                }
            }
            let v = (acc / count.max(1) as f64 - lo) / span;
            let r = (255.0 * v) as u8;
            let b = (255.0 * (1.0 - v)) as u8;
            let g = (128.0 * (1.0 - (2.0 * v - 1.0).abs())) as u8;
            let _ = write!(
                svg,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"rgb({r},{g},{b})\"/>",
                cx as f64 * cell,
                30.0 + (cny - 1 - cy) as f64 * cell,
                cell,
                cell
            );
        }
    }
    svg.push_str("</svg>");
    svg
}
