//! Static SVG figures: line plots and heat maps with no external
//! references, rendered with fixed-precision coordinates so the bytes are
//! reproducible.

use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 46.0;
const MARGIN_B: f64 = 64.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone)]
pub struct HeatMap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Row-major values, `rows.len() = row_labels.len()`.
    pub rows: Vec<Vec<f64>>,
    pub row_labels: Vec<String>,
    pub x_range: (f64, f64),
}

/// A named figure ready for serialization.
#[derive(Debug, Clone)]
pub enum Figure {
    Line(String, LinePlot),
    Heat(String, HeatMap),
}

impl Figure {
    pub fn name(&self) -> &str {
        match self {
            Figure::Line(n, _) => n,
            Figure::Heat(n, _) => n,
        }
    }

    pub fn to_svg(&self) -> String {
        match self {
            Figure::Line(_, p) => render_lineplot(p),
            Figure::Heat(_, h) => render_heatmap(h),
        }
    }
}

fn finite_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        // Degenerate span: pad symmetrically.
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"14\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, x_label: &str, y_label: &str, xr: (f64, f64), yr: (f64, f64)) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = write!(
        s,
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\" stroke=\"black\"/>\n"
    );
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let xv = xr.0 + f * (xr.1 - xr.0);
        let yv = yr.0 + f * (yr.1 - yr.0);
        let xp = x0 + f * (x1 - x0);
        let yp = y0 - f * (y0 - y1);
        let _ = write!(
            s,
            "<line x1=\"{xp:.1}\" y1=\"{y0:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 6.0,
            y0 + 22.0,
            fmt_tick(xv)
        );
        let _ = write!(
            s,
            "<line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{x0:.1}\" y2=\"{yp:.1}\" stroke=\"black\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            x0 - 6.0,
            x0 - 10.0,
            yp + 5.0,
            fmt_tick(yv)
        );
    }
    let _ = write!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = write!(
        s,
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_lineplot(p: &LinePlot) -> String {
    let xr = finite_bounds(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)));
    let yr = finite_bounds(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.1)));
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let px = |x: f64| x0 + (x - xr.0) / (xr.1 - xr.0) * (x1 - x0);
    let py = |y: f64| y0 - (y - yr.0) / (yr.1 - yr.0) * (y0 - y1);

    let mut s = header(&p.title);
    axes(&mut s, &p.x_label, &p.y_label, xr, yr);
    for (k, series) in p.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if series.points.len() > 1 {
            let mut path = String::new();
            for (i, &(x, y)) in series.points.iter().enumerate() {
                let _ = write!(
                    path,
                    "{}{:.2},{:.2}",
                    if i == 0 { "M" } else { " L" },
                    px(x),
                    py(y)
                );
            }
            let _ = write!(
                s,
                "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n"
            );
        }
        // Markers keep single points and sparse scans visible.
        if series.points.len() <= 40 {
            for &(x, y) in &series.points {
                let _ = write!(
                    s,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                    px(x),
                    py(y)
                );
            }
        }
        let _ = write!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            x1 - 170.0,
            y1 + 18.0 * k as f64 + 4.0,
            escape(&series.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn render_heatmap(h: &HeatMap) -> String {
    let mut s = header(&h.title);
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R - 70.0);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let nrows = h.rows.len().max(1);
    let ncols = h.rows.first().map_or(1, Vec::len).max(1);
    let (lo, hi) = finite_bounds(h.rows.iter().flatten().copied());
    let cell_w = (x1 - x0) / ncols as f64;
    let cell_h = (y0 - y1) / nrows as f64;
    for (r, row) in h.rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
            let _ = write!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                x0 + c as f64 * cell_w,
                y1 + r as f64 * cell_h,
                cell_w + 0.5,
                cell_h + 0.5,
                viridis(t)
            );
        }
    }
    for (r, label) in h.row_labels.iter().enumerate() {
        let _ = write!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            x0 - 6.0,
            y1 + (r as f64 + 0.6) * cell_h,
            escape(label)
        );
    }
    // X ticks and labels.
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let xv = h.x_range.0 + f * (h.x_range.1 - h.x_range.0);
        let xp = x0 + f * (x1 - x0);
        let _ = write!(
            s,
            "<line x1=\"{xp:.1}\" y1=\"{y0:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 6.0,
            y0 + 22.0,
            fmt_tick(xv)
        );
    }
    let _ = write!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(&h.x_label)
    );
    let _ = write!(
        s,
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&h.y_label)
    );
    // Color bar.
    let bar_x = WIDTH - MARGIN_R - 52.0;
    for k in 0..40 {
        let t = 1.0 - k as f64 / 39.0;
        let _ = write!(
            s,
            "<rect x=\"{bar_x:.1}\" y=\"{:.2}\" width=\"16\" height=\"{:.2}\" fill=\"{}\"/>\n",
            y1 + k as f64 * (y0 - y1) / 40.0,
            (y0 - y1) / 40.0 + 0.5,
            viridis(t)
        );
    }
    let _ = write!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
        bar_x + 20.0,
        y1 + 12.0,
        fmt_tick(hi),
        bar_x + 20.0,
        y0,
        fmt_tick(lo)
    );
    s.push_str("</svg>\n");
    s
}

/// Five-stop approximation of the viridis colormap.
fn viridis(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (0.267, 0.005, 0.329),
        (0.229, 0.322, 0.546),
        (0.127, 0.566, 0.551),
        (0.369, 0.789, 0.383),
        (0.993, 0.906, 0.144),
    ];
    let x = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let mix = |a: f64, b: f64| ((a + f * (b - a)) * 255.0).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(STOPS[i].0, STOPS[i + 1].0),
        mix(STOPS[i].1, STOPS[i + 1].1),
        mix(STOPS[i].2, STOPS[i + 1].2)
    )
}
