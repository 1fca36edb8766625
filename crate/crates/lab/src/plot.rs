//! Dependency-free SVG charts. Output depends only on the input data, so
//! re-rendering a CSV yields identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::table::Table;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Lines,
    Points,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub style: Style,
    pub series: Vec<Series>,
}

/// Which CSV layout a plot expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// `theta_or_param` against KL both ways, JS and W.
    Divergence,
    /// `x(t)` and `y(t)` of the minimax game.
    Trajectory,
    /// `delta` and running `w` per bin.
    EarthMover,
    /// Trained and optimal discriminator over `x`.
    Discriminator,
    /// Long-form `mode, seed, d_step, grad_norm`, log scale.
    GradientNorms,
    /// Training metrics over `step`.
    Training,
    /// Scatter of `x, y` grouped by `source`.
    Samples,
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        return format!("1e{}", tick_label(v, false));
    }
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    fn transformed(&self) -> Vec<Series> {
        self.series
            .iter()
            .map(|s| Series {
                name: s.name.clone(),
                points: s
                    .points
                    .iter()
                    .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
                    .map(|&(x, y)| (x, if self.log_y { y.log10() } else { y }))
                    .collect(),
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let series = self.transformed();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in series.iter().flat_map(|s| &s.points) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 == y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            fmt_num(LEFT + pw / 2.0),
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<g stroke="black" fill="none"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/></g>"#,
            l = fmt_num(LEFT),
            r = fmt_num(LEFT + pw),
            t = fmt_num(TOP),
            b = fmt_num(TOP + ph)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                fmt_num(sx(xv)),
                fmt_num(TOP + ph + 16.0),
                tick_label(xv, false)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                fmt_num(LEFT - 6.0),
                fmt_num(sy(yv) + 4.0),
                tick_label(yv, self.log_y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt_num(LEFT + pw / 2.0),
            fmt_num(H - 12.0),
            escape(&self.x_label)
        );
        let y_label = if self.log_y {
            format!("log10 {}", self.y_label)
        } else {
            self.y_label.clone()
        };
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            fmt_num(TOP + ph / 2.0),
            fmt_num(TOP + ph / 2.0),
            escape(&y_label)
        );
        for (k, ser) in series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            match self.style {
                Style::Lines if !ser.points.is_empty() => {
                    let pts: Vec<String> = ser
                        .points
                        .iter()
                        .map(|&(x, y)| format!("{},{}", fmt_num(sx(x)), fmt_num(sy(y))))
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        pts.join(" ")
                    );
                }
                Style::Points => {
                    let _ = writeln!(s, r#"<g fill="{color}" fill-opacity="0.5">"#);
                    for &(x, y) in &ser.points {
                        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="1.5"/>"#, fmt_num(sx(x)), fmt_num(sy(y)));
                    }
                    let _ = writeln!(s, "</g>");
                }
                Style::Lines => {}
            }
            let ly = TOP + 10.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                fmt_num(LEFT + pw + 10.0),
                fmt_num(ly - 4.0),
                fmt_num(LEFT + pw + 28.0),
                fmt_num(ly + 1.0),
                escape(&ser.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xy_series(t: &Table, x: &str, ys: &[&str]) -> Result<Vec<Series>> {
    let xs = t.column(x)?;
    ys.iter()
        .map(|&name| {
            let vals = t.column(name)?;
            Ok(Series {
                name: name.to_string(),
                points: xs
                    .iter()
                    .zip(vals)
                    .filter_map(|(a, b)| Some(((*a)?, b?)))
                    .collect(),
            })
        })
        .collect()
}

fn grouped(t: &Table, keys: &[&str], x: &str, y: &str) -> Result<Vec<Series>> {
    let xs = t.column_f64(x)?;
    let ys = t.column_f64(y)?;
    let key_cols: Vec<Vec<&str>> = keys.iter().map(|k| t.text_column(k)).collect::<Result<_>>()?;
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for i in 0..t.rows.len() {
        let name = key_cols.iter().map(|c| c[i]).collect::<Vec<_>>().join(" seed ");
        groups.entry(name).or_default().push((xs[i], ys[i]));
    }
    Ok(groups.into_iter().map(|(name, points)| Series { name, points }).collect())
}

/// Renders `csv` as a chart of the given kind.
pub fn plot(csv: &Path, kind: PlotKind) -> Result<String> {
    let t = Table::read(csv)?;
    let path = csv.display().to_string();
    let schema = |cols: &[&str]| t.require(&path, cols);
    let chart = |title: &str, x: &str, y: &str, log_y: bool, style: Style, series: Vec<Series>| Chart {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        log_y,
        style,
        series,
    };
    let c = match kind {
        PlotKind::Divergence => {
            let cols = ["theta_or_param", "kl_pq", "kl_qp", "js_nats", "w"];
            schema(&cols)?;
            chart("Divergences", "parameter", "value (nats)", false, Style::Lines, xy_series(&t, cols[0], &cols[1..])?)
        }
        PlotKind::Trajectory => {
            schema(&["step", "x", "y"])?;
            chart("Minimax game", "step", "value", false, Style::Lines, xy_series(&t, "step", &["x", "y"])?)
        }
        PlotKind::EarthMover => {
            schema(&["i", "delta", "w"])?;
            chart("Earth mover recurrence", "bin", "dirt", false, Style::Lines, xy_series(&t, "i", &["delta", "w"])?)
        }
        PlotKind::Discriminator => {
            schema(&["x", "d_trained", "d_optimal"])?;
            chart("Discriminator", "x", "D(x)", false, Style::Lines, xy_series(&t, "x", &["d_trained", "d_optimal"])?)
        }
        PlotKind::GradientNorms => {
            schema(&["mode", "seed", "d_step", "grad_norm"])?;
            chart(
                "Generator gradient norm",
                "discriminator steps",
                "norm",
                true,
                Style::Lines,
                grouped(&t, &["mode", "seed"], "d_step", "grad_norm")?,
            )
        }
        PlotKind::Training => {
            schema(&["step", "d_loss", "g_loss", "w_estimate"])?;
            let mut s = xy_series(&t, "step", &["d_loss", "g_loss", "w_estimate"])?;
            s.retain(|s| !s.points.is_empty());
            chart("Training", "step", "value", false, Style::Lines, s)
        }
        PlotKind::Samples => {
            schema(&["source", "x", "y"])?;
            chart("Samples", "x", "y", false, Style::Points, grouped(&t, &["source"], "x", "y")?)
        }
    };
    Ok(c.render())
}

/// Renders `csv` and writes the SVG next to it.
pub fn plot_to(csv: &Path, kind: PlotKind, svg: &Path) -> Result<()> {
    std::fs::write(svg, plot(csv, kind)?)?;
    Ok(())
}
