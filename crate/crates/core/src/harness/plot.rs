//! Minimal SVG line charts of aggregates: x = code distance, log-scale y,
//! one polyline per physical error rate.

use std::fmt::Write;

use super::Aggregate;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotMetric {
    MeanVisitedNodes,
    MeanExtraNodes,
    FractionBelow,
}

impl PlotMetric {
    fn value(self, a: &Aggregate) -> f64 {
        match self {
            PlotMetric::MeanVisitedNodes => a.mean_visited_nodes,
            PlotMetric::MeanExtraNodes => a.mean_extra_nodes,
            PlotMetric::FractionBelow => a.fraction_below,
        }
    }

    fn label(self) -> &'static str {
        match self {
            PlotMetric::MeanVisitedNodes => "mean visited nodes",
            PlotMetric::MeanExtraNodes => "mean extra nodes",
            PlotMetric::FractionBelow => "fraction below threshold",
        }
    }
}

impl std::str::FromStr for PlotMetric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "visited" => Ok(PlotMetric::MeanVisitedNodes),
            "extra" => Ok(PlotMetric::MeanExtraNodes),
            "fraction" => Ok(PlotMetric::FractionBelow),
            other => Err(format!("unknown plot metric '{other}'")),
        }
    }
}

/// Renders `aggs` (expected to hold a single method) as an SVG document.
/// Non-positive values cannot sit on a log axis and are left out.
pub fn render_svg(aggs: &[Aggregate], metric: PlotMetric) -> String {
    let mut probs: Vec<f64> = Vec::new();
    for a in aggs {
        if !probs.contains(&a.p) {
            probs.push(a.p);
        }
    }
    let pts: Vec<(f64, f64, f64)> = aggs
        .iter()
        .map(|a| (a.p, a.d as f64, metric.value(a)))
        .filter(|&(_, _, y)| y > 0.0 && y.is_finite())
        .collect();

    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y.log10().floor());
        y1 = y1.max(y.log10().ceil());
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y.log10() - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, bottom, top) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left},{top} V{bottom} H{right}" stroke="black" fill="none"/>"#
    );
    for decade in y0 as i32..=y1 as i32 {
        let y = sy(10f64.powi(decade));
        let _ = writeln!(
            svg,
            r#"<line x1="{left}" y1="{y:.1}" x2="{right}" y2="{y:.1}" stroke="lightgray"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e{decade}</text>"#,
            left - 6.0,
            y + 4.0
        );
    }
    let mut ds: Vec<f64> = pts.iter().map(|p| p.1).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    for d in ds {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{d}</text>"#,
            sx(d),
            bottom + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">code distance d</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        metric.label()
    );

    for (i, &p) in probs.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut series: Vec<(f64, f64)> = pts.iter().filter(|q| q.0 == p).map(|q| (q.1, q.2)).collect();
        series.sort_by(|a, b| a.0.total_cmp(&b.0));
        let coords: Vec<String> = series
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-p="{p}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{color}">p = {p}</text>"#,
            right - 90.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
