//! Hand-rolled SVG line charts: mean RSNR against total bits, one series
//! per (algorithm, bit depth).
//!
//! Output bytes are a pure function of the input rows: fixed canvas,
//! fixed precision formatting, series sorted by (algorithm family order,
//! bit depth), and no timestamps or generator comments.

use crate::csvio::SummaryRow;
use qcs_core::catalog::algorithm_rank;

pub const DEFAULT_CEILING_DB: f64 = 60.0;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 660.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 500.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub algorithm: String,
    pub bit_depth: u32,
    /// (total_bits, mean RSNR dB), ascending in total_bits.
    pub points: Vec<(f64, f64)>,
}

/// House color per algorithm family; anything unrecognized is gray.
pub fn series_color(algorithm: &str) -> &'static str {
    match algorithm {
        "qiht" | "iht" | "biht" => "red",
        "aop-qiht" => "magenta",
        "qcosamp" | "cosamp" => "green",
        "qsp" | "sp" => "blue",
        _ => "gray",
    }
}

/// Marker shape per bit depth: circle, square, triangle, star for 1..4;
/// anything else gets a diamond.
fn marker(x: f64, y: f64, bit_depth: u32, color: &str) -> String {
    let pt = |dx: f64, dy: f64| format!("{:.2},{:.2}", x + dx, y + dy);
    match bit_depth {
        1 => format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/>"#),
        2 => format!(
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="{color}"/>"#,
            x - 4.0,
            y - 4.0
        ),
        3 => format!(
            r#"<polygon points="{} {} {}" fill="{color}"/>"#,
            pt(0.0, -5.0),
            pt(-4.5, 3.5),
            pt(4.5, 3.5)
        ),
        4 => {
            // five-point star, outer radius 5, inner radius 2
            let offsets = [
                (0.0, -5.0),
                (1.18, -1.62),
                (4.76, -1.55),
                (1.9, 0.62),
                (2.94, 4.05),
                (0.0, 2.0),
                (-2.94, 4.05),
                (-1.9, 0.62),
                (-4.76, -1.55),
                (-1.18, -1.62),
            ];
            let pts: Vec<String> = offsets.iter().map(|(dx, dy)| pt(*dx, *dy)).collect();
            format!(r#"<polygon points="{}" fill="{color}"/>"#, pts.join(" "))
        }
        _ => format!(
            r#"<polygon points="{} {} {} {}" fill="{color}"/>"#,
            pt(0.0, -5.0),
            pt(5.0, 0.0),
            pt(0.0, 5.0),
            pt(-5.0, 0.0)
        ),
    }
}

/// Groups summary rows into plot series. Values above the ceiling
/// (including +inf) are clipped to it; rows otherwise pass through.
pub fn build_series(rows: &[SummaryRow], ceiling_db: f64) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        let y = row.mean_rsnr_db.min(ceiling_db);
        let found = series
            .iter_mut()
            .find(|s| s.algorithm == row.algorithm && s.bit_depth == row.bit_depth);
        match found {
            Some(s) => s.points.push((row.total_bits as f64, y)),
            None => series.push(Series {
                algorithm: row.algorithm.clone(),
                bit_depth: row.bit_depth,
                points: vec![(row.total_bits as f64, y)],
            }),
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    series.sort_by(|a, b| {
        algorithm_rank(&a.algorithm)
            .cmp(&algorithm_rank(&b.algorithm))
            .then(a.bit_depth.cmp(&b.bit_depth))
    });
    series
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|s| s * mag)
        .find(|s| (hi - lo) / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + step * 1e-9 {
        ticks.push(t);
        t += step;
    }
    ticks
}

/// Renders the chart. At least one series with at least one point is the
/// caller's responsibility (commands reject empty filter results first).
pub fn render(series: &[Series], ceiling_db: f64, title: &str) -> String {
    assert!(!series.is_empty(), "render needs at least one series");
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_lo = ys.iter().cloned().fold(0.0, f64::min).floor();
    let y_hi = ceiling_db;
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let y_span = if y_hi > y_lo { y_hi - y_lo } else { 1.0 };

    let px = |v: f64| LEFT + (v - x_lo) / x_span * (RIGHT - LEFT);
    let py = |v: f64| BOTTOM - (v - y_lo) / y_span * (BOTTOM - TOP);

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    ));
    svg.push('\n');
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{:.2}" y="22" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        xml_escape(title)
    ));
    svg.push('\n');

    // axes
    svg.push_str(&format!(
        r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}" stroke="black"/>"#
    ));
    svg.push_str(&format!(
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}" stroke="black"/>"#
    ));
    svg.push('\n');
    for t in nice_ticks(x_lo, x_hi, 8) {
        let x = px(t);
        svg.push_str(&format!(
            r#"<line x1="{x:.2}" y1="{BOTTOM}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            BOTTOM + 5.0
        ));
        svg.push_str(&format!(
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            BOTTOM + 20.0,
            format_tick(t)
        ));
        svg.push('\n');
    }
    for t in nice_ticks(y_lo, y_hi, 7) {
        let y = py(t);
        svg.push_str(&format!(
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        ));
        svg.push_str(&format!(
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 9.0,
            y + 4.0,
            format_tick(t)
        ));
        svg.push('\n');
    }
    svg.push_str(&format!(
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">total bits</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 45.0
    ));
    svg.push_str(&format!(
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">mean RSNR (dB)</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    ));
    svg.push('\n');

    // series
    for s in series {
        let color = series_color(&s.algorithm);
        let pts: Vec<String> =
            s.points.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        svg.push_str(&format!(
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        ));
        svg.push('\n');
        for (x, y) in &s.points {
            svg.push_str(&marker(px(*x), py(*y), s.bit_depth, color));
            svg.push('\n');
        }
    }

    // legend
    let legend_x = RIGHT + 20.0;
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 14.0 + i as f64 * 22.0;
        let color = series_color(&s.algorithm);
        svg.push_str(&marker(legend_x, y - 4.0, s.bit_depth, color));
        svg.push_str(&format!(
            r#"<text x="{:.2}" y="{y:.2}" font-family="sans-serif" font-size="13">{} B={}</text>"#,
            legend_x + 12.0,
            xml_escape(&s.algorithm),
            s.bit_depth
        ));
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v == v.trunc() {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: &str, b: u32, tb: u64, mean: f64) -> SummaryRow {
        SummaryRow {
            algorithm: alg.into(),
            bit_depth: b,
            total_bits: tb,
            m: (tb / b as u64) as usize,
            n: 100,
            k: 5,
            isnr_db: f64::INFINITY,
            corruption: 0.0,
            trials: 20,
            mean_rsnr_db: mean,
            stderr_rsnr_db: 0.5,
            mean_iterations: 100.0,
            mean_mismatch: 2.0,
        }
    }

    #[test]
    fn build_series_groups_sorts_and_clips() {
        let rows = vec![
            row("qsp", 2, 2000, 20.0),
            row("qiht", 1, 2000, f64::INFINITY),
            row("qiht", 1, 1000, 75.0),
            row("qsp", 2, 1000, 10.0),
        ];
        let series = build_series(&rows, 60.0);
        assert_eq!(series.len(), 2);
        assert_eq!(series[0].algorithm, "qiht"); // family order first
        assert_eq!(series[0].points, vec![(1000.0, 60.0), (2000.0, 60.0)]); // clipped
        assert_eq!(series[1].points, vec![(1000.0, 10.0), (2000.0, 20.0)]);
    }

    #[test]
    fn colors_follow_the_legend_convention() {
        assert_eq!(series_color("qiht"), "red");
        assert_eq!(series_color("aop-qiht"), "magenta");
        assert_eq!(series_color("qcosamp"), "green");
        assert_eq!(series_color("qsp"), "blue");
        assert_eq!(series_color("mystery"), "gray");
    }

    #[test]
    fn markers_change_shape_with_bit_depth() {
        assert!(marker(10.0, 10.0, 1, "red").starts_with("<circle"));
        assert!(marker(10.0, 10.0, 2, "red").starts_with("<rect"));
        assert!(marker(10.0, 10.0, 3, "red").starts_with("<polygon"));
        let star = marker(10.0, 10.0, 4, "red");
        assert!(star.starts_with("<polygon"));
        assert_eq!(star.matches(',').count(), 10, "five-point star has ten vertices");
    }

    #[test]
    fn render_is_deterministic_and_draws_each_series() {
        let rows =
            vec![row("qiht", 1, 1000, 12.0), row("qiht", 1, 2000, 16.0), row("qsp", 4, 1000, 8.0)];
        let series = build_series(&rows, 60.0);
        let a = render(&series, 60.0, "test chart");
        let b = render(&series, 60.0, "test chart");
        assert_eq!(a, b);
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(a.contains("stroke=\"red\""));
        assert!(a.contains("stroke=\"blue\""));
        assert!(a.contains("qiht B=1"));
        assert!(a.contains("test chart"));
        assert!(a.starts_with("<svg "));
        assert!(a.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn ticks_cover_the_range_with_round_steps() {
        let t = nice_ticks(0.0, 60.0, 7);
        assert_eq!(t, vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
        let t = nice_ticks(500.0, 10000.0, 8);
        assert!(t.len() >= 4 && t.len() <= 9, "{t:?}");
        assert!(t.iter().all(|v| v % 500.0 == 0.0 || v % 1000.0 == 0.0), "{t:?}");
    }
}
