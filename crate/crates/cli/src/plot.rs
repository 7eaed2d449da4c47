//! Polyline SVG rendering of CSV series: first column is `x`, every other column a series.

use std::fmt::Write;

use crate::error::CliError;
use crate::table::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn collect_series(table: &Table, loglog: bool) -> Result<Vec<Series>, CliError> {
    if table.headers.len() < 2 {
        return Err(CliError::Config(
            "plot needs an x column and at least one series".into(),
        ));
    }
    let keep = |v: f64| v.is_finite() && (!loglog || v > 0.0);
    let map = |v: f64| if loglog { v.log10() } else { v };
    let mut series: Vec<Series> = table.headers[1..]
        .iter()
        .map(|h| Series {
            name: h.clone(),
            points: Vec::new(),
        })
        .collect();
    for row in &table.rows {
        // trailing non-numeric rows (such as a `total` marker) are skipped
        let Some(x) = row.first().and_then(|v| v.parse::<f64>().ok()) else {
            continue;
        };
        if !keep(x) {
            continue;
        }
        for (s, cell) in series.iter_mut().zip(&row[1..]) {
            if let Ok(y) = cell.parse::<f64>() {
                if keep(y) {
                    s.points.push((map(x), map(y)));
                }
            }
        }
    }
    series.retain(|s| !s.points.is_empty());
    if series.is_empty() {
        return Err(CliError::Config("no plottable points".into()));
    }
    Ok(series)
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render_svg(table: &Table, loglog: bool) -> Result<String, CliError> {
    let series = collect_series(table, loglog)?;
    let (x0, x1) = span(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = span(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let label = |axis: &str| {
        if loglog {
            format!("log10 {axis}")
        } else {
            axis.to_string()
        }
    };
    let x_name = label(&table.headers[0]);
    let y_name = label(
        &series
            .iter()
            .map(|s| s.name.as_str())
            .collect::<Vec<_>>()
            .join(", "),
    );

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&x_name)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&y_name)
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="11">{x:.4}</text>"#,
            px(x),
            bottom + 16.0
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{y:.4}</text>"#,
            left - 4.0,
            py(y) + 4.0
        );
    }
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{:.3},{:.3}", px(*x), py(*y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline data-series="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            escape(&s.name),
            COLORS[i % COLORS.len()],
            pts.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(headers: &[&str], rows: &[&[&str]]) -> Table {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn one_polyline_per_series() {
        let t = table(
            &["t", "a", "b"],
            &[&["1", "2", "3"], &["2", "1", "0.5"], &["total", "0", "0"]],
        );
        let svg = render_svg(&t, false).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">t</text>"));
    }

    #[test]
    fn loglog_drops_nonpositive() {
        let t = table(&["n", "s_n"], &[&["0", "1"], &["1", "0.5"], &["2", "0"]]);
        let svg = render_svg(&t, true).unwrap();
        assert!(svg.contains("log10 n"));
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        // n = 0 and s = 0 are both dropped, leaving a single point
        assert_eq!(poly.matches(',').count(), 1);
        assert!(render_svg(&table(&["x"], &[&["1"]]), false).is_err());
    }
}
