//! Minimal static line plots. Plots are conveniences; the CSV files stay the
//! source of truth.

use std::fmt::Write as _;

use crate::output::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Renders `ys` against `x`. With `log_x` the non-positive abscissae are
/// dropped.
pub fn line_plot(table: &Table, x: &str, ys: &[String], log_x: bool) -> Option<String> {
    let xs = table.column(x)?;
    let series: Vec<(&String, Vec<f64>)> = ys.iter().filter_map(|y| Some((y, table.column(y)?))).collect();
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let keep: Vec<usize> = (0..xs.len()).filter(|&k| !log_x || xs[k] > 0.0).collect();
    let (x0, x1) = bounds(keep.iter().map(|&k| tx(xs[k])));
    let (y0, y1) = bounds(series.iter().flat_map(|(_, v)| keep.iter().map(move |&k| v[k])));
    let px = |v: f64| MARGIN + (tx(v) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let xlabel = if log_x { format!("log10 {x}") } else { x.to_string() };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}">{x0:.3} .. {x1:.3}</text>"#, HEIGHT - 36.0);
    let _ = writeln!(s, r#"<text x="4" y="{}">{y1:.3e}</text>"#, MARGIN);
    let _ = writeln!(s, r#"<text x="4" y="{}">{y0:.3e}</text>"#, HEIGHT - MARGIN);
    for (i, (name, v)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = keep
            .iter()
            .filter(|&&k| v[k].is_finite())
            .map(|&k| format!("{:.2},{:.2}", px(xs[k]), py(v[k])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            WIDTH - MARGIN + 4.0 - 120.0,
            MARGIN + 16.0 * (i as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Cell;

    #[test]
    fn renders_one_polyline_per_series() {
        let mut t = Table::new("t", &["l", "a", "b"]);
        for k in 0..5 {
            let l = k as f64;
            t.push(vec![Cell::Num(l), Cell::Num(l * l), Cell::Num(-l)]);
        }
        let svg = line_plot(&t, "l", &["a".into(), "b".into()], false).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(line_plot(&t, "missing", &[], false).is_none());
        let log = line_plot(&t, "l", &["a".into()], true).unwrap();
        assert_eq!(log.matches(',').count(), 4);
    }
}
