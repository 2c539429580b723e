//! Static line plots of the merged experiment table. The picture depends on
//! the CSV text alone, so plots can be redrawn from saved tables.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_Y: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Default)]
struct Series {
    points: Vec<(f64, f64)>,
    band: Vec<(f64, f64, f64)>,
}

fn key_label(series: &str, lambda: &str, s: &str) -> String {
    let mut label = series.to_string();
    if !lambda.is_empty() {
        label.push_str(&format!(" λ={lambda}"));
    }
    if !s.is_empty() {
        label.push_str(&format!(" s={s}"));
    }
    label
}

fn parse(csv_text: &str) -> Result<BTreeMap<String, Series>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let mut out: BTreeMap<String, Series> = BTreeMap::new();
    for record in reader.records() {
        let r = record?;
        if r.len() != 8 {
            return Err(Error::Config(format!(
                "merged table row has {} fields",
                r.len()
            )));
        }
        let num = |k: usize| -> Result<f64> {
            r[k].parse()
                .map_err(|_| Error::Config(format!("bad number `{}` in merged table", &r[k])))
        };
        let entry = out.entry(key_label(&r[4], &r[1], &r[2])).or_default();
        let (t, v) = (num(3)?, num(5)?);
        entry.points.push((t, v));
        if !r[6].is_empty() {
            entry.band.push((t, num(6)?, num(7)?));
        }
    }
    Ok(out)
}

/// Renders the merged table as an SVG document.
pub fn render(csv_text: &str, title: &str) -> Result<String> {
    let series = parse(csv_text)?;
    let t_max = series
        .values()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .fold(1.0f64, f64::max);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let x = |t: f64| MARGIN_LEFT + plot_w * t / t_max;
    let y = |v: f64| MARGIN_Y + plot_h * (1.0 - v.clamp(0.0, 1.0));

    let mut svg = String::new();
    // writing into a String cannot fail
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            MARGIN_LEFT - 6.0,
            y(v) + 4.0
        );
        let t = t_max * v;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{t:.0}</text>"#,
            x(t),
            HEIGHT - MARGIN_Y + 16.0
        );
    }
    for (idx, (label, s)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if !s.band.is_empty() {
            let upper = s
                .band
                .iter()
                .map(|&(t, _, hi)| format!("{:.2},{:.2}", x(t), y(hi)));
            let lower = s
                .band
                .iter()
                .rev()
                .map(|&(t, lo, _)| format!("{:.2},{:.2}", x(t), y(lo)));
            let pts: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" ")
            );
        }
        let dash = if s.band.is_empty() {
            ""
        } else {
            r#" stroke-dasharray="5,3""#
        };
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(t, v)| format!("{:.2},{:.2}", x(t), y(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_Y + 16.0 * idx as f64 + 8.0;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "preset,lambda,s,t,series,value,ci_lo,ci_hi\n\
        p,1,1,0,empirical,0,0,0.1\n\
        p,1,1,1,empirical,0.5,0.4,0.6\n\
        p,,,0,lower_linear,0,,\n\
        p,,,1,lower_linear,0.45,,\n";

    #[test]
    fn one_polyline_per_series() {
        let svg = render(TABLE, "demo").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert!(svg.contains("empirical λ=1 s=1"));
    }

    #[test]
    fn same_table_same_picture() {
        assert_eq!(render(TABLE, "a").unwrap(), render(TABLE, "a").unwrap());
    }

    #[test]
    fn malformed_number_rejected() {
        let bad = TABLE.replace("0.45", "x");
        assert!(render(&bad, "a").is_err());
    }
}
