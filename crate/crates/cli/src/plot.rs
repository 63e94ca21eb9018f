use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use profilelab::experiment::{ExperimentReport, RowMeasurements};
use profilelab::{ProfileVector, Subset};

use crate::output::num;

/// One data file: a name, whitespace-separated column names and rows.
pub struct Panel {
    pub name: &'static str,
    pub title: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Panel {
    pub fn to_dat(&self) -> String {
        let mut s = format!("# {}\n", self.columns.join(" "));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| num(x)).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }

    /// Line chart of every column against the first.
    pub fn to_svg(&self) -> String {
        let series: Vec<(&str, Vec<(f64, f64)>)> = self.columns[1..]
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let pts = self
                    .rows
                    .iter()
                    .map(|r| (r[0], r[j + 1]))
                    .filter(|p| p.0.is_finite() && p.1.is_finite())
                    .collect();
                (name.as_str(), pts)
            })
            .collect();
        line_chart(self.title, &self.columns[0], &series)
    }
}

pub fn panels(report: &ExperimentReport) -> Vec<Panel> {
    let rows: Vec<(usize, &RowMeasurements)> = report
        .rows
        .iter()
        .filter_map(|r| r.measurements.as_ref().map(|m| (r.n, m)))
        .collect();
    let k = rows
        .first()
        .and_then(|(_, m)| ProfileVector::from_file(&m.median_profile).ok())
        .map_or(0, |p| p.k());

    let distance = Panel {
        name: "distance",
        title: "scaled distance to the convolution",
        columns: [
            "n",
            "distance_min",
            "distance_q25",
            "distance_median",
            "distance_q75",
            "distance_max",
            "fluctuation_median",
        ]
        .map(String::from)
        .to_vec(),
        rows: rows
            .iter()
            .map(|(n, m)| {
                vec![
                    *n as f64,
                    m.distance.min,
                    m.distance.q25,
                    m.distance.median,
                    m.distance.q75,
                    m.distance.max,
                    m.fluctuation.median,
                ]
            })
            .collect(),
    };

    let proportion = Panel {
        name: "proportion",
        title: "proportion of good encodings",
        columns: ["n", "proportion", "lower", "upper", "thm1_bound", "thm2_bound"]
            .map(String::from)
            .to_vec(),
        rows: rows
            .iter()
            .map(|(n, m)| {
                vec![
                    *n as f64,
                    m.proportion.proportion,
                    m.proportion.lower,
                    m.proportion.upper,
                    m.thm1.proportion_lower_bound,
                    m.thm2.bound.proportion_lower_bound,
                ]
            })
            .collect(),
    };

    let subsets: Vec<Subset> = if k == 0 { Vec::new() } else { Subset::all(k).skip(1).collect() };
    let mut columns = vec!["n".to_string(), "source_rate".into(), "convolution".into()];
    columns.extend(subsets.iter().map(|s| format!("median[{s}]")));
    let rate = Panel {
        name: "rate",
        title: "rates per step",
        columns,
        rows: rows
            .iter()
            .map(|(n, m)| {
                let full = |f: &profilelab::profiles::ProfileFile| {
                    ProfileVector::from_file(f).map_or(f64::NAN, |p| p.full())
                };
                let median = ProfileVector::from_file(&m.median_profile).ok();
                let mut r = vec![*n as f64, full(&m.source_rates), full(&m.convolution)];
                r.extend(subsets.iter().map(|&s| median.as_ref().map_or(f64::NAN, |p| p.get(s))));
                r
            })
            .collect(),
    };
    vec![distance, proportion, rate]
}

/// Writes `<panel>.dat` and, when asked, `<panel>.svg` into `dir`.
pub fn write_panels(report: &ExperimentReport, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for p in panels(report) {
        let dat = dir.join(format!("{}.dat", p.name));
        std::fs::write(&dat, p.to_dat())?;
        written.push(dat);
        if svg {
            let path = dir.join(format!("{}.svg", p.name));
            std::fs::write(&path, p.to_svg())?;
            written.push(path);
        }
    }
    Ok(written)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn line_chart(title: &str, x_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (60.0, 170.0, 40.0, 50.0);
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{yb}" x2="{xr}" y2="{yb}" stroke="black"/><line x1="{left}" y1="{top}" x2="{left}" y2="{yb}" stroke="black"/>"#,
        yb = h - bottom,
        xr = w - right
    );
    for (v, at) in [(x0, px(x0)), (x1, px(x1))] {
        let _ = writeln!(s, r#"<text x="{at}" y="{}" text-anchor="middle">{}</text>"#, h - bottom + 16.0, num(v));
    }
    for (v, at) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(s, r#"<text x="{}" y="{at}" text-anchor="end">{}</text>"#, left - 4.0, num(v));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (left + w - right) / 2.0,
        h - 12.0,
        escape(x_label)
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !points.is_empty() {
            let coords: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{tx}" y="{ty}">{}</text>"#,
            escape(name),
            x = w - right + 10.0,
            x2 = w - right + 30.0,
            tx = w - right + 36.0,
            ty = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
