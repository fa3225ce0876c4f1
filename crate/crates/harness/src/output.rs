//! CSV and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ris_core::Variant;

use crate::spec::SweepAxis;
use crate::sweep::{ResultRow, RowStatus};

pub const CSV_HEADER: [&str; 10] = [
    "axis",
    "value",
    "algorithm",
    "seed",
    "rate_bps_hz",
    "nmse",
    "channel_power",
    "iterations",
    "wall_time_ms",
    "status",
];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: row {row}: {message}")]
    Parse { path: PathBuf, row: usize, message: String },
    #[error("rows mix sweep axes `{0}` and `{1}`")]
    MixedAxes(&'static str, &'static str),
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn record(row: &ResultRow) -> [String; 10] {
    [
        row.axis.name().to_string(),
        format_real(row.value),
        row.algorithm.name().to_string(),
        row.seed.to_string(),
        format_real(row.rate),
        format_real(row.nmse),
        format_real(row.channel_power),
        row.iterations.to_string(),
        row.wall_time_ms.map(format_real).unwrap_or_default(),
        row.status.label().to_string(),
    ]
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(record(row)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<(), OutputError> {
    fs::write(path, csv_string(rows)).map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

/// Reads a file written by [`write_csv`]. Failure messages and channel
/// checksums are not stored, so they come back empty.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, OutputError> {
    let err = |row: usize, message: String| OutputError::Parse { path: path.to_path_buf(), row, message };
    let mut r = csv::Reader::from_path(path).map_err(|source| OutputError::Csv { path: path.to_path_buf(), source })?;
    let headers = r.headers().map_err(|source| OutputError::Csv { path: path.to_path_buf(), source })?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(err(0, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|source| OutputError::Csv { path: path.to_path_buf(), source })?;
        let real = |j: usize| -> Result<f64, OutputError> {
            match &rec[j] {
                "" => Ok(f64::NAN),
                s => s.parse().map_err(|_| err(i + 1, format!("bad number `{s}` in `{}`", CSV_HEADER[j]))),
            }
        };
        let int = |j: usize| -> Result<u64, OutputError> {
            rec[j].parse().map_err(|_| err(i + 1, format!("bad integer `{}` in `{}`", &rec[j], CSV_HEADER[j])))
        };
        rows.push(ResultRow {
            axis: SweepAxis::parse(&rec[0]).ok_or_else(|| err(i + 1, format!("unknown axis `{}`", &rec[0])))?,
            value: real(1)?,
            algorithm: Variant::parse(&rec[2]).ok_or_else(|| err(i + 1, format!("unknown algorithm `{}`", &rec[2])))?,
            seed: int(3)?,
            rate: real(4)?,
            nmse: real(5)?,
            channel_power: real(6)?,
            iterations: int(7)? as usize,
            wall_time_ms: Some(real(8)?).filter(|x| !x.is_nan()),
            status: match &rec[9] {
                "ok" => RowStatus::Ok,
                "max_outer" => RowStatus::MaxOuter,
                "failed" => RowStatus::Failed(String::new()),
                s => return Err(err(i + 1, format!("unknown status `{s}`"))),
            },
            channel_checksum: 0,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rate,
    Nmse,
    ChannelPower,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Rate, Metric::Nmse, Metric::ChannelPower];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Rate => "rate_bps_hz",
            Metric::Nmse => "nmse",
            Metric::ChannelPower => "channel_power",
        }
    }

    fn of(self, row: &ResultRow) -> f64 {
        match self {
            Metric::Rate => row.rate,
            Metric::Nmse => row.nmse,
            Metric::ChannelPower => row.channel_power,
        }
    }
}

/// Seed mean and standard error of a metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub value: f64,
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

/// Per-algorithm summaries in order of first appearance, skipping failed rows.
pub fn summarize(rows: &[ResultRow], metric: Metric) -> Vec<(Variant, Vec<Summary>)> {
    let mut series: Vec<(Variant, Vec<(f64, Vec<f64>)>)> = Vec::new();
    for row in rows.iter().filter(|r| !r.status.is_failed()) {
        let idx = match series.iter().position(|(a, _)| *a == row.algorithm) {
            Some(i) => i,
            None => {
                series.push((row.algorithm, Vec::new()));
                series.len() - 1
            }
        };
        let points = &mut series[idx].1;
        match points.iter_mut().find(|(v, _)| *v == row.value) {
            Some((_, xs)) => xs.push(metric.of(row)),
            None => points.push((row.value, vec![metric.of(row)])),
        }
    }
    series
        .into_iter()
        .map(|(a, mut points)| {
            points.sort_by(|p, q| p.0.total_cmp(&q.0));
            let summaries = points
                .into_iter()
                .map(|(value, xs)| {
                    let n = xs.len() as f64;
                    let mean = xs.iter().sum::<f64>() / n;
                    let var = if xs.len() > 1 {
                        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
                    } else {
                        0.0
                    };
                    Summary { value, mean, std_err: (var / n).sqrt(), count: xs.len() }
                })
                .collect();
            (a, summaries)
        })
        .collect()
}

const PALETTE: [&str; 4] = ["#1b6ca8", "#d1495b", "#2e933c", "#8d6a9f"];

/// Static SVG with one series per algorithm: seed mean against the sweep
/// value, with standard-error bars.
pub fn render_plot_svg(rows: &[ResultRow], metric: Metric) -> Result<String, OutputError> {
    if let Some(first) = rows.first() {
        if let Some(other) = rows.iter().find(|r| r.axis != first.axis) {
            return Err(OutputError::MixedAxes(first.axis.name(), other.axis.name()));
        }
    }
    let axis_name = rows.first().map(|r| r.axis.name()).unwrap_or("value");
    let series = summarize(rows, metric);

    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 20.0, 50.0);
    let points = series.iter().flat_map(|(_, s)| s.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.value);
        x1 = x1.max(p.value);
        y0 = y0.min(p.mean - p.std_err);
        y1 = y1.max(p.mean + p.std_err);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        (x0, x1) = (x0 - 1.0, x1 + 1.0);
    }
    if y1 - y0 <= 0.0 {
        let pad = y0.abs().max(1.0) * 0.1;
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t}V{b}H{r}" fill="none" stroke="black"/>"#,
        l = left,
        t = top,
        b = h - bottom,
        r = w - right
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#, sx(fx), h - bottom + 16.0, tick(fx));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, left - 6.0, sy(fy) + 4.0, tick(fy));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{axis_name}</text>"#, (left + w - right) / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0,
        metric.name()
    );
    for (i, (alg, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="series" data-algorithm="{}" stroke="{color}" fill="{color}">"#, alg.name());
        if pts.len() > 1 {
            let d: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.value), sy(p.mean))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none"/>"#, d.join(" "));
        }
        for p in pts {
            let (x, y) = (sx(p.value), sy(p.mean));
            if p.std_err > 0.0 {
                let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, sy(p.mean - p.std_err), sy(p.mean + p.std_err));
            }
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{ly:.2}" r="4"/>"#, w - right + 16.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12" stroke="none">{}</text>"#, w - right + 26.0, ly + 4.0, alg.name());
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{v:.2}")
    } else {
        format!("{v:.1e}")
    }
}

pub fn render_plot(rows: &[ResultRow], metric: Metric, path: &Path) -> Result<(), OutputError> {
    let svg = render_plot_svg(rows, metric)?;
    fs::write(path, svg).map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}
