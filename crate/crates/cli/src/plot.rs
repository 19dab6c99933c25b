//! Plain-text SVG rendering of simulation CSVs.

use std::fmt::Write as _;

use crate::args::Metric;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlotError {
    #[error("CSV: {0}")]
    Csv(String),
    #[error("missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("row {row}: invalid {column} value {value:?}")]
    BadValue {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("no data rows to plot")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub decoder: String,
    pub n: String,
    pub k: String,
    pub construction: String,
    pub list: String,
    pub iters_max: String,
    pub ebn0_db: f64,
    pub ber: f64,
    pub bler: f64,
}

impl Row {
    fn series_label(&self) -> String {
        let code = match self.construction.as_str() {
            "rm_polar" => format!("P_RM({},{})", self.n, self.k),
            _ => format!("P({},{})", self.n, self.k),
        };
        let mut label = self.decoder.clone();
        if matches!(self.decoder.as_str(), "scl" | "scl-crc" | "bpl") {
            write!(label, " L={}", self.list).unwrap();
        }
        if matches!(self.decoder.as_str(), "bp" | "bpl") {
            write!(label, " it={}", self.iters_max).unwrap();
        }
        format!("{label} {code}")
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<Row>, PlotError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| PlotError::Csv(e.to_string()))?
        .clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(PlotError::MissingColumn(name))
    };
    let idx = [
        col("decoder")?,
        col("N")?,
        col("k")?,
        col("construction")?,
        col("list")?,
        col("iters_max")?,
        col("ebn0_db")?,
        col("ber")?,
        col("bler")?,
    ];
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| PlotError::Csv(e.to_string()))?;
        let field = |j: usize| record.get(idx[j]).unwrap_or("").to_string();
        let number = |j: usize, column: &'static str| {
            field(j).trim().parse::<f64>().map_err(|_| PlotError::BadValue {
                row: i + 1,
                column,
                value: field(j),
            })
        };
        rows.push(Row {
            decoder: field(0),
            n: field(1),
            k: field(2),
            construction: field(3),
            list: field(4),
            iters_max: field(5),
            ebn0_db: number(6, "ebn0_db")?,
            ber: number(7, "ber")?,
            bler: number(8, "bler")?,
        });
    }
    Ok(rows)
}

struct Series {
    label: String,
    dashed: bool,
    color: usize,
    points: Vec<(f64, f64)>,
}

fn collect_series(rows: &[Row], metric: Metric) -> Vec<Series> {
    let mut keys: Vec<String> = Vec::new();
    for r in rows {
        let key = r.series_label();
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let metrics: &[(&str, bool)] = match metric {
        Metric::Ber => &[("BER", true)],
        Metric::Bler => &[("BLER", false)],
        Metric::Both => &[("BLER", false), ("BER", true)],
    };
    let mut series = Vec::new();
    for (color, key) in keys.iter().enumerate() {
        for &(name, is_ber) in metrics {
            let mut points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| &r.series_label() == key)
                .map(|r| (r.ebn0_db, if is_ber { r.ber } else { r.bler }))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            series.push(Series {
                label: format!("{key} {name}"),
                dashed: is_ber,
                color,
                points,
            });
        }
    }
    series
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// SVG with log-scale error rate against Eb/N0; zero error rates are left out.
pub fn render(rows: &[Row], metric: Metric, title: Option<&str>) -> Result<String, PlotError> {
    if rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let series = collect_series(rows, metric);
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        x_lo = x_lo.min(r.ebn0_db);
        x_hi = x_hi.max(r.ebn0_db);
    }
    if x_hi - x_lo < 1e-9 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let positive: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|v| *v > 0.0 && v.is_finite())
        .collect();
    let (dec_lo, dec_hi) = if positive.is_empty() {
        (-6, 0)
    } else {
        let lo = positive.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = positive.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut a = lo.log10().floor() as i32;
        let b = (hi.log10().ceil() as i32).max(a + 1);
        if a == b {
            a -= 1;
        }
        (a, b)
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let py = |y: f64| TOP + (dec_hi as f64 - y.log10()) / (dec_hi - dec_lo) as f64 * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#,
        W = WIDTH,
        H = HEIGHT
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if let Some(t) = title {
        writeln!(
            s,
            r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
            fmt_num(LEFT + pw / 2.0),
            escape(t)
        )
        .unwrap();
    }
    // decade grid and labels
    for d in dec_lo..=dec_hi {
        let y = fmt_num(py(10f64.powi(d)));
        writeln!(
            s,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd"/>"##,
            fmt_num(LEFT),
            fmt_num(LEFT + pw)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">1e{d}</text>"#,
            fmt_num(LEFT - 6.0)
        )
        .unwrap();
    }
    let ticks = 5;
    for i in 0..=ticks {
        let xv = x_lo + (x_hi - x_lo) * i as f64 / ticks as f64;
        let x = fmt_num(px(xv));
        writeln!(
            s,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#dddddd"/>"##,
            fmt_num(TOP),
            fmt_num(TOP + ph)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            fmt_num(TOP + ph + 18.0),
            fmt_num(xv)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt_num(LEFT),
        fmt_num(TOP),
        fmt_num(pw),
        fmt_num(ph)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Eb/N0 (dB)</text>"#,
        fmt_num(LEFT + pw / 2.0),
        fmt_num(HEIGHT - 15.0)
    )
    .unwrap();
    let y_label = match metric {
        Metric::Ber => "BER",
        Metric::Bler => "BLER",
        Metric::Both => "BER / BLER",
    };
    writeln!(
        s,
        r#"<text x="20" y="{y}" text-anchor="middle" transform="rotate(-90 20 {y})">{y_label}</text>"#,
        y = fmt_num(TOP + ph / 2.0)
    )
    .unwrap();

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[ser.color % COLORS.len()];
        let dash = if ser.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let pts: Vec<(String, String)> = ser
            .points
            .iter()
            .filter(|p| p.1 > 0.0 && p.1.is_finite())
            .map(|&(x, y)| (fmt_num(px(x)), fmt_num(py(y))))
            .collect();
        writeln!(s, r#"<g class="series" data-label="{}">"#, escape(&ser.label)).unwrap();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x},{y}")).collect();
            writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                path.join(" ")
            )
            .unwrap();
        }
        for (x, y) in &pts {
            writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#).unwrap();
        }
        writeln!(s, "</g>").unwrap();

        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 14.0;
        writeln!(
            s,
            r#"<line class="legend" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            fmt_num(lx),
            fmt_num(ly),
            fmt_num(lx + 24.0),
            fmt_num(ly)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" dominant-baseline="middle">{}</text>"#,
            fmt_num(lx + 30.0),
            fmt_num(ly),
            escape(&ser.label)
        )
        .unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    Ok(s)
}
