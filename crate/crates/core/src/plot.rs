//! Static SVG line charts from numeric CSV tables.
//!
//! The first column is the abscissa; every further column is one series.
//! Empty or non-finite cells leave a gap in their series.

use std::fmt::Write as _;
use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// Runs of consecutive finite points; a gap starts a new run.
    pub runs: Vec<Vec<(f64, f64)>>,
}

impl Series {
    fn points(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.runs.iter().flatten()
    }
}

/// Parses a headed CSV of numbers into series named after the header;
/// `label` prefixes the names when several files share a chart.
pub fn read_series<R: Read>(input: R, label: Option<&str>) -> Result<(String, Vec<Series>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = match rdr.headers() {
        Ok(h) => h.iter().map(|s| s.trim().to_string()).collect(),
        Err(e) => return Err(csv_error(e)),
    };
    if header.iter().all(|h| h.is_empty()) {
        return Ok((String::new(), Vec::new()));
    }
    let x_name = header[0].clone();
    let mut series: Vec<Series> = header[1..]
        .iter()
        .map(|h| Series {
            name: match label {
                Some(l) => format!("{l}: {h}"),
                None => h.clone(),
            },
            runs: vec![Vec::new()],
        })
        .collect();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let cell = |i: usize| -> Result<Option<f64>> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(|v| v.is_finite().then_some(v))
                .map_err(|_| Error::Parse { line, msg: format!("{s:?} is not a number") })
        };
        let Some(x) = cell(0)? else {
            return Err(Error::Parse { line, msg: "missing abscissa".into() });
        };
        for (j, s) in series.iter_mut().enumerate() {
            let run = s.runs.last_mut().expect("at least one run");
            match cell(j + 1)? {
                Some(y) => run.push((x, y)),
                None if !run.is_empty() => s.runs.push(Vec::new()),
                None => {}
            }
        }
    }
    for s in &mut series {
        s.runs.retain(|r| !r.is_empty());
    }
    Ok((x_name, series))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            log_x: false,
            width: 720.0,
            height: 450.0,
        }
    }
}

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Round tick positions covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let d = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - d, hi + d)
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e5 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the series as an SVG document. With no points the axes span `[0, 1]`.
pub fn render_svg(series: &[Series], opts: &PlotOptions) -> String {
    let tx = |x: f64| if opts.log_x { x.log10() } else { x };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points())
        .filter(|(x, _)| !opts.log_x || *x > 0.0)
        .map(|&(x, y)| (tx(x), y))
        .collect();
    let (x0, x1, y0, y1) = if pts.is_empty() {
        (0.0, 1.0, 0.0, 1.0)
    } else {
        let fold = |f: fn(&(f64, f64)) -> f64| {
            pts.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        };
        let (xa, xb) = padded(fold(|p| p.0).0, fold(|p| p.0).1);
        let (ya, yb) = padded(fold(|p| p.1).0, fold(|p| p.1).1);
        (xa, xb, ya, yb)
    };
    let (w, h) = (opts.width, opts.height);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 55.0);
    let pw = w - ml - mr;
    let ph = h - mt - mb;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if !opts.title.is_empty() {
        let _ = writeln!(
            o,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            w / 2.0,
            escape(&opts.title)
        );
    }
    let _ = writeln!(
        o,
        r#"<rect class="axes" x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(x0, x1, 6) {
        let px = sx(t);
        let label = if opts.log_x { format!("1e{}", fmt_tick(t)) } else { fmt_tick(t) };
        let _ = writeln!(
            o,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ccc"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            mt,
            mt + ph,
            mt + ph + 16.0
        );
    }
    for t in nice_ticks(y0, y1, 6) {
        let py = sy(t);
        let _ = writeln!(
            o,
            r##"<line x1="{ml}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            ml + pw,
            ml - 6.0,
            py + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        h - 12.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        o,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(&opts.y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for run in &s.runs {
            let path: Vec<String> = run
                .iter()
                .filter(|(x, _)| !opts.log_x || *x > 0.0)
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(tx(x)), sy(y)))
                .collect();
            if path.is_empty() {
                continue;
            }
            let _ = writeln!(
                o,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = mt + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            o,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ml + 10.0,
            ml + 30.0,
            ml + 36.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    o.push_str("</svg>\n");
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_axes_only() {
        let (_, s) = read_series("".as_bytes(), None).unwrap();
        assert!(s.is_empty());
        let svg = render_svg(&s, &PlotOptions::default());
        assert!(svg.starts_with("<svg") && svg.contains("class=\"axes\""));
        assert!(!svg.contains("polyline"));
        let (_, s) = read_series("t,lnPsi\n".as_bytes(), None).unwrap();
        assert_eq!(s.len(), 1);
        assert!(!render_svg(&s, &PlotOptions::default()).contains("polyline"));
    }

    #[test]
    fn reports_line_of_bad_cell() {
        let text = "x,a\n1,2\n2,3\n3,oops\n";
        match read_series(text.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let ragged = "x,a\n1,2\n2,3,4\n";
        match read_series(ragged.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gaps_split_runs() {
        let text = "x,a,b\n1,1,\n2,2,5\n3,,6\n4,4,7\n5,5,inf\n";
        let (x, s) = read_series(text.as_bytes(), Some("f")).unwrap();
        assert_eq!(x, "x");
        assert_eq!(s[0].name, "f: a");
        assert_eq!(s[0].runs, vec![vec![(1.0, 1.0), (2.0, 2.0)], vec![(4.0, 4.0), (5.0, 5.0)]]);
        assert_eq!(s[1].runs, vec![vec![(2.0, 5.0), (3.0, 6.0), (4.0, 7.0)]]);
        let svg = render_svg(&s, &PlotOptions { log_x: true, ..Default::default() });
        assert_eq!(svg.matches("<polyline").count(), 3);
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(nice_ticks(0.0, 1.0, 5), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        let t = nice_ticks(-123.0, 17.0, 6);
        assert_eq!(t, vec![-100.0, -50.0, 0.0]);
    }
}
