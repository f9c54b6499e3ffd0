//! Static SVG plots of the sweep CSV, hand-emitted for byte determinism.
//!
//! Two stacked panels: the deformed exchange term versus tau (with error
//! bars) and the total energy versus tau, one series per density
//! parameter.

use crate::report::sweep::CSV_HEADER;
use thiserror::Error;

const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Error, PartialEq)]
pub enum SvgError {
    #[error("malformed CSV at line {line}: {what}")]
    MalformedCsv { line: usize, what: String },
}

#[derive(Debug, Clone, Copy)]
struct Row {
    rs: f64,
    tau: f64,
    eps2b: f64,
    eps2b_stderr: f64,
    total: f64,
    total_stderr: f64,
}

fn parse_csv(csv: &str) -> Result<Vec<Row>, SvgError> {
    let mut lines = csv.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(SvgError::MalformedCsv {
                line: 1,
                what: format!("unexpected header `{header}`"),
            })
        }
        None => {
            return Err(SvgError::MalformedCsv {
                line: 1,
                what: "empty document".to_string(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(SvgError::MalformedCsv {
                line: line_no,
                what: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let mut parsed = [0.0f64; 9];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| SvgError::MalformedCsv {
                line: line_no,
                what: format!("`{field}` is not a number"),
            })?;
            if !slot.is_finite() {
                return Err(SvgError::MalformedCsv {
                    line: line_no,
                    what: format!("`{field}` is not finite"),
                });
            }
        }
        rows.push(Row {
            rs: parsed[0],
            tau: parsed[1],
            eps2b: parsed[5],
            eps2b_stderr: parsed[6],
            total: parsed[7],
            total_stderr: parsed[8],
        });
    }
    if rows.is_empty() {
        return Err(SvgError::MalformedCsv {
            line: 2,
            what: "no data rows".to_string(),
        });
    }
    Ok(rows)
}

/// Affine map from a data range to pixel coordinates, padding degenerate
/// ranges so single points still plot.
struct Scale {
    lo: f64,
    hi: f64,
    pix_lo: f64,
    pix_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, pix_lo: f64, pix_hi: f64) -> Scale {
        let (lo, hi) = if lo == hi {
            (lo - 0.5 - lo.abs() * 0.05, hi + 0.5 + hi.abs() * 0.05)
        } else {
            let pad = (hi - lo) * 0.06;
            (lo - pad, hi + pad)
        };
        Scale { lo, hi, pix_lo, pix_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.pix_lo + (v - self.lo) / (self.hi - self.lo) * (self.pix_hi - self.pix_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
            .collect()
    }
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.01..10_000.0).contains(&a) {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

struct Series<'a> {
    rs: f64,
    points: Vec<&'a Row>,
}

fn group_by_rs(rows: &[Row]) -> Vec<Series<'_>> {
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        match series.iter_mut().find(|s| s.rs == row.rs) {
            Some(s) => s.points.push(row),
            None => series.push(Series { rs: row.rs, points: vec![row] }),
        }
    }
    series
}

#[allow(clippy::too_many_arguments)]
fn panel(
    out: &mut String,
    series: &[Series],
    y_of: impl Fn(&Row) -> (f64, f64),
    title: &str,
    y_label: &str,
    top: f64,
) {
    let plot_left = MARGIN_LEFT;
    let plot_right = WIDTH - MARGIN_RIGHT;
    let plot_top = top + MARGIN_TOP;
    let plot_bottom = top + PANEL_HEIGHT - MARGIN_BOTTOM;

    let mut tau_min = f64::INFINITY;
    let mut tau_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for row in &s.points {
            let (y, err) = y_of(row);
            tau_min = tau_min.min(row.tau);
            tau_max = tau_max.max(row.tau);
            y_min = y_min.min(y - err);
            y_max = y_max.max(y + err);
        }
    }
    let x = Scale::new(tau_min, tau_max, plot_left, plot_right);
    let y = Scale::new(y_min, y_max, plot_bottom, plot_top);

    out.push_str(&format!(
        r#"<text x="{}" y="{}" font-family="monospace" font-size="16" text-anchor="middle">{}</text>"#,
        fmt_coord((plot_left + plot_right) / 2.0),
        fmt_coord(top + 24.0),
        title
    ));
    out.push('\n');
    // frame
    out.push_str(&format!(
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
        fmt_coord(plot_left),
        fmt_coord(plot_top),
        fmt_coord(plot_right - plot_left),
        fmt_coord(plot_bottom - plot_top)
    ));
    out.push('\n');
    // ticks and grid
    for t in x.ticks() {
        let px = x.map(t);
        out.push_str(&format!(
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#ccc" stroke-width="0.5"/>"##,
            fmt_coord(px),
            fmt_coord(plot_top),
            fmt_coord(plot_bottom)
        ));
        out.push_str(&format!(
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11" text-anchor="middle">{}</text>"#,
            fmt_coord(px),
            fmt_coord(plot_bottom + 18.0),
            fmt_tick(t)
        ));
        out.push('\n');
    }
    for t in y.ticks() {
        let py = y.map(t);
        out.push_str(&format!(
            r##"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#ccc" stroke-width="0.5"/>"##,
            fmt_coord(plot_left),
            fmt_coord(plot_right),
            fmt_coord(py)
        ));
        out.push_str(&format!(
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11" text-anchor="end">{}</text>"#,
            fmt_coord(plot_left - 6.0),
            fmt_coord(py + 4.0),
            fmt_tick(t)
        ));
        out.push('\n');
    }
    // axis labels
    out.push_str(&format!(
        r#"<text x="{}" y="{}" font-family="monospace" font-size="13" text-anchor="middle">tau</text>"#,
        fmt_coord((plot_left + plot_right) / 2.0),
        fmt_coord(plot_bottom + 40.0)
    ));
    out.push_str(&format!(
        r#"<text x="{}" y="{}" font-family="monospace" font-size="13" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
        fmt_coord(plot_left - 64.0),
        fmt_coord((plot_top + plot_bottom) / 2.0),
        fmt_coord(plot_left - 64.0),
        fmt_coord((plot_top + plot_bottom) / 2.0),
        y_label
    ));
    out.push('\n');

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        // error bars
        for row in &s.points {
            let (v, err) = y_of(row);
            if err > 0.0 {
                let px = x.map(row.tau);
                let y_lo = y.map(v - err);
                let y_hi = y.map(v + err);
                out.push_str(&format!(
                    r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="{3}" stroke-width="1"/>"#,
                    fmt_coord(px),
                    fmt_coord(y_lo),
                    fmt_coord(y_hi),
                    color
                ));
                for cap in [y_lo, y_hi] {
                    out.push_str(&format!(
                        r#"<line x1="{}" y1="{2}" x2="{}" y2="{2}" stroke="{3}" stroke-width="1"/>"#,
                        fmt_coord(px - 4.0),
                        fmt_coord(px + 4.0),
                        fmt_coord(cap),
                        color
                    ));
                }
                out.push('\n');
            }
        }
        // polyline through the series
        if s.points.len() > 1 {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|row| format!("{},{}", fmt_coord(x.map(row.tau)), fmt_coord(y.map(y_of(row).0))))
                .collect();
            out.push_str(&format!(
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                path.join(" "),
                color
            ));
            out.push('\n');
        }
        // markers
        for row in &s.points {
            out.push_str(&format!(
                r#"<circle cx="{}" cy="{}" r="2.5" fill="{}"/>"#,
                fmt_coord(x.map(row.tau)),
                fmt_coord(y.map(y_of(row).0)),
                color
            ));
        }
        out.push('\n');
        // legend entry
        let lx = plot_left + 12.0;
        let ly = plot_top + 14.0 + 18.0 * si as f64;
        out.push_str(&format!(
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#,
            fmt_coord(lx),
            fmt_coord(ly - 9.0),
            color
        ));
        out.push_str(&format!(
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12">rs = {}</text>"#,
            fmt_coord(lx + 16.0),
            fmt_coord(ly),
            crate::report::config::format_config_float(s.rs)
        ));
        out.push('\n');
    }
}

/// Render the sweep CSV as a self-contained SVG document. Identical CSV
/// input yields identical SVG bytes.
pub fn emit_svg(csv: &str) -> Result<String, SvgError> {
    let rows = parse_csv(csv)?;
    let series = group_by_rs(&rows);
    let height = 2.0 * PANEL_HEIGHT;
    let mut out = format!(
        r#"<svg version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" xmlns="http://www.w3.org/2000/svg">"#,
        WIDTH as u32, height as u32, WIDTH as u32, height as u32
    );
    out.push('\n');
    out.push_str(&format!(
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        WIDTH as u32, height as u32
    ));
    out.push('\n');
    panel(
        &mut out,
        &series,
        |row| (row.eps2b, row.eps2b_stderr),
        "second-order exchange term vs tau",
        "eps2b [Ry]",
        0.0,
    );
    panel(
        &mut out,
        &series,
        |row| (row.total, row.total_stderr),
        "total energy per electron vs tau",
        "total [Ry]",
        PANEL_HEIGHT,
    );
    out.push_str("</svg>\n");
    Ok(out)
}
