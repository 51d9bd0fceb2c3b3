use super::run::{csv_error, DIAGNOSTICS_FILE, SNAPSHOT_DIR, SNAPSHOT_INDEX_FILE};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const PROFILE_PLOT: &str = "profile.svg";
pub const SUP_UX_PLOT: &str = "sup_ux.svg";
pub const SUP_UXX_PLOT: &str = "sup_uxx.svg";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// Named numeric columns of a CSV file.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "series file is missing"),
            ));
        }
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let row = rec
                .iter()
                .map(|v| v.parse::<f64>().unwrap_or(f64::NAN))
                .collect();
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    fn column(&self, name: &str, path: &Path) -> Result<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: format!("missing column `{name}`"),
        })?;
        Ok(self.rows.iter().map(|r| r.get(idx).copied().unwrap_or(f64::NAN)).collect())
    }
}

struct Series {
    label: String,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Colour for the `i`-th of `n` curves, blue to red.
fn colour(i: usize, n: usize) -> String {
    let s = if n <= 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    let r = (40.0 + 190.0 * s).round() as u8;
    let b = (200.0 - 170.0 * s).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = finite_range(series.iter().flat_map(|s| s.xs.iter().copied()));
    let (y0, y1) = finite_range(series.iter().flat_map(|s| s.ys.iter().copied()));
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 5.0,
            MARGIN_TOP + ph + 18.0,
            tick(fx)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let points: Vec<String> = s
            .xs
            .iter()
            .zip(&s.ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let c = colour(i, series.len());
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{c}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&s.label)
        );
    }
    if series.len() > 1 {
        let first = &series[0].label;
        let last = &series[series.len() - 1].label;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" fill="{}">{}</text><text x="{:.1}" y="{:.1}" text-anchor="end" fill="{}">{}</text>"#,
            WIDTH - MARGIN_RIGHT - 6.0,
            MARGIN_TOP + 16.0,
            colour(0, series.len()),
            escape(first),
            WIDTH - MARGIN_RIGHT - 6.0,
            MARGIN_TOP + 30.0,
            colour(series.len() - 1, series.len()),
            escape(last)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `profile.svg` (profile overlay at the snapshot times), `sup_ux.svg`
/// and `sup_uxx.svg` into `run_dir`. Output depends only on the series files.
pub fn emit_plots(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let diag_path = run_dir.join(DIAGNOSTICS_FILE);
    let diag = Table::read(&diag_path)?;
    let time = diag.column("time", &diag_path)?;
    let sup_ux = diag.column("sup_ux", &diag_path)?;
    let sup_uxx = diag.column("sup_uxx", &diag_path)?;

    let index_path = run_dir.join(SNAPSHOT_INDEX_FILE);
    let mut reader = csv::Reader::from_path(&index_path).map_err(|e| csv_error(&index_path, e))?;
    let mut profiles = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(&index_path, e))?;
        let file = rec.get(0).unwrap_or_default();
        let t: f64 = rec.get(1).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN);
        let snap_path = run_dir.join(SNAPSHOT_DIR).join(file);
        let snap = Table::read(&snap_path)?;
        profiles.push(Series {
            label: format!("t = {t:.3}"),
            xs: snap.column("x", &snap_path)?,
            ys: snap.column("u", &snap_path)?,
        });
    }
    if profiles.is_empty() {
        return Err(Error::Parse {
            path: index_path,
            message: "no snapshots listed".into(),
        });
    }

    let outputs = [
        (PROFILE_PLOT, line_plot("Profile evolution", "x", "u", &profiles)),
        (
            SUP_UX_PLOT,
            line_plot(
                "max |u_x|",
                "t",
                "max |u_x|",
                &[Series {
                    label: "sup_ux".into(),
                    xs: time.clone(),
                    ys: sup_ux,
                }],
            ),
        ),
        (
            SUP_UXX_PLOT,
            line_plot(
                "max |u_xx|",
                "t",
                "max |u_xx|",
                &[Series {
                    label: "sup_uxx".into(),
                    xs: time,
                    ys: sup_uxx,
                }],
            ),
        ),
    ];
    let mut written = Vec::new();
    for (name, svg) in outputs {
        let path = run_dir.join(name);
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
