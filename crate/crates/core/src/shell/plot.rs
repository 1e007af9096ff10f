//! Minimal SVG line plots of the output files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::io::{
    read_boundary, read_metrics, read_snapshots, BOUNDARY_FILE, METRICS_FILE, SNAPSHOT_FILE,
};
use super::sweep::{SweepSummary, SUMMARY_FILE};
use crate::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
/// Snapshot profiles drawn per figure.
const MAX_PROFILES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Series {
        Series {
            name: name.into(),
            points,
            dashed: false,
            markers: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Round tick step giving about `target` intervals over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

impl LinePlot {
    pub fn render(&self) -> String {
        let points = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = bounds(points().map(|p| p.0));
        let (mut y0, y1) = bounds(points().map(|p| p.1));
        if y0 > 0.0 && y0 < 0.25 * y1 {
            y0 = 0.0;
        }
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        let xs = tick_step(x1 - x0, 6.0);
        let mut t = (x0 / xs).ceil() * xs;
        while t <= x1 + 1e-9 * xs {
            let x = sx(t);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ccc"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
                MARGIN_TOP,
                MARGIN_TOP + ph,
                MARGIN_TOP + ph + 16.0,
                format_tick(t, xs)
            );
            t += xs;
        }
        let ys = tick_step(y1 - y0, 5.0);
        let mut t = (y0 / ys).ceil() * ys;
        while t <= y1 + 1e-9 * ys {
            let y = sy(t);
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ccc"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT,
                MARGIN_LEFT + pw,
                MARGIN_LEFT - 6.0,
                y + 4.0,
                format_tick(t, ys)
            );
            t += ys;
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{}"/>"#,
                path.join(" ")
            );
            if s.markers {
                for p in &path {
                    let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
                    let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
                }
            }
            let ly = MARGIN_TOP + 14.0 + 18.0 * k as f64;
            let lx = MARGIN_LEFT + pw + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn format_tick(v: f64, step: f64) -> String {
    if v.abs() < step * 1e-9 {
        return "0".into();
    }
    if (1.0..1e5).contains(&step) {
        format!("{v:.0}")
    } else if (1e-3..1.0).contains(&step) {
        let digits = (-step.log10()).ceil() as usize;
        format!("{v:.digits$}")
    } else {
        format!("{v:.1e}")
    }
}

fn boundary_plot(path: &Path) -> Result<LinePlot> {
    let rows = read_boundary(path)?;
    Ok(LinePlot {
        title: "Signal at the exit face".into(),
        x_label: "tau [1/Gamma]".into(),
        y_label: "|Omega1(L)| [Gamma]".into(),
        series: vec![Series::line(
            "|Omega1|",
            rows.iter().map(|r| (r.tau, r.abs_omega1)).collect(),
        )],
    })
}

fn summary_plot(path: &Path) -> Result<LinePlot> {
    let rows = SweepSummary::read(path)?;
    let x: Vec<f64> = rows.iter().map(|r| r.delta.unwrap_or(r.value)).collect();
    let x_label = if rows.iter().all(|r| r.delta.is_some()) {
        "magnetic phase area delta [rad]"
    } else {
        "sweep value"
    };
    let mut series = vec![
        Series {
            markers: true,
            ..Series::line(
                "released ratio",
                x.iter()
                    .zip(&rows)
                    .map(|(&x, r)| (x, r.released_peak_ratio))
                    .collect(),
            )
        },
        Series {
            markers: true,
            ..Series::line(
                "Z ratio",
                x.iter()
                    .zip(&rows)
                    .map(|(&x, r)| (x, r.z_peak_ratio))
                    .collect(),
            )
        },
    ];
    let predicted: Vec<(f64, f64)> = x
        .iter()
        .zip(&rows)
        .filter_map(|(&x, r)| r.predicted_ratio.map(|p| (x, p)))
        .collect();
    if !predicted.is_empty() {
        // smooth overlays of the closed-form laws at equal branch angle
        let (lo, hi) = bounds(x.iter().copied());
        let fine: Vec<f64> = (0..=200)
            .map(|k| lo + (hi - lo) * k as f64 / 200.0)
            .collect();
        series.push(Series {
            dashed: true,
            ..Series::line(
                "|cos(delta/2)|",
                fine.iter().map(|&d| (d, (0.5 * d).cos().abs())).collect(),
            )
        });
        series.push(Series {
            dashed: true,
            ..Series::line(
                "|sin(delta/2)|",
                fine.iter().map(|&d| (d, (0.5 * d).sin().abs())).collect(),
            )
        });
        series.push(Series {
            markers: true,
            dashed: true,
            ..Series::line("predicted", predicted)
        });
    }
    Ok(LinePlot {
        title: "Released and trapped heights".into(),
        x_label: x_label.into(),
        y_label: "ratio".into(),
        series,
    })
}

fn snapshot_plots(path: &Path) -> Result<Vec<(String, LinePlot)>> {
    let rows = read_snapshots(path)?;
    let named: Vec<_> = rows.iter().filter(|r| r.label != "dense").collect();
    let chosen: Vec<_> = if named.is_empty() {
        rows.iter().collect()
    } else {
        named
    };
    let stride = chosen.len().div_ceil(MAX_PROFILES).max(1);
    let picked: Vec<_> = chosen.into_iter().step_by(stride).collect();
    let profile = |re: fn(&super::io::SnapshotRow) -> (&Vec<f64>, &Vec<f64>)| {
        picked
            .iter()
            .map(|r| {
                let (a, b) = re(r);
                let pts =
                    r.xi.iter()
                        .zip(a.iter().zip(b))
                        .map(|(&x, (&u, &v))| (x, u.hypot(v)))
                        .collect();
                Series::line(format!("{} t={:.1}", r.label, r.tau), pts)
            })
            .collect::<Vec<_>>()
    };
    Ok(vec![
        (
            "psi".into(),
            LinePlot {
                title: "Dark polariton".into(),
                x_label: "xi [L]".into(),
                y_label: "|Psi| [Gamma]".into(),
                series: profile(|r| (&r.re_psi, &r.im_psi)),
            },
        ),
        (
            "z".into(),
            LinePlot {
                title: "Trapped polariton".into(),
                x_label: "xi [L]".into(),
                y_label: "|Z|".into(),
                series: profile(|r| (&r.re_z, &r.im_z)),
            },
        ),
    ])
}

fn metrics_svg(path: &Path) -> Result<String> {
    let m = read_metrics(path)?;
    let value = serde_json::to_value(m.metrics)?;
    let mut lines: Vec<String> = value
        .as_object()
        .map(|o| o.iter().map(|(k, v)| format!("{k} = {v}")).collect())
        .unwrap_or_default();
    lines.extend(m.warnings.iter().map(|w| format!("warning: {w}")));
    let height = 40 + 18 * lines.len();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="monospace" font-size="13">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, l) in lines.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}">{}</text>"#,
            28 + 18 * k,
            escape(l)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders `input` (any file written by `run` or `sweep`) to SVG files in
/// `out_dir`, or next to the input. Returns the written paths.
pub fn plot_file(input: &Path, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let name = input
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default();
    let stem = input.file_stem().and_then(|n| n.to_str()).unwrap_or("plot");
    let dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let docs: Vec<(String, String)> = match name {
        BOUNDARY_FILE => vec![(stem.into(), boundary_plot(input)?.render())],
        SUMMARY_FILE => vec![(stem.into(), summary_plot(input)?.render())],
        SNAPSHOT_FILE => snapshot_plots(input)?
            .into_iter()
            .map(|(suffix, p)| (format!("{stem}_{suffix}"), p.render()))
            .collect(),
        METRICS_FILE => vec![(stem.into(), metrics_svg(input)?)],
        _ if name.ends_with(".csv") => {
            // a summary under another name is the only other CSV we emit
            vec![(stem.into(), summary_plot(input)?.render())]
        }
        _ => {
            return Err(Error::Format {
                path: input.into(),
                message: "not a file written by run or sweep".into(),
            })
        }
    };
    let mut written = Vec::new();
    for (file_stem, svg) in docs {
        let path = dir.join(format!("{file_stem}.svg"));
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
