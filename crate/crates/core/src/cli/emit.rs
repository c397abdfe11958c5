//! Writing sweep results as CSV, JSON or SVG.

use std::fmt::Write as _;
use std::path::Path;

use super::config::Format;
use super::svg;
use super::sweep::{Layout, SweepResult};
use crate::error::{Error, Result};

/// Render `result` in `format` and write it to `path`.
pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    let text = render(result, format)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.into(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

pub fn render(result: &SweepResult, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(to_csv(result)),
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(result).map_err(|e| Error::Contract(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Svg => Ok(svg::render(result)),
    }
}

/// `x` to 9 significant digits, trailing zeros dropped.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}").to_lowercase();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..9).contains(&exp) {
        let s = format!("{:.*}", (8 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.8e}");
        let (m, e) = s.split_once('e').unwrap();
        let m = if m.contains('.') {
            m.trim_end_matches('0').trim_end_matches('.')
        } else {
            m
        };
        format!("{m}e{e}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

/// Header label of one wide column.
pub fn series_label(metric: &str, axis: &str, value: f64) -> String {
    format!("{metric}[{axis}={}]", sig9(value))
}

fn to_csv(r: &SweepResult) -> String {
    let mut out = String::new();
    match r.layout {
        Layout::Wide if r.axes.len() == 2 => {
            let (series, x) = (&r.axes[0], &r.axes[1]);
            let mut header = vec![x.name.clone()];
            for m in &r.metrics {
                header.extend(
                    series
                        .values
                        .iter()
                        .map(|&v| series_label(m, &series.name, v)),
                );
            }
            writeln!(out, "{}", header.join(",")).unwrap();
            let nx = x.values.len();
            for (i, &xv) in x.values.iter().enumerate() {
                let mut line = vec![sig9(xv)];
                for k in 0..r.metrics.len() {
                    line.extend((0..series.values.len()).map(|s| cell(r.rows[s * nx + i][k])));
                }
                writeln!(out, "{}", line.join(",")).unwrap();
            }
        }
        _ => {
            let header: Vec<&str> = r
                .axes
                .iter()
                .map(|a| a.name.as_str())
                .chain(r.metrics.iter().map(|m| m.as_str()))
                .collect();
            writeln!(out, "{}", header.join(",")).unwrap();
            for (i, row) in r.rows.iter().enumerate() {
                let line: Vec<String> = r
                    .coordinates(i)
                    .into_iter()
                    .map(sig9)
                    .chain(row.iter().map(|&v| cell(v)))
                    .collect();
                writeln!(out, "{}", line.join(",")).unwrap();
            }
        }
    }
    for line in provenance_lines(r) {
        writeln!(out, "# {line}").unwrap();
    }
    out
}

/// The provenance block as `key: value` lines, shared by every format
/// that carries it as a comment.
pub fn provenance_lines(r: &SweepResult) -> Vec<String> {
    let p = &r.provenance;
    let mut lines = vec![
        format!("task: {}", r.task),
        format!("version: {}", p.version),
        format!("config_hash: {}", p.config_hash),
    ];
    for a in &r.axes {
        let unit = if a.unit.is_empty() {
            String::new()
        } else {
            format!(" [{}]", a.unit)
        };
        lines.push(format!(
            "axis: {}{unit}, {} samples",
            a.name,
            a.values.len()
        ));
    }
    lines.extend(
        p.tolerances
            .iter()
            .map(|(k, v)| format!("tolerance.{k}: {}", sig9(*v))),
    );
    lines.extend(p.defaults.iter().map(|(k, v)| format!("default.{k}: {v}")));
    lines.extend(
        r.summary
            .iter()
            .map(|(k, v)| format!("summary.{k}: {}", sig9(*v))),
    );
    lines.extend(p.warnings.iter().map(|w| format!("warning: {w}")));
    lines
}
