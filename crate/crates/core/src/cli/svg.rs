//! Self-contained SVG charts. Output depends only on the data, so equal
//! results give byte-identical files.

use std::fmt::Write as _;

use super::emit::{provenance_lines, sig9};
use super::sweep::{Layout, SweepResult};

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 360.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 48.0;
const LEGEND_W: f64 = 150.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 3] = ["", "6 3", "2 2"];

/// Color stops of the heatmap scale, low to high.
const RAMP: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

pub fn render(r: &SweepResult) -> String {
    match r.layout {
        Layout::Heatmap if r.axes.len() == 2 => heatmap(r),
        _ => line_charts(r),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, height: f64, r: &SweepResult) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, "<metadata>").unwrap();
    for line in provenance_lines(r) {
        writeln!(out, "{}", escape(&line)).unwrap();
    }
    writeln!(out, "</metadata>").unwrap();
    writeln!(
        out,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    )
    .unwrap();
}

/// Rounded tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str, title: &str) {
        let (x0, y0, w, h) = (self.x0, self.y0, self.w, self.h);
        writeln!(out, r#"<rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black"/>"#).unwrap();
        for t in ticks(self.xr.0, self.xr.1) {
            let x = self.px(t);
            writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
                y0 + h,
                y0 + h + 4.0
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + h + 16.0,
                sig9(t)
            )
            .unwrap();
        }
        for t in ticks(self.yr.0, self.yr.1) {
            let y = self.py(t);
            writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
                x0 - 4.0
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                sig9(t)
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x0 + w / 2.0,
            y0 + h + 36.0,
            escape(xlabel)
        )
        .unwrap();
        let (lx, ly) = (x0 - 48.0, y0 + h / 2.0);
        writeln!(out, r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#, escape(ylabel)).unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-weight="bold">{}</text>"#,
            x0 + w / 2.0,
            y0 - 12.0,
            escape(title)
        )
        .unwrap();
    }
}

/// One panel per metric. Wide tables draw one line per value of the first
/// axis against the second; other tables draw each metric against the
/// first axis.
fn line_charts(r: &SweepResult) -> String {
    let wide = r.layout == Layout::Wide && r.axes.len() == 2;
    let (x_axis, series): (usize, Vec<(String, Vec<usize>)>) = if wide {
        let nx = r.axes[1].values.len();
        let s = &r.axes[0];
        (
            1,
            s.values
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    (
                        format!("{}={}", s.name, sig9(v)),
                        (k * nx..(k + 1) * nx).collect(),
                    )
                })
                .collect(),
        )
    } else {
        (0, vec![(String::new(), (0..r.rows.len()).collect())])
    };
    let xs_of =
        |rows: &[usize]| -> Vec<f64> { rows.iter().map(|&i| r.coordinates(i)[x_axis]).collect() };
    let legend = if series.len() > 1 { LEGEND_W } else { 0.0 };
    let width = PANEL_W * r.metrics.len() as f64 + legend;
    let mut out = String::new();
    header(&mut out, width, PANEL_H, r);
    let xname = &r.axes[x_axis].name;
    for (k, metric) in r.metrics.iter().enumerate() {
        let xr = range(r.axes[x_axis].values.iter().copied());
        let yr = range(r.rows.iter().filter_map(|row| row[k]));
        let f = Frame {
            x0: k as f64 * PANEL_W + MARGIN_L,
            y0: MARGIN_T,
            w: PANEL_W - MARGIN_L - MARGIN_R,
            h: PANEL_H - MARGIN_T - MARGIN_B,
            xr,
            yr,
        };
        f.axes(&mut out, xname, metric, &format!("{} {}", r.task, metric));
        for (s, (_, rows)) in series.iter().enumerate() {
            let xs = xs_of(rows);
            let mut pts = String::new();
            for (x, &i) in xs.iter().zip(rows) {
                if let Some(y) = r.rows[i][k].filter(|y| y.is_finite()) {
                    write!(pts, "{:.2},{:.2} ", f.px(*x), f.py(y)).unwrap();
                }
            }
            let dash = DASHES[(s / PALETTE.len()) % DASHES.len()];
            let dash = if dash.is_empty() {
                String::new()
            } else {
                format!(r#" stroke-dasharray="{dash}""#)
            };
            writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                PALETTE[s % PALETTE.len()],
                pts.trim_end()
            )
            .unwrap();
        }
    }
    if series.len() > 1 {
        let x = PANEL_W * r.metrics.len() as f64 + 8.0;
        for (s, (label, _)) in series.iter().enumerate() {
            let y = MARGIN_T + 16.0 * s as f64;
            writeln!(out, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/>"#, x + 20.0, PALETTE[s % PALETTE.len()]).unwrap();
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                x + 26.0,
                y + 4.0,
                escape(label)
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = RAMP
        .iter()
        .position(|&(s, _)| s >= t)
        .unwrap_or(RAMP.len() - 1)
        .max(1);
    let ((s0, c0), (s1, c1)) = (RAMP[k - 1], RAMP[k]);
    let u = (t - s0) / (s1 - s0);
    let mix = |a: u8, b: u8| (a as f64 + u * (b as f64 - a as f64)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(c0[0], c1[0]),
        mix(c0[1], c1[1]),
        mix(c0[2], c1[2])
    )
}

/// First metric over the two-axis lattice: first axis horizontal.
fn heatmap(r: &SweepResult) -> String {
    let (xa, ya) = (&r.axes[0], &r.axes[1]);
    let (nx, ny) = (xa.values.len(), ya.values.len());
    let width = PANEL_W + 80.0;
    let mut out = String::new();
    header(&mut out, width, PANEL_H, r);
    let edges = |v: &[f64]| -> (f64, f64) {
        if v.len() < 2 {
            return (v[0] - 0.5, v[0] + 0.5);
        }
        (
            v[0] - 0.5 * (v[1] - v[0]),
            v[v.len() - 1] + 0.5 * (v[v.len() - 1] - v[v.len() - 2]),
        )
    };
    let f = Frame {
        x0: MARGIN_L,
        y0: MARGIN_T,
        w: PANEL_W - MARGIN_L - MARGIN_R,
        h: PANEL_H - MARGIN_T - MARGIN_B,
        xr: edges(&xa.values),
        yr: edges(&ya.values),
    };
    let zr = range(r.rows.iter().filter_map(|row| row[0]));
    let bound = |v: &[f64], i: usize, lo: f64, hi: f64| -> (f64, f64) {
        let a = if i == 0 { lo } else { 0.5 * (v[i - 1] + v[i]) };
        let b = if i + 1 == v.len() {
            hi
        } else {
            0.5 * (v[i] + v[i + 1])
        };
        (a, b)
    };
    for i in 0..nx {
        let (xa0, xa1) = bound(&xa.values, i, f.xr.0, f.xr.1);
        for j in 0..ny {
            let Some(z) = r.rows[i * ny + j][0] else {
                continue;
            };
            let (ya0, ya1) = bound(&ya.values, j, f.yr.0, f.yr.1);
            let (px0, px1, py0, py1) = (f.px(xa0), f.px(xa1), f.py(ya1), f.py(ya0));
            writeln!(
                out,
                r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                px1 - px0,
                py1 - py0,
                ramp((z - zr.0) / (zr.1 - zr.0))
            )
            .unwrap();
        }
    }
    f.axes(
        &mut out,
        &xa.name,
        &ya.name,
        &format!("{} {}", r.task, r.metrics[0]),
    );
    // color bar
    let (bx, by, bh) = (PANEL_W + 8.0, MARGIN_T, PANEL_H - MARGIN_T - MARGIN_B);
    for s in 0..50 {
        let t = s as f64 / 49.0;
        let y = by + bh - (s + 1) as f64 * bh / 50.0;
        writeln!(
            out,
            r#"<rect x="{bx:.2}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            bh / 50.0 + 0.5,
            ramp(t)
        )
        .unwrap();
    }
    for (t, v) in [(0.0, zr.0), (1.0, zr.1)] {
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            bx + 20.0,
            by + bh * (1.0 - t) + 4.0,
            sig9(v)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{bx:.2}" y="{:.2}">{}</text>"#,
        by - 12.0,
        escape(&r.metrics[0])
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::sweep::Axis;

    #[test]
    fn ticks_are_round() {
        assert_eq!(
            ticks(0.0, 1.0),
            vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]
        );
        let t = ticks(0.0, std::f64::consts::PI);
        assert_eq!((t[0], t[t.len() - 1]), (0.0, 3.0));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(1.0), "#fde725");
    }

    #[test]
    fn heatmap_draws_every_cell() {
        let mut r = SweepResult::new(
            "fig3",
            Layout::Heatmap,
            vec![
                Axis::new("k0", "", vec![1.0, 2.0, 3.0]),
                Axis::new("Phi", "rad", vec![0.0, 1.0]),
            ],
            &["F"],
        );
        r.rows = (0..6).map(|k| vec![Some(k as f64 / 5.0)]).collect();
        let svg = render(&r);
        assert_eq!(svg.matches(r#"width="16""#).count(), 50);
        assert_eq!(svg.matches("<rect").count(), 1 + 1 + 6 + 50);
        assert!(svg.ends_with("</svg>\n"));
    }
}
