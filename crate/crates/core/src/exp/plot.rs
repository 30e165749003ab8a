//! Learning-curve charts as standalone SVG.

use std::fmt::Write as _;
use std::path::Path;

use super::files::{write_file, CurveSummary};
use super::smooth_curve;
use crate::pendulum::EPISODE_LEN;
use crate::{Error, Result};

/// Exponential-average weight applied to plotted means.
pub const SMOOTHING_WEIGHT: f64 = 0.9;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) * self.y_scale()
    }

    /// Pixels per reward unit.
    fn y_scale(&self) -> f64 {
        (HEIGHT - TOP - BOTTOM) / (self.y1 - self.y0)
    }
}

fn step_of(episode: usize) -> f64 {
    ((episode + 1) * EPISODE_LEN as usize) as f64
}

/// Smoothed mean lines with ±1 standard-error bands. The band is drawn
/// around the smoothed mean with the raw standard error as half-width.
pub fn render_svg(summaries: &[CurveSummary], labels: &[String]) -> Result<String> {
    if summaries.is_empty() || labels.is_empty() {
        return Err(Error::Config("plot needs at least one summary and label".into()));
    }
    if labels.len() != summaries.len() {
        return Err(Error::dim(summaries.len(), labels.len()));
    }
    if summaries.iter().any(|s| s.is_empty()) {
        return Err(Error::Config("cannot plot an empty summary".into()));
    }
    let smoothed: Vec<Vec<f64>> = summaries
        .iter()
        .map(|s| smooth_curve(&s.mean, SMOOTHING_WEIGHT))
        .collect();

    let mut frame = Frame {
        x0: step_of(0),
        x1: step_of(summaries.iter().map(|s| s.len()).max().unwrap_or(1) - 1),
        y0: f64::INFINITY,
        y1: f64::NEG_INFINITY,
    };
    for (s, m) in summaries.iter().zip(&smoothed) {
        for (y, e) in m.iter().zip(&s.stderr) {
            frame.y0 = frame.y0.min(y - e);
            frame.y1 = frame.y1.max(y + e);
        }
    }
    if frame.x1 <= frame.x0 {
        frame.x1 = frame.x0 + 1.0;
    }
    if frame.y1.partial_cmp(&frame.y0) != Some(std::cmp::Ordering::Greater) {
        frame.y0 -= 1.0;
        frame.y1 += 1.0;
    }

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, "<metadata>smoothing_weight={SMOOTHING_WEIGHT}</metadata>").unwrap();
    writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<g class="plot" data-y-px-per-unit="{}">"#, frame.y_scale()).unwrap();

    let (bx0, bx1) = (LEFT, WIDTH - RIGHT);
    let (by0, by1) = (TOP, HEIGHT - BOTTOM);
    writeln!(
        svg,
        r#"<path d="M{bx0},{by0} L{bx0},{by1} L{bx1},{by1}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x0 + t * (frame.x1 - frame.x0);
        let yv = frame.y0 + t * (frame.y1 - frame.y0);
        let (x, y) = (frame.px(xv), frame.py(yv));
        writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{xv:.0}</text>"#,
            by1 + 18.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{yv:.0}</text>"#,
            bx0 - 6.0
        )
        .unwrap();
    }

    for (k, ((s, m), label)) in summaries.iter().zip(&smoothed).zip(labels).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut upper = Vec::with_capacity(m.len());
        let mut lower = Vec::with_capacity(m.len());
        let mut line = Vec::with_capacity(m.len());
        for (i, (y, e)) in m.iter().zip(&s.stderr).enumerate() {
            let x = frame.px(step_of(i));
            upper.push(format!("{x},{}", frame.py(y + e)));
            lower.push(format!("{x},{}", frame.py(y - e)));
            line.push(format!("{x},{}", frame.py(*y)));
        }
        lower.reverse();
        upper.extend(lower);
        writeln!(
            svg,
            r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" ")
        )
        .unwrap();
        writeln!(
            svg,
            r#"<polyline class="mean" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        )
        .unwrap();
        let ly = TOP + 10.0 + 18.0 * k as f64;
        writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{ly}" dominant-baseline="middle">{}</text>"#,
            bx1 + 10.0,
            bx1 + 30.0,
            bx1 + 36.0,
            escape(label)
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">step</text>"#,
        (bx0 + bx1) / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">average return</text>"#,
        (by0 + by1) / 2.0,
        (by0 + by1) / 2.0
    )
    .unwrap();
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

pub fn plot_svg(summaries: &[CurveSummary], labels: &[String], path: &Path) -> Result<()> {
    write_file(path, &render_svg(summaries, labels)?)
}
