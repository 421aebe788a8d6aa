//! Grouped error-bar chart of per-condition intervals as SVG 1.1.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::estimate::IntervalEstimate;

/// Intervals of one method over a list of conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub conditions: Vec<String>,
    pub intervals: Vec<IntervalEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOutput {
    pub svg: String,
    /// `method,condition,center,lower,upper` rows.
    pub data_csv: String,
}

const COLORS: [&str; 2] = ["#9a9a9a", "#000000"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Rounded tick step giving roughly `target` ticks over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

pub fn emit_plot(series: &[PlotSeries], title: &str, y_label: &str) -> Result<PlotOutput> {
    if series.is_empty() || series.len() > 2 {
        return Err(Error::Plot(format!("expected 1 or 2 series, got {}", series.len())));
    }
    let conditions = &series[0].conditions;
    for s in series {
        if s.intervals.len() != s.conditions.len() {
            return Err(Error::Plot(format!("series {:?} has {} intervals for {} conditions", s.name, s.intervals.len(), s.conditions.len())));
        }
        if &s.conditions != conditions {
            return Err(Error::Plot(format!("series {:?} covers different conditions", s.name)));
        }
        if s.intervals.iter().any(|iv| !(iv.lower.is_finite() && iv.upper.is_finite())) {
            return Err(Error::Plot(format!("series {:?} has unbounded intervals", s.name)));
        }
    }
    if conditions.is_empty() {
        return Err(Error::Plot("no conditions to plot".into()));
    }

    let all = series.iter().flat_map(|s| s.intervals.iter());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), iv| {
        (lo.min(iv.lower), hi.max(iv.upper))
    });
    let span = hi - lo;
    let pad = if span > 0.0 { 0.1 * span } else { lo.abs().max(1.0) * 0.1 };
    lo -= pad;
    hi += pad;
    let step = tick_step(hi - lo, 6.0);
    let first_tick = (lo / step).ceil() * step;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y = |v: f64| MARGIN_TOP + plot_h * (hi - v) / (hi - lo);
    let group_w = plot_w / conditions.len() as f64;
    let offset = |k: usize| -> f64 {
        if series.len() == 1 {
            0.0
        } else {
            (k as f64 - 0.5) * group_w * 0.25
        }
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // axes
    let x0 = MARGIN_LEFT;
    let y_bottom = MARGIN_TOP + plot_h;
    let _ = writeln!(svg, r#"<g id="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y_bottom}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y_bottom}" x2="{:.1}" y2="{y_bottom}"/>"#, x0 + plot_w);
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g id="y-ticks" font-family="sans-serif" font-size="11" text-anchor="end">"#);
    let mut t = first_tick;
    while t <= hi + 1e-9 * step {
        let yy = y(t);
        let _ = writeln!(svg, r#"<line x1="{:.1}" y1="{yy:.2}" x2="{x0}" y2="{yy:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.2}">{}</text>"#, x0 - 7.0, yy + 4.0, format_tick(t, step));
        t += step;
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    );
    let _ = writeln!(svg, r#"<g id="x-labels" font-family="sans-serif" font-size="12" text-anchor="middle">"#);
    for (g, label) in conditions.iter().enumerate() {
        let cx = x0 + group_w * (g as f64 + 0.5);
        let _ = writeln!(svg, r#"<text x="{cx:.1}" y="{:.1}">{}</text>"#, y_bottom + 20.0, escape(label));
    }
    let _ = writeln!(svg, "</g>");

    let cap = (group_w * 0.06).min(10.0);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k];
        let _ = writeln!(svg, r#"<g class="series" data-method="{}" stroke="{color}" fill="{color}" stroke-width="2">"#, escape(&s.name));
        for (g, iv) in s.intervals.iter().enumerate() {
            let cx = x0 + group_w * (g as f64 + 0.5) + offset(k);
            let (yl, yu, yc) = (y(iv.lower), y(iv.upper), y(iv.center));
            let _ = writeln!(svg, r#"<line class="bar" x1="{cx:.2}" y1="{yu:.2}" x2="{cx:.2}" y2="{yl:.2}"/>"#);
            let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{yu:.2}" x2="{:.2}" y2="{yu:.2}"/>"#, cx - cap, cx + cap);
            let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{yl:.2}" x2="{:.2}" y2="{yl:.2}"/>"#, cx - cap, cx + cap);
            let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{yc:.2}" r="3.5" stroke="none"/>"#);
        }
        let _ = writeln!(svg, "</g>");
    }

    let _ = writeln!(svg, r#"<g id="legend" font-family="sans-serif" font-size="12">"#);
    for (k, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 8.0 + 18.0 * k as f64;
        let lx = x0 + plot_w - 180.0;
        let _ = writeln!(svg, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="3"/>"#, lx + 20.0, COLORS[k]);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.name));
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "condition", "center", "lower", "upper"]).expect("memory write");
    for s in series {
        for (label, iv) in s.conditions.iter().zip(&s.intervals) {
            w.write_record([s.name.clone(), label.clone(), iv.center.to_string(), iv.lower.to_string(), iv.upper.to_string()])
                .expect("memory write");
        }
    }
    let data_csv = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    Ok(PlotOutput { svg, data_csv })
}

fn format_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    format!("{v:.decimals$}")
}
