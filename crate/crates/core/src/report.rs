//! Plain SVG 1.1 plots: the dissimilarity profile of a selection trace and
//! the log-log diagnostic of a scale search.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::filter::SelectionTrace;
use crate::morisita::ScaleChoice;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(svg: &mut String, title: &str) {
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(svg: &mut String, f: &Frame, y_label: &str) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = f.y0 + (f.y1 - f.y0) * f64::from(i) / 4.0;
        let y = f.py(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#,
            l - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            l - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

/// Dissimilarity against the features added so far, with the `M2(Y)`
/// reference line and the knee marked.
pub fn profile_svg(trace: &SelectionTrace) -> String {
    let diss = trace.diss_profile();
    let steps = diss.len().max(1);
    let f = Frame::new(
        [0.5, steps as f64 + 0.5].into_iter(),
        diss.iter().copied().chain([0.0, trace.target_id]),
    );
    let mut svg = String::new();
    open(
        &mut svg,
        &format!("Dissimilarity profile for {}", trace.target),
    );
    axes(&mut svg, &f, "dissimilarity");

    let yr = f.py(trace.target_id);
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{yr:.2}" x2="{}" y2="{yr:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        WIDTH - RIGHT
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{:.2}" text-anchor="end" fill="gray">M2({}) = {:.3}</text>"#,
        WIDTH - RIGHT - 4.0,
        yr - 4.0,
        escape(&trace.target),
        trace.target_id
    );

    let pts: Vec<(f64, f64)> = diss
        .iter()
        .enumerate()
        .map(|(i, &d)| (f.px(i as f64 + 1.0), f.py(d)))
        .collect();
    if pts.len() > 1 {
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#,
            path.join(" ")
        );
    }
    let base = HEIGHT - BOTTOM;
    for ((x, y), step) in pts.iter().zip(&trace.steps) {
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="steelblue"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" text-anchor="end" transform="rotate(-45 {x:.2} {})">{}</text>"#,
            base + 14.0,
            base + 14.0,
            escape(&step.feature)
        );
    }
    if let Some(k) = trace.knee() {
        let (x, y) = pts[k - 1];
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="7" fill="none" stroke="firebrick"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="firebrick">knee: {k} feature{}</text>"#,
            x + 9.0,
            y - 9.0,
            if k == 1 { "" } else { "s" }
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// `ln I` against `ln k` for every probed scale, the chosen window highlighted.
pub fn scale_diagnostic_svg(choice: &ScaleChoice) -> String {
    let pts: Vec<(u32, f64, f64)> = choice
        .probe
        .iter()
        .filter(|(_, i)| *i > 0.0)
        .map(|&(k, i)| (k, f64::from(k).ln(), i.ln()))
        .collect();
    let f = Frame::new(pts.iter().map(|p| p.1), pts.iter().map(|p| p.2));
    let mut svg = String::new();
    open(
        &mut svg,
        &format!(
            "Morisita log-log diagnostic, window {}..{}",
            choice.window.0, choice.window.1
        ),
    );
    axes(&mut svg, &f, "ln I");
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">ln k</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 20.0
    );
    for (k, x, y) in &pts {
        let inside = *k >= choice.window.0 && *k <= choice.window.1;
        let used = choice.scales.as_slice().contains(k);
        let fill = match (used, inside) {
            (true, _) => "firebrick",
            (false, true) => "salmon",
            _ => "gray",
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{fill}"/>"#,
            f.px(*x),
            f.py(*y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn write(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

pub fn emit_profile_svg(trace: &SelectionTrace, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &profile_svg(trace))
}

pub fn emit_scale_diagnostic_svg(choice: &ScaleChoice, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &scale_diagnostic_svg(choice))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::StepRecord;
    use crate::morisita::ScaleSet;

    fn trace() -> SelectionTrace {
        let step = |f: &str, d: f64| StepRecord {
            feature: f.into(),
            diss: d,
            id_with_target: d + 1.0,
            id_without_target: 1.0,
            candidate_scores: Default::default(),
        };
        SelectionTrace {
            target: "Y".into(),
            target_id: 0.9,
            scales: ScaleSet::range(5, 20).unwrap(),
            steps: vec![step("X1", 0.6), step("X<2>", 0.03), step("I6", 0.02)],
        }
    }

    #[test]
    fn profile_contains_points_labels_reference_and_knee() {
        let svg = profile_svg(&trace());
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"r="3.5""#).count(), 3);
        assert!(svg.contains(">X1<") && svg.contains(">X&lt;2&gt;<") && svg.contains(">I6<"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("knee: 2 features"));
        assert_eq!(svg, profile_svg(&trace()));
    }

    #[test]
    fn empty_trace_still_renders() {
        let mut t = trace();
        t.steps.clear();
        let svg = profile_svg(&t);
        assert!(!svg.contains("knee"));
        assert!(!svg.contains("NaN"));
    }
}
