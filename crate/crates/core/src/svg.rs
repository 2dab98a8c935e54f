//! Plain SVG 1.1 rendering of a traced spectrum.

use std::fmt::Write;

use num_complex::Complex64;

use crate::spectrum::{SpectrumCurve, Window};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

/// Branch 1, branch 2, near sigma(T_d), near sigma(T_a), Λ, axes.
pub const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#d62728", "#7f7f7f"];

struct Frame {
    w: Window,
}

impl Frame {
    fn x(&self, re: f64) -> f64 {
        LEFT + (re - self.w.re_min) / (self.w.re_max - self.w.re_min) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, im: f64) -> f64 {
        HEIGHT - BOTTOM - (im - self.w.im_min) / (self.w.im_max - self.w.im_min) * (HEIGHT - TOP - BOTTOM)
    }

    fn point(&self, z: Complex64) -> (f64, f64) {
        (self.x(z.re), self.y(z.im))
    }
}

/// Tick positions with a 1-2-5 step, and the decimals needed to print them.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|f| f * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

/// Renders both branches as polylines inside `window`, with flagged samples
/// marked. The output depends only on its inputs.
pub fn render_svg(curve: &SpectrumCurve, window: &Window, comments: &[String]) -> String {
    let f = Frame { w: *window };
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    for c in comments {
        let _ = writeln!(s, "<!-- {} -->", escape(c));
    }
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<clipPath id=\"plot\"><rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\"/></clipPath>",
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );

    // frame, ticks and axes
    let axis = PALETTE[5];
    let _ = writeln!(
        s,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{axis}\"/>",
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let (xt, xd) = ticks(window.re_min, window.re_max);
    for t in xt {
        let x = f.x(t);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{axis}\"/><text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{t:.xd$}</text>",
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0,
            HEIGHT - BOTTOM + 20.0
        );
    }
    let (yt, yd) = ticks(window.im_min, window.im_max);
    for t in yt {
        let y = f.y(t);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"{axis}\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{t:.yd$}</text>",
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    if window.re_min <= 0.0 && 0.0 <= window.re_max {
        let x = f.x(0.0);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{axis}\" stroke-dasharray=\"4 3\"/>",
            HEIGHT - BOTTOM
        );
    }
    if window.im_min <= 0.0 && 0.0 <= window.im_max {
        let y = f.y(0.0);
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{axis}\" stroke-dasharray=\"4 3\"/>",
            WIDTH - RIGHT
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">Re λ</text>",
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        "<text x=\"15\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.2})\">Im λ</text>",
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0
    );

    // branches: one polyline per run of samples inside the window
    let _ = writeln!(s, "<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"1.5\">");
    for (branch, color) in PALETTE[..2].iter().enumerate() {
        let mut run: Vec<(f64, f64)> = Vec::new();
        let flush = |run: &mut Vec<(f64, f64)>, s: &mut String| {
            if run.len() >= 2 {
                let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(s, "<polyline stroke=\"{color}\" points=\"{}\"/>", pts.join(" "));
            }
            run.clear();
        };
        for sample in &curve.samples {
            if window.contains(sample.roots[branch]) {
                run.push(f.point(sample.roots[branch]));
            } else {
                flush(&mut run, &mut s);
            }
        }
        flush(&mut run, &mut s);
    }
    s.push_str("</g>\n");

    // flagged samples
    let _ = writeln!(s, "<g clip-path=\"url(#plot)\">");
    for sample in &curve.samples {
        for (r, fl) in sample.roots.iter().zip(&sample.flags) {
            if !window.contains(*r) {
                continue;
            }
            let (x, y) = f.point(*r);
            let marker = if fl.in_lambda_set {
                Some((PALETTE[4], 4.0))
            } else if fl.near_sigma_a {
                Some((PALETTE[3], 2.5))
            } else if fl.near_sigma_d {
                Some((PALETTE[2], 2.5))
            } else {
                None
            };
            if let Some((color, radius)) = marker {
                let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{radius}\" fill=\"{color}\"/>");
            }
        }
    }
    s.push_str("</g>\n");

    let legend = [
        (PALETTE[0], "branch 1"),
        (PALETTE[1], "branch 2"),
        (PALETTE[2], "near σ(T̄_d)"),
        (PALETTE[3], "near σ(T̄_a)"),
        (PALETTE[4], "in Λ"),
    ];
    for (k, (color, label)) in legend.iter().enumerate() {
        let y = TOP + 15.0 + 16.0 * k as f64;
        let x = WIDTH - RIGHT - 110.0;
        let _ = writeln!(
            s,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/><text x=\"{:.2}\" y=\"{y:.2}\" font-size=\"12\">{label}</text>",
            y - 9.0,
            x + 15.0
        );
    }
    s.push_str("</svg>\n");
    s
}
