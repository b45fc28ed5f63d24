//! Minimal hand-written SVG: a constellation scatter and the frontier plot.
//! Plots are derived from the same data as the CSVs and never feed back.

use std::fmt::Write;

use apsk_core::tradeoff::{FrontierSet, TimeSharing};
use apsk_core::Constellation;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 56.0;

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (mut x0, mut x1) = span(&mut xs.clone());
        let (mut y0, mut y1) = span(&mut ys.clone());
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        let grow = |lo: f64, hi: f64| {
            let d = if hi > lo { (hi - lo) * 0.05 } else { 0.5 };
            (lo - d, hi + d)
        };
        let (x0, x1) = grow(x0, x1);
        let (y0, y1) = grow(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }

    fn frame(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let x = self.x0 + t * (self.x1 - self.x0);
            let y = self.y0 + t * (self.y1 - self.y0);
            let _ = writeln!(
                out,
                r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"##,
                self.px(x),
                H - PAD + 16.0,
                tick(x)
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"##,
                PAD - 6.0,
                self.py(y) + 4.0,
                tick(y)
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="13" text-anchor="middle">{xlabel}</text>"##,
            W / 2.0,
            H - 14.0
        );
        let _ = writeln!(
            out,
            r##"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"##,
            H / 2.0,
            H / 2.0
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn open() -> String {
    format!(r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"##)
        + "\n"
        + &format!(r##"<rect width="{W}" height="{H}" fill="white"/>"##)
        + "\n"
}

pub fn scatter(c: &Constellation, title: &str) -> String {
    let r = c.points().iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-9) * 1.1;
    // square axes so rings look like circles
    let side = H - 2.0 * PAD;
    let (cx, cy) = (W / 2.0, H / 2.0);
    let s = side / (2.0 * r);
    let mut out = open();
    let _ = writeln!(out, r##"<text x="{cx}" y="24" font-size="14" text-anchor="middle">{}</text>"##, escape(title));
    let _ = writeln!(
        out,
        r##"<line x1="{:.1}" y1="{cy}" x2="{:.1}" y2="{cy}" stroke="#bbb"/><line x1="{cx}" y1="{:.1}" x2="{cx}" y2="{:.1}" stroke="#bbb"/>"##,
        cx - side / 2.0,
        cx + side / 2.0,
        cy - side / 2.0,
        cy + side / 2.0
    );
    if let Some(layout) = c.layout() {
        for radius in &layout.radii {
            let _ = writeln!(
                out,
                r##"<circle cx="{cx}" cy="{cy}" r="{:.2}" fill="none" stroke="#ddd" stroke-dasharray="3 3"/>"##,
                radius * s
            );
        }
    }
    for p in c.points() {
        let _ =
            writeln!(out, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f5fa8"/>"##, cx + p.re * s, cy - p.im * s);
    }
    out.push_str("</svg>\n");
    out
}

pub fn frontier(set: &FrontierSet, mba: &[(f64, f64)]) -> String {
    let points: Vec<(f64, f64)> = set.points().map(|p| (p.variance, p.rate.value_bits)).collect();
    let base: Vec<(f64, f64)> =
        set.baseline.iter().flat_map(|ts: &TimeSharing| ts.samples.iter().map(|s| (s.variance, s.rate_bits))).collect();
    let all = points.iter().chain(&base).chain(mba);
    let ax = Axes::fit(all.clone().map(|p| p.0), all.map(|p| p.1));

    let mut out = open();
    let _ = writeln!(
        out,
        r##"<text x="{}" y="24" font-size="14" text-anchor="middle">m = {}, SNR = {} dB</text>"##,
        W / 2.0,
        set.config.m,
        tick(set.config.snr_c_db)
    );
    ax.frame(&mut out, "Var(|X|^2)", "rate (bits/symbol)");
    for (x, y) in &points {
        let _ = writeln!(out, r##"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="#aaa"/>"##, ax.px(*x), ax.py(*y));
    }
    if !base.is_empty() {
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            path(&ax, &base)
        );
    }
    let front: Vec<(f64, f64)> = set.frontier().iter().map(|p| (p.variance, p.rate.value_bits)).collect();
    let _ =
        writeln!(out, r##"<polyline points="{}" fill="none" stroke="#1f5fa8" stroke-width="2"/>"##, path(&ax, &front));
    for (x, y) in mba {
        let (px, py) = (ax.px(*x), ax.py(*y));
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="6" height="6" fill="none" stroke="#27ae60" stroke-width="1.5"/>"##,
            px - 3.0,
            py - 3.0
        );
    }
    legend(&mut out, !base.is_empty(), !mba.is_empty());
    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, baseline: bool, mba: bool) {
    let mut items = vec![("#aaa", "swept designs"), ("#1f5fa8", "frontier")];
    if baseline {
        items.push(("#c0392b", "PSK/QAM time sharing"));
    }
    if mba {
        items.push(("#27ae60", "external"));
    }
    for (i, (color, label)) in items.iter().enumerate() {
        let y = PAD + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}" font-size="11">{label}</text>"##,
            W - PAD - 150.0,
            y - 9.0,
            W - PAD - 134.0,
            y
        );
    }
}

fn path(ax: &Axes, pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(x, y)| format!("{:.2},{:.2}", ax.px(*x), ax.py(*y))).collect::<Vec<_>>().join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
