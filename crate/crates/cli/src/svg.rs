//! Static SVG plot: the results series with error-bar ticks over the
//! reference polyline.

use std::fmt::Write as _;

use erhoq::estimator::ObservableSeries;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

struct Frame {
    t0: f64,
    t1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        MARGIN + (t - self.t0) / (self.t1 - self.t0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn frame(results: &ObservableSeries, reference: &ObservableSeries) -> Frame {
    let mut t = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    for p in results.points.iter().chain(&reference.points) {
        let e = p.stat_err.hypot(p.sys_err);
        t = (t.0.min(p.t), t.1.max(p.t));
        y = (y.0.min(p.value - e), y.1.max(p.value + e));
    }
    if !t.0.is_finite() {
        t = (0.0, 1.0);
        y = (-1.0, 1.0);
    }
    if t.1 - t.0 < 1e-12 {
        t.1 = t.0 + 1.0;
    }
    if y.1 - y.0 < 1e-12 {
        y = (y.0 - 0.5, y.1 + 0.5);
    }
    let pad = 0.05 * (y.1 - y.0);
    Frame { t0: t.0, t1: t.1, y0: y.0 - pad, y1: y.1 + pad }
}

pub fn plot(results: &ObservableSeries, reference: &ObservableSeries, y_label: &str) -> String {
    let f = frame(results, reference);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(
        s,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    if f.y0 < 0.0 && f.y1 > 0.0 {
        let z = f.y(0.0);
        writeln!(s, r#"<line x1="{left}" y1="{z:.2}" x2="{right}" y2="{z:.2}" stroke="gray"/>"#).unwrap();
    }
    for (v, anchor) in [(f.y0, bottom), (f.y1, top)] {
        writeln!(s, r#"<text x="{}" y="{anchor:.2}" font-size="11" text-anchor="end">{v:.2}</text>"#, left - 4.0)
            .unwrap();
    }
    for t in [f.t0, f.t1] {
        writeln!(s, r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="middle">{t:.2}</text>"#, f.x(t), bottom + 16.0)
            .unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">t</text>"#, WIDTH / 2.0, HEIGHT - 10.0)
        .unwrap();
    writeln!(s, r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        HEIGHT / 2.0, HEIGHT / 2.0, escape(y_label))
    .unwrap();

    if !reference.points.is_empty() {
        let pts: Vec<String> =
            reference.points.iter().map(|p| format!("{:.2},{:.2}", f.x(p.t), f.y(p.value))).collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, pts.join(" ")).unwrap();
    }
    for p in &results.points {
        let (x, y) = (f.x(p.t), f.y(p.value));
        let e = p.stat_err.hypot(p.sys_err);
        if e > 0.0 {
            let (lo, hi) = (f.y(p.value - e), f.y(p.value + e));
            writeln!(s, r#"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="red"/>"#).unwrap();
            for yy in [lo, hi] {
                writeln!(s, r#"<line x1="{:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="red"/>"#, x - 3.0, x + 3.0)
                    .unwrap();
            }
        }
        writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="none" stroke="red"/>"#).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
