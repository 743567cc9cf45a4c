//! Minimal deterministic SVG output. Coordinates are printed with fixed
//! precision and nothing time- or host-dependent is embedded.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, Clone)]
pub enum Plot {
    /// One polyline per series.
    Lines { file: String, title: String, x_label: String, y_label: String, series: Vec<Vec<[f64; 2]>> },
    /// Point clouds in the unit disc, drawn with equal aspect.
    DiscPoints { file: String, title: String, series: Vec<Vec<[f64; 2]>> },
    /// Closed polylines, equal aspect.
    Curves { file: String, title: String, series: Vec<Vec<[f64; 2]>> },
    /// Histogram bars as (lo, hi, count).
    Bars { file: String, title: String, x_label: String, bars: Vec<(f64, f64, f64)> },
}

impl Plot {
    pub fn file_name(&self) -> &str {
        match self {
            Plot::Lines { file, .. } | Plot::DiscPoints { file, .. } | Plot::Curves { file, .. } | Plot::Bars { file, .. } => file,
        }
    }
}

struct Frame {
    w: f64,
    h: f64,
    margin: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.margin + (x - self.x.0) / (self.x.1 - self.x.0) * (self.w - 2.0 * self.margin)
    }

    fn py(&self, y: f64) -> f64 {
        self.h - self.margin - (y - self.y.0) / (self.y.1 - self.y.0) * (self.h - 2.0 * self.margin)
    }
}

fn range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return None;
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
    Some((lo - pad, hi + pad))
}

fn header(s: &mut String, f: &Frame, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = f.w,
        h = f.h
    );
    let _ = writeln!(s, r#"<rect width="{}" height="{}" fill="white"/>"#, f.w, f.h);
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, f.w / 2.0, escape(title));
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (f.margin, f.w - f.margin, f.margin, f.h - f.margin);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(s, r#"<text x="{l}" y="{:.1}" text-anchor="start">{}</text>"#, b + 16.0, num(f.x.0));
    let _ = writeln!(s, r#"<text x="{r}" y="{:.1}" text-anchor="end">{}</text>"#, b + 16.0, num(f.x.1));
    let _ = writeln!(s, r#"<text x="{:.1}" y="{b}" text-anchor="end">{}</text>"#, l - 4.0, num(f.y.0));
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 4.0, t + 10.0, num(f.y.1));
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, b + 32.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(s: &mut String, f: &Frame, pts: &[[f64; 2]], color: &str, closed: bool) {
    let mut d = String::new();
    for p in pts.iter().filter(|p| p[0].is_finite() && p[1].is_finite()) {
        let _ = write!(d, "{:.2},{:.2} ", f.px(p[0]), f.py(p[1]));
    }
    let tag = if closed { "polygon" } else { "polyline" };
    let _ = writeln!(s, r#"<{tag} points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#, d.trim_end());
}

fn nonempty(series: &[Vec<[f64; 2]>]) -> bool {
    series.iter().flatten().any(|p| p[0].is_finite() && p[1].is_finite())
}

/// Renders a plot, or explains why it cannot be drawn.
pub fn render(plot: &Plot) -> Result<String, String> {
    let mut s = String::new();
    match plot {
        Plot::Lines { title, x_label, y_label, series, .. } => {
            if !nonempty(series) {
                return Err("empty series".into());
            }
            let x = range(series.iter().flatten().map(|p| p[0])).ok_or("no finite x values")?;
            let y = range(series.iter().flatten().map(|p| p[1])).ok_or("no finite y values")?;
            let f = Frame { w: 640.0, h: 420.0, margin: 60.0, x, y };
            header(&mut s, &f, title);
            axes(&mut s, &f, x_label, y_label);
            for (i, ser) in series.iter().enumerate() {
                polyline(&mut s, &f, ser, PALETTE[i % PALETTE.len()], false);
            }
        }
        Plot::DiscPoints { title, series, .. } => {
            if !nonempty(series) {
                return Err("empty series".into());
            }
            let f = Frame { w: 480.0, h: 480.0, margin: 40.0, x: (-1.05, 1.05), y: (-1.05, 1.05) };
            header(&mut s, &f, title);
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="gray"/>"#,
                f.px(0.0),
                f.py(0.0),
                f.px(1.0) - f.px(0.0)
            );
            for (i, ser) in series.iter().enumerate() {
                let c = PALETTE[i % PALETTE.len()];
                for p in ser.iter().filter(|p| p[0].is_finite() && p[1].is_finite()) {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{c}"/>"#, f.px(p[0]), f.py(p[1]));
                }
            }
        }
        Plot::Curves { title, series, .. } => {
            if !nonempty(series) {
                return Err("empty series".into());
            }
            let x = range(series.iter().flatten().map(|p| p[0])).ok_or("no finite values")?;
            let y = range(series.iter().flatten().map(|p| p[1])).ok_or("no finite values")?;
            let half = 0.5 * (x.1 - x.0).max(y.1 - y.0);
            let (cx, cy) = (0.5 * (x.0 + x.1), 0.5 * (y.0 + y.1));
            let f = Frame { w: 480.0, h: 480.0, margin: 50.0, x: (cx - half, cx + half), y: (cy - half, cy + half) };
            header(&mut s, &f, title);
            axes(&mut s, &f, "x", "y");
            for (i, ser) in series.iter().enumerate() {
                polyline(&mut s, &f, ser, PALETTE[i % PALETTE.len()], true);
            }
        }
        Plot::Bars { title, x_label, bars, .. } => {
            if bars.is_empty() || bars.iter().all(|b| b.2 == 0.0) {
                return Err("empty series".into());
            }
            let x = (bars.iter().map(|b| b.0).fold(f64::INFINITY, f64::min), bars.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max));
            let ymax = bars.iter().map(|b| b.2).fold(0.0, f64::max);
            if !(x.0 < x.1) || !ymax.is_finite() {
                return Err("degenerate bins".into());
            }
            let f = Frame { w: 640.0, h: 420.0, margin: 60.0, x, y: (0.0, ymax * 1.05) };
            header(&mut s, &f, title);
            axes(&mut s, &f, x_label, "count");
            for b in bars {
                let (x0, x1) = (f.px(b.0), f.px(b.1));
                let (y0, y1) = (f.py(b.2), f.py(0.0));
                let _ = writeln!(
                    s,
                    r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white"/>"#,
                    x1 - x0,
                    y1 - y0,
                    PALETTE[0]
                );
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_refused() {
        let p = Plot::Lines { file: "a.svg".into(), title: "t".into(), x_label: "x".into(), y_label: "y".into(), series: vec![vec![]] };
        assert!(render(&p).is_err());
        let b = Plot::Bars { file: "b.svg".into(), title: "t".into(), x_label: "x".into(), bars: vec![(0.0, 1.0, 0.0)] };
        assert!(render(&b).is_err());
    }

    #[test]
    fn rendering_is_repeatable_and_escaped() {
        let p = Plot::Curves { file: "c.svg".into(), title: "a<b".into(), series: vec![vec![[0.0, 0.0], [1.0, 0.5], [0.2, 1.0]]] };
        let a = render(&p).unwrap();
        assert_eq!(a, render(&p).unwrap());
        assert!(a.contains("a&lt;b") && a.contains("<polygon"));
    }

    #[test]
    fn constant_series_still_has_a_range() {
        let p = Plot::Lines {
            file: "a.svg".into(),
            title: "flat".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![vec![[0.0, 2.0], [1.0, 2.0]]],
        };
        let s = render(&p).unwrap();
        assert!(!s.contains("NaN") && !s.contains("inf"));
    }
}
