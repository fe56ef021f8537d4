//! Minimal SVG line plots with optional logarithmic axes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> Option<f64> {
        match self {
            Scale::Linear => v.is_finite().then_some(v),
            Scale::Log => (v > 0.0 && v.is_finite()).then(|| v.log10()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            x,
            y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_scale: Scale, y_scale: Scale) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_scale,
            y_scale,
            series: Vec::new(),
        }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    /// Renders the plot. Points that cannot be shown on the axis scale
    /// (non-finite, or non-positive on a log axis) split the polyline.
    pub fn to_svg(&self) -> String {
        let mapped: Vec<Vec<Option<(f64, f64)>>> = self
            .series
            .iter()
            .map(|s| {
                s.x.iter()
                    .zip(&s.y)
                    .map(|(&x, &y)| Some((self.x_scale.map(x)?, self.y_scale.map(y)?)))
                    .collect()
            })
            .collect();
        let pts = mapped.iter().flatten().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let (x0, x1) = padded(x0, x1, self.x_scale);
        let (y0, y1) = padded(y0, y1, self.y_scale);
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (v, label) in ticks(x0, x1, self.x_scale) {
            let x = px(v);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                MARGIN_TOP,
                MARGIN_TOP + ph,
                MARGIN_TOP + ph + 16.0
            );
        }
        for (v, label) in ticks(y0, y1, self.y_scale) {
            let y = py(v);
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
                MARGIN_LEFT + pw,
                MARGIN_LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, (series, pts)) in self.series.iter().zip(&mapped).enumerate() {
            let color = COLORS[i % COLORS.len()];
            for run in pts.split(|p| p.is_none()).filter(|r| !r.is_empty()) {
                let mut d = String::new();
                for p in run.iter().flatten() {
                    let _ = write!(d, "{:.2},{:.2} ", px(p.0), py(p.1));
                }
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    d.trim_end()
                );
            }
            let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
            let lx = MARGIN_LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn padded(lo: f64, hi: f64, scale: Scale) -> (f64, f64) {
    if hi > lo {
        return (lo, hi);
    }
    let d = match scale {
        Scale::Log => 0.5,
        Scale::Linear => 0.5 * lo.abs().max(1.0),
    };
    (lo - d, hi + d)
}

/// Tick positions (in mapped coordinates) and labels.
fn ticks(lo: f64, hi: f64, scale: Scale) -> Vec<(f64, String)> {
    match scale {
        Scale::Log => {
            let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
            let stride = ((b - a) / 8 + 1).max(1);
            (a..=b)
                .filter(|e| (e - a) % stride == 0)
                .map(|e| (e as f64, format!("1e{e}")))
                .collect()
        }
        Scale::Linear => {
            let raw = (hi - lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let first = (lo / step).ceil() as i64;
            let last = (hi / step).floor() as i64;
            (first..=last)
                .map(|i| {
                    let v = i as f64 * step;
                    (v, format!("{}", (v / step).round() * step))
                })
                .map(|(v, l)| (v, trim_label(&l)))
                .collect()
        }
    }
}

fn trim_label(l: &str) -> String {
    match l.parse::<f64>() {
        Ok(v) if v.abs() < 1e-12 => "0".into(),
        Ok(v) if v.abs() >= 1e4 || v.abs() < 1e-3 => format!("{v:e}"),
        Ok(v) => format!("{}", (v * 1e6).round() / 1e6),
        Err(_) => l.into(),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Plot {
        Plot::new("decay <e>", "t", "err", Scale::Linear, Scale::Log)
            .with(Series::new("a", vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 1e-3, 0.0, 1e-6]))
            .with(Series::new("b", vec![0.0, 3.0], vec![1.0, 1.0]))
    }

    #[test]
    fn renders_deterministically() {
        let a = sample().to_svg();
        assert_eq!(a, sample().to_svg());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("decay &lt;e&gt;"));
        // The zero on the log axis splits series `a` into two polylines.
        assert_eq!(a.matches("<polyline").count(), 3);
        assert!(a.contains(">1e-6<") && a.contains(">1e0<"));
    }

    #[test]
    fn empty_and_degenerate_inputs() {
        let p = Plot::new("e", "x", "y", Scale::Log, Scale::Log).with(Series::new("z", vec![0.0], vec![0.0]));
        assert!(!p.to_svg().contains("<polyline"));
        let q = Plot::new("c", "x", "y", Scale::Linear, Scale::Linear).with(Series::new("c", vec![1.0, 1.0], vec![2.0, 2.0]));
        assert!(q.to_svg().contains("<polyline"));
    }
}
