//! Log-log learning-curve panels, one per model family.

use std::collections::BTreeMap;
use std::fmt::Write;

use benchpipe::bench::{best_per_family, LearningCurve};

const PANEL_W: f64 = 340.0;
const PANEL_H: f64 = 280.0;
const PER_ROW: usize = 3;
const MARGIN: (f64, f64, f64, f64) = (56.0, 16.0, 34.0, 44.0); // left, right, top, bottom
const PALETTE: [&str; 8] = [
    "#1b6ca8", "#d1495b", "#2a9d8f", "#e9a03b", "#6a4c93", "#8d6e63", "#00798c", "#c2185b",
];

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "NaN".into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One row per curve point: `model,family,n_train,rmse_mean,rmse_std,repeats,learning_rate`.
pub fn curves_csv(curves: &[LearningCurve]) -> String {
    let mut out = String::from("model,family,n_train,rmse_mean,rmse_std,repeats,learning_rate\n");
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.model,
                c.family,
                p.n_train,
                num(p.mean),
                num(p.std),
                p.repeats,
                num(c.learning_rate)
            );
        }
    }
    out
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Axis {
        let logs: Vec<f64> = values.filter(|v| *v > 0.0 && v.is_finite()).map(f64::log10).collect();
        let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        let pad = ((hi - lo) * 0.05).max(0.1);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    /// Position in `[0, 1]` of a positive value.
    fn unit(&self, v: f64) -> f64 {
        (v.log10() - self.lo) / (self.hi - self.lo)
    }

    fn decades(&self) -> Vec<i32> {
        (self.lo.ceil() as i32..=self.hi.floor() as i32).collect()
    }
}

fn panel(out: &mut String, family: &str, curves: &[&LearningCurve], best: Option<&str>, x0: f64, y0: f64) {
    let (ml, mr, mt, mb) = MARGIN;
    let (w, h) = (PANEL_W - ml - mr, PANEL_H - mt - mb);
    let (left, top) = (x0 + ml, y0 + mt);
    let points = || curves.iter().flat_map(|c| c.points.iter());
    let xa = Axis::fit(points().map(|p| p.n_train as f64));
    let ya = Axis::fit(points().map(|p| p.mean));
    let px = |n: f64| left + xa.unit(n) * w;
    let py = |v: f64| top + (1.0 - ya.unit(v)) * h;

    let _ = writeln!(
        out,
        r#"<g class="panel"><text x="{:.1}" y="{:.1}" font-size="13" font-weight="bold">{}</text>"#,
        left,
        y0 + 20.0,
        escape(family)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#444"/>"##
    );
    for k in xa.decades() {
        let x = px(10f64.powi(k));
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">1e{k}</text>"##,
            top + h,
            top + h + 4.0,
            top + h + 15.0
        );
    }
    for k in ya.decades() {
        let y = py(10f64.powi(k));
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{left:.1}" y2="{y:.1}" stroke="#444"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">1e{k}</text>"##,
            left - 4.0,
            left - 6.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">training set size</text>"#,
        left + w / 2.0,
        top + h + 32.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">test RMSE</text>"#,
        x0 + 14.0,
        top + h / 2.0,
        x0 + 14.0,
        top + h / 2.0
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let width = if best == Some(c.model.as_str()) { 3.0 } else { 1.0 };
        let coords: Vec<String> = c
            .points
            .iter()
            .filter(|p| p.mean > 0.0 && p.mean.is_finite())
            .map(|p| format!("{:.1},{:.1}", px(p.n_train as f64), py(p.mean)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline data-model="{}" points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            escape(&c.model),
            coords.join(" ")
        );
        for xy in &coords {
            let (x, y) = xy.split_once(',').expect("formatted pair");
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="2" fill="{color}"/>"#);
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end" fill="{color}">{}</text>"#,
            left + w - 4.0,
            top + 12.0 + 12.0 * i as f64,
            escape(&c.model)
        );
    }
    out.push_str("</g>\n");
}

pub fn render_svg(curves: &[LearningCurve]) -> String {
    let mut families: BTreeMap<&str, Vec<&LearningCurve>> = BTreeMap::new();
    for c in curves {
        families.entry(&c.family).or_default().push(c);
    }
    let best: BTreeMap<&str, &str> = best_per_family(curves)
        .into_iter()
        .map(|c| (c.family.as_str(), c.model.as_str()))
        .collect();
    let cols = families.len().clamp(1, PER_ROW);
    let rows = families.len().div_ceil(PER_ROW).max(1);
    let (width, height) = (PANEL_W * cols as f64, PANEL_H * rows as f64);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, (family, members)) in families.iter().enumerate() {
        let x0 = PANEL_W * (i % PER_ROW) as f64;
        let y0 = PANEL_H * (i / PER_ROW) as f64;
        panel(&mut out, family, members, best.get(family).copied(), x0, y0);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use benchpipe::bench::CurvePoint;

    fn curve(model: &str, family: &str, means: &[(usize, f64)]) -> LearningCurve {
        LearningCurve {
            model: model.into(),
            family: family.into(),
            points: means
                .iter()
                .map(|&(n_train, mean)| CurvePoint {
                    n_train,
                    mean,
                    std: 0.0,
                    repeats: 1,
                })
                .collect(),
            learning_rate: f64::NAN,
        }
    }

    #[test]
    fn one_polyline_per_model_and_thick_winner() {
        let curves = vec![
            curve("a_x", "a", &[(10, 2.0), (100, 1.0)]),
            curve("a_y", "a", &[(10, 3.0), (100, 0.5)]),
            curve("b_z", "b", &[(10, 1.0)]),
        ];
        let svg = render_svg(&curves);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches(r#"class="panel""#).count(), 2);
        let thick: Vec<&str> = svg.lines().filter(|l| l.contains(r#"stroke-width="3""#)).collect();
        assert_eq!(thick.len(), 2);
        assert!(thick[0].contains("a_y"));
        assert_eq!(svg, render_svg(&curves));
    }

    #[test]
    fn csv_rows_match_points() {
        let curves = vec![curve("a_x", "a", &[(10, 2.0), (100, 1.0)]), curve("b_z", "b", &[(10, 1.0)])];
        let csv = curves_csv(&curves);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(3).unwrap().ends_with(",NaN"));
    }
}
