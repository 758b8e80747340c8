//! Static SVG line charts: a grid of panels sharing axes, one colored
//! polyline per series.

use std::fmt::Write;

use crate::connectivity::{SpectralConnectivity, SpectralKind};

pub const MAGENTA: &str = "#c2185b";
pub const GREEN: &str = "#1b7837";
pub const LIGHT_GREEN: &str = "#7fbf7b";

const PANEL_W: f64 = 150.0;
const PANEL_H: f64 = 100.0;
const GAP: f64 = 14.0;
const LEFT: f64 = 46.0;
const TOP: f64 = 56.0;
const BOTTOM: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub row: usize,
    pub col: usize,
    pub title: String,
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub rows: usize,
    pub cols: usize,
    pub panels: Vec<Panel>,
}

impl LinePlot {
    /// One panel per channel pair: every ordered pair `from → to` at
    /// (row = receiver, col = sender) for iCoh, the upper triangle for
    /// coherence. Each input contributes one series per panel.
    pub fn spectral(title: &str, x_label: &str, inputs: &[(&str, &str, &SpectralConnectivity)]) -> LinePlot {
        let Some((_, _, first)) = inputs.first() else {
            return LinePlot {
                title: title.to_string(),
                x_label: x_label.to_string(),
                x_range: (0.0, 1.0),
                y_range: (0.0, 1.0),
                rows: 0,
                cols: 0,
                panels: Vec::new(),
            };
        };
        let p = first.channels();
        let directed = first.kind == SpectralKind::Icoh;
        let mut panels = Vec::new();
        for to in 0..p {
            for from in 0..p {
                if to == from || (!directed && from < to) {
                    continue;
                }
                let (row, col, name) = if directed {
                    (to, from, format!("{} → {}", from + 1, to + 1))
                } else {
                    (to, from - 1, format!("{} – {}", to + 1, from + 1))
                };
                let series = inputs
                    .iter()
                    .map(|(label, color, s)| Series {
                        label: label.to_string(),
                        color: color.to_string(),
                        points: s.frequencies.iter().copied().zip(s.curve(to, from)).collect(),
                    })
                    .collect();
                panels.push(Panel {
                    row,
                    col,
                    title: name,
                    series,
                });
            }
        }
        let f = &first.frequencies;
        let x_range = (f.first().copied().unwrap_or(0.0), f.last().copied().unwrap_or(1.0));
        LinePlot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            x_range,
            y_range: (0.0, 1.0),
            rows: if directed { p } else { p - 1 },
            cols: if directed { p } else { p - 1 },
            panels,
        }
    }

    pub fn to_svg(&self) -> String {
        let legend_w: f64 = self.panels.first().map_or(0.0, |p| {
            p.series.iter().map(|s| 30.0 + 6.0 * s.label.chars().count() as f64).sum()
        });
        let width = (LEFT + self.cols as f64 * (PANEL_W + GAP) + GAP)
            .max(LEFT + 7.5 * self.title.chars().count() as f64)
            .max(LEFT + legend_w);
        let height = TOP + self.rows as f64 * (PANEL_H + GAP) + BOTTOM;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="10">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{LEFT}" y="18" font-size="13">{}</text>"#, escape(&self.title));

        let mut legend_x = LEFT;
        if let Some(panel) = self.panels.first() {
            for series in &panel.series {
                let _ = writeln!(
                    s,
                    r#"<line x1="{legend_x}" y1="34" x2="{:.0}" y2="34" stroke="{}" stroke-width="2"/><text x="{:.0}" y="38">{}</text>"#,
                    legend_x + 18.0,
                    series.color,
                    legend_x + 22.0,
                    escape(&series.label)
                );
                legend_x += 30.0 + 6.0 * series.label.chars().count() as f64;
            }
        }

        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let x_span = if x1 > x0 { x1 - x0 } else { 1.0 };
        let y_span = if y1 > y0 { y1 - y0 } else { 1.0 };
        for panel in &self.panels {
            let px = LEFT + panel.col as f64 * (PANEL_W + GAP);
            let py = TOP + panel.row as f64 * (PANEL_H + GAP);
            let _ = writeln!(
                s,
                r##"<rect x="{px:.1}" y="{py:.1}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#999"/>"##
            );
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, px + 4.0, py + 11.0, escape(&panel.title));
            if !self.panels.iter().any(|q| q.row == panel.row && q.col < panel.col) {
                for (v, y) in [(y0, py + PANEL_H), (y1, py)] {
                    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, px - 3.0, y + 3.0, tick(v));
                }
            }
            if !self.panels.iter().any(|q| q.col == panel.col && q.row > panel.row) {
                for (v, x, anchor) in [(x0, px, "start"), (x1, px + PANEL_W, "end")] {
                    let _ = writeln!(
                        s,
                        r#"<text x="{x:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#,
                        py + PANEL_H + 11.0,
                        tick(v)
                    );
                }
            }
            for series in &panel.series {
                let mut pts = String::new();
                for &(x, y) in &series.points {
                    let sx = px + (x - x0) / x_span * PANEL_W;
                    let sy = py + PANEL_H - ((y - y0) / y_span).clamp(0.0, 1.0) * PANEL_H;
                    let _ = write!(pts, "{sx:.2},{sy:.2} ");
                }
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#,
                    pts.trim_end(),
                    series.color
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + (width - LEFT) / 2.0,
            height - 8.0,
            escape(&self.x_label)
        );
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn fake(kind: SpectralKind, p: usize) -> SpectralConnectivity {
        SpectralConnectivity {
            kind,
            frequencies: vec![1.0, 2.0, 3.0],
            values: (0..3).map(|k| DMatrix::from_fn(p, p, |i, j| (i + j + k) as f64 / 10.0)).collect(),
        }
    }

    #[test]
    fn directed_grid_has_all_ordered_pairs() {
        let s = fake(SpectralKind::Icoh, 5);
        let plot = LinePlot::spectral("iCoh", "Hz", &[("a", MAGENTA, &s), ("b", GREEN, &s)]);
        assert_eq!(plot.panels.len(), 20);
        assert_eq!((plot.rows, plot.cols), (5, 5));
        let panel = plot.panels.iter().find(|p| p.title == "2 → 3").unwrap();
        assert_eq!((panel.row, panel.col), (2, 1));
        assert_eq!(panel.series.len(), 2);
        let svg = plot.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 40);
        assert!(svg.contains(MAGENTA) && svg.contains(GREEN));
    }

    #[test]
    fn symmetric_grid_is_upper_triangle() {
        let plot = LinePlot::spectral("coh", "Hz", &[("a", MAGENTA, &fake(SpectralKind::CoherenceSquared, 3))]);
        let titles: Vec<&str> = plot.panels.iter().map(|p| p.title.as_str()).collect();
        assert_eq!(titles, ["1 – 2", "1 – 3", "2 – 3"]);
        assert_eq!((plot.rows, plot.cols), (2, 2));
    }

    #[test]
    fn rendering_is_deterministic() {
        let s = fake(SpectralKind::Icoh, 3);
        let a = LinePlot::spectral("t", "x", &[("a", MAGENTA, &s)]).to_svg();
        let b = LinePlot::spectral("t", "x", &[("a", MAGENTA, &s)]).to_svg();
        assert_eq!(a, b);
    }
}
