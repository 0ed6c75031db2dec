//! Minimal SVG rendering of regions in the `(θ₁, θ₀)` plane.

use std::fmt::Write;

use crate::polytope::ConvexRegion2D;
use crate::rational::Rational;

const SIZE: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// One filled polygon.
#[derive(Debug, Clone)]
pub struct Layer {
    pub region: ConvexRegion2D,
    pub fill: String,
    pub label: Option<String>,
    pub corner_labels: bool,
}

impl Layer {
    pub fn new(region: ConvexRegion2D, fill: impl Into<String>) -> Self {
        Layer { region, fill: fill.into(), label: None, corner_labels: true }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn without_corners(mut self) -> Self {
        self.corner_labels = false;
        self
    }
}

/// A dashed constraint line `a·θ₁ + b·θ₀ = c`.
#[derive(Debug, Clone)]
pub struct GuideLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub label: String,
}

#[derive(Debug, Clone, Default)]
pub struct Figure {
    pub title: String,
    pub layers: Vec<Layer>,
    pub guides: Vec<GuideLine>,
}

fn sx(x: f64) -> f64 {
    MARGIN + x * SIZE
}

fn sy(y: f64) -> f64 {
    MARGIN + (1.0 - y) * SIZE
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt3(r: &Rational) -> String {
    r.to_decimal_string(3)
}

/// Endpoints of a line clipped to the unit square.
fn line_in_unit_square(g: &GuideLine) -> Option<((f64, f64), (f64, f64))> {
    let mut pts = Vec::new();
    if g.b.abs() > 1e-12 {
        for x in [0.0, 1.0] {
            let y = (g.c - g.a * x) / g.b;
            if (-1e-12..=1.0 + 1e-12).contains(&y) {
                pts.push((x, y));
            }
        }
    }
    if g.a.abs() > 1e-12 {
        for y in [0.0, 1.0] {
            let x = (g.c - g.b * y) / g.a;
            if (-1e-12..=1.0 + 1e-12).contains(&x) {
                pts.push((x, y));
            }
        }
    }
    pts.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    pts.dedup_by(|p, q| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
    (pts.len() >= 2).then(|| (pts[0], pts[pts.len() - 1]))
}

impl Figure {
    pub fn new(title: impl Into<String>) -> Self {
        Figure { title: title.into(), ..Default::default() }
    }

    pub fn layer(mut self, layer: Layer) -> Self {
        self.layers.push(layer);
        self
    }

    pub fn guide(mut self, a: f64, b: f64, c: f64, label: impl Into<String>) -> Self {
        self.guides.push(GuideLine { a, b, c, label: label.into() });
        self
    }

    pub fn render(&self) -> String {
        let total = SIZE + 2.0 * MARGIN;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<title>{}</title>"#, escape(&self.title));
        let _ = writeln!(s, r##"<rect width="{total}" height="{total}" fill="#ffffff"/>"##);

        // The simplex θ₀ + θ₁ <= 1.
        let _ = writeln!(
            s,
            r##"<polygon class="simplex" points="{},{} {},{} {},{}" fill="none" stroke="#999999" stroke-dasharray="4 3"/>"##,
            sx(0.0),
            sy(0.0),
            sx(1.0),
            sy(0.0),
            sx(0.0),
            sy(1.0)
        );

        for layer in &self.layers {
            let points: Vec<String> =
                layer.region.vertices().iter().map(|v| format!("{:.2},{:.2}", sx(v.x.to_f64()), sy(v.y.to_f64()))).collect();
            let element = match layer.region.len() {
                1 => format!(
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                    sx(layer.region.vertices()[0].x.to_f64()),
                    sy(layer.region.vertices()[0].y.to_f64()),
                    layer.fill
                ),
                2 => format!(r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="3"/>"#, points.join(" "), layer.fill),
                _ => {
                    format!(r#"<polygon points="{}" fill="{}" fill-opacity="0.85" stroke="{}"/>"#, points.join(" "), layer.fill, layer.fill)
                }
            };
            let class = layer.label.as_deref().map(escape).unwrap_or_default();
            let _ = writeln!(s, r#"<g class="region" data-label="{class}">{element}</g>"#);
        }

        for g in &self.guides {
            if let Some(((x0, y0), (x1, y1))) = line_in_unit_square(g) {
                let _ = writeln!(
                    s,
                    r##"<line class="guide" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#cc3333" stroke-dasharray="6 3"/>"##,
                    sx(x0),
                    sy(y0),
                    sx(x1),
                    sy(y1)
                );
                let _ =
                    writeln!(s, r##"<text x="{:.2}" y="{:.2}" fill="#cc3333">{}</text>"##, sx(x1) + 4.0, sy(y1) - 4.0, escape(&g.label));
            }
        }

        for layer in self.layers.iter().filter(|l| l.corner_labels) {
            for v in layer.region.vertices() {
                if v.x.is_zero() && v.y.is_zero() {
                    continue;
                }
                let _ = writeln!(
                    s,
                    r#"<text class="corner" x="{:.2}" y="{:.2}">({}, {})</text>"#,
                    sx(v.x.to_f64()) + 4.0,
                    sy(v.y.to_f64()) - 4.0,
                    fmt3(&v.x),
                    fmt3(&v.y)
                );
            }
        }

        // Axes.
        let _ = writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000"/>"##, sx(0.0), sy(0.0), sx(1.1), sy(0.0));
        let _ = writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000"/>"##, sx(0.0), sy(0.0), sx(0.0), sy(1.1));
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#, sx(t), sy(0.0) + 16.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t}</text>"#, sx(0.0) - 6.0, sy(t) + 4.0);
        }
        let _ = writeln!(
            s,
            r#"<text class="axis-x" x="{:.2}" y="{:.2}" text-anchor="middle">θ₁ = P(a1 strictly preferred)</text>"#,
            sx(0.5),
            sy(0.0) + 36.0
        );
        let _ = writeln!(
            s,
            r#"<text class="axis-y" x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">θ₀ = P(a0 strictly preferred)</text>"#,
            sx(0.0) - 38.0,
            sy(0.5),
            sx(0.0) - 38.0,
            sy(0.5)
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, total / 2.0, escape(&self.title));
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn renders_axes_and_corners() {
        let rect = ConvexRegion2D::rectangle(&q("0.662"), &q("0.338")).unwrap();
        let svg = Figure::new("Race 1")
            .layer(Layer::new(rect, "#444444").labelled("no assumptions"))
            .guide(1.0, 1.0, 0.9, "θ₀+θ₁ = 0.9")
            .render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("θ₁ = P(a1 strictly preferred)"));
        assert!(svg.contains("θ₀ = P(a0 strictly preferred)"));
        assert!(svg.contains("(0.662, 0.338)"));
        assert!(svg.contains(r#"class="guide""#));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn clips_guides_to_unit_square() {
        let g = GuideLine { a: 1.0, b: 1.0, c: 1.0, label: String::new() };
        let ((x0, y0), (x1, y1)) = line_in_unit_square(&g).unwrap();
        assert_eq!((x0, y0, x1, y1), (0.0, 1.0, 1.0, 0.0));
        let vertical = GuideLine { a: 0.0, b: 1.0, c: 0.207, label: String::new() };
        assert!(line_in_unit_square(&vertical).is_some());
        let outside = GuideLine { a: 1.0, b: 0.0, c: 2.0, label: String::new() };
        assert!(line_in_unit_square(&outside).is_none());
    }
}
