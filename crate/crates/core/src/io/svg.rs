//! Deterministic SVG scenes: unfolding strips, surface flowers, cover
//! panels and tile heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::billiard::Trajectory;
use crate::fold::CoveringMap;
use crate::geometry::{Polygon, Vec2};
use crate::surface::{glued_offset, TranslationSurface};
use crate::tiles::TileReport;
use crate::unfold::{unfold_chain, unfold_trajectory, UnfoldError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Style {
    pub stroke: String,
    pub fill: String,
    pub width: f64,
    pub dashed: bool,
}

impl Style {
    pub fn outline() -> Self {
        Self { stroke: "#000000".into(), fill: "none".into(), width: 0.006, dashed: false }
    }

    pub fn filled(fill: &str) -> Self {
        Self { stroke: "#000000".into(), fill: fill.into(), width: 0.006, dashed: false }
    }

    pub fn path(color: &str) -> Self {
        Self { stroke: color.into(), fill: "none".into(), width: 0.008, dashed: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "snake_case")]
pub enum Layer {
    Polygon {
        points: Vec<Vec2>,
        style: Style,
    },
    Polyline {
        points: Vec<Vec2>,
        style: Style,
    },
    Label {
        at: Vec2,
        text: String,
        size: f64,
    },
    /// Orientation arrow drawn as a segment with a head at `to`.
    Arrow {
        from: Vec2,
        to: Vec2,
        style: Style,
    },
    Cell {
        at: Vec2,
        size: Vec2,
        fill: String,
    },
}

/// Axis-aligned box in scene coordinates (y up).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub min: Vec2,
    pub max: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderScene {
    pub viewport: Viewport,
    pub layers: Vec<Layer>,
}

fn num(x: f64) -> String {
    let s = format!("{x:.5}");
    if s == "-0.00000" {
        "0.00000".into()
    } else {
        s
    }
}

impl RenderScene {
    pub fn empty() -> Self {
        Self { viewport: Viewport { min: Vec2::zeros(), max: Vec2::new(1.0, 1.0) }, layers: Vec::new() }
    }

    pub fn push(&mut self, l: Layer) {
        self.layers.push(l);
    }

    /// Set the viewport to the bounding box of all layers plus a margin.
    pub fn fit(&mut self, margin: f64) {
        let mut pts: Vec<Vec2> = Vec::new();
        for l in &self.layers {
            match l {
                Layer::Polygon { points, .. } | Layer::Polyline { points, .. } => pts.extend(points),
                Layer::Label { at, .. } => pts.push(*at),
                Layer::Arrow { from, to, .. } => pts.extend([*from, *to]),
                Layer::Cell { at, size, .. } => pts.extend([*at, at + size]),
            }
        }
        if pts.is_empty() {
            return;
        }
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in &pts {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let m = Vec2::new(margin, margin);
        self.viewport = Viewport { min: lo - m, max: hi + m };
    }

    fn y(&self, y: f64) -> f64 {
        self.viewport.max.y + self.viewport.min.y - y
    }

    fn pt(&self, p: Vec2) -> String {
        format!("{},{}", num(p.x), num(self.y(p.y)))
    }

    fn style_attrs(s: &Style) -> String {
        let dash = if s.dashed { format!(" stroke-dasharray=\"{} {}\"", num(4.0 * s.width), num(3.0 * s.width)) } else { String::new() };
        format!("stroke=\"{}\" fill=\"{}\" stroke-width=\"{}\"{dash}", s.stroke, s.fill, num(s.width))
    }

    pub fn to_svg(&self) -> String {
        let v = &self.viewport;
        let size = v.max - v.min;
        let mut out = String::new();
        writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
        writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">",
            num(v.min.x),
            num(v.min.y),
            num(size.x),
            num(size.y),
            (size.x / size.x.max(size.y) * 800.0).round(),
            (size.y / size.x.max(size.y) * 800.0).round()
        )
        .unwrap();
        for l in &self.layers {
            match l {
                Layer::Polygon { points, style } => {
                    let pts: Vec<String> = points.iter().map(|p| self.pt(*p)).collect();
                    writeln!(out, "<polygon points=\"{}\" {}/>", pts.join(" "), Self::style_attrs(style)).unwrap();
                }
                Layer::Polyline { points, style } => {
                    let pts: Vec<String> = points.iter().map(|p| self.pt(*p)).collect();
                    writeln!(out, "<polyline points=\"{}\" {}/>", pts.join(" "), Self::style_attrs(style)).unwrap();
                }
                Layer::Label { at, text, size } => {
                    writeln!(
                        out,
                        "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\">{}</text>",
                        num(at.x),
                        num(self.y(at.y)),
                        num(*size),
                        escape(text)
                    )
                    .unwrap();
                }
                Layer::Arrow { from, to, style } => {
                    let d = to - from;
                    let len = d.norm();
                    if len == 0.0 {
                        continue;
                    }
                    let (u, n) = (d / len, Vec2::new(-d.y, d.x) / len);
                    let mid = from + d * 0.5;
                    let head = 0.12 * len.min(1.0);
                    let tip = mid + u * head * 0.5;
                    let (a, b) = (tip - u * head + n * head * 0.5, tip - u * head - n * head * 0.5);
                    writeln!(out, "<polyline points=\"{} {} {}\" {}/>", self.pt(a), self.pt(tip), self.pt(b), Self::style_attrs(style))
                        .unwrap();
                }
                Layer::Cell { at, size, fill } => {
                    writeln!(
                        out,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                        num(at.x),
                        num(self.y(at.y + size.y)),
                        num(size.x),
                        num(size.y),
                        fill
                    )
                    .unwrap();
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(scene: &RenderScene, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, scene.to_svg())
}

fn centroid(pts: &[Vec2]) -> Vec2 {
    pts.iter().fold(Vec2::zeros(), |a, p| a + p) / pts.len() as f64
}

fn label_edges(scene: &mut RenderScene, pts: &[Vec2], size: f64) {
    let c = centroid(pts);
    for i in 0..pts.len() {
        let mid = (pts[i] + pts[(i + 1) % pts.len()]) * 0.5;
        scene.push(Layer::Label { at: mid + (c - mid) * 0.25, text: (i + 1).to_string(), size });
    }
}

/// Reflected copies along a trajectory, each with its edge labels, and the
/// straightened trajectory as a dashed line.
pub fn unfolding_strip(p: &Polygon, tr: &Trajectory) -> Result<RenderScene, UnfoldError> {
    let mut seq = vec![tr.start.edge];
    seq.extend(tr.hit_edges());
    let chain = unfold_chain(p, &seq)?;
    let mut scene = RenderScene::empty();
    let size = 0.06 * p.edge_length(1).max(p.edge_length(3));
    for copy in &chain.copies {
        scene.push(Layer::Polygon { points: copy.clone(), style: Style::outline() });
        label_edges(&mut scene, copy, size);
    }
    let line = unfold_trajectory(p, tr);
    scene.push(Layer::Polyline { points: vec![line[0], *line.last().unwrap()], style: Style::path("#c00000") });
    scene.fit(0.05);
    Ok(scene)
}

/// Copies around each cone point over polygon vertex `vertex`, developed by
/// the gluing walk and laid out left to right starting at `origin`.
fn flowers(s: &TranslationSurface, vertex: usize, origin: Vec2, scene: &mut RenderScene, fill: &str) -> f64 {
    let n = s.polygon.edge_count();
    let before = if vertex == 1 { n } else { vertex - 1 };
    let radius = s.polygon.vertices().iter().map(|v| (v - s.polygon.vertex(vertex)).norm()).fold(0.0, f64::max);
    let spacing = 2.4 * radius;
    let mut x = origin.x;
    for cp in s.cone_points.iter().filter(|c| c.vertex_class == vertex) {
        let first = cp.wedges[0].copy;
        let centre = s.element(first).apply(s.polygon.vertex(vertex));
        let mut offset = Vec2::new(x + radius, origin.y) - centre;
        let mut across = vertex;
        for (j, w) in cp.wedges.iter().enumerate() {
            let g = s.element(w.copy);
            let pts: Vec<Vec2> = s.polygon.vertices().iter().map(|v| g.apply(*v) + offset).collect();
            let shade = if j % 2 == 0 { fill } else { "#ffffff" };
            scene.push(Layer::Polygon { points: pts.clone(), style: Style::filled(shade) });
            for e in (1..=n).filter(|&e| e != vertex && e != before) {
                let (a, b) = (pts[e - 1], pts[e % n]);
                scene.push(Layer::Arrow { from: a, to: b, style: Style::outline() });
            }
            if j + 1 < cp.wedges.len() {
                let next = cp.wedges[j + 1].copy;
                offset = glued_offset(&s.polygon, &g, &s.element(next), offset, across);
                across = if across == vertex { before } else { vertex };
            }
        }
        x += spacing;
    }
    x - origin.x
}

/// The surface as flowers of copies around its apex cone points.
pub fn surface_scene(s: &TranslationSurface) -> RenderScene {
    let mut scene = RenderScene::empty();
    flowers(s, 2, Vec2::zeros(), &mut scene, "#d0d0d0");
    scene.fit(0.1);
    scene
}

/// Source and target surfaces side by side.
pub fn cover_scene(c: &CoveringMap) -> RenderScene {
    let mut scene = RenderScene::empty();
    let w = flowers(&c.source, 2, Vec2::zeros(), &mut scene, "#d0d0d0");
    let top = c.source.polygon.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max) * 1.4;
    scene.push(Layer::Label { at: Vec2::new(w * 0.4, top), text: "R(T)".into(), size: 0.15 });
    let w2 = flowers(&c.target, 2, Vec2::new(w + 0.5, 0.0), &mut scene, "#d0d0d0");
    scene.push(Layer::Label { at: Vec2::new(w + 0.5 + w2 * 0.4, top), text: "R(T')".into(), size: 0.15 });
    scene.push(Layer::Label { at: Vec2::new(w + 0.25, -top), text: format!("degree {}", c.degree), size: 0.1 });
    scene.fit(0.1);
    scene
}

/// Membership bitmap over `(θ₁, θ₂)`.
pub fn tile_heatmap(r: &TileReport) -> RenderScene {
    let mut scene = RenderScene::empty();
    let (n1, n2) = r.grid.resolution;
    let dx = (r.grid.theta1.1 - r.grid.theta1.0) / n1 as f64;
    let dy = (r.grid.theta2.1 - r.grid.theta2.0) / n2 as f64;
    for i in 0..n1 {
        for j in 0..n2 {
            let s = r.sample(i, j);
            let fill = if s.inside { "#1f4e9c" } else { "#f0f0f0" };
            let at = Vec2::new(r.grid.theta1.0 + i as f64 * dx, r.grid.theta2.0 + j as f64 * dy);
            scene.push(Layer::Cell { at, size: Vec2::new(dx, dy), fill: fill.into() });
        }
    }
    let (a, b) = (r.grid.theta1.0.max(r.grid.theta2.0), r.grid.theta1.1.min(r.grid.theta2.1));
    if a < b {
        scene.push(Layer::Polyline { points: vec![Vec2::new(a, a), Vec2::new(b, b)], style: Style::path("#c00000") });
    }
    scene.fit(0.0);
    scene
}
