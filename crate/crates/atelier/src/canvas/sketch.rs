//! Hand-drawn stroke filter.
//!
//! Stroked outlines are resampled at a fixed interval and every sample is
//! pushed sideways by smooth seeded value noise, giving the wobble of a
//! pen without ever moving a vertex farther than
//! `roughness * segment_length * 0.5` from the original outline.
//!
//! The noise is fully specified so renders agree everywhere: knot `i` of
//! the stream for primitive `p`, pass `s`, outline `o` is
//!
//! ```text
//! h = mix(seed ^ mix(p ^ mix((s << 32 | o) ^ mix(i))))      (splitmix64 finalizer)
//! knot = (h >> 11) / 2^53 * 2 - 1                            in [-1, 1)
//! ```
//!
//! and between knots (spaced one `segment_length` of arc) the value is
//! interpolated with the smoothstep polynomial `t^2 (3 - 2t)`.

use serde::{Deserialize, Serialize};

use super::{CanvasError, Ellipse, Group, Path, PathSeg, Point, Polyline, Primitive, Scene, Style};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SketchStyle {
    /// Jitter amount in [0, 1]; 0 reproduces the resampled input exactly.
    #[serde(default = "default_roughness")]
    pub roughness: f64,
    /// 1 or 2 overlapping strokes per outline.
    #[serde(default = "default_passes")]
    pub passes: u8,
    /// Resample interval along each outline, artwork units.
    #[serde(default = "default_segment_length")]
    pub segment_length: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_roughness() -> f64 {
    0.6
}

fn default_passes() -> u8 {
    2
}

fn default_segment_length() -> f64 {
    3.0
}

impl Default for SketchStyle {
    fn default() -> Self {
        SketchStyle {
            roughness: default_roughness(),
            passes: default_passes(),
            segment_length: default_segment_length(),
            seed: 0,
        }
    }
}

impl SketchStyle {
    pub fn validate(&self) -> Result<(), CanvasError> {
        if !(0.0..=1.0).contains(&self.roughness) {
            return Err(CanvasError::InvalidSketchStyle(format!(
                "roughness {} outside [0, 1]",
                self.roughness
            )));
        }
        if self.passes != 1 && self.passes != 2 {
            return Err(CanvasError::InvalidSketchStyle(format!(
                "passes must be 1 or 2, got {}",
                self.passes
            )));
        }
        if !(self.segment_length > 0.0 && self.segment_length.is_finite()) {
            return Err(CanvasError::InvalidSketchStyle(
                "segment_length must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Maximum perpendicular displacement of any resampled vertex.
    pub fn displacement_bound(&self) -> f64 {
        self.roughness * self.segment_length * 0.5
    }
}

/// A resampled outline; `closed` means the last point equals the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Outline {
    pub points: Vec<Point>,
    pub closed: bool,
}

/// Replace every stroked outline with wobbled polylines. Fills and text
/// are untouched; unstroked primitives pass through unchanged. The result
/// depends only on `(scene, style)`.
pub fn sketchify(scene: &Scene, style: &SketchStyle) -> Result<Scene, CanvasError> {
    style.validate()?;
    let mut ordinal = 0u64;
    let root = sketch_group(&scene.root, style, &mut ordinal);
    Ok(Scene {
        width: scene.width,
        height: scene.height,
        root,
        metadata: scene.metadata.clone(),
    })
}

fn sketch_group(g: &Group, style: &SketchStyle, ordinal: &mut u64) -> Group {
    let mut out = Group {
        children: Vec::with_capacity(g.children.len()),
        transform: g.transform,
        class: g.class.clone(),
    };
    for child in &g.children {
        match child {
            Primitive::Group(sub) => {
                out.children
                    .push(Primitive::Group(sketch_group(sub, style, ordinal)));
            }
            other => {
                let id = *ordinal;
                *ordinal += 1;
                sketch_leaf(other, style, id, &mut out.children);
            }
        }
    }
    out
}

fn sketch_leaf(p: &Primitive, style: &SketchStyle, id: u64, out: &mut Vec<Primitive>) {
    let (prim_style, strokable) = match p {
        Primitive::Path(path) => (path.style, true),
        Primitive::Ellipse(e) => (e.style, true),
        Primitive::Polyline(pl) => (pl.style, true),
        _ => (Style::default(), false),
    };
    let Some(stroke) = prim_style.stroke.filter(|_| strokable) else {
        out.push(p.clone());
        return;
    };

    // Keep the fill as an unstroked copy of the original shape.
    if prim_style.fill.is_some() {
        let mut filled = p.clone();
        let style_mut = match &mut filled {
            Primitive::Path(path) => &mut path.style,
            Primitive::Ellipse(e) => &mut e.style,
            Primitive::Polyline(pl) => &mut pl.style,
            _ => unreachable!(),
        };
        style_mut.stroke = None;
        out.push(filled);
    }

    let outlines = primitive_outlines(p, style.segment_length);
    for pass in 0..style.passes as u64 {
        for (oi, outline) in outlines.iter().enumerate() {
            let points = displace(outline, style, id, pass, oi as u64);
            out.push(Primitive::Polyline(Polyline {
                points,
                style: Style {
                    fill: None,
                    stroke: Some(stroke),
                },
            }));
        }
    }
}

fn noise_knot(style: &SketchStyle, prim: u64, pass: u64, outline: u64, knot: u64) -> f64 {
    let h = derive_seed(style.seed, prim, (pass << 32) | outline, knot);
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn displace(outline: &Outline, style: &SketchStyle, prim: u64, pass: u64, oi: u64) -> Vec<Point> {
    let pts = &outline.points;
    let n = pts.len();
    let bound = style.displacement_bound();
    // Arc length of each vertex along the resampled outline.
    let mut arc = Vec::with_capacity(n);
    let mut s = 0.0;
    arc.push(0.0);
    for i in 1..n {
        s += pts[i].dist(&pts[i - 1]);
        arc.push(s);
    }
    let mut result = Vec::with_capacity(n);
    for i in 0..n {
        if outline.closed && i == n - 1 {
            result.push(result[0]);
            break;
        }
        let tangent = vertex_tangent(pts, i, outline.closed);
        let u = arc[i] / style.segment_length;
        let i0 = u.floor();
        let frac = u - i0;
        let k0 = noise_knot(style, prim, pass, oi, i0 as u64);
        let k1 = noise_knot(style, prim, pass, oi, i0 as u64 + 1);
        let v = k0 + (k1 - k0) * smoothstep(frac);
        let offset = v * bound;
        result.push(Point::new(
            pts[i].x - tangent.1 * offset,
            pts[i].y + tangent.0 * offset,
        ));
    }
    result
}

fn vertex_tangent(pts: &[Point], i: usize, closed: bool) -> (f64, f64) {
    let n = pts.len();
    let (prev, next) = if closed {
        // Last point duplicates the first; wrap around it.
        let m = n - 1;
        (pts[(i + m - 1) % m], pts[(i + 1) % m])
    } else {
        (pts[i.saturating_sub(1)], pts[(i + 1).min(n - 1)])
    };
    let dx = next.x - prev.x;
    let dy = next.y - prev.y;
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        (1.0, 0.0)
    } else {
        (dx / len, dy / len)
    }
}

/// Resampled outlines of a drawable primitive at uniform spacing of at
/// most `segment_length`. This is exactly the geometry `sketchify` emits
/// at roughness zero. Degenerate (zero-length) outlines are dropped.
pub fn primitive_outlines(p: &Primitive, segment_length: f64) -> Vec<Outline> {
    let raw: Vec<(Vec<Point>, bool)> = match p {
        Primitive::Path(path) => flatten_path(path, segment_length),
        Primitive::Ellipse(e) => vec![(flatten_ellipse(e, segment_length), true)],
        Primitive::Polyline(pl) => {
            let closed = pl.points.len() > 2 && pl.points[0] == pl.points[pl.points.len() - 1];
            vec![(pl.points.clone(), closed)]
        }
        _ => Vec::new(),
    };
    raw.into_iter()
        .filter_map(|(pts, closed)| resample(&pts, segment_length).map(|points| Outline { points, closed }))
        .collect()
}

/// Uniform arc-length resample with spacing `total / ceil(total / interval)`.
fn resample(pts: &[Point], interval: f64) -> Option<Vec<Point>> {
    if pts.len() < 2 {
        return None;
    }
    let mut cum = Vec::with_capacity(pts.len());
    let mut total = 0.0;
    cum.push(0.0);
    for i in 1..pts.len() {
        total += pts[i].dist(&pts[i - 1]);
        cum.push(total);
    }
    if total == 0.0 {
        return None;
    }
    let n = (total / interval).ceil().max(1.0) as usize;
    let spacing = total / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut seg = 0usize;
    for k in 0..=n {
        let target = (k as f64 * spacing).min(total);
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let seg_len = cum[seg + 1] - cum[seg];
        let t = if seg_len == 0.0 {
            0.0
        } else {
            (target - cum[seg]) / seg_len
        };
        out.push(Point::new(
            pts[seg].x + (pts[seg + 1].x - pts[seg].x) * t,
            pts[seg].y + (pts[seg + 1].y - pts[seg].y) * t,
        ));
    }
    Some(out)
}

fn flatten_path(path: &Path, interval: f64) -> Vec<(Vec<Point>, bool)> {
    let mut subpaths: Vec<Vec<Point>> = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    let mut cursor = Point::new(0.0, 0.0);
    for seg in &path.segments {
        match seg {
            PathSeg::MoveTo(p) => {
                if current.len() > 1 {
                    subpaths.push(std::mem::take(&mut current));
                } else {
                    current.clear();
                }
                current.push(*p);
                cursor = *p;
            }
            PathSeg::LineTo(p) => {
                current.push(*p);
                cursor = *p;
            }
            PathSeg::QuadTo(c, p) => {
                let approx = cursor.dist(c) + c.dist(p);
                let pieces = curve_pieces(approx, interval);
                for k in 1..=pieces {
                    let t = k as f64 / pieces as f64;
                    current.push(quad_point(cursor, *c, *p, t));
                }
                cursor = *p;
            }
            PathSeg::CubicTo(c1, c2, p) => {
                let approx = cursor.dist(c1) + c1.dist(c2) + c2.dist(p);
                let pieces = curve_pieces(approx, interval);
                for k in 1..=pieces {
                    let t = k as f64 / pieces as f64;
                    current.push(cubic_point(cursor, *c1, *c2, *p, t));
                }
                cursor = *p;
            }
        }
    }
    if current.len() > 1 {
        subpaths.push(current);
    }
    subpaths
        .into_iter()
        .map(|pts| {
            let closed = pts.len() > 2 && pts[0] == pts[pts.len() - 1];
            (pts, closed)
        })
        .collect()
}

fn curve_pieces(approx_len: f64, interval: f64) -> usize {
    ((approx_len / (interval * 0.5)).ceil() as usize).clamp(4, 256)
}

fn quad_point(p0: Point, c: Point, p1: Point, t: f64) -> Point {
    let u = 1.0 - t;
    Point::new(
        u * u * p0.x + 2.0 * u * t * c.x + t * t * p1.x,
        u * u * p0.y + 2.0 * u * t * c.y + t * t * p1.y,
    )
}

fn cubic_point(p0: Point, c1: Point, c2: Point, p1: Point, t: f64) -> Point {
    let u = 1.0 - t;
    Point::new(
        u * u * u * p0.x + 3.0 * u * u * t * c1.x + 3.0 * u * t * t * c2.x + t * t * t * p1.x,
        u * u * u * p0.y + 3.0 * u * u * t * c1.y + 3.0 * u * t * t * c2.y + t * t * t * p1.y,
    )
}

fn flatten_ellipse(e: &Ellipse, interval: f64) -> Vec<Point> {
    // Ramanujan perimeter approximation, good enough to pick a sample count.
    let perim = std::f64::consts::PI
        * (3.0 * (e.rx + e.ry) - ((3.0 * e.rx + e.ry) * (e.rx + 3.0 * e.ry)).sqrt());
    let n = ((perim / (interval * 0.5)).ceil() as usize).clamp(16, 512);
    let mut pts = Vec::with_capacity(n + 1);
    for k in 0..n {
        let t = k as f64 / n as f64 * std::f64::consts::TAU;
        pts.push(Point::new(e.cx + e.rx * t.cos(), e.cy + e.ry * t.sin()));
    }
    pts.push(pts[0]);
    pts
}

#[cfg(test)]
mod tests {
    use super::super::{SceneMetadata, Stroke};
    use super::*;
    use crate::canvas::to_svg;

    fn line_scene(stroke_width: f64) -> Scene {
        let mut scene = Scene::new(120.0, 40.0, SceneMetadata::default());
        scene.root.push(Primitive::Polyline(Polyline {
            points: vec![Point::new(10.0, 20.0), Point::new(110.0, 20.0)],
            style: Style::stroked([10, 10, 10], stroke_width),
        }));
        scene
    }

    #[test]
    fn zero_roughness_matches_resample() {
        let scene = line_scene(0.5);
        let style = SketchStyle {
            roughness: 0.0,
            passes: 1,
            segment_length: 10.0,
            seed: 7,
        };
        let sketched = sketchify(&scene, &style).unwrap();
        let outlines = primitive_outlines(&scene.root.children[0], 10.0);
        assert_eq!(outlines.len(), 1);
        match &sketched.root.children[0] {
            Primitive::Polyline(pl) => assert_eq!(pl.points, outlines[0].points),
            other => panic!("expected polyline, got {other:?}"),
        }
        // And the serialized bytes agree with a scene built from the
        // resample-only outlines.
        let mut reference = Scene::new(120.0, 40.0, SceneMetadata::default());
        reference.root.push(Primitive::Polyline(Polyline {
            points: outlines[0].points.clone(),
            style: Style::stroked([10, 10, 10], 0.5),
        }));
        assert_eq!(to_svg(&sketched).unwrap(), to_svg(&reference).unwrap());
    }

    #[test]
    fn displacement_stays_within_bound() {
        // Straight segment of length 100, interval 10, roughness 1:
        // every vertex within 5 units of the line y = 20.
        let scene = line_scene(1.0);
        let style = SketchStyle {
            roughness: 1.0,
            passes: 2,
            segment_length: 10.0,
            seed: 3,
        };
        let sketched = sketchify(&scene, &style).unwrap();
        let mut checked = 0;
        for child in &sketched.root.children {
            if let Primitive::Polyline(pl) = child {
                for p in &pl.points {
                    assert!((p.y - 20.0).abs() <= 5.0 + 1e-9, "vertex {p:?} too far");
                    checked += 1;
                }
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn deterministic_output() {
        let scene = line_scene(1.0);
        let style = SketchStyle::default();
        let a = to_svg(&sketchify(&scene, &style).unwrap()).unwrap();
        let b = to_svg(&sketchify(&scene, &style).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn filled_stroked_shape_keeps_fill() {
        let mut scene = Scene::new(50.0, 50.0, SceneMetadata::default());
        scene.root.push(Primitive::Ellipse(Ellipse {
            cx: 25.0,
            cy: 25.0,
            rx: 10.0,
            ry: 10.0,
            style: Style::filled_stroked([200, 100, 50], [0, 0, 0], 0.8),
        }));
        let sketched = sketchify(&scene, &SketchStyle::default()).unwrap();
        // Unstroked fill copy plus 2 wobble passes.
        assert_eq!(sketched.root.children.len(), 3);
        match &sketched.root.children[0] {
            Primitive::Ellipse(e) => {
                assert_eq!(e.style.fill, Some([200, 100, 50]));
                assert!(e.style.stroke.is_none());
            }
            other => panic!("expected fill ellipse, got {other:?}"),
        }
        for wobble in &sketched.root.children[1..] {
            match wobble {
                Primitive::Polyline(pl) => {
                    assert!(pl.style.fill.is_none());
                    assert_eq!(pl.style.stroke, Some(Stroke { color: [0, 0, 0], width: 0.8 }));
                    // Closed loop: ends where it starts.
                    assert_eq!(pl.points[0], pl.points[pl.points.len() - 1]);
                }
                other => panic!("expected wobble polyline, got {other:?}"),
            }
        }
    }

    #[test]
    fn text_and_unstroked_pass_through() {
        let mut scene = Scene::new(50.0, 50.0, SceneMetadata::default());
        scene.root.push(Primitive::Text(super::super::Text {
            x: 1.0,
            y: 2.0,
            content: "label".into(),
            size: 4.0,
            anchor: super::super::TextAnchor::Start,
            fill: [0, 0, 0],
        }));
        scene.root.push(Primitive::Ellipse(Ellipse {
            cx: 25.0,
            cy: 25.0,
            rx: 5.0,
            ry: 5.0,
            style: Style::filled([1, 2, 3]),
        }));
        let sketched = sketchify(&scene, &SketchStyle::default()).unwrap();
        assert_eq!(sketched.root.children, scene.root.children);
    }

    #[test]
    fn style_validation() {
        let bad_roughness = SketchStyle { roughness: 1.5, ..SketchStyle::default() };
        assert!(bad_roughness.validate().is_err());
        let bad_passes = SketchStyle { passes: 3, ..SketchStyle::default() };
        assert!(bad_passes.validate().is_err());
        let bad_interval = SketchStyle { segment_length: 0.0, ..SketchStyle::default() };
        assert!(bad_interval.validate().is_err());
    }
}
