//! Vector scene graph and the print-quality output path.
//!
//! Scenes are plain owned trees: a [`Group`] owns its children, so the
//! structure is acyclic by construction and safe to share once built.
//! Construction and serialization are separate phases; nothing here
//! mutates a scene during output.

mod sketch;
mod svg;

pub use sketch::{primitive_outlines, sketchify, Outline, SketchStyle};
pub use svg::to_svg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::Rgb;

#[derive(Debug, Error)]
pub enum CanvasError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("scene has no primitives")]
    EmptyScene,
    #[error("invalid sketch style: {0}")]
    InvalidSketchStyle(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// 2x3 affine transform: `x' = a·x + b·y + e`, `y' = c·x + d·y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
        e: 0.0,
        f: 0.0,
    };

    pub fn translate(tx: f64, ty: f64) -> Self {
        Affine {
            e: tx,
            f: ty,
            ..Affine::IDENTITY
        }
    }

    pub fn scale(sx: f64, sy: f64) -> Self {
        Affine {
            a: sx,
            d: sy,
            ..Affine::IDENTITY
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        Point {
            x: self.a * p.x + self.b * p.y + self.e,
            y: self.c * p.x + self.d * p.y + self.f,
        }
    }

    /// `self ∘ rhs`: apply `rhs` first, then `self`.
    pub fn then(&self, rhs: &Affine) -> Affine {
        Affine {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            e: self.a * rhs.e + self.b * rhs.f + self.e,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
            f: self.c * rhs.e + self.d * rhs.f + self.f,
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Affine::IDENTITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stroke {
    pub color: Rgb,
    pub width: f64,
}

/// Fill and stroke of a primitive. `None` means not painted.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Style {
    pub fill: Option<Rgb>,
    pub stroke: Option<Stroke>,
}

impl Style {
    pub fn filled(color: Rgb) -> Self {
        Style {
            fill: Some(color),
            stroke: None,
        }
    }

    pub fn stroked(color: Rgb, width: f64) -> Self {
        Style {
            fill: None,
            stroke: Some(Stroke { color, width }),
        }
    }

    pub fn filled_stroked(fill: Rgb, stroke: Rgb, width: f64) -> Self {
        Style {
            fill: Some(fill),
            stroke: Some(Stroke {
                color: stroke,
                width,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathSeg {
    MoveTo(Point),
    LineTo(Point),
    QuadTo(Point, Point),
    CubicTo(Point, Point, Point),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub segments: Vec<PathSeg>,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub style: Style,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextAnchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Text {
    pub x: f64,
    pub y: f64,
    pub content: String,
    pub size: f64,
    pub anchor: TextAnchor,
    pub fill: Rgb,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Group {
    pub children: Vec<Primitive>,
    pub transform: Affine,
    pub class: Option<String>,
}

impl Default for Affine {
    fn default() -> Self {
        Affine::IDENTITY
    }
}

impl Group {
    pub fn new() -> Self {
        Group::default()
    }

    pub fn with_class(class: &str) -> Self {
        Group {
            class: Some(class.to_string()),
            ..Group::default()
        }
    }

    pub fn push(&mut self, p: Primitive) {
        self.children.push(p);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Path(Path),
    Ellipse(Ellipse),
    Polyline(Polyline),
    Text(Text),
    Group(Group),
}

/// Embedded in the SVG `desc` element so an artwork can be regenerated
/// from its own file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SceneMetadata {
    pub title: String,
    pub author: String,
    pub seed: u64,
}

/// A complete artwork. Width and height are physical millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: f64,
    pub height: f64,
    pub root: Group,
    pub metadata: SceneMetadata,
}

impl Scene {
    pub fn new(width: f64, height: f64, metadata: SceneMetadata) -> Self {
        Scene {
            width,
            height,
            root: Group::new(),
            metadata,
        }
    }

    /// Recursively check every invariant the serializer relies on.
    pub fn validate(&self) -> Result<(), CanvasError> {
        if !(self.width > 0.0 && self.width.is_finite()) || !(self.height > 0.0 && self.height.is_finite()) {
            return Err(CanvasError::InvalidScene(
                "scene dimensions must be positive and finite".into(),
            ));
        }
        validate_group(&self.root)
    }
}

fn finite(v: f64, what: &str) -> Result<(), CanvasError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CanvasError::InvalidScene(format!("non-finite {what}")))
    }
}

fn validate_point(p: &Point) -> Result<(), CanvasError> {
    finite(p.x, "x coordinate")?;
    finite(p.y, "y coordinate")
}

fn validate_group(g: &Group) -> Result<(), CanvasError> {
    for v in [g.transform.a, g.transform.b, g.transform.c, g.transform.d, g.transform.e, g.transform.f] {
        finite(v, "transform entry")?;
    }
    for child in &g.children {
        validate_primitive(child)?;
    }
    Ok(())
}

fn validate_primitive(p: &Primitive) -> Result<(), CanvasError> {
    match p {
        Primitive::Path(path) => {
            if path.segments.is_empty() {
                return Err(CanvasError::InvalidScene("empty path".into()));
            }
            if !matches!(path.segments[0], PathSeg::MoveTo(_)) {
                return Err(CanvasError::InvalidScene("path must begin with a move".into()));
            }
            for seg in &path.segments {
                match seg {
                    PathSeg::MoveTo(p) | PathSeg::LineTo(p) => validate_point(p)?,
                    PathSeg::QuadTo(c, p) => {
                        validate_point(c)?;
                        validate_point(p)?;
                    }
                    PathSeg::CubicTo(c1, c2, p) => {
                        validate_point(c1)?;
                        validate_point(c2)?;
                        validate_point(p)?;
                    }
                }
            }
            Ok(())
        }
        Primitive::Ellipse(e) => {
            finite(e.cx, "ellipse center")?;
            finite(e.cy, "ellipse center")?;
            if !(e.rx > 0.0 && e.rx.is_finite() && e.ry > 0.0 && e.ry.is_finite()) {
                return Err(CanvasError::InvalidScene("ellipse radii must be positive".into()));
            }
            Ok(())
        }
        Primitive::Polyline(pl) => {
            if pl.points.len() < 2 {
                return Err(CanvasError::InvalidScene("polyline needs at least 2 points".into()));
            }
            for p in &pl.points {
                validate_point(p)?;
            }
            Ok(())
        }
        Primitive::Text(t) => {
            if t.content.is_empty() {
                return Err(CanvasError::InvalidScene("empty text content".into()));
            }
            finite(t.x, "text anchor")?;
            finite(t.y, "text anchor")?;
            if !(t.size > 0.0 && t.size.is_finite()) {
                return Err(CanvasError::InvalidScene("text size must be positive".into()));
            }
            Ok(())
        }
        Primitive::Group(g) => validate_group(g),
    }
}

/// Tight box over all control geometry with transforms applied. Curve
/// control points count as geometry, so the box over-approximates curves.
/// Text contributes only its anchor point.
pub fn bounding_box(scene: &Scene) -> Result<(f64, f64, f64, f64), CanvasError> {
    let mut acc = BboxAcc::default();
    group_bbox(&scene.root, &Affine::IDENTITY, &mut acc);
    match acc.count {
        0 => Err(CanvasError::EmptyScene),
        _ => Ok((acc.min_x, acc.min_y, acc.max_x, acc.max_y)),
    }
}

#[derive(Debug)]
struct BboxAcc {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
    count: usize,
}

impl Default for BboxAcc {
    fn default() -> Self {
        BboxAcc {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
            count: 0,
        }
    }
}

impl BboxAcc {
    fn add(&mut self, p: Point) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
        self.count += 1;
    }
}

fn group_bbox(g: &Group, parent: &Affine, acc: &mut BboxAcc) {
    let t = parent.then(&g.transform);
    for child in &g.children {
        primitive_bbox(child, &t, acc);
    }
}

fn primitive_bbox(p: &Primitive, t: &Affine, acc: &mut BboxAcc) {
    match p {
        Primitive::Path(path) => {
            for seg in &path.segments {
                match seg {
                    PathSeg::MoveTo(p) | PathSeg::LineTo(p) => acc.add(t.apply(*p)),
                    PathSeg::QuadTo(c, p) => {
                        acc.add(t.apply(*c));
                        acc.add(t.apply(*p));
                    }
                    PathSeg::CubicTo(c1, c2, p) => {
                        acc.add(t.apply(*c1));
                        acc.add(t.apply(*c2));
                        acc.add(t.apply(*p));
                    }
                }
            }
        }
        Primitive::Ellipse(e) => {
            // Exact box of an affinely mapped ellipse.
            let center = t.apply(Point::new(e.cx, e.cy));
            let half_x = ((t.a * e.rx).powi(2) + (t.b * e.ry).powi(2)).sqrt();
            let half_y = ((t.c * e.rx).powi(2) + (t.d * e.ry).powi(2)).sqrt();
            acc.add(Point::new(center.x - half_x, center.y - half_y));
            acc.add(Point::new(center.x + half_x, center.y + half_y));
        }
        Primitive::Polyline(pl) => {
            for p in &pl.points {
                acc.add(t.apply(*p));
            }
        }
        Primitive::Text(txt) => acc.add(t.apply(Point::new(txt.x, txt.y))),
        Primitive::Group(g) => group_bbox(g, t, acc),
    }
}
