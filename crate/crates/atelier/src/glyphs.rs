//! Chernoff-style face glyphs and their grid composition.
//!
//! Five normalized channels drive the geometry: smile depth, smile width,
//! brow length, face size and ear length, plus an sRGB face colour. The
//! neutral value for every unbound channel is 0.5, which renders a
//! straight mouth rather than a maximal frown.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canvas::{
    Affine, Ellipse, Group, Path, PathSeg, Point, Polyline, Primitive, Scene, SceneMetadata,
    Style, Text, TextAnchor,
};
use crate::dataset::Dataset;
use crate::mapping::{
    colormap_sample, grid_place, scale, ColorMap, GridSpec, MappingError, Rgb, ScaleSpec,
};

#[derive(Debug, Error)]
pub enum GlyphError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("channel `{0}` bound more than once")]
    DuplicateChannel(String),
    #[error("invalid binding: {0}")]
    InvalidBinding(String),
    #[error("grid holds {capacity} cells but {faces} faces were given")]
    GridTooSmall { faces: usize, capacity: usize },
    #[error(transparent)]
    Mapping(#[from] MappingError),
}

/// Face colour used when the colour channel is unbound or a value is
/// absent: a warm neutral paper tone.
pub const DEFAULT_FACE_COLOR: Rgb = [233, 223, 201];

/// Normalized visual channels of one face glyph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceParams {
    pub smile_depth: f64,
    pub smile_width: f64,
    pub brow_length: f64,
    pub face_size: f64,
    pub ear_length: f64,
    pub face_color: Rgb,
}

impl Default for FaceParams {
    fn default() -> Self {
        FaceParams {
            smile_depth: 0.5,
            smile_width: 0.5,
            brow_length: 0.5,
            face_size: 0.5,
            ear_length: 0.5,
            face_color: DEFAULT_FACE_COLOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceChannel {
    SmileDepth,
    SmileWidth,
    BrowLength,
    FaceSize,
    EarLength,
    FaceColor,
}

impl FaceChannel {
    pub fn name(&self) -> &'static str {
        match self {
            FaceChannel::SmileDepth => "smile_depth",
            FaceChannel::SmileWidth => "smile_width",
            FaceChannel::BrowLength => "brow_length",
            FaceChannel::FaceSize => "face_size",
            FaceChannel::EarLength => "ear_length",
            FaceChannel::FaceColor => "face_color",
        }
    }
}

/// How one data column feeds one face channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelMapping {
    /// Column already holds normalized values in [0, 1].
    Identity,
    /// Scalar channels: map the column through a scale into [0, 1].
    Scale(ScaleSpec),
    /// Colour channel: sample this map at the normalized value.
    Color(ColorMap),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBinding {
    pub channel: FaceChannel,
    pub column: String,
    pub mapping: ChannelMapping,
}

/// One record bound to face parameters, with any absent-value warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFace {
    pub key: String,
    pub params: FaceParams,
    pub warnings: Vec<String>,
}

/// Bind dataset records to face parameters, one per record in dataset
/// order. Absent values fall back to the channel default and are noted
/// in the record's warning list.
pub fn bind_faces(ds: &Dataset, bindings: &[ChannelBinding]) -> Result<Vec<BoundFace>, GlyphError> {
    let mut seen = Vec::new();
    for b in bindings {
        if seen.contains(&b.channel) {
            return Err(GlyphError::DuplicateChannel(b.channel.name().to_string()));
        }
        seen.push(b.channel);
        if ds.column(&b.column).is_none() {
            return Err(GlyphError::UnknownColumn(b.column.clone()));
        }
        match (b.channel, &b.mapping) {
            (FaceChannel::FaceColor, ChannelMapping::Color(_)) => {}
            (FaceChannel::FaceColor, _) => {
                return Err(GlyphError::InvalidBinding(
                    "face_color needs a colour map".into(),
                ))
            }
            (_, ChannelMapping::Color(_)) => {
                return Err(GlyphError::InvalidBinding(format!(
                    "scalar channel {} cannot take a colour map",
                    b.channel.name()
                )))
            }
            _ => {}
        }
    }

    let mut out = Vec::with_capacity(ds.rows.len());
    for row in &ds.rows {
        let mut params = FaceParams::default();
        let mut warnings = Vec::new();
        for b in bindings {
            let raw = row.number(&b.column);
            let Some(v) = raw else {
                warnings.push(format!(
                    "{}: absent value in column `{}`, using default",
                    b.channel.name(),
                    b.column
                ));
                continue;
            };
            match (&b.mapping, b.channel) {
                (ChannelMapping::Color(cm), FaceChannel::FaceColor) => {
                    params.face_color = colormap_sample(v, cm);
                }
                (mapping, channel) => {
                    let t = match mapping {
                        ChannelMapping::Identity => v,
                        ChannelMapping::Scale(s) => scale(v, s)?,
                        ChannelMapping::Color(_) => unreachable!("validated above"),
                    }
                    .clamp(0.0, 1.0);
                    match channel {
                        FaceChannel::SmileDepth => params.smile_depth = t,
                        FaceChannel::SmileWidth => params.smile_width = t,
                        FaceChannel::BrowLength => params.brow_length = t,
                        FaceChannel::FaceSize => params.face_size = t,
                        FaceChannel::EarLength => params.ear_length = t,
                        FaceChannel::FaceColor => unreachable!("validated above"),
                    }
                }
            }
        }
        out.push(BoundFace {
            key: row.key.clone(),
            params,
            warnings,
        });
    }
    Ok(out)
}

/// Geometry coefficients of the face, all relative to the face radius.
/// The defaults keep every feature inside the cell across the whole
/// parameter range; override them to restyle the glyph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceLayout {
    /// R = (radius_base + radius_gain * face_size) * min(cell) / 2.
    pub radius_base: f64,
    pub radius_gain: f64,
    /// Ear vertical radius = (ear_base + ear_gain * ear_length) * R.
    pub ear_base: f64,
    pub ear_gain: f64,
    /// Ear horizontal radius as a fraction of its vertical radius.
    pub ear_aspect: f64,
    /// Brow length = (brow_base + brow_gain * brow_length) * R.
    pub brow_base: f64,
    pub brow_gain: f64,
    pub brow_y: f64,
    pub eye_x: f64,
    pub eye_y: f64,
    pub eye_radius: f64,
    pub mouth_y: f64,
    /// Mouth endpoint span = (span_base + span_gain * smile_width) * 2R.
    pub mouth_span_base: f64,
    pub mouth_span_gain: f64,
    /// Control point offset = (2 * smile_depth - 1) * depth_gain * R.
    pub mouth_depth_gain: f64,
    /// Stroke width as a fraction of R, with a floor for tiny faces.
    pub stroke_factor: f64,
    pub ink: Rgb,
}

impl Default for FaceLayout {
    fn default() -> Self {
        FaceLayout {
            radius_base: 0.25,
            radius_gain: 0.5,
            ear_base: 0.05,
            ear_gain: 0.20,
            ear_aspect: 0.6,
            brow_base: 0.1,
            brow_gain: 0.5,
            brow_y: -0.42,
            eye_x: 0.33,
            eye_y: -0.2,
            eye_radius: 0.08,
            mouth_y: 0.35,
            mouth_span_base: 0.3,
            mouth_span_gain: 0.6,
            mouth_depth_gain: 0.5,
            stroke_factor: 0.035,
            ink: [44, 40, 36],
        }
    }
}

/// Build one face centred in a `cell_w` x `cell_h` cell, using the
/// default layout. Child order is fixed: ears, disc, brows, eyes, mouth.
pub fn face_geometry(p: &FaceParams, cell_w: f64, cell_h: f64) -> Group {
    face_geometry_styled(p, cell_w, cell_h, &FaceLayout::default())
}

pub fn face_geometry_styled(p: &FaceParams, cell_w: f64, cell_h: f64, l: &FaceLayout) -> Group {
    let cx = cell_w / 2.0;
    let cy = cell_h / 2.0;
    let radius = (l.radius_base + l.radius_gain * p.face_size) * cell_w.min(cell_h) / 2.0;
    let stroke_w = (radius * l.stroke_factor).max(0.15);
    let line = Style::stroked(l.ink, stroke_w);

    let mut g = Group::with_class("face");

    // Ears, tucked behind the disc.
    let ear_ry = (l.ear_base + l.ear_gain * p.ear_length) * radius;
    let ear_rx = l.ear_aspect * ear_ry;
    for side in [-1.0, 1.0] {
        g.push(Primitive::Ellipse(Ellipse {
            cx: cx + side * radius,
            cy,
            rx: ear_rx.max(1e-6),
            ry: ear_ry.max(1e-6),
            style: Style::filled_stroked(p.face_color, l.ink, stroke_w),
        }));
    }

    // Face disc.
    g.push(Primitive::Ellipse(Ellipse {
        cx,
        cy,
        rx: radius,
        ry: radius,
        style: Style::filled_stroked(p.face_color, l.ink, stroke_w),
    }));

    // Brows.
    let brow_len = (l.brow_base + l.brow_gain * p.brow_length) * radius;
    for side in [-1.0, 1.0] {
        let bx = cx + side * l.eye_x * radius;
        let by = cy + l.brow_y * radius;
        g.push(Primitive::Polyline(Polyline {
            points: vec![
                Point::new(bx - brow_len / 2.0, by),
                Point::new(bx + brow_len / 2.0, by),
            ],
            style: line,
        }));
    }

    // Eyes: fixed, not data-bound.
    for side in [-1.0, 1.0] {
        g.push(Primitive::Ellipse(Ellipse {
            cx: cx + side * l.eye_x * radius,
            cy: cy + l.eye_y * radius,
            rx: l.eye_radius * radius,
            ry: l.eye_radius * radius,
            style: Style::filled(l.ink),
        }));
    }

    // Mouth: quadratic curve. A control point below the midline (positive
    // offset, y grows downward) bows the middle down into a smile.
    let span = (l.mouth_span_base + l.mouth_span_gain * p.smile_width) * 2.0 * radius;
    let my = cy + l.mouth_y * radius;
    let offset = (2.0 * p.smile_depth - 1.0) * l.mouth_depth_gain * radius;
    g.push(Primitive::Path(Path {
        segments: vec![
            PathSeg::MoveTo(Point::new(cx - span / 2.0, my)),
            PathSeg::QuadTo(Point::new(cx, my + offset), Point::new(cx + span / 2.0, my)),
        ],
        style: line,
    }));

    g
}

/// Lay faces out on the grid in input order, one `class="face"` group per
/// face at its row-major anchor, with optional key labels beneath.
pub fn compose_face_grid(
    faces: &[(String, FaceParams)],
    g: &GridSpec,
    label_each: bool,
    metadata: SceneMetadata,
) -> Result<Scene, GlyphError> {
    if faces.len() > g.capacity() {
        return Err(GlyphError::GridTooSmall {
            faces: faces.len(),
            capacity: g.capacity(),
        });
    }
    let mut scene = Scene::new(g.total_width(), g.total_height(), metadata);
    for (i, (key, params)) in faces.iter().enumerate() {
        let (x, y) = grid_place(i, g)?;
        let mut face = face_geometry(params, g.cell_w, g.cell_h);
        face.transform = Affine::translate(x, y);
        scene.root.push(Primitive::Group(face));
        if label_each {
            scene.root.push(Primitive::Text(Text {
                x: x + g.cell_w / 2.0,
                y: y + g.cell_h * 0.99,
                content: key.clone(),
                size: g.cell_h * 0.055,
                anchor: TextAnchor::Middle,
                fill: [90, 84, 78],
            }));
        }
    }
    Ok(scene)
}
