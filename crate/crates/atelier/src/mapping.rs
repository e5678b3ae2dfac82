//! Scales, colour maps, orderings and grid layouts.
//!
//! These are the mappings between normalized data and visual variables.
//! Out-of-domain inputs are clamped rather than rejected: an outlier
//! should degrade a picture, not crash a render.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ColumnKind, Dataset};

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("invalid color map: {0}")]
    InvalidColorMap(String),
    #[error("grid index {index} out of {rows}x{cols} grid")]
    IndexOutOfGrid { index: usize, rows: u32, cols: u32 },
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
}

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    Linear,
    Power(f64),
    Log,
}

/// Maps a numeric domain onto a numeric range through a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSpec {
    pub domain_lo: f64,
    pub domain_hi: f64,
    pub range_lo: f64,
    pub range_hi: f64,
    #[serde(default = "default_curve")]
    pub curve: Curve,
}

fn default_curve() -> Curve {
    Curve::Linear
}

impl ScaleSpec {
    pub fn linear(domain: (f64, f64), range: (f64, f64)) -> Self {
        Self {
            domain_lo: domain.0,
            domain_hi: domain.1,
            range_lo: range.0,
            range_hi: range.1,
            curve: Curve::Linear,
        }
    }

    pub fn validate(&self) -> Result<(), MappingError> {
        let domain_ok =
            self.domain_lo.is_finite() && self.domain_hi.is_finite() && self.domain_lo < self.domain_hi;
        if !domain_ok {
            return Err(MappingError::InvalidScale(format!(
                "domain [{}, {}] must be finite and increasing",
                self.domain_lo, self.domain_hi
            )));
        }
        if !self.range_lo.is_finite() || !self.range_hi.is_finite() {
            return Err(MappingError::InvalidScale("range must be finite".into()));
        }
        match self.curve {
            Curve::Power(e) if !(e.is_finite() && e > 0.0) => Err(MappingError::InvalidScale(
                format!("power exponent {e} must be positive"),
            )),
            Curve::Log if self.domain_lo <= 0.0 => Err(MappingError::InvalidScale(
                "log curve requires a positive domain".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Map `v` through the scale. Inputs outside the domain are clamped to it.
pub fn scale(v: f64, s: &ScaleSpec) -> Result<f64, MappingError> {
    s.validate()?;
    let v = v.clamp(s.domain_lo, s.domain_hi);
    let t = match s.curve {
        Curve::Linear => (v - s.domain_lo) / (s.domain_hi - s.domain_lo),
        Curve::Power(e) => ((v - s.domain_lo) / (s.domain_hi - s.domain_lo)).powf(e),
        Curve::Log => (v.ln() - s.domain_lo.ln()) / (s.domain_hi.ln() - s.domain_lo.ln()),
    };
    Ok(s.range_lo + t * (s.range_hi - s.range_lo))
}

/// Piecewise-linear sRGB colour map with stops at fixed positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ColorMapSpec", into = "ColorMapSpec")]
pub struct ColorMap {
    stops: Vec<(f64, Rgb)>,
}

/// JSON shape: `{"stops": [[0.0, [0,0,0]], [1.0, [255,255,255]]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ColorMapSpec {
    stops: Vec<(f64, Rgb)>,
}

impl TryFrom<ColorMapSpec> for ColorMap {
    type Error = MappingError;
    fn try_from(spec: ColorMapSpec) -> Result<Self, MappingError> {
        ColorMap::new(spec.stops)
    }
}

impl From<ColorMap> for ColorMapSpec {
    fn from(cm: ColorMap) -> Self {
        ColorMapSpec { stops: cm.stops }
    }
}

impl ColorMap {
    pub fn new(stops: Vec<(f64, Rgb)>) -> Result<Self, MappingError> {
        if stops.len() < 2 {
            return Err(MappingError::InvalidColorMap("need at least 2 stops".into()));
        }
        if stops[0].0 != 0.0 {
            return Err(MappingError::InvalidColorMap("first stop must sit at 0".into()));
        }
        if stops[stops.len() - 1].0 != 1.0 {
            return Err(MappingError::InvalidColorMap("last stop must sit at 1".into()));
        }
        for pair in stops.windows(2) {
            let increasing = pair[0].0.is_finite() && pair[1].0.is_finite() && pair[0].0 < pair[1].0;
            if !increasing {
                return Err(MappingError::InvalidColorMap(
                    "stop positions must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { stops })
    }

    pub fn from_json(text: &str) -> Result<Self, MappingError> {
        serde_json::from_str(text)
            .map_err(|e| MappingError::InvalidColorMap(format!("bad json: {e}")))
    }

    pub fn stops(&self) -> &[(f64, Rgb)] {
        &self.stops
    }

    /// Two-stop black-to-white ramp.
    pub fn grayscale() -> Self {
        ColorMap::new(vec![(0.0, [0, 0, 0]), (1.0, [255, 255, 255])]).unwrap()
    }

    /// Cool blue through parchment to warm red; the default face tint.
    pub fn happiness() -> Self {
        ColorMap::new(vec![
            (0.0, [69, 117, 180]),
            (0.5, [255, 255, 191]),
            (1.0, [244, 165, 70]),
        ])
        .unwrap()
    }

    /// Ember ramp used for accretion-order colouring.
    pub fn fire() -> Self {
        ColorMap::new(vec![
            (0.0, [20, 10, 40]),
            (0.35, [180, 30, 40]),
            (0.7, [250, 160, 30]),
            (1.0, [255, 245, 200]),
        ])
        .unwrap()
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "grayscale" => Some(Self::grayscale()),
            "happiness" => Some(Self::happiness()),
            "fire" => Some(Self::fire()),
            _ => None,
        }
    }
}

/// Sample the map at `t` (clamped to [0, 1]). A `t` exactly on a stop
/// returns that stop's colour; between stops each channel interpolates
/// linearly and rounds half-up.
pub fn colormap_sample(t: f64, cm: &ColorMap) -> Rgb {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let stops = &cm.stops;
    if let Some((_, color)) = stops.iter().find(|(pos, _)| *pos == t) {
        return *color;
    }
    let hi = stops.iter().position(|(pos, _)| *pos > t).unwrap_or(stops.len() - 1);
    let (p0, c0) = stops[hi - 1];
    let (p1, c1) = stops[hi];
    let f = (t - p0) / (p1 - p0);
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let v = c0[ch] as f64 + f * (c1[ch] as f64 - c0[ch] as f64);
        out[ch] = v.round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Format an sRGB triplet as `#RRGGBB`.
pub fn hex_color(c: Rgb) -> String {
    format!("#{:02X}{:02X}{:02X}", c[0], c[1], c[2])
}

/// Rectangular layout of equally sized cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
    pub cell_w: f64,
    pub cell_h: f64,
    #[serde(default)]
    pub gutter: f64,
}

impl GridSpec {
    pub fn capacity(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn total_width(&self) -> f64 {
        self.cols as f64 * self.cell_w + self.cols.saturating_sub(1) as f64 * self.gutter
    }

    pub fn total_height(&self) -> f64 {
        self.rows as f64 * self.cell_h + self.rows.saturating_sub(1) as f64 * self.gutter
    }
}

/// All factor pairs `(rows, cols)` with `rows * cols == n`, rows ascending.
pub fn grid_options(n: u32) -> Vec<(u32, u32)> {
    (1..=n)
        .filter(|r| n.is_multiple_of(*r))
        .map(|r| (r, n / r))
        .collect()
}

/// Row-major top-left anchor of the cell at `index`.
pub fn grid_place(index: usize, g: &GridSpec) -> Result<(f64, f64), MappingError> {
    if index >= g.capacity() {
        return Err(MappingError::IndexOutOfGrid {
            index,
            rows: g.rows,
            cols: g.cols,
        });
    }
    let col = (index % g.cols as usize) as f64;
    let row = (index / g.cols as usize) as f64;
    Ok((col * (g.cell_w + g.gutter), row * (g.cell_h + g.gutter)))
}

/// Record ordering for layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderBy {
    /// Raw code-point order of the keys; no locale collation, so the
    /// result is identical on every platform.
    KeyAlpha,
    Column { name: String, ascending: bool },
}

/// Keys of `ds` in the requested order. Column ordering puts records with
/// absent values last and breaks ties by key.
pub fn order_records(ds: &Dataset, by: &OrderBy) -> Result<Vec<String>, MappingError> {
    let mut keys: Vec<String> = ds.keys().map(str::to_string).collect();
    match by {
        OrderBy::KeyAlpha => keys.sort(),
        OrderBy::Column { name, ascending } => {
            let meta = ds
                .column(name)
                .ok_or_else(|| MappingError::UnknownColumn(name.clone()))?;
            if meta.kind != ColumnKind::Numeric {
                return Err(MappingError::NotNumeric(name.clone()));
            }
            let value_of = |k: &str| ds.record(k).and_then(|r| r.number(name));
            keys.sort_by(|a, b| {
                let va = value_of(a);
                let vb = value_of(b);
                match (va, vb) {
                    (Some(x), Some(y)) => {
                        let ord = x.total_cmp(&y);
                        let ord = if *ascending { ord } else { ord.reverse() };
                        ord.then_with(|| a.cmp(b))
                    }
                    (Some(_), None) => std::cmp::Ordering::Less,
                    (None, Some(_)) => std::cmp::Ordering::Greater,
                    (None, None) => a.cmp(b),
                }
            });
        }
    }
    Ok(keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;

    #[test]
    fn scale_linear_midpoint() {
        let s = ScaleSpec::linear((0.0, 1.0), (10.0, 20.0));
        assert_eq!(scale(0.5, &s).unwrap(), 15.0);
    }

    #[test]
    fn scale_clamps_out_of_domain() {
        let s = ScaleSpec::linear((0.0, 1.0), (0.0, 1.0));
        assert_eq!(scale(2.0, &s).unwrap(), 1.0);
        assert_eq!(scale(-3.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn scale_log_midpoint() {
        // ln 4 sits midway between ln 1 and ln 16.
        let s = ScaleSpec {
            domain_lo: 1.0,
            domain_hi: 16.0,
            range_lo: 0.0,
            range_hi: 1.0,
            curve: Curve::Log,
        };
        assert!((scale(4.0, &s).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scale_power_curve() {
        let s = ScaleSpec {
            domain_lo: 0.0,
            domain_hi: 1.0,
            range_lo: 0.0,
            range_hi: 100.0,
            curve: Curve::Power(2.0),
        };
        assert!((scale(0.5, &s).unwrap() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn scale_invalid_specs() {
        let mut s = ScaleSpec::linear((1.0, 1.0), (0.0, 1.0));
        assert!(scale(0.5, &s).is_err());
        s = ScaleSpec {
            domain_lo: 0.0,
            domain_hi: 1.0,
            range_lo: 0.0,
            range_hi: 1.0,
            curve: Curve::Log,
        };
        assert!(scale(0.5, &s).is_err());
        s.curve = Curve::Power(0.0);
        assert!(scale(0.5, &s).is_err());
    }

    #[test]
    fn colormap_endpoints_and_midpoint() {
        let cm = ColorMap::grayscale();
        assert_eq!(colormap_sample(0.0, &cm), [0, 0, 0]);
        assert_eq!(colormap_sample(1.0, &cm), [255, 255, 255]);
        assert_eq!(colormap_sample(0.5, &cm), [128, 128, 128]);
    }

    #[test]
    fn colormap_segment_interpolation() {
        // Hand-interpolated first segment of a 3-stop map.
        let cm = ColorMap::new(vec![
            (0.0, [0, 0, 255]),
            (0.5, [255, 255, 0]),
            (1.0, [255, 0, 0]),
        ])
        .unwrap();
        assert_eq!(colormap_sample(0.25, &cm), [128, 128, 128]);
        // Exact stop positions return the stop colours.
        assert_eq!(colormap_sample(0.5, &cm), [255, 255, 0]);
    }

    #[test]
    fn colormap_clamps_t() {
        let cm = ColorMap::grayscale();
        assert_eq!(colormap_sample(-1.0, &cm), [0, 0, 0]);
        assert_eq!(colormap_sample(7.0, &cm), [255, 255, 255]);
    }

    #[test]
    fn colormap_validation() {
        assert!(ColorMap::new(vec![(0.0, [0, 0, 0])]).is_err());
        assert!(ColorMap::new(vec![(0.1, [0, 0, 0]), (1.0, [1, 1, 1])]).is_err());
        assert!(ColorMap::new(vec![(0.0, [0, 0, 0]), (0.9, [1, 1, 1])]).is_err());
        assert!(ColorMap::new(vec![(0.0, [0, 0, 0]), (0.0, [1, 1, 1]), (1.0, [2, 2, 2])]).is_err());
    }

    #[test]
    fn colormap_json_interface() {
        let cm = ColorMap::from_json(r#"{"stops":[[0.0,[0,0,0]],[1.0,[255,255,255]]]}"#).unwrap();
        assert_eq!(cm, ColorMap::grayscale());
        assert!(ColorMap::from_json(r#"{"stops":[[0.5,[0,0,0]],[1.0,[255,255,255]]]}"#).is_err());
    }

    #[test]
    fn grid_options_160() {
        let opts = grid_options(160);
        assert!(opts.contains(&(16, 10)));
        assert!(opts.contains(&(20, 8)));
        assert!(opts.contains(&(40, 4)));
        assert_eq!(opts.len(), 12);
        assert_eq!(grid_options(1), vec![(1, 1)]);
        // Brute-force divisor oracle.
        let mut expected = Vec::new();
        for r in 1..=160u32 {
            for c in 1..=160u32 {
                if r * c == 160 {
                    expected.push((r, c));
                }
            }
        }
        assert_eq!(opts, expected);
    }

    #[test]
    fn grid_place_anchors() {
        let g = GridSpec {
            rows: 16,
            cols: 10,
            cell_w: 100.0,
            cell_h: 100.0,
            gutter: 10.0,
        };
        assert_eq!(grid_place(0, &g).unwrap(), (0.0, 0.0));
        assert_eq!(grid_place(10, &g).unwrap(), (0.0, 110.0)); // first cell, second row
        assert_eq!(grid_place(159, &g).unwrap(), (990.0, 1650.0));
        assert!(grid_place(160, &g).is_err());
    }

    #[test]
    fn order_records_alpha_and_column() {
        let d = parse_csv("t", b"country,score\nb,2\nA,1\na,\n", "country").unwrap();
        assert_eq!(order_records(&d, &OrderBy::KeyAlpha).unwrap(), ["A", "a", "b"]);
        let by_score = order_records(
            &d,
            &OrderBy::Column {
                name: "score".into(),
                ascending: true,
            },
        )
        .unwrap();
        assert_eq!(by_score, ["A", "b", "a"]); // absent last
        assert!(order_records(
            &d,
            &OrderBy::Column {
                name: "country".into(),
                ascending: true
            }
        )
        .is_err());
    }

    #[test]
    fn order_absent_last_escapes_descending() {
        let d = parse_csv("t", b"country,score\nX,2\nY,1\nZ,\n", "country").unwrap();
        let desc = order_records(
            &d,
            &OrderBy::Column {
                name: "score".into(),
                ascending: false,
            },
        )
        .unwrap();
        assert_eq!(desc, ["X", "Y", "Z"]);
    }

    #[test]
    fn hex_format() {
        assert_eq!(hex_color([255, 215, 0]), "#FFD700");
        assert_eq!(hex_color([0, 0, 0]), "#000000");
    }
}
