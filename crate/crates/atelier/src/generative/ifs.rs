//! Iterated function systems rendered by the chaos game.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::GenerativeError;
use crate::canvas::{Ellipse, Group, Primitive, Style};
use crate::mapping::Rgb;
use crate::rng::SplitMix64;

/// One weighted affine map: `x' = a·x + b·y + e`, `y' = c·x + d·y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub weight: f64,
}

impl AffineMap {
    /// Coefficient row `[a, b, c, d, e, f, weight]`.
    pub fn from_row(row: [f64; 7]) -> Self {
        AffineMap {
            a: row[0],
            b: row[1],
            c: row[2],
            d: row[3],
            e: row[4],
            f: row[5],
            weight: row[6],
        }
    }

    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x + self.b * y + self.e,
            self.c * x + self.d * y + self.f,
        )
    }
}

fn validate_maps(maps: &[AffineMap]) -> Result<(), GenerativeError> {
    if maps.is_empty() {
        return Err(GenerativeError::InvalidWeights("no maps given".into()));
    }
    let mut sum = 0.0;
    for (i, m) in maps.iter().enumerate() {
        if !(m.weight > 0.0 && m.weight <= 1.0) {
            return Err(GenerativeError::InvalidWeights(format!(
                "map {i} weight {} outside (0, 1]",
                m.weight
            )));
        }
        sum += m.weight;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(GenerativeError::InvalidWeights(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Run the chaos game: starting from the origin, repeatedly pick a map by
/// weight (splitmix64 stream from `seed`) and apply it. The first
/// `burn_in` points are discarded; exactly `points` points are returned.
pub fn ifs_chaos_game(
    maps: &[AffineMap],
    points: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, GenerativeError> {
    validate_maps(maps)?;
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(points);
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for i in 0..burn_in + points {
        let mut u = rng.next_f64();
        let mut chosen = &maps[maps.len() - 1];
        for m in maps {
            if u < m.weight {
                chosen = m;
                break;
            }
            u -= m.weight;
        }
        let (nx, ny) = chosen.apply(x, y);
        x = nx;
        y = ny;
        if i >= burn_in {
            out.push((x, y));
        }
    }
    Ok(out)
}

/// Preset file shape: `{"presets": {"name": [[a,b,c,d,e,f,w], ...]}}`.
#[derive(Debug, Deserialize)]
struct PresetFile {
    #[serde(default)]
    #[allow(dead_code)]
    source: String,
    presets: BTreeMap<String, Vec<[f64; 7]>>,
}

const BUILTIN_PRESETS: &str = include_str!("../../assets/ifs_presets.json");

/// Load named map lists from preset JSON.
pub fn load_ifs_maps(text: &str, name: &str) -> Result<Vec<AffineMap>, GenerativeError> {
    let file: PresetFile = serde_json::from_str(text)
        .map_err(|e| GenerativeError::InvalidSpec(format!("bad ifs preset json: {e}")))?;
    let rows = file
        .presets
        .get(name)
        .ok_or_else(|| GenerativeError::InvalidSpec(format!("no preset named `{name}`")))?;
    let maps: Vec<AffineMap> = rows.iter().map(|r| AffineMap::from_row(*r)).collect();
    validate_maps(&maps)?;
    Ok(maps)
}

/// Built-in presets shipped with the crate.
pub fn ifs_preset(name: &str) -> Result<Vec<AffineMap>, GenerativeError> {
    load_ifs_maps(BUILTIN_PRESETS, name)
}

/// Render a point cloud as small filled dots.
pub fn render_points(points: &[(f64, f64)], color: Rgb, radius: f64) -> Group {
    let mut g = Group::new();
    for (x, y) in points {
        g.push(Primitive::Ellipse(Ellipse {
            cx: *x,
            cy: *y,
            rx: radius,
            ry: radius,
            style: Style::filled(color),
        }));
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_contraction_fixed_at_origin() {
        let maps = [AffineMap::from_row([0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 1.0])];
        let pts = ifs_chaos_game(&maps, 100, 0, 1).unwrap();
        // First point is already halfway to the fixed point (0,0) from (0,0).
        for (x, y) in pts {
            assert_eq!((x, y), (0.0, 0.0));
        }
    }

    #[test]
    fn contraction_converges_to_one() {
        // x' = 0.5 x + 0.5 has fixed point x = 1.
        let maps = [AffineMap::from_row([0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 1.0])];
        let pts = ifs_chaos_game(&maps, 10, 64, 0).unwrap();
        assert_eq!(pts.len(), 10);
        for (x, _) in pts {
            assert!((x - 1.0).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn exact_point_count_and_determinism() {
        let maps = ifs_preset("barnsley_fern").unwrap();
        let a = ifs_chaos_game(&maps, 5000, 100, 77).unwrap();
        let b = ifs_chaos_game(&maps, 5000, 100, 77).unwrap();
        assert_eq!(a.len(), 5000);
        // Bit-exact reproducibility.
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.0.to_bits(), q.0.to_bits());
            assert_eq!(p.1.to_bits(), q.1.to_bits());
        }
        let c = ifs_chaos_game(&maps, 5000, 100, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fern_stays_in_known_bounds() {
        let maps = ifs_preset("barnsley_fern").unwrap();
        let pts = ifs_chaos_game(&maps, 100_000, 100, 4).unwrap();
        for (x, y) in pts {
            assert!((-3.0..=3.0).contains(&x), "x = {x}");
            assert!((0.0..=10.1).contains(&y), "y = {y}");
        }
    }

    #[test]
    fn weight_validation() {
        assert!(matches!(
            ifs_chaos_game(&[], 10, 0, 0),
            Err(GenerativeError::InvalidWeights(_))
        ));
        let bad_sum = [
            AffineMap::from_row([0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5]),
            AffineMap::from_row([0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.4]),
        ];
        assert!(matches!(
            ifs_chaos_game(&bad_sum, 10, 0, 0),
            Err(GenerativeError::InvalidWeights(_))
        ));
        let zero_weight = [
            AffineMap::from_row([0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0]),
            AffineMap::from_row([0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 1.0]),
        ];
        assert!(ifs_chaos_game(&zero_weight, 10, 0, 0).is_err());
    }

    #[test]
    fn rendered_fern_bbox_within_attractor_bounds() {
        use crate::canvas::{bounding_box, Primitive, Scene, SceneMetadata};
        let maps = ifs_preset("barnsley_fern").unwrap();
        let pts = ifs_chaos_game(&maps, 20_000, 100, 2).unwrap();
        let radius = 0.01;
        let mut scene = Scene::new(20.0, 20.0, SceneMetadata::default());
        scene.root.push(Primitive::Group(render_points(&pts, [0, 80, 0], radius)));
        let (x0, y0, x1, y1) = bounding_box(&scene).unwrap();
        assert!(x0 >= -3.0 - radius && x1 <= 3.0 + radius, "x ({x0}, {x1})");
        assert!(y0 >= 0.0 - radius && y1 <= 10.1 + radius, "y ({y0}, {y1})");
    }

    #[test]
    fn bounding_box_shrinks_with_convergence() {
        // For a contractive system the attractor sample's box stabilizes:
        // a larger sample stays within the smaller sample's box inflated 5%.
        let maps = ifs_preset("barnsley_fern").unwrap();
        let small = ifs_chaos_game(&maps, 10_000, 100, 9).unwrap();
        let large = ifs_chaos_game(&maps, 100_000, 100, 9).unwrap();
        let bbox = |pts: &[(f64, f64)]| {
            let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (x, y) in pts {
                b.0 = b.0.min(*x);
                b.1 = b.1.min(*y);
                b.2 = b.2.max(*x);
                b.3 = b.3.max(*y);
            }
            b
        };
        let s = bbox(&small);
        let l = bbox(&large);
        let wx = (s.2 - s.0) * 0.05;
        let wy = (s.3 - s.1) * 0.05;
        assert!(l.0 >= s.0 - wx && l.2 <= s.2 + wx);
        assert!(l.1 >= s.1 - wy && l.3 <= s.3 + wy);
    }
}
