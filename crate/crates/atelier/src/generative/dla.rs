//! Diffusion-limited aggregation on a square lattice.
//!
//! A seed particle sits at the origin; each new walker spawns on a circle
//! around the cluster, random-walks over the 4-neighbourhood and sticks
//! the moment it lands next to the cluster. Accretion is strictly
//! sequential, so a seed fully determines the cluster.

use std::collections::HashSet;

use serde::Deserialize;

use super::GenerativeError;
use crate::canvas::{Group, Path, PathSeg, Point, Primitive, Style};
use crate::mapping::{colormap_sample, ColorMap};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlaParams {
    pub particle_count: usize,
    #[serde(default = "default_lattice_radius")]
    pub lattice_radius: i64,
    /// Walkers spawn at `spawn_radius_factor * cluster_radius` (min 5).
    #[serde(default = "default_spawn_factor")]
    pub spawn_radius_factor: f64,
    /// Walkers that drift past `kill_radius_factor * cluster_radius`
    /// (floored at spawn radius + 5) respawn.
    #[serde(default = "default_kill_factor")]
    pub kill_radius_factor: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_lattice_radius() -> i64 {
    256
}

fn default_spawn_factor() -> f64 {
    1.5
}

fn default_kill_factor() -> f64 {
    3.0
}

impl DlaParams {
    fn validate(&self) -> Result<(), GenerativeError> {
        if self.particle_count == 0 {
            return Err(GenerativeError::InvalidSpec(
                "particle_count must be at least 1".into(),
            ));
        }
        if self.lattice_radius < 1 {
            return Err(GenerativeError::InvalidSpec(
                "lattice_radius must be at least 1".into(),
            ));
        }
        if !(self.spawn_radius_factor.is_finite() && self.spawn_radius_factor > 1.0) {
            return Err(GenerativeError::InvalidSpec(
                "spawn_radius_factor must exceed 1".into(),
            ));
        }
        if !(self.kill_radius_factor.is_finite()
            && self.kill_radius_factor > self.spawn_radius_factor)
        {
            return Err(GenerativeError::InvalidSpec(
                "kill_radius_factor must exceed spawn_radius_factor".into(),
            ));
        }
        let sites = lattice_sites(self.lattice_radius);
        if self.particle_count > sites {
            return Err(GenerativeError::LatticeExhausted(format!(
                "{} particles exceed {} lattice sites within radius {}",
                self.particle_count, sites, self.lattice_radius
            )));
        }
        Ok(())
    }
}

fn lattice_sites(radius: i64) -> usize {
    let r2 = radius * radius;
    let mut count = 0usize;
    for x in -radius..=radius {
        let rem = r2 - x * x;
        if rem >= 0 {
            count += 2 * (rem as f64).sqrt().floor() as usize + 1;
        }
    }
    count
}

/// The grown cluster (lattice points in accretion order, the seed first)
/// and its rendering, where fill colour encodes accretion order.
#[derive(Debug, Clone)]
pub struct DlaGrowth {
    pub cluster: Vec<(i64, i64)>,
    pub scene: Group,
}

const STEPS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

pub fn dla_grow(params: &DlaParams, colormap: &ColorMap) -> Result<DlaGrowth, GenerativeError> {
    params.validate()?;
    let mut rng = SplitMix64::new(params.seed);
    let mut occupied: HashSet<(i64, i64)> = HashSet::new();
    let mut order: Vec<(i64, i64)> = Vec::with_capacity(params.particle_count);
    occupied.insert((0, 0));
    order.push((0, 0));
    let mut cluster_radius = 0.0f64;

    let is_adjacent = |occupied: &HashSet<(i64, i64)>, p: (i64, i64)| {
        STEPS
            .iter()
            .any(|d| occupied.contains(&(p.0 + d.0, p.1 + d.1)))
    };

    while order.len() < params.particle_count {
        let spawn_r = (params.spawn_radius_factor * cluster_radius)
            .max(5.0)
            .min(params.lattice_radius as f64);
        let kill_r = (params.kill_radius_factor * cluster_radius).max(spawn_r + 5.0);
        let kill_r2 = kill_r * kill_r;

        let mut pos = spawn_on_circle(&mut rng, spawn_r);
        loop {
            if occupied.contains(&pos) {
                // Spawn circle clipped by the lattice can land on the
                // cluster itself; just respawn.
                pos = spawn_on_circle(&mut rng, spawn_r);
                continue;
            }
            if is_adjacent(&occupied, pos) {
                occupied.insert(pos);
                order.push(pos);
                let dist = ((pos.0 * pos.0 + pos.1 * pos.1) as f64).sqrt();
                cluster_radius = cluster_radius.max(dist);
                if dist > params.lattice_radius as f64 {
                    return Err(GenerativeError::LatticeExhausted(format!(
                        "cluster reached the lattice edge at radius {dist:.1}"
                    )));
                }
                break;
            }
            let step = STEPS[rng.next_below(4) as usize];
            pos = (pos.0 + step.0, pos.1 + step.1);
            if ((pos.0 * pos.0 + pos.1 * pos.1) as f64) > kill_r2 {
                pos = spawn_on_circle(&mut rng, spawn_r);
            }
        }
    }

    let scene = render_cluster(&order, colormap);
    Ok(DlaGrowth {
        cluster: order,
        scene,
    })
}

fn spawn_on_circle(rng: &mut SplitMix64, radius: f64) -> (i64, i64) {
    let angle = rng.next_f64() * std::f64::consts::TAU;
    (
        (radius * angle.cos()).round() as i64,
        (radius * angle.sin()).round() as i64,
    )
}

/// One unit square per lattice point, coloured by accretion order.
fn render_cluster(order: &[(i64, i64)], colormap: &ColorMap) -> Group {
    let mut g = Group::new();
    let denom = (order.len().saturating_sub(1)).max(1) as f64;
    for (i, (x, y)) in order.iter().enumerate() {
        let t = i as f64 / denom;
        let color = colormap_sample(t, colormap);
        let (px, py) = (*x as f64, *y as f64);
        g.push(Primitive::Path(Path {
            segments: vec![
                PathSeg::MoveTo(Point::new(px, py)),
                PathSeg::LineTo(Point::new(px + 1.0, py)),
                PathSeg::LineTo(Point::new(px + 1.0, py + 1.0)),
                PathSeg::LineTo(Point::new(px, py + 1.0)),
                PathSeg::LineTo(Point::new(px, py)),
            ],
            style: Style::filled(color),
        }));
    }
    g
}
