//! One function per art pipeline: config in, scene plus sidecars out.

use std::collections::BTreeMap;
use std::path::Path;

use atelier::canvas::{Affine, Group, Primitive, Scene, SceneMetadata};
use atelier::dataset::{self, Dataset};
use atelier::generative::{
    dla_grow, ifs_chaos_game, ifs_preset, load_ifs_maps, lsystem_expand, lsystem_turtle,
    pixel_bar_chart, render_points, AffineMap, DlaParams, LSystem, PixelBarSpec,
};
use atelier::glyphs::{bind_faces, compose_face_grid, FaceParams};
use atelier::mapping::order_records;
use atelier::soundscape::{compose_soundscape, parse_wav, spectrogram, SpectrogramSpec};

use crate::config::{
    binding_to_channel, resolve_events, DlaConfig, FacesConfig, IfsConfig, LsystemConfig,
    PixelBarsConfig, SoundscapeConfig,
};
use crate::CliError;

/// Values shared by every pipeline invocation.
pub struct Common {
    pub seed: u64,
    pub author: String,
}

/// A sidecar file to write next to the SVG: `<output stem>.<suffix>`.
pub struct Sidecar {
    pub suffix: &'static str,
    pub bytes: Vec<u8>,
}

pub struct RunOutput {
    pub scene: Scene,
    pub sidecars: Vec<Sidecar>,
}

fn module_err<'a, E: std::fmt::Display>(
    module: &'a str,
    op: &'a str,
) -> impl Fn(E) -> CliError + 'a {
    move |e| CliError::module(module, op, e.to_string())
}

fn load_dataset(path: &Path, base: &Path, key_column: &str) -> Result<Dataset, CliError> {
    let full = base.join(path);
    let name = full
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let bytes = std::fs::read(&full)
        .map_err(|e| CliError::config(format!("cannot read dataset `{}`: {e}", full.display())))?;
    dataset::parse_csv(&name, &bytes, key_column).map_err(module_err("dataset", "parse_csv"))
}

fn metadata(title: &str, common: &Common) -> SceneMetadata {
    SceneMetadata {
        title: title.to_string(),
        author: common.author.clone(),
        seed: common.seed,
    }
}

pub fn run_faces(cfg: &FacesConfig, common: &Common, base: &Path) -> Result<RunOutput, CliError> {
    let mut ds = load_dataset(&cfg.dataset, base, &cfg.key_column)?;
    let mut sidecars = Vec::new();

    if !cfg.fallbacks.is_empty() {
        let fallbacks: Vec<Dataset> = cfg
            .fallbacks
            .iter()
            .map(|p| load_dataset(p, base, &cfg.key_column))
            .collect::<Result<_, _>>()?;
        let outcome =
            dataset::backfill(&ds, &fallbacks).map_err(module_err("dataset", "backfill"))?;
        ds = outcome.dataset;
        let json = serde_json::to_vec_pretty(&outcome.provenance)
            .expect("provenance serialization cannot fail");
        sidecars.push(Sidecar {
            suffix: "provenance.json",
            bytes: json,
        });
    }

    for merge in &cfg.merges {
        ds = dataset::merge_records(&ds, &merge.keys, &merge.new_key, merge.combiner)
            .map_err(module_err("dataset", "merge_records"))?;
    }
    if !cfg.drops.is_empty() {
        ds = dataset::drop_records(&ds, &cfg.drops).map_err(module_err("dataset", "drop_records"))?;
    }
    if let Some(step) = &cfg.normalize {
        for column in &step.columns {
            ds = dataset::normalize(&ds, column, step.mode)
                .map_err(module_err("dataset", "normalize"))?;
        }
    }

    let bindings = cfg
        .bindings
        .iter()
        .map(binding_to_channel)
        .collect::<Result<Vec<_>, _>>()?;
    let bound = bind_faces(&ds, &bindings).map_err(module_err("glyphs", "bind_faces"))?;

    let order = order_records(&ds, &cfg.order).map_err(module_err("mapping", "order_records"))?;
    let by_key: BTreeMap<&str, &atelier::glyphs::BoundFace> =
        bound.iter().map(|b| (b.key.as_str(), b)).collect();
    let ordered: Vec<(String, FaceParams)> = order
        .iter()
        .map(|k| (k.clone(), by_key[k.as_str()].params))
        .collect();

    let warnings: BTreeMap<&str, &Vec<String>> = bound
        .iter()
        .filter(|b| !b.warnings.is_empty())
        .map(|b| (b.key.as_str(), &b.warnings))
        .collect();
    if !warnings.is_empty() {
        sidecars.push(Sidecar {
            suffix: "warnings.json",
            bytes: serde_json::to_vec_pretty(&warnings).expect("warning serialization"),
        });
    }

    let scene = compose_face_grid(&ordered, &cfg.grid, cfg.label_each, metadata(&cfg.title, common))
        .map_err(module_err("glyphs", "compose_face_grid"))?;
    Ok(RunOutput { scene, sidecars })
}

pub fn run_lsystem(cfg: &LsystemConfig, common: &Common, base: &Path) -> Result<RunOutput, CliError> {
    let text = match &cfg.definition {
        serde_json::Value::String(path) => {
            let full = base.join(path);
            std::fs::read_to_string(&full).map_err(|e| {
                CliError::config(format!("cannot read l-system `{}`: {e}", full.display()))
            })?
        }
        inline => inline.to_string(),
    };
    let ls = LSystem::from_json(&text).map_err(module_err("generative", "lsystem_parse"))?;
    let expanded =
        lsystem_expand(&ls, cfg.iterations).map_err(module_err("generative", "lsystem_expand"))?;
    let mut unit =
        lsystem_turtle(&expanded, &ls).map_err(module_err("generative", "lsystem_turtle"))?;

    let (w, h) = cfg.size;
    let content_w = (w - 2.0 * cfg.margin).max(1.0);
    let content_h = (h - 2.0 * cfg.margin).max(1.0);
    let s = content_w.min(content_h);
    // Post-transform stroke width equals the configured millimetres.
    set_stroke_widths(&mut unit, cfg.stroke_width / s);
    unit.transform = Affine::translate(
        cfg.margin + (content_w - s) / 2.0,
        cfg.margin + (content_h - s) / 2.0,
    )
    .then(&Affine::scale(s, s));

    let mut scene = Scene::new(w, h, metadata(&cfg.title, common));
    scene.root.push(Primitive::Group(unit));
    Ok(RunOutput {
        scene,
        sidecars: Vec::new(),
    })
}

fn set_stroke_widths(group: &mut Group, width: f64) {
    for child in &mut group.children {
        match child {
            Primitive::Polyline(pl) => {
                if let Some(stroke) = &mut pl.style.stroke {
                    stroke.width = width;
                }
            }
            Primitive::Path(p) => {
                if let Some(stroke) = &mut p.style.stroke {
                    stroke.width = width;
                }
            }
            Primitive::Ellipse(e) => {
                if let Some(stroke) = &mut e.style.stroke {
                    stroke.width = width;
                }
            }
            Primitive::Group(g) => set_stroke_widths(g, width),
            Primitive::Text(_) => {}
        }
    }
}

pub fn run_ifs(cfg: &IfsConfig, common: &Common, base: &Path) -> Result<RunOutput, CliError> {
    let maps: Vec<AffineMap> = if let Some(rows) = &cfg.maps {
        rows.iter().map(|r| AffineMap::from_row(*r)).collect()
    } else if let Some(file) = &cfg.maps_file {
        let name = cfg.preset.as_deref().ok_or_else(|| {
            CliError::config("ifs.maps_file needs ifs.preset to name the entry".to_string())
        })?;
        let full = base.join(file);
        let text = std::fs::read_to_string(&full).map_err(|e| {
            CliError::config(format!("cannot read ifs presets `{}`: {e}", full.display()))
        })?;
        load_ifs_maps(&text, name).map_err(module_err("generative", "load_ifs_maps"))?
    } else if let Some(name) = &cfg.preset {
        ifs_preset(name).map_err(module_err("generative", "ifs_preset"))?
    } else {
        return Err(CliError::config(
            "ifs needs one of: preset, maps_file + preset, or inline maps".to_string(),
        ));
    };

    let points = ifs_chaos_game(&maps, cfg.points, cfg.burn_in, common.seed)
        .map_err(module_err("generative", "ifs_chaos_game"))?;

    let (w, h) = cfg.size;
    let (transform, s) = fit_box(point_bounds(&points), w, h, cfg.margin);
    let mut cloud = render_points(&points, cfg.color, cfg.point_radius / s);
    cloud.transform = transform;

    let mut scene = Scene::new(w, h, metadata(&cfg.title, common));
    scene.root.push(Primitive::Group(cloud));
    Ok(RunOutput {
        scene,
        sidecars: Vec::new(),
    })
}

fn point_bounds(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        b.0 = b.0.min(*x);
        b.1 = b.1.min(*y);
        b.2 = b.2.max(*x);
        b.3 = b.3.max(*y);
    }
    b
}

/// Uniform scale + translation that fits a content box into the canvas
/// minus margins, centred, aspect preserved.
fn fit_box(bbox: (f64, f64, f64, f64), w: f64, h: f64, margin: f64) -> (Affine, f64) {
    let content_w = (w - 2.0 * margin).max(1e-9);
    let content_h = (h - 2.0 * margin).max(1e-9);
    let bw = (bbox.2 - bbox.0).max(0.0);
    let bh = (bbox.3 - bbox.1).max(0.0);
    let extent = bw.max(bh);
    let s = if extent > 0.0 {
        (content_w / bw.max(1e-12)).min(content_h / bh.max(1e-12))
    } else {
        1.0
    };
    let tx = margin + (content_w - bw * s) / 2.0 - bbox.0 * s;
    let ty = margin + (content_h - bh * s) / 2.0 - bbox.1 * s;
    (Affine::translate(tx, ty).then(&Affine::scale(s, s)), s)
}

pub fn run_dla(cfg: &DlaConfig, common: &Common, _base: &Path) -> Result<RunOutput, CliError> {
    let params = DlaParams {
        particle_count: cfg.particles,
        lattice_radius: cfg.lattice_radius,
        spawn_radius_factor: cfg.spawn_radius_factor,
        kill_radius_factor: cfg.kill_radius_factor,
        seed: common.seed,
    };
    let colormap = cfg.colormap.resolve()?;
    let growth = dla_grow(&params, &colormap).map_err(module_err("generative", "dla_grow"))?;

    let (min_x, min_y, max_x, max_y) = growth.cluster.iter().fold(
        (i64::MAX, i64::MAX, i64::MIN, i64::MIN),
        |acc, (x, y)| (acc.0.min(*x), acc.1.min(*y), acc.2.max(*x), acc.3.max(*y)),
    );
    let cells_w = (max_x - min_x + 1) as f64;
    let cells_h = (max_y - min_y + 1) as f64;
    let w = cells_w * cfg.cell_mm + 2.0 * cfg.margin;
    let h = cells_h * cfg.cell_mm + 2.0 * cfg.margin;

    let mut cluster = growth.scene;
    cluster.transform = Affine::translate(
        cfg.margin - min_x as f64 * cfg.cell_mm,
        cfg.margin - min_y as f64 * cfg.cell_mm,
    )
    .then(&Affine::scale(cfg.cell_mm, cfg.cell_mm));

    let mut scene = Scene::new(w, h, metadata(&cfg.title, common));
    scene.root.push(Primitive::Group(cluster));
    Ok(RunOutput {
        scene,
        sidecars: Vec::new(),
    })
}

pub fn run_pixelbars(
    cfg: &PixelBarsConfig,
    common: &Common,
    base: &Path,
) -> Result<RunOutput, CliError> {
    let ds = load_dataset(&cfg.dataset, base, &cfg.key_column)?;
    let spec = PixelBarSpec {
        category_column: cfg.category_column.clone(),
        pixel_value_column: cfg.value_column.clone(),
        pixel_color: cfg.colormap.resolve()?,
        bar_width_px: cfg.bar_width_px,
    };
    let chart = pixel_bar_chart(&ds, &spec).map_err(module_err("generative", "pixel_bar_chart"))?;

    let bars = chart.bars.len().max(1) as f64;
    let width_units = bars * (cfg.bar_width_px as f64 + 1.0) - 1.0;
    let height_units = chart.bars.iter().map(|b| b.height_px).max().unwrap_or(1) as f64;
    let w = width_units * cfg.pixel_mm + 2.0 * cfg.margin;
    let h = height_units * cfg.pixel_mm + 2.0 * cfg.margin;

    let mut grid = chart.scene;
    grid.transform = Affine::translate(cfg.margin, cfg.margin)
        .then(&Affine::scale(cfg.pixel_mm, cfg.pixel_mm));

    let mut sidecars = Vec::new();
    if !chart.skipped.is_empty() {
        sidecars.push(Sidecar {
            suffix: "skipped.json",
            bytes: serde_json::to_vec_pretty(&chart.skipped).expect("skip list serialization"),
        });
    }

    let mut scene = Scene::new(w, h, metadata(&cfg.title, common));
    scene.root.push(Primitive::Group(grid));
    Ok(RunOutput { scene, sidecars })
}

pub fn run_soundscape(
    cfg: &SoundscapeConfig,
    common: &Common,
    base: &Path,
) -> Result<RunOutput, CliError> {
    let full = base.join(&cfg.wav);
    let bytes = std::fs::read(&full)
        .map_err(|e| CliError::config(format!("cannot read wav `{}`: {e}", full.display())))?;
    let clip = parse_wav(&bytes).map_err(module_err("soundscape", "parse_wav"))?;

    let spec = SpectrogramSpec {
        window_size: cfg.window_size,
        hop: cfg.hop,
        window: cfg.window,
        colormap: cfg.colormap.resolve()?,
        db_floor: cfg.db_floor,
    };
    let spectra = spectrogram(&clip, &spec).map_err(module_err("soundscape", "spectrogram"))?;
    let events = resolve_events(&cfg.events, base)?;
    let scene = compose_soundscape(
        &spectra,
        &events,
        &spec,
        cfg.size.0,
        cfg.size.1,
        metadata(&cfg.title, common),
    )
    .map_err(module_err("soundscape", "compose_soundscape"))?;
    Ok(RunOutput {
        scene,
        sidecars: Vec::new(),
    })
}
