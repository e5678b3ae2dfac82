//! Pipeline configuration: one JSON file, overridable from the command
//! line with `--set key.path=value`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use atelier::canvas::SketchStyle;
use atelier::dataset::{Combiner, NormalizeMode};
use atelier::glyphs::FaceChannel;
use atelier::mapping::{ColorMap, GridSpec, OrderBy, ScaleSpec};
use atelier::soundscape::WindowKind;

use crate::CliError;

pub const PIPELINE_NAMES: [&str; 6] = ["faces", "lsystem", "ifs", "dla", "pixelbars", "soundscape"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub sketch: Option<SketchStyle>,
    #[serde(default)]
    pub faces: Option<FacesConfig>,
    #[serde(default)]
    pub lsystem: Option<LsystemConfig>,
    #[serde(default)]
    pub ifs: Option<IfsConfig>,
    #[serde(default)]
    pub dla: Option<DlaConfig>,
    #[serde(default)]
    pub pixelbars: Option<PixelBarsConfig>,
    #[serde(default)]
    pub soundscape: Option<SoundscapeConfig>,
}

impl Config {
    pub fn selected_pipelines(&self) -> Vec<&'static str> {
        let mut present = Vec::new();
        if self.faces.is_some() {
            present.push("faces");
        }
        if self.lsystem.is_some() {
            present.push("lsystem");
        }
        if self.ifs.is_some() {
            present.push("ifs");
        }
        if self.dla.is_some() {
            present.push("dla");
        }
        if self.pixelbars.is_some() {
            present.push("pixelbars");
        }
        if self.soundscape.is_some() {
            present.push("soundscape");
        }
        present
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeStep {
    pub keys: Vec<String>,
    pub new_key: String,
    pub combiner: Combiner,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeStep {
    pub columns: Vec<String>,
    pub mode: NormalizeMode,
}

/// A colour map given either by preset name or inline stops.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ColorMapRef {
    Name(String),
    Inline(ColorMap),
}

impl ColorMapRef {
    pub fn resolve(&self) -> Result<ColorMap, CliError> {
        match self {
            ColorMapRef::Inline(cm) => Ok(cm.clone()),
            ColorMapRef::Name(name) => ColorMap::preset(name).ok_or_else(|| {
                CliError::config(format!(
                    "unknown colormap preset `{name}` (try grayscale, happiness, fire, or inline stops)"
                ))
            }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingConfig {
    pub channel: FaceChannel,
    pub column: String,
    #[serde(default)]
    pub scale: Option<ScaleSpec>,
    #[serde(default)]
    pub colormap: Option<ColorMapRef>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacesConfig {
    pub dataset: PathBuf,
    pub key_column: String,
    #[serde(default)]
    pub fallbacks: Vec<PathBuf>,
    #[serde(default)]
    pub merges: Vec<MergeStep>,
    #[serde(default)]
    pub drops: Vec<String>,
    #[serde(default)]
    pub normalize: Option<NormalizeStep>,
    pub bindings: Vec<BindingConfig>,
    pub grid: GridSpec,
    #[serde(default = "default_order")]
    pub order: OrderBy,
    #[serde(default = "default_true")]
    pub label_each: bool,
    #[serde(default)]
    pub title: String,
}

fn default_order() -> OrderBy {
    OrderBy::KeyAlpha
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsystemConfig {
    /// Path to a definition file, or the definition object inline.
    pub definition: serde_json::Value,
    pub iterations: usize,
    #[serde(default = "default_canvas")]
    pub size: (f64, f64),
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_stroke")]
    pub stroke_width: f64,
    #[serde(default)]
    pub title: String,
}

fn default_canvas() -> (f64, f64) {
    (200.0, 200.0)
}

fn default_margin() -> f64 {
    10.0
}

fn default_stroke() -> f64 {
    0.4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsConfig {
    /// Built-in preset name, or the name inside `maps_file` when given.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub maps_file: Option<PathBuf>,
    /// Inline coefficient rows `[a, b, c, d, e, f, weight]`.
    #[serde(default)]
    pub maps: Option<Vec<[f64; 7]>>,
    pub points: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_canvas")]
    pub size: (f64, f64),
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_ifs_color")]
    pub color: [u8; 3],
    #[serde(default = "default_point_radius")]
    pub point_radius: f64,
    #[serde(default)]
    pub title: String,
}

fn default_burn_in() -> usize {
    100
}

fn default_ifs_color() -> [u8; 3] {
    [34, 104, 54]
}

fn default_point_radius() -> f64 {
    0.12
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlaConfig {
    pub particles: usize,
    #[serde(default = "default_lattice_radius")]
    pub lattice_radius: i64,
    #[serde(default = "default_spawn_factor")]
    pub spawn_radius_factor: f64,
    #[serde(default = "default_kill_factor")]
    pub kill_radius_factor: f64,
    #[serde(default = "default_dla_colormap")]
    pub colormap: ColorMapRef,
    /// Millimetres per lattice cell.
    #[serde(default = "default_cell_mm")]
    pub cell_mm: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub title: String,
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

fn default_dla_colormap() -> ColorMapRef {
    ColorMapRef::Name("fire".into())
}

fn default_cell_mm() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PixelBarsConfig {
    pub dataset: PathBuf,
    pub key_column: String,
    pub category_column: String,
    pub value_column: String,
    #[serde(default = "default_pixel_colormap")]
    pub colormap: ColorMapRef,
    #[serde(default = "default_bar_width")]
    pub bar_width_px: u32,
    /// Millimetres per pixel cell.
    #[serde(default = "default_pixel_mm")]
    pub pixel_mm: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub title: String,
}

fn default_pixel_colormap() -> ColorMapRef {
    ColorMapRef::Name("fire".into())
}

fn default_bar_width() -> u32 {
    5
}

fn default_pixel_mm() -> f64 {
    2.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoundscapeConfig {
    pub wav: PathBuf,
    #[serde(default = "default_window_size")]
    pub window_size: usize,
    #[serde(default = "default_hop")]
    pub hop: usize,
    #[serde(default = "default_window_kind")]
    pub window: WindowKind,
    #[serde(default = "default_db_floor")]
    pub db_floor: f64,
    #[serde(default = "default_sound_colormap")]
    pub colormap: ColorMapRef,
    /// Event file path, or the `[{"frame": n, "caption": "..."}]` list inline.
    #[serde(default)]
    pub events: Option<serde_json::Value>,
    #[serde(default = "default_strip_size")]
    pub size: (f64, f64),
    #[serde(default)]
    pub title: String,
}

fn default_window_size() -> usize {
    4096
}

fn default_hop() -> usize {
    512
}

fn default_window_kind() -> WindowKind {
    WindowKind::Hann
}

fn default_db_floor() -> f64 {
    -80.0
}

fn default_sound_colormap() -> ColorMapRef {
    ColorMapRef::Name("grayscale".into())
}

fn default_strip_size() -> (f64, f64) {
    (400.0, 150.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventEntry {
    pub frame: usize,
    pub caption: String,
}

// ---------------------------------------------------------------------------
// Loading and overrides

/// Read a config file into a JSON document, apply `--set` overrides and
/// flag overrides, then deserialize. Field errors name the offending key.
pub fn load_config(
    path: &Path,
    sets: &[String],
    seed_flag: Option<u64>,
    sketch_roughness: Option<f64>,
) -> Result<(Config, PathBuf), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read config `{}`: {e}", path.display())))?;
    let mut doc: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::config(format!("config is not valid json: {e}")))?;
    if !doc.is_object() {
        return Err(CliError::config("config must be a json object".to_string()));
    }

    for assignment in sets {
        apply_set(&mut doc, assignment)?;
    }
    if let Some(seed) = seed_flag {
        doc["seed"] = serde_json::json!(seed);
    }
    if let Some(r) = sketch_roughness {
        if !doc.get("sketch").is_some_and(|s| s.is_object()) {
            doc["sketch"] = serde_json::json!({});
        }
        doc["sketch"]["roughness"] = serde_json::json!(r);
    }

    let config: Config = serde_json::from_value(doc)
        .map_err(|e| CliError::config(format!("invalid config field: {e}")))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((config, base))
}

/// `a.b.c=value`; the value parses as JSON when possible, else as a string.
fn apply_set(doc: &mut serde_json::Value, assignment: &str) -> Result<(), CliError> {
    let Some((key_path, raw_value)) = assignment.split_once('=') else {
        return Err(CliError::config(format!(
            "--set `{assignment}` must look like key.path=value"
        )));
    };
    let value: serde_json::Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
    let mut cursor = doc;
    let parts: Vec<&str> = key_path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::config(format!(
                "--set `{assignment}` has an empty path segment"
            )));
        }
        if !cursor.is_object() {
            return Err(CliError::config(format!(
                "--set `{assignment}`: `{}` is not an object",
                parts[..i].join(".")
            )));
        }
        let map = cursor.as_object_mut().unwrap();
        if i == parts.len() - 1 {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        cursor = map
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(serde_json::Map::new()));
    }
    unreachable!("split never yields zero parts")
}

/// Load events from the config value: a path (relative to the config) or
/// an inline list.
pub fn resolve_events(
    value: &Option<serde_json::Value>,
    base: &Path,
) -> Result<Vec<(usize, String)>, CliError> {
    let Some(value) = value else {
        return Ok(Vec::new());
    };
    let text_owned;
    let parsed: Vec<EventEntry> = match value {
        serde_json::Value::String(path) => {
            let full = base.join(path);
            text_owned = std::fs::read_to_string(&full).map_err(|e| {
                CliError::config(format!("cannot read events file `{}`: {e}", full.display()))
            })?;
            serde_json::from_str(&text_owned)
                .map_err(|e| CliError::config(format!("bad events file: {e}")))?
        }
        other => serde_json::from_value(other.clone())
            .map_err(|e| CliError::config(format!("bad inline events: {e}")))?,
    };
    Ok(parsed.into_iter().map(|e| (e.frame, e.caption)).collect())
}

/// Map a BTree of override-friendly pieces into the mapping the glyph
/// binder expects.
pub fn binding_to_channel(
    b: &BindingConfig,
) -> Result<atelier::glyphs::ChannelBinding, CliError> {
    use atelier::glyphs::{ChannelBinding, ChannelMapping};
    let mapping = if b.channel == FaceChannel::FaceColor {
        let cm = match &b.colormap {
            Some(r) => r.resolve()?,
            None => ColorMap::happiness(), // documented aesthetic default
        };
        ChannelMapping::Color(cm)
    } else if let Some(scale) = &b.scale {
        ChannelMapping::Scale(*scale)
    } else {
        ChannelMapping::Identity
    };
    Ok(ChannelBinding {
        channel: b.channel,
        column: b.column.clone(),
        mapping,
    })
}

