//! Audio ingestion, spectra and the spectrum-strip soundscape artwork.

mod fft;
mod wav;

pub use fft::fft_magnitude;
pub use wav::{parse_wav, write_wav};

use serde::Deserialize;
use thiserror::Error;

use crate::canvas::{Group, Path, PathSeg, Point, Primitive, Scene, SceneMetadata, Style, Text, TextAnchor};
use crate::mapping::{colormap_sample, ColorMap};

#[derive(Debug, Error)]
pub enum SoundError {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed riff: {0}")]
    MalformedRiff(String),
    #[error("frame length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("clip of {len} samples is shorter than one {window}-sample window")]
    ClipTooShort { len: usize, window: usize },
    #[error("event at frame {frame} but only {frames} frames exist")]
    EventOutOfRange { frame: usize, frames: usize },
    #[error("invalid spectrogram spec: {0}")]
    InvalidSpec(String),
}

/// Mono audio in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl AudioClip {
    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Magnitude per frequency bin of one analysis frame; length N/2 + 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_hz: f64,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    /// Index of the strongest bin.
    pub fn argmax_bin(&self) -> usize {
        self.magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    Hann,
}

/// Framing and rendering parameters for a spectrogram.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrogramSpec {
    #[serde(default = "default_window_size")]
    pub window_size: usize,
    #[serde(default = "default_hop")]
    pub hop: usize,
    #[serde(default = "default_window")]
    pub window: WindowKind,
    #[serde(default = "default_colormap")]
    pub colormap: ColorMap,
    /// Levels below this many dB render as the colour map's origin.
    #[serde(default = "default_db_floor")]
    pub db_floor: f64,
}

fn default_window_size() -> usize {
    4096
}

fn default_hop() -> usize {
    512
}

fn default_window() -> WindowKind {
    WindowKind::Hann
}

fn default_colormap() -> ColorMap {
    ColorMap::grayscale()
}

fn default_db_floor() -> f64 {
    -80.0
}

impl Default for SpectrogramSpec {
    fn default() -> Self {
        SpectrogramSpec {
            window_size: default_window_size(),
            hop: default_hop(),
            window: default_window(),
            colormap: default_colormap(),
            db_floor: default_db_floor(),
        }
    }
}

impl SpectrogramSpec {
    pub fn validate(&self) -> Result<(), SoundError> {
        if self.window_size < 16 || !self.window_size.is_power_of_two() {
            return Err(SoundError::InvalidSpec(format!(
                "window_size {} must be a power of two >= 16",
                self.window_size
            )));
        }
        if self.hop == 0 || self.hop > self.window_size {
            return Err(SoundError::InvalidSpec(format!(
                "hop {} must be in 1..={}",
                self.hop, self.window_size
            )));
        }
        if !(self.db_floor < 0.0 && self.db_floor.is_finite()) {
            return Err(SoundError::InvalidSpec("db_floor must be negative".into()));
        }
        Ok(())
    }
}

/// Short-time magnitude spectra at offsets 0, hop, 2·hop, ... while a full
/// window fits: exactly `floor((len - window) / hop) + 1` frames.
pub fn spectrogram(clip: &AudioClip, spec: &SpectrogramSpec) -> Result<Vec<Spectrum>, SoundError> {
    spec.validate()?;
    let len = clip.samples.len();
    if len < spec.window_size {
        return Err(SoundError::ClipTooShort {
            len,
            window: spec.window_size,
        });
    }
    let frames = (len - spec.window_size) / spec.hop + 1;
    let bin_hz = clip.sample_rate as f64 / spec.window_size as f64;
    let mut out = Vec::with_capacity(frames);
    for i in 0..frames {
        let start = i * spec.hop;
        let frame = &clip.samples[start..start + spec.window_size];
        let mut spectrum = fft_magnitude(frame, spec.window)?;
        spectrum.bin_hz = bin_hz;
        out.push(spectrum);
    }
    Ok(out)
}

/// Offset added before the log so silence has a defined level.
pub const DB_EPSILON: f64 = 1e-12;

fn db_level(magnitude: f64, db_floor: f64) -> f64 {
    let db = 20.0 * (magnitude + DB_EPSILON).log10();
    let db = db.clamp(db_floor, 0.0);
    (db - db_floor) / -db_floor
}

/// Fraction of the canvas height reserved under the strip for captions.
const CAPTION_BAND: f64 = 0.12;

/// Horizontal strip artwork: one column of per-bin cells per frame
/// (bin 0 at the bottom), caption text markers beneath the strip at
/// their frame's x position.
pub fn compose_soundscape(
    spectra: &[Spectrum],
    events: &[(usize, String)],
    spec: &SpectrogramSpec,
    canvas_w: f64,
    canvas_h: f64,
    metadata: SceneMetadata,
) -> Result<Scene, SoundError> {
    spec.validate()?;
    if spectra.is_empty() {
        return Err(SoundError::ClipTooShort {
            len: 0,
            window: spec.window_size,
        });
    }
    for (frame, _) in events {
        if *frame >= spectra.len() {
            return Err(SoundError::EventOutOfRange {
                frame: *frame,
                frames: spectra.len(),
            });
        }
    }

    let frames = spectra.len();
    let bins = spectra[0].magnitudes.len();
    let strip_h = canvas_h * (1.0 - CAPTION_BAND);
    let cell_w = canvas_w / frames as f64;
    let cell_h = strip_h / bins as f64;

    let mut scene = Scene::new(canvas_w, canvas_h, metadata);
    for (fi, spectrum) in spectra.iter().enumerate() {
        let x = fi as f64 * cell_w;
        let mut column = Group::new();
        for (bi, magnitude) in spectrum.magnitudes.iter().enumerate() {
            let t = db_level(*magnitude, spec.db_floor);
            let color = colormap_sample(t, &spec.colormap);
            // Low frequencies along the bottom edge.
            let y = strip_h - (bi + 1) as f64 * cell_h;
            column.push(Primitive::Path(Path {
                segments: vec![
                    PathSeg::MoveTo(Point::new(x, y)),
                    PathSeg::LineTo(Point::new(x + cell_w, y)),
                    PathSeg::LineTo(Point::new(x + cell_w, y + cell_h)),
                    PathSeg::LineTo(Point::new(x, y + cell_h)),
                    PathSeg::LineTo(Point::new(x, y)),
                ],
                style: Style::filled(color),
            }));
        }
        scene.root.push(Primitive::Group(column));
    }

    let caption_size = canvas_h * CAPTION_BAND * 0.35;
    let caption_y = strip_h + canvas_h * CAPTION_BAND * 0.55;
    for (frame, caption) in events {
        scene.root.push(Primitive::Text(Text {
            x: *frame as f64 * cell_w,
            y: caption_y,
            content: caption.clone(),
            size: caption_size,
            anchor: TextAnchor::Start,
            fill: [40, 40, 40],
        }));
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: u32, samples: usize) -> AudioClip {
        AudioClip {
            sample_rate: rate,
            samples: (0..samples)
                .map(|i| (std::f64::consts::TAU * freq * i as f64 / rate as f64).sin())
                .collect(),
        }
    }

    fn small_spec(window_size: usize, hop: usize) -> SpectrogramSpec {
        SpectrogramSpec {
            window_size,
            hop,
            window: WindowKind::Rectangular,
            colormap: ColorMap::grayscale(),
            db_floor: -80.0,
        }
    }

    #[test]
    fn frame_count_floor_arithmetic() {
        let clip = AudioClip {
            sample_rate: 44100,
            samples: vec![0.0; 1024],
        };
        assert_eq!(spectrogram(&clip, &small_spec(1024, 512)).unwrap().len(), 1);
        let clip2 = AudioClip {
            sample_rate: 44100,
            samples: vec![0.0; 2048],
        };
        assert_eq!(spectrogram(&clip2, &small_spec(1024, 512)).unwrap().len(), 3);
    }

    #[test]
    fn clip_too_short() {
        let clip = AudioClip {
            sample_rate: 44100,
            samples: vec![0.0; 100],
        };
        assert!(matches!(
            spectrogram(&clip, &small_spec(1024, 512)),
            Err(SoundError::ClipTooShort { .. })
        ));
    }

    #[test]
    fn tone_peaks_at_expected_bin() {
        // round(440 * 4096 / 44100) = 41.
        let clip = tone(440.0, 44100, 4096 + 2 * 512);
        let mut spec = small_spec(4096, 512);
        spec.window = WindowKind::Hann;
        let spectra = spectrogram(&clip, &spec).unwrap();
        assert_eq!(spectra.len(), 3);
        for s in &spectra {
            assert_eq!(s.argmax_bin(), 41);
            assert!((s.bin_hz - 44100.0 / 4096.0).abs() < 1e-9);
        }
    }

    #[test]
    fn silence_renders_at_floor_color() {
        let spectra = vec![Spectrum {
            bin_hz: 1.0,
            magnitudes: vec![0.0; 9],
        }];
        let spec = small_spec(16, 8);
        let scene =
            compose_soundscape(&spectra, &[], &spec, 100.0, 50.0, SceneMetadata::default())
                .unwrap();
        // One column group with 9 cells, all at the colormap origin (black).
        let Primitive::Group(column) = &scene.root.children[0] else {
            panic!("expected column group");
        };
        assert_eq!(column.children.len(), 9);
        for cell in &column.children {
            let Primitive::Path(p) = cell else { panic!() };
            assert_eq!(p.style.fill, Some([0, 0, 0]));
        }
    }

    #[test]
    fn caption_anchoring() {
        let spectra: Vec<Spectrum> = (0..4)
            .map(|_| Spectrum {
                bin_hz: 1.0,
                magnitudes: vec![0.0; 5],
            })
            .collect();
        let spec = small_spec(16, 8);
        let events = vec![(0usize, "start".to_string())];
        let scene = compose_soundscape(
            &spectra,
            &events,
            &spec,
            200.0,
            100.0,
            SceneMetadata::default(),
        )
        .unwrap();
        let texts: Vec<&Text> = scene
            .root
            .children
            .iter()
            .filter_map(|p| match p {
                Primitive::Text(t) => Some(t),
                _ => None,
            })
            .collect();
        assert_eq!(texts.len(), 1);
        assert_eq!(texts[0].x, 0.0);
        // Caption sits below the strip.
        assert!(texts[0].y > 100.0 * (1.0 - CAPTION_BAND));
    }

    #[test]
    fn event_out_of_range() {
        let spectra = vec![Spectrum {
            bin_hz: 1.0,
            magnitudes: vec![0.0; 5],
        }];
        let spec = small_spec(16, 8);
        let events = vec![(1usize, "late".to_string())];
        assert!(matches!(
            compose_soundscape(&spectra, &events, &spec, 10.0, 10.0, SceneMetadata::default()),
            Err(SoundError::EventOutOfRange { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        let mut s = small_spec(100, 10); // not a power of two
        assert!(s.validate().is_err());
        s = small_spec(1024, 0);
        assert!(s.validate().is_err());
        s = small_spec(1024, 2048);
        assert!(s.validate().is_err());
        s = small_spec(1024, 512);
        s.db_floor = 3.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn db_mapping_extremes() {
        assert_eq!(db_level(0.0, -80.0), 0.0);
        assert_eq!(db_level(1.0, -80.0), 1.0);
        let mid = db_level(1e-2, -80.0);
        assert!((mid - 0.5).abs() < 1e-9, "{mid}"); // -40 dB of -80 floor
    }
}
