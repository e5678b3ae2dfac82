//! atelier — a generative data-art engine.
//!
//! Turns tabular and audio data into deterministic, print-quality vector
//! artworks. The pipeline is data in ([`dataset`], [`soundscape`]),
//! visual mapping ([`mapping`]), form ([`glyphs`], [`generative`]),
//! output ([`canvas`]) and curation ([`exhibition`]).
//!
//! Everything is reproducible: randomness comes only from explicit seeds
//! ([`rng`]), and equal inputs always serialize to identical bytes.

pub mod canvas;
pub mod dataset;
pub mod exhibition;
pub mod generative;
pub mod glyphs;
pub mod mapping;
pub mod rng;
pub mod soundscape;

pub use canvas::{Scene, SceneMetadata, SketchStyle};
pub use dataset::Dataset;
pub use mapping::{ColorMap, GridSpec, ScaleSpec};
