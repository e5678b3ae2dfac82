//! Exhibition curation: wall labels, print checks and the manifest.
//!
//! Labels follow the house rules: a title, an author credit, and a
//! description of exactly three paragraphs totalling at most 120 words
//! (a word is a maximal run of non-whitespace). Print validation guards
//! the classic failure of submitting a screenshot instead of vector art.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canvas::Affine;

pub const WORD_LIMIT: usize = 120;
pub const REQUIRED_PARAGRAPHS: usize = 3;
/// Declared size may differ from the SVG by at most this many millimetres.
pub const SIZE_TOLERANCE_MM: f64 = 0.5;
/// Aspect ratios and bounds may differ by at most this fraction.
pub const RATIO_TOLERANCE: f64 = 0.005;

#[derive(Debug, Error)]
pub enum ExhibitError {
    #[error("cannot read `{path}`: {source}")]
    FileUnreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("validation failed:\n{}", report.join("\n"))]
    ValidationFailed { report: Vec<String> },
    #[error("bad entry descriptor `{path}`: {message}")]
    BadDescriptor { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhibitLabel {
    pub title: String,
    pub credit: String,
    pub paragraphs: Vec<String>,
    #[serde(default)]
    pub acknowledgements: String,
}

/// One violation of the label rules, with the offending measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelViolation {
    WordLimitExceeded(usize),
    ParagraphCountWrong(usize),
    TitleEmpty,
    CreditEmpty,
}

impl fmt::Display for LabelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelViolation::WordLimitExceeded(n) => {
                write!(f, "WordLimitExceeded({n}): description has {n} words, limit {WORD_LIMIT}")
            }
            LabelViolation::ParagraphCountWrong(n) => write!(
                f,
                "ParagraphCountWrong({n}): need exactly {REQUIRED_PARAGRAPHS} paragraphs"
            ),
            LabelViolation::TitleEmpty => write!(f, "TitleEmpty: title must not be empty"),
            LabelViolation::CreditEmpty => write!(f, "CreditEmpty: credit must not be empty"),
        }
    }
}

/// Words are maximal runs of non-whitespace, so the count is stable
/// across newline styles and leading or trailing space.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Check every label rule; empty result means the label is valid.
/// Never errors, whatever the input strings contain.
pub fn validate_label(label: &ExhibitLabel) -> Vec<LabelViolation> {
    let mut violations = Vec::new();
    if label.title.trim().is_empty() {
        violations.push(LabelViolation::TitleEmpty);
    }
    if label.credit.trim().is_empty() {
        violations.push(LabelViolation::CreditEmpty);
    }
    if label.paragraphs.len() != REQUIRED_PARAGRAPHS {
        violations.push(LabelViolation::ParagraphCountWrong(label.paragraphs.len()));
    }
    let words: usize = label.paragraphs.iter().map(|p| word_count(p)).sum();
    if words > WORD_LIMIT {
        violations.push(LabelViolation::WordLimitExceeded(words));
    }
    violations
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhibitEntry {
    pub artwork_path: PathBuf,
    pub label: ExhibitLabel,
    pub physical_width_mm: f64,
    pub physical_height_mm: f64,
    pub variants: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintViolation {
    RasterContentFound,
    SizeMismatch {
        declared_mm: (f64, f64),
        svg_mm: (f64, f64),
    },
    AspectMismatch {
        declared: f64,
        viewbox: f64,
    },
    BoundsExceeded {
        bbox: (f64, f64, f64, f64),
        page: (f64, f64, f64, f64),
    },
    MalformedSvg(String),
}

impl fmt::Display for PrintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrintViolation::RasterContentFound => {
                write!(f, "RasterContentFound: embedded raster image element")
            }
            PrintViolation::SizeMismatch { declared_mm, svg_mm } => write!(
                f,
                "SizeMismatch: declared {}x{} mm but SVG says {}x{} mm",
                declared_mm.0, declared_mm.1, svg_mm.0, svg_mm.1
            ),
            PrintViolation::AspectMismatch { declared, viewbox } => write!(
                f,
                "AspectMismatch: physical aspect {declared:.4} vs viewBox aspect {viewbox:.4}"
            ),
            PrintViolation::BoundsExceeded { bbox, page } => write!(
                f,
                "BoundsExceeded: content box ({:.2}, {:.2}, {:.2}, {:.2}) leaves page ({:.2}, {:.2}, {:.2}, {:.2})",
                bbox.0, bbox.1, bbox.2, bbox.3, page.0, page.1, page.2, page.3
            ),
            PrintViolation::MalformedSvg(msg) => write!(f, "MalformedSvg: {msg}"),
        }
    }
}

/// Check an entry's artwork file for print readiness. Only reading the
/// file can fail; every finding is reported as a violation.
pub fn validate_print(entry: &ExhibitEntry) -> Result<Vec<PrintViolation>, ExhibitError> {
    let bytes = std::fs::read(&entry.artwork_path).map_err(|source| ExhibitError::FileUnreadable {
        path: entry.artwork_path.clone(),
        source,
    })?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => return Ok(vec![PrintViolation::MalformedSvg(format!("not utf-8: {e}"))]),
    };
    Ok(check_svg_text(
        text,
        entry.physical_width_mm,
        entry.physical_height_mm,
    ))
}

/// The print checks on SVG text; split out so tests can run without files.
pub fn check_svg_text(text: &str, declared_w_mm: f64, declared_h_mm: f64) -> Vec<PrintViolation> {
    let doc = match roxmltree::Document::parse(text) {
        Ok(d) => d,
        Err(e) => return vec![PrintViolation::MalformedSvg(e.to_string())],
    };
    let mut violations = Vec::new();
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return vec![PrintViolation::MalformedSvg(format!(
            "root element is <{}>, not <svg>",
            root.tag_name().name()
        ))];
    }

    // Raster content anywhere in the tree.
    if doc
        .descendants()
        .any(|n| n.is_element() && n.tag_name().name() == "image")
    {
        violations.push(PrintViolation::RasterContentFound);
    }

    // Declared physical size vs SVG width/height attributes.
    let svg_w = root.attribute("width").and_then(parse_mm);
    let svg_h = root.attribute("height").and_then(parse_mm);
    match (svg_w, svg_h) {
        (Some(w), Some(h)) => {
            if (w - declared_w_mm).abs() > SIZE_TOLERANCE_MM
                || (h - declared_h_mm).abs() > SIZE_TOLERANCE_MM
            {
                violations.push(PrintViolation::SizeMismatch {
                    declared_mm: (declared_w_mm, declared_h_mm),
                    svg_mm: (w, h),
                });
            }
        }
        _ => violations.push(PrintViolation::MalformedSvg(
            "missing or unparsable width/height attributes".into(),
        )),
    }

    // viewBox aspect vs physical aspect, and content bounds vs the page.
    match root.attribute("viewBox").and_then(parse_viewbox) {
        Some((vx, vy, vw, vh)) => {
            let declared_aspect = declared_w_mm / declared_h_mm;
            let viewbox_aspect = vw / vh;
            if ((viewbox_aspect - declared_aspect) / declared_aspect).abs() > RATIO_TOLERANCE {
                violations.push(PrintViolation::AspectMismatch {
                    declared: declared_aspect,
                    viewbox: viewbox_aspect,
                });
            }
            if let Some(bbox) = content_bbox(&doc) {
                let slack_x = vw * RATIO_TOLERANCE;
                let slack_y = vh * RATIO_TOLERANCE;
                let page = (vx, vy, vx + vw, vy + vh);
                if bbox.0 < page.0 - slack_x
                    || bbox.1 < page.1 - slack_y
                    || bbox.2 > page.2 + slack_x
                    || bbox.3 > page.3 + slack_y
                {
                    violations.push(PrintViolation::BoundsExceeded { bbox, page });
                }
            }
        }
        None => violations.push(PrintViolation::MalformedSvg(
            "missing or unparsable viewBox".into(),
        )),
    }

    violations
}

/// Accepts `123`, `123.5`, `123mm`; anything else (px, cm, %) is None —
/// this validator targets millimetre print output.
fn parse_mm(value: &str) -> Option<f64> {
    let v = value.trim();
    let v = v.strip_suffix("mm").unwrap_or(v);
    v.trim().parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0)
}

fn parse_viewbox(value: &str) -> Option<(f64, f64, f64, f64)> {
    let parts: Vec<f64> = value
        .split([' ', ','])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect::<Result<_, _>>()
        .ok()?;
    match parts.as_slice() {
        [x, y, w, h] if *w > 0.0 && *h > 0.0 => Some((*x, *y, *w, *h)),
        _ => None,
    }
}

// --------------------------------------------------------------------------
// Content bounding box over the SVG subset this engine emits (plus rect,
// which other tools commonly produce). Unknown elements are skipped.

fn content_bbox(doc: &roxmltree::Document) -> Option<(f64, f64, f64, f64)> {
    let mut acc: Option<(f64, f64, f64, f64)> = None;
    walk_bbox(doc.root_element(), Affine::IDENTITY, &mut acc);
    acc
}

fn add_point(acc: &mut Option<(f64, f64, f64, f64)>, t: &Affine, x: f64, y: f64) {
    let p = t.apply(crate::canvas::Point::new(x, y));
    match acc {
        None => *acc = Some((p.x, p.y, p.x, p.y)),
        Some(b) => {
            b.0 = b.0.min(p.x);
            b.1 = b.1.min(p.y);
            b.2 = b.2.max(p.x);
            b.3 = b.3.max(p.y);
        }
    }
}

fn walk_bbox(node: roxmltree::Node, t: Affine, acc: &mut Option<(f64, f64, f64, f64)>) {
    for child in node.children().filter(|c| c.is_element()) {
        let t = match child.attribute("transform") {
            Some(spec) => t.then(&parse_transform(spec)),
            None => t,
        };
        let attr = |name: &str| child.attribute(name).and_then(|v| v.parse::<f64>().ok());
        match child.tag_name().name() {
            "circle" => {
                if let (Some(cx), Some(cy), Some(r)) = (attr("cx"), attr("cy"), attr("r")) {
                    add_point(acc, &t, cx - r, cy - r);
                    add_point(acc, &t, cx + r, cy + r);
                }
            }
            "ellipse" => {
                if let (Some(cx), Some(cy), Some(rx), Some(ry)) =
                    (attr("cx"), attr("cy"), attr("rx"), attr("ry"))
                {
                    add_point(acc, &t, cx - rx, cy - ry);
                    add_point(acc, &t, cx + rx, cy + ry);
                }
            }
            "rect" => {
                if let (Some(x), Some(y), Some(w), Some(h)) =
                    (attr("x"), attr("y"), attr("width"), attr("height"))
                {
                    add_point(acc, &t, x, y);
                    add_point(acc, &t, x + w, y + h);
                }
            }
            "polyline" | "polygon" => {
                if let Some(points) = child.attribute("points") {
                    for (x, y) in parse_points(points) {
                        add_point(acc, &t, x, y);
                    }
                }
            }
            "path" => {
                if let Some(d) = child.attribute("d") {
                    for (x, y) in parse_path_points(d) {
                        add_point(acc, &t, x, y);
                    }
                }
            }
            "text" => {
                if let (Some(x), Some(y)) = (attr("x"), attr("y")) {
                    add_point(acc, &t, x, y);
                }
            }
            _ => {}
        }
        walk_bbox(child, t, acc);
    }
}

fn parse_points(points: &str) -> Vec<(f64, f64)> {
    let nums: Vec<f64> = points
        .split([' ', ',', '\n', '\t'])
        .filter(|s| !s.is_empty())
        .filter_map(|s| s.parse().ok())
        .collect();
    nums.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

/// Control points of absolute M/L/Q/C (and Z) path data. Relative or arc
/// commands end the scan; anything gathered so far still counts.
fn parse_path_points(d: &str) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut nums: Vec<f64> = Vec::new();
    let flush = |nums: &mut Vec<f64>, out: &mut Vec<(f64, f64)>| {
        for pair in nums.chunks_exact(2) {
            out.push((pair[0], pair[1]));
        }
        nums.clear();
    };
    let mut token = String::new();
    for ch in d.chars() {
        match ch {
            'M' | 'L' | 'Q' | 'C' | 'Z' | 'z' => {
                if !token.is_empty() {
                    if let Ok(v) = token.parse() {
                        nums.push(v);
                    }
                    token.clear();
                }
                flush(&mut nums, &mut out);
            }
            ' ' | ',' | '\n' | '\t' => {
                if !token.is_empty() {
                    if let Ok(v) = token.parse() {
                        nums.push(v);
                    }
                    token.clear();
                }
            }
            '-' if !token.is_empty() && !token.ends_with(['e', 'E']) => {
                if let Ok(v) = token.parse() {
                    nums.push(v);
                }
                token.clear();
                token.push('-');
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' || c == 'e' || c == 'E' || c == '+' => {
                token.push(c)
            }
            _ => break,
        }
    }
    if !token.is_empty() {
        if let Ok(v) = token.parse() {
            nums.push(v);
        }
    }
    flush(&mut nums, &mut out);
    out
}

/// `matrix(a,b,c,d,e,f)` in SVG column order, or `translate(x[,y])`.
fn parse_transform(spec: &str) -> Affine {
    let spec = spec.trim();
    let nums = |body: &str| -> Vec<f64> {
        body.split([' ', ','])
            .filter(|s| !s.is_empty())
            .filter_map(|s| s.parse().ok())
            .collect()
    };
    if let Some(body) = spec.strip_prefix("matrix(").and_then(|s| s.strip_suffix(')')) {
        let v = nums(body);
        if v.len() == 6 {
            return Affine {
                a: v[0],
                c: v[1],
                b: v[2],
                d: v[3],
                e: v[4],
                f: v[5],
            };
        }
    }
    if let Some(body) = spec.strip_prefix("translate(").and_then(|s| s.strip_suffix(')')) {
        let v = nums(body);
        if v.len() == 1 {
            return Affine::translate(v[0], 0.0);
        }
        if v.len() == 2 {
            return Affine::translate(v[0], v[1]);
        }
    }
    Affine::IDENTITY
}

// --------------------------------------------------------------------------
// Manifest

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub exhibition_title: String,
    pub entries: Vec<ExhibitEntry>,
    pub generated_at: String,
}

/// The manifest JSON, plus one plain-text label card per entry.
#[derive(Debug, Clone)]
pub struct ManifestOutput {
    pub manifest: Manifest,
    pub json: Vec<u8>,
    pub cards: Vec<LabelCard>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelCard {
    pub title: String,
    pub text: String,
}

/// Assemble the print manifest. Every entry must pass both label and
/// print validation and titles must be unique; otherwise the full list of
/// failures is returned. `generated_at` is injected by the caller so the
/// output is reproducible.
pub fn build_manifest(
    entries: &[ExhibitEntry],
    exhibition_title: &str,
    generated_at: &str,
) -> Result<ManifestOutput, ExhibitError> {
    let mut report = Vec::new();
    let mut seen_titles = BTreeSet::new();
    for entry in entries {
        let title = &entry.label.title;
        for v in validate_label(&entry.label) {
            report.push(format!("{title}: {v}"));
        }
        match validate_print(entry) {
            Ok(violations) => {
                for v in violations {
                    report.push(format!("{title}: {v}"));
                }
            }
            Err(e) => report.push(format!("{title}: {e}")),
        }
        if !seen_titles.insert(title.clone()) {
            report.push(format!("{title}: DuplicateTitle: title used more than once"));
        }
    }
    if !report.is_empty() {
        return Err(ExhibitError::ValidationFailed { report });
    }

    let manifest = Manifest {
        exhibition_title: exhibition_title.to_string(),
        entries: entries.to_vec(),
        generated_at: generated_at.to_string(),
    };
    let json_value = serde_json::json!({
        "exhibition_title": manifest.exhibition_title,
        "generated_at": manifest.generated_at,
        "entries": manifest.entries.iter().map(|e| {
            serde_json::json!({
                "title": e.label.title,
                "credit": e.label.credit,
                "artwork": e.artwork_path.to_string_lossy(),
                "width_mm": e.physical_width_mm,
                "height_mm": e.physical_height_mm,
                "variants": e.variants.iter().map(|v| v.to_string_lossy()).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
    });
    let mut json = serde_json::to_string_pretty(&json_value)
        .expect("manifest serialization cannot fail")
        .into_bytes();
    json.push(b'\n');

    let cards = entries.iter().map(|e| label_card(&e.label)).collect();
    Ok(ManifestOutput {
        manifest,
        json,
        cards,
    })
}

/// Plain-text label card: title, credit, blank line, the three
/// paragraphs, then acknowledgements when present.
pub fn label_card(label: &ExhibitLabel) -> LabelCard {
    let mut text = String::new();
    text.push_str(&label.title);
    text.push('\n');
    text.push_str(&label.credit);
    text.push('\n');
    for p in &label.paragraphs {
        text.push('\n');
        text.push_str(p);
        text.push('\n');
    }
    if !label.acknowledgements.is_empty() {
        text.push('\n');
        text.push_str(&label.acknowledgements);
        text.push('\n');
    }
    LabelCard {
        title: label.title.clone(),
        text,
    }
}

// --------------------------------------------------------------------------
// Entry descriptors (the on-disk form consumed by the CLI)

/// JSON shape of one exhibit entry descriptor:
/// `{"title", "credit", "paragraphs", "acknowledgements", "artwork",
///   "width_mm", "height_mm", "variants"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDescriptor {
    pub title: String,
    pub credit: String,
    pub paragraphs: Vec<String>,
    #[serde(default)]
    pub acknowledgements: String,
    pub artwork: String,
    pub width_mm: f64,
    pub height_mm: f64,
    #[serde(default)]
    pub variants: Vec<String>,
}

/// Load a descriptor file; the artwork and variant paths resolve relative
/// to the descriptor's directory.
pub fn load_entry(path: &Path) -> Result<ExhibitEntry, ExhibitError> {
    let bytes = std::fs::read(path).map_err(|source| ExhibitError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let descriptor: EntryDescriptor =
        serde_json::from_slice(&bytes).map_err(|e| ExhibitError::BadDescriptor {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(ExhibitEntry {
        artwork_path: base.join(&descriptor.artwork),
        label: ExhibitLabel {
            title: descriptor.title,
            credit: descriptor.credit,
            paragraphs: descriptor.paragraphs,
            acknowledgements: descriptor.acknowledgements,
        },
        physical_width_mm: descriptor.width_mm,
        physical_height_mm: descriptor.height_mm,
        variants: descriptor.variants.iter().map(|v| base.join(v)).collect(),
    })
}
