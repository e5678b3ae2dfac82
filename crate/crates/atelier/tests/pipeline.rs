//! Fixture-driven tests of the happiness-faces data path, checked against
//! independent oracles: a naive CSV scan for column statistics, a direct
//! set computation for backfill coverage, and code-point sorting for the
//! alphabetical ordering.

use std::collections::BTreeSet;
use std::path::PathBuf;

use atelier::canvas::to_svg;
use atelier::dataset::{
    backfill, drop_records, merge_records, normalize, parse_csv, Combiner, Dataset, NormalizeMode,
};
use atelier::glyphs::{bind_faces, compose_face_grid, ChannelBinding, ChannelMapping, FaceChannel};
use atelier::mapping::{grid_options, order_records, ColorMap, GridSpec, OrderBy};

fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../sample").join(name)
}

fn load(name: &str) -> Dataset {
    let path = sample(name);
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("read {path:?}: {e}"));
    let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
    parse_csv(&stem, &bytes, "country").expect("fixture parses")
}

const COLUMNS: [&str; 5] = ["score", "social_support", "generosity", "gdp", "life_expectancy"];

/// Straightforward scan over the raw CSV text; none of the fixture cells
/// are quoted, so splitting on commas is exact.
fn naive_column_stats(name: &str) -> Vec<(String, f64, f64)> {
    let text = std::fs::read_to_string(sample(name)).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut stats: Vec<(String, Option<(f64, f64)>)> = header
        .iter()
        .map(|h| (h.to_string(), None))
        .collect();
    for line in lines {
        for (i, cell) in line.split(',').enumerate() {
            if let Ok(v) = cell.parse::<f64>() {
                let entry = &mut stats[i].1;
                *entry = Some(match entry {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
        }
    }
    stats
        .into_iter()
        .filter_map(|(name, s)| s.map(|(lo, hi)| (name, lo, hi)))
        .collect()
}

#[test]
fn fixture_parses_with_165_records_and_exact_stats() {
    let ds = load("whr_2024.csv");
    assert_eq!(ds.rows.len(), 165);
    let oracle = naive_column_stats("whr_2024.csv");
    assert_eq!(oracle.len(), COLUMNS.len());
    for (col, lo, hi) in oracle {
        let meta = ds.column(&col).expect("column exists");
        assert_eq!(meta.observed_min, Some(lo), "{col} min");
        assert_eq!(meta.observed_max, Some(hi), "{col} max");
    }
}

/// Cells absent in the fixtures, computed directly from the raw text.
fn absent_cells(name: &str) -> BTreeSet<(String, String)> {
    let text = std::fs::read_to_string(sample(name)).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_string).collect();
    let mut out = BTreeSet::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        for (i, cell) in cells.iter().enumerate().skip(1) {
            if cell.is_empty() {
                out.insert((cells[0].to_string(), header[i].clone()));
            }
        }
    }
    out
}

#[test]
fn backfill_leaves_exactly_the_everywhere_absent_cells() {
    let primary = load("whr_2024.csv");
    let fb1 = load("whr_2023.csv");
    let fb2 = load("whr_2022.csv");

    // Oracle: a cell stays absent iff it is absent (or its row missing)
    // in all three files.
    let rows_2023: BTreeSet<String> = fb1.keys().map(str::to_string).collect();
    let rows_2022: BTreeSet<String> = fb2.keys().map(str::to_string).collect();
    let absent_2023 = absent_cells("whr_2023.csv");
    let absent_2022 = absent_cells("whr_2022.csv");
    let expected: BTreeSet<(String, String)> = absent_cells("whr_2024.csv")
        .into_iter()
        .filter(|(key, col)| {
            let gone_2023 =
                !rows_2023.contains(key) || absent_2023.contains(&(key.clone(), col.clone()));
            let gone_2022 =
                !rows_2022.contains(key) || absent_2022.contains(&(key.clone(), col.clone()));
            gone_2023 && gone_2022
        })
        .collect();

    let outcome = backfill(&primary, &[fb1, fb2]).unwrap();
    let mut still_absent = BTreeSet::new();
    for row in &outcome.dataset.rows {
        for col in COLUMNS {
            if row.get(col).is_none() {
                still_absent.insert((row.key.clone(), col.to_string()));
            }
        }
    }
    assert_eq!(still_absent, expected);
    // Spot-check the provenance ordering: 2023 wins over 2022.
    assert_eq!(outcome.provenance["Albania"]["generosity"], "whr_2023");
    assert_eq!(outcome.provenance["Maldives"]["score"], "whr_2022");
}

fn cleaned_160(primary: &Dataset) -> Dataset {
    let fb1 = load("whr_2023.csv");
    let fb2 = load("whr_2022.csv");
    let filled = backfill(primary, &[fb1, fb2]).unwrap().dataset;
    let merged = merge_records(
        &filled,
        &[
            "Congo (Brazzaville)".to_string(),
            "Congo (Kinshasa)".to_string(),
        ],
        "Congo",
        Combiner::Mean,
    )
    .unwrap();
    assert_eq!(merged.rows.len(), 164);
    drop_records(
        &merged,
        &[
            "Cuba".to_string(),
            "Somaliland".to_string(),
            "South Sudan".to_string(),
            "State of Palestine".to_string(),
        ],
    )
    .unwrap()
}

#[test]
fn merge_and_drop_leave_160_countries() {
    let ds = cleaned_160(&load("whr_2024.csv"));
    assert_eq!(ds.rows.len(), 160);
    let options = grid_options(160);
    assert!(options.contains(&(16, 10)));
    assert!(options.contains(&(20, 8)));
    assert!(options.contains(&(40, 4)));
}

#[test]
fn alphabetical_order_matches_code_point_oracle() {
    let ds = cleaned_160(&load("whr_2024.csv"));
    let ordered = order_records(&ds, &OrderBy::KeyAlpha).unwrap();
    // Independent route: sort explicit code-point sequences.
    let mut expected: Vec<(Vec<u32>, String)> = ds
        .keys()
        .map(|k| (k.chars().map(|c| c as u32).collect(), k.to_string()))
        .collect();
    expected.sort();
    let expected: Vec<String> = expected.into_iter().map(|(_, k)| k).collect();
    assert_eq!(ordered, expected);
}

fn bindings() -> Vec<ChannelBinding> {
    let mut out = vec![ChannelBinding {
        channel: FaceChannel::FaceColor,
        column: "score__norm".into(),
        mapping: ChannelMapping::Color(ColorMap::happiness()),
    }];
    for (channel, col) in [
        (FaceChannel::SmileDepth, "score__norm"),
        (FaceChannel::SmileWidth, "social_support__norm"),
        (FaceChannel::BrowLength, "generosity__norm"),
        (FaceChannel::FaceSize, "gdp__norm"),
        (FaceChannel::EarLength, "life_expectancy__norm"),
    ] {
        out.push(ChannelBinding {
            channel,
            column: col.into(),
            mapping: ChannelMapping::Identity,
        });
    }
    out
}

#[test]
fn bound_channel_means_match_column_means() {
    let mut ds = cleaned_160(&load("whr_2024.csv"));
    for col in COLUMNS {
        ds = normalize(&ds, col, NormalizeMode::Minmax).unwrap();
    }
    let faces = bind_faces(&ds, &bindings()).unwrap();
    assert_eq!(faces.len(), 160);
    assert!(faces.iter().all(|f| f.warnings.is_empty()));

    // Independent column averages straight off the records.
    for (col, pick) in [
        ("score__norm", 0usize),
        ("social_support__norm", 1),
        ("generosity__norm", 2),
        ("gdp__norm", 3),
        ("life_expectancy__norm", 4),
    ] {
        let column_mean: f64 = ds
            .rows
            .iter()
            .map(|r| r.number(col).expect("fully backfilled"))
            .sum::<f64>()
            / ds.rows.len() as f64;
        let channel_mean: f64 = faces
            .iter()
            .map(|f| match pick {
                0 => f.params.smile_depth,
                1 => f.params.smile_width,
                2 => f.params.brow_length,
                3 => f.params.face_size,
                _ => f.params.ear_length,
            })
            .sum::<f64>()
            / faces.len() as f64;
        assert!(
            (column_mean - channel_mean).abs() < 1e-12,
            "{col}: {column_mean} vs {channel_mean}"
        );
    }
}

#[test]
fn full_scene_serializes_with_160_face_groups() {
    let mut ds = cleaned_160(&load("whr_2024.csv"));
    for col in COLUMNS {
        ds = normalize(&ds, col, NormalizeMode::Minmax).unwrap();
    }
    let bound = bind_faces(&ds, &bindings()).unwrap();
    let order = order_records(&ds, &OrderBy::KeyAlpha).unwrap();
    let faces: Vec<(String, atelier::glyphs::FaceParams)> = order
        .iter()
        .map(|k| {
            let b = bound.iter().find(|b| &b.key == k).unwrap();
            (k.clone(), b.params)
        })
        .collect();
    let grid = GridSpec {
        rows: 16,
        cols: 10,
        cell_w: 26.0,
        cell_h: 26.0,
        gutter: 2.0,
    };
    let scene = compose_face_grid(
        &faces,
        &grid,
        true,
        atelier::canvas::SceneMetadata {
            title: "faces".into(),
            author: "test".into(),
            seed: 0,
        },
    )
    .unwrap();
    let svg = String::from_utf8(to_svg(&scene).unwrap()).unwrap();

    let doc = roxmltree::Document::parse(&svg).expect("well-formed xml");
    let face_groups = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "g" && n.attribute("class") == Some("face"))
        .count();
    assert_eq!(face_groups, 160);
    // Labels carry the alphabetical key order.
    let labels: Vec<&str> = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "text")
        .filter_map(|n| n.text())
        .collect();
    assert_eq!(labels.len(), 160);
    let mut sorted = labels.clone();
    sorted.sort();
    assert_eq!(labels, sorted, "labels must appear alphabetically");
}
