//! Dense pixel bar charts: every record is one coloured unit square,
//! packed into one bar per category.

use super::GenerativeError;
use crate::canvas::{Group, Path, PathSeg, Point, Primitive, Style};
use crate::dataset::{CellValue, ColumnKind, Dataset};
use crate::mapping::{colormap_sample, ColorMap};

#[derive(Debug, Clone, PartialEq)]
pub struct PixelBarSpec {
    pub category_column: String,
    pub pixel_value_column: String,
    pub pixel_color: ColorMap,
    pub bar_width_px: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub category: String,
    pub count: usize,
    pub height_px: usize,
}

/// Chart geometry in lattice units (one pixel = one unit square) plus the
/// keys of records that were excluded for absent values.
#[derive(Debug, Clone)]
pub struct PixelBarChart {
    pub scene: Group,
    pub bars: Vec<Bar>,
    pub skipped: Vec<String>,
}

/// Bars appear in category first-appearance order. Within a bar, record
/// `i` lands at column `i mod width`, `i div width` rows up from the
/// bottom, so bars grow upward as records accumulate and the top row
/// holds the remainder.
pub fn pixel_bar_chart(ds: &Dataset, spec: &PixelBarSpec) -> Result<PixelBarChart, GenerativeError> {
    if spec.bar_width_px < 1 {
        return Err(GenerativeError::InvalidSpec(
            "bar_width_px must be at least 1".into(),
        ));
    }
    if ds.column(&spec.category_column).is_none() {
        return Err(GenerativeError::UnknownColumn(spec.category_column.clone()));
    }
    let value_meta = ds
        .column(&spec.pixel_value_column)
        .ok_or_else(|| GenerativeError::UnknownColumn(spec.pixel_value_column.clone()))?;
    if value_meta.kind == ColumnKind::Text {
        return Err(GenerativeError::NotNumeric(spec.pixel_value_column.clone()));
    }
    let lo = value_meta.observed_min.unwrap_or(0.0);
    let hi = value_meta.observed_max.unwrap_or(0.0);

    // Gather (category, t) in record order, categories by first appearance.
    let mut categories: Vec<String> = Vec::new();
    let mut per_cat: Vec<Vec<f64>> = Vec::new();
    let mut skipped = Vec::new();
    for row in &ds.rows {
        let cat = match row.get(&spec.category_column) {
            Some(CellValue::Text(s)) => s.clone(),
            Some(CellValue::Number(v)) => crate::dataset::format_number(*v),
            None => {
                skipped.push(row.key.clone());
                continue;
            }
        };
        let Some(v) = row.number(&spec.pixel_value_column) else {
            skipped.push(row.key.clone());
            continue;
        };
        let t = if lo == hi { 0.5 } else { (v - lo) / (hi - lo) };
        match categories.iter().position(|c| *c == cat) {
            Some(idx) => per_cat[idx].push(t),
            None => {
                categories.push(cat);
                per_cat.push(vec![t]);
            }
        }
    }

    let width = spec.bar_width_px as usize;
    let max_height = per_cat
        .iter()
        .map(|vals| vals.len().div_ceil(width))
        .max()
        .unwrap_or(0);

    let mut g = Group::new();
    let mut bars = Vec::with_capacity(categories.len());
    let bar_gap = 1.0;
    for (bi, (cat, vals)) in categories.into_iter().zip(per_cat).enumerate() {
        let bar_x = bi as f64 * (width as f64 + bar_gap);
        for (i, t) in vals.iter().enumerate() {
            let col = (i % width) as f64;
            let row_up = (i / width) as f64;
            let x = bar_x + col;
            let y = max_height as f64 - 1.0 - row_up;
            g.push(Primitive::Path(Path {
                segments: vec![
                    PathSeg::MoveTo(Point::new(x, y)),
                    PathSeg::LineTo(Point::new(x + 1.0, y)),
                    PathSeg::LineTo(Point::new(x + 1.0, y + 1.0)),
                    PathSeg::LineTo(Point::new(x, y + 1.0)),
                    PathSeg::LineTo(Point::new(x, y)),
                ],
                style: Style::filled(colormap_sample(*t, &spec.pixel_color)),
            }));
        }
        bars.push(Bar {
            category: cat,
            count: vals.len(),
            height_px: vals.len().div_ceil(width),
        });
    }

    Ok(PixelBarChart {
        scene: g,
        bars,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;

    fn spec(width: u32) -> PixelBarSpec {
        PixelBarSpec {
            category_column: "kind".into(),
            pixel_value_column: "value".into(),
            pixel_color: ColorMap::grayscale(),
            bar_width_px: width,
        }
    }

    #[test]
    fn single_record_single_pixel() {
        let ds = parse_csv("t", b"id,kind,value\na,x,1\n", "id").unwrap();
        let chart = pixel_bar_chart(&ds, &spec(3)).unwrap();
        assert_eq!(chart.bars.len(), 1);
        assert_eq!(chart.scene.children.len(), 1);
        assert!(chart.skipped.is_empty());
    }

    #[test]
    fn ceiling_height_and_top_remainder() {
        let mut csv = String::from("id,kind,value\n");
        for i in 0..10 {
            csv.push_str(&format!("r{i},x,{i}\n"));
        }
        let ds = parse_csv("t", csv.as_bytes(), "id").unwrap();
        let chart = pixel_bar_chart(&ds, &spec(3)).unwrap();
        assert_eq!(chart.bars[0].height_px, 4); // ceil(10 / 3)
        assert_eq!(chart.scene.children.len(), 10);
        // Bars fill bottom-up: the top row holds the 10 mod 3 = 1 leftover.
        let mut top_row = 0;
        for prim in &chart.scene.children {
            if let Primitive::Path(p) = prim {
                if let PathSeg::MoveTo(pt) = p.segments[0] {
                    if pt.y == 0.0 {
                        top_row += 1;
                    }
                }
            }
        }
        assert_eq!(top_row, 1);
    }

    #[test]
    fn conserves_records_across_categories() {
        let mut csv = String::from("id,kind,value\n");
        for i in 0..100 {
            csv.push_str(&format!("r{i},c{},{}\n", i % 4, i));
        }
        let ds = parse_csv("t", csv.as_bytes(), "id").unwrap();
        let chart = pixel_bar_chart(&ds, &spec(5)).unwrap();
        assert_eq!(chart.bars.len(), 4);
        let total: usize = chart.bars.iter().map(|b| b.count).sum();
        assert_eq!(total, 100);
        assert_eq!(chart.scene.children.len(), 100);
    }

    #[test]
    fn absent_values_skipped_and_reported() {
        let ds = parse_csv("t", b"id,kind,value\na,x,1\nb,x,\nc,,3\nd,y,4\n", "id").unwrap();
        let chart = pixel_bar_chart(&ds, &spec(2)).unwrap();
        assert_eq!(chart.skipped, vec!["b".to_string(), "c".to_string()]);
        let total: usize = chart.bars.iter().map(|b| b.count).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn column_errors() {
        let ds = parse_csv("t", b"id,kind,value\na,x,1\n", "id").unwrap();
        let mut s = spec(1);
        s.category_column = "nope".into();
        assert!(matches!(
            pixel_bar_chart(&ds, &s),
            Err(GenerativeError::UnknownColumn(_))
        ));
        let mut s = spec(1);
        s.pixel_value_column = "kind".into();
        assert!(matches!(
            pixel_bar_chart(&ds, &s),
            Err(GenerativeError::NotNumeric(_))
        ));
        let s = spec(0);
        assert!(matches!(
            pixel_bar_chart(&ds, &s),
            Err(GenerativeError::InvalidSpec(_))
        ));
    }
}
