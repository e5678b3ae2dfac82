//! Tabular data ingestion and cleaning.
//!
//! A [`Dataset`] is an immutable named table keyed by one column. CSV is
//! the only ingest format: RFC-4180 subset, UTF-8, comma separated,
//! double-quote escaping. Empty cells and unquoted `NA` (any case) are
//! absent values. All operations return a new dataset; inputs are never
//! mutated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed csv: {0}")]
    MalformedCsv(String),
    #[error("schema mismatch: key column `{expected}` vs `{found}` in dataset `{dataset}`")]
    SchemaMismatch {
        expected: String,
        found: String,
        dataset: String,
    },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("empty merge set")]
    EmptyMergeSet,
    #[error("key `{0}` already present")]
    DuplicateKey(String),
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
    #[error("column `{0}` has no present values")]
    AllAbsent(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
}

/// One cell of a table. Absence is modelled as `Option<CellValue>` on the
/// record, never as a sentinel value.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Number(f64),
    Text(String),
}

impl CellValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            CellValue::Number(v) => Some(*v),
            CellValue::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            CellValue::Text(s) => Some(s),
            CellValue::Number(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Key,
    Numeric,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    pub observed_min: Option<f64>,
    pub observed_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub key: String,
    pub values: BTreeMap<String, Option<CellValue>>,
}

impl Record {
    pub fn get(&self, column: &str) -> Option<&CellValue> {
        self.values.get(column).and_then(|c| c.as_ref())
    }

    pub fn number(&self, column: &str) -> Option<f64> {
        self.get(column).and_then(|c| c.as_number())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<ColumnMeta>,
    pub rows: Vec<Record>,
}

/// How merged numeric fields are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    Mean,
    Sum,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    Minmax,
    Quantile,
}

/// Result of [`backfill`]: the filled dataset plus which fallback supplied
/// each filled cell, keyed record key then column name.
#[derive(Debug, Clone)]
pub struct BackfillOutcome {
    pub dataset: Dataset,
    pub provenance: BTreeMap<String, BTreeMap<String, String>>,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<&ColumnMeta> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn key_column(&self) -> &str {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Key)
            .map(|c| c.name.as_str())
            .expect("dataset always has a key column")
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.key.as_str())
    }

    pub fn record(&self, key: &str) -> Option<&Record> {
        self.rows.iter().find(|r| r.key == key)
    }
}

// ---------------------------------------------------------------------------
// CSV parsing

/// Strict decimal number syntax: optional sign, digits with optional
/// fraction or bare fraction, optional exponent. Rejects thousands
/// separators, inf/nan spellings, hex, and surrounding whitespace.
fn parse_number(s: &str) -> Option<f64> {
    let b = s.as_bytes();
    if b.is_empty() {
        return None;
    }
    let mut i = 0;
    if b[i] == b'+' || b[i] == b'-' {
        i += 1;
    }
    let int_digits = count_digits(b, &mut i);
    let mut frac_digits = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        frac_digits = count_digits(b, &mut i);
    }
    if int_digits == 0 && frac_digits == 0 {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        if count_digits(b, &mut i) == 0 {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn count_digits(b: &[u8], i: &mut usize) -> usize {
    let start = *i;
    while *i < b.len() && b[*i].is_ascii_digit() {
        *i += 1;
    }
    *i - start
}

/// One parsed field plus whether it was quoted (quoting makes `NA` and the
/// empty string literal text instead of an absent marker).
struct Field {
    text: String,
    quoted: bool,
}

fn split_csv(text: &str) -> Result<Vec<Vec<Field>>, DatasetError> {
    let mut rows: Vec<Vec<Field>> = Vec::new();
    let mut row: Vec<Field> = Vec::new();
    let mut field = String::new();
    let mut quoted = false;

    let mut chars = text.chars().peekable();
    let mut field_started = false;

    macro_rules! end_field {
        () => {{
            row.push(Field {
                text: std::mem::take(&mut field),
                quoted,
            });
            quoted = false;
            field_started = false;
        }};
    }

    while let Some(ch) = chars.next() {
        if quoted && field_started {
            // Inside an open quoted field.
            if ch == '"' {
                match chars.peek() {
                    Some('"') => {
                        chars.next();
                        field.push('"');
                    }
                    _ => field_started = false, // closed; delimiters must follow
                }
            } else {
                field.push(ch);
            }
            continue;
        }
        match ch {
            ',' => end_field!(),
            '\n' => {
                end_field!();
                rows.push(std::mem::take(&mut row));
            }
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    chars.next();
                }
                end_field!();
                rows.push(std::mem::take(&mut row));
            }
            '"' if field.is_empty() && !quoted => {
                quoted = true;
                field_started = true;
            }
            _ if quoted => {
                return Err(DatasetError::MalformedCsv(format!(
                    "unexpected character {ch:?} after closing quote"
                )));
            }
            _ => {
                field.push(ch);
                field_started = true;
            }
        }
    }
    if quoted && field_started {
        return Err(DatasetError::MalformedCsv("unterminated quote".into()));
    }
    if field_started || quoted || !row.is_empty() {
        row.push(Field {
            text: field,
            quoted,
        });
        rows.push(row);
    }
    Ok(rows)
}

fn is_absent_marker(f: &Field) -> bool {
    !f.quoted && (f.text.is_empty() || f.text.eq_ignore_ascii_case("na"))
}

/// Parse CSV bytes into a [`Dataset`] keyed by `key_column`.
///
/// The whole input is validated before anything is returned: ragged rows,
/// duplicate headers, a missing key column, or duplicate key values all
/// reject the input.
pub fn parse_csv(name: &str, bytes: &[u8], key_column: &str) -> Result<Dataset, DatasetError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| DatasetError::MalformedCsv(format!("not valid utf-8: {e}")))?;
    let raw = split_csv(text)?;
    if raw.is_empty() {
        return Err(DatasetError::MalformedCsv("missing header row".into()));
    }
    let header: Vec<String> = raw[0].iter().map(|f| f.text.clone()).collect();
    let mut seen = BTreeSet::new();
    for h in &header {
        if h.is_empty() {
            return Err(DatasetError::MalformedCsv("empty column name".into()));
        }
        if !seen.insert(h.clone()) {
            return Err(DatasetError::MalformedCsv(format!(
                "duplicate header `{h}`"
            )));
        }
    }
    let key_idx = header
        .iter()
        .position(|h| h == key_column)
        .ok_or_else(|| {
            DatasetError::MalformedCsv(format!("key column `{key_column}` not in header"))
        })?;

    let mut rows = Vec::with_capacity(raw.len().saturating_sub(1));
    let mut seen_keys = BTreeSet::new();
    for (line_no, fields) in raw.iter().enumerate().skip(1) {
        if fields.len() != header.len() {
            return Err(DatasetError::MalformedCsv(format!(
                "row {line_no} has {} fields, expected {}",
                fields.len(),
                header.len()
            )));
        }
        let key_field = &fields[key_idx];
        if is_absent_marker(key_field) {
            return Err(DatasetError::MalformedCsv(format!(
                "row {line_no} has an absent key"
            )));
        }
        let key = key_field.text.clone();
        if !seen_keys.insert(key.clone()) {
            return Err(DatasetError::MalformedCsv(format!("duplicate key `{key}`")));
        }
        let mut values = BTreeMap::new();
        for (idx, field) in fields.iter().enumerate() {
            let cell = if idx == key_idx {
                Some(CellValue::Text(key.clone()))
            } else if is_absent_marker(field) {
                None
            } else if let Some(v) = parse_number(&field.text) {
                Some(CellValue::Number(v))
            } else {
                Some(CellValue::Text(field.text.clone()))
            };
            values.insert(header[idx].clone(), cell);
        }
        rows.push(Record { key, values });
    }

    let columns = infer_columns(&header, key_idx, &rows);
    Ok(Dataset {
        name: name.to_string(),
        columns,
        rows,
    })
}

fn infer_columns(header: &[String], key_idx: usize, rows: &[Record]) -> Vec<ColumnMeta> {
    header
        .iter()
        .enumerate()
        .map(|(idx, name)| {
            if idx == key_idx {
                return ColumnMeta {
                    name: name.clone(),
                    kind: ColumnKind::Key,
                    observed_min: None,
                    observed_max: None,
                };
            }
            let mut any_text = false;
            let mut lo: Option<f64> = None;
            let mut hi: Option<f64> = None;
            for row in rows {
                match row.values.get(name).and_then(|c| c.as_ref()) {
                    Some(CellValue::Number(v)) => {
                        lo = Some(lo.map_or(*v, |l: f64| l.min(*v)));
                        hi = Some(hi.map_or(*v, |h: f64| h.max(*v)));
                    }
                    Some(CellValue::Text(_)) => any_text = true,
                    None => {}
                }
            }
            // All-absent columns stay numeric so backfill can fill them.
            let kind = if any_text {
                ColumnKind::Text
            } else {
                ColumnKind::Numeric
            };
            ColumnMeta {
                name: name.clone(),
                kind,
                observed_min: if kind == ColumnKind::Numeric { lo } else { None },
                observed_max: if kind == ColumnKind::Numeric { hi } else { None },
            }
        })
        .collect()
}

fn recompute_stats(ds: &mut Dataset) {
    let names: Vec<(String, ColumnKind)> = ds
        .columns
        .iter()
        .map(|c| (c.name.clone(), c.kind))
        .collect();
    for (idx, (name, kind)) in names.iter().enumerate() {
        if *kind != ColumnKind::Numeric {
            continue;
        }
        let mut lo: Option<f64> = None;
        let mut hi: Option<f64> = None;
        for row in &ds.rows {
            if let Some(v) = row.number(name) {
                lo = Some(lo.map_or(v, |l: f64| l.min(v)));
                hi = Some(hi.map_or(v, |h: f64| h.max(v)));
            }
        }
        ds.columns[idx].observed_min = lo;
        ds.columns[idx].observed_max = hi;
    }
}

// ---------------------------------------------------------------------------
// CSV serialization

/// Render a finite number with up to 9 significant digits, no trailing
/// zeros, plain decimal notation.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    debug_assert!(v.is_finite());
    let exp = v.abs().log10().floor() as i32;
    let rounded = if exp >= 9 {
        let scale = 10f64.powi(exp - 8);
        (v / scale).round() * scale
    } else {
        let scale = 10f64.powi(8 - exp);
        (v * scale).round() / scale
    };
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_escape(s: &str) -> String {
    let needs_quote = s.is_empty()
        || s.eq_ignore_ascii_case("na")
        || s.contains([',', '"', '\n', '\r']);
    if needs_quote {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Canonical CSV re-serialization: header then rows in order, absent cells
/// empty, numbers via [`format_number`].
pub fn to_csv(ds: &Dataset) -> Vec<u8> {
    let mut out = String::new();
    let header: Vec<String> = ds.columns.iter().map(|c| csv_escape(&c.name)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &ds.rows {
        let mut fields = Vec::with_capacity(ds.columns.len());
        for col in &ds.columns {
            let cell = row.values.get(&col.name).and_then(|c| c.as_ref());
            fields.push(match cell {
                None => String::new(),
                Some(CellValue::Number(v)) => format_number(*v),
                Some(CellValue::Text(s)) => csv_escape(s),
            });
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

// ---------------------------------------------------------------------------
// Cleaning operations

/// Fill absent numeric cells from the first fallback that has a present
/// numeric value for the same key and column. Present values are never
/// overwritten. Fallbacks are consulted in order (most recent first).
pub fn backfill(primary: &Dataset, fallbacks: &[Dataset]) -> Result<BackfillOutcome, DatasetError> {
    let key_col = primary.key_column();
    for fb in fallbacks {
        let fb_key = fb.key_column();
        if fb_key != key_col {
            return Err(DatasetError::SchemaMismatch {
                expected: key_col.to_string(),
                found: fb_key.to_string(),
                dataset: fb.name.clone(),
            });
        }
    }
    let indexes: Vec<BTreeMap<&str, &Record>> = fallbacks
        .iter()
        .map(|fb| fb.rows.iter().map(|r| (r.key.as_str(), r)).collect())
        .collect();

    let numeric_cols: Vec<String> = primary
        .columns
        .iter()
        .filter(|c| c.kind == ColumnKind::Numeric)
        .map(|c| c.name.clone())
        .collect();

    let mut out = primary.clone();
    let mut provenance: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for row in &mut out.rows {
        for col in &numeric_cols {
            if row.values.get(col).is_some_and(|c| c.is_some()) {
                continue;
            }
            for (fb, index) in fallbacks.iter().zip(&indexes) {
                let Some(fb_row) = index.get(row.key.as_str()) else {
                    continue;
                };
                if let Some(v) = fb_row.number(col) {
                    row.values.insert(col.clone(), Some(CellValue::Number(v)));
                    provenance
                        .entry(row.key.clone())
                        .or_default()
                        .insert(col.clone(), fb.name.clone());
                    break;
                }
            }
        }
    }
    recompute_stats(&mut out);
    Ok(BackfillOutcome {
        dataset: out,
        provenance,
    })
}

/// Replace the listed records with one combined record named `new_key`,
/// placed where the first listed record was. Numeric fields combine per
/// `combiner` over present values; text fields take the first present
/// value in `keys` order.
pub fn merge_records(
    ds: &Dataset,
    keys: &[String],
    new_key: &str,
    combiner: Combiner,
) -> Result<Dataset, DatasetError> {
    if keys.is_empty() {
        return Err(DatasetError::EmptyMergeSet);
    }
    for k in keys {
        if ds.record(k).is_none() {
            return Err(DatasetError::UnknownKey(k.clone()));
        }
    }
    let merged_set: BTreeSet<&str> = keys.iter().map(|k| k.as_str()).collect();
    if ds
        .rows
        .iter()
        .any(|r| r.key == new_key && !merged_set.contains(r.key.as_str()))
    {
        return Err(DatasetError::DuplicateKey(new_key.to_string()));
    }

    let sources: Vec<&Record> = keys.iter().map(|k| ds.record(k).unwrap()).collect();
    let key_col = ds.key_column().to_string();
    let mut values = BTreeMap::new();
    for col in &ds.columns {
        if col.name == key_col {
            values.insert(col.name.clone(), Some(CellValue::Text(new_key.to_string())));
            continue;
        }
        let cell = match (col.kind, combiner) {
            (ColumnKind::Numeric, Combiner::Mean) => {
                let present: Vec<f64> =
                    sources.iter().filter_map(|r| r.number(&col.name)).collect();
                if present.is_empty() {
                    None
                } else {
                    Some(CellValue::Number(
                        present.iter().sum::<f64>() / present.len() as f64,
                    ))
                }
            }
            (ColumnKind::Numeric, Combiner::Sum) => {
                let present: Vec<f64> =
                    sources.iter().filter_map(|r| r.number(&col.name)).collect();
                if present.is_empty() {
                    None
                } else {
                    Some(CellValue::Number(present.iter().sum()))
                }
            }
            _ => sources
                .iter()
                .find_map(|r| r.get(&col.name))
                .cloned(),
        };
        values.insert(col.name.clone(), cell);
    }
    let merged = Record {
        key: new_key.to_string(),
        values,
    };

    let first_idx = ds
        .rows
        .iter()
        .position(|r| merged_set.contains(r.key.as_str()))
        .unwrap();
    let mut rows = Vec::with_capacity(ds.rows.len() + 1 - keys.len());
    for (idx, row) in ds.rows.iter().enumerate() {
        if idx == first_idx {
            rows.push(merged.clone());
        } else if !merged_set.contains(row.key.as_str()) {
            rows.push(row.clone());
        }
    }
    let mut out = Dataset {
        name: ds.name.clone(),
        columns: ds.columns.clone(),
        rows,
    };
    recompute_stats(&mut out);
    Ok(out)
}

/// Remove the listed records, preserving the order of survivors.
pub fn drop_records(ds: &Dataset, keys: &[String]) -> Result<Dataset, DatasetError> {
    for k in keys {
        if ds.record(k).is_none() {
            return Err(DatasetError::UnknownKey(k.clone()));
        }
    }
    let drop_set: BTreeSet<&str> = keys.iter().map(|k| k.as_str()).collect();
    let mut out = Dataset {
        name: ds.name.clone(),
        columns: ds.columns.clone(),
        rows: ds
            .rows
            .iter()
            .filter(|r| !drop_set.contains(r.key.as_str()))
            .cloned()
            .collect(),
    };
    recompute_stats(&mut out);
    Ok(out)
}

/// Add a `<column>__norm` column in [0, 1].
///
/// `minmax` maps the observed range linearly onto [0, 1]; `quantile` maps
/// each value to its rank fraction with ties sharing the mean rank. A
/// constant column maps to 0.5 everywhere. Absent source cells stay
/// absent in the derived column. An existing derived column of the same
/// name is replaced, so normalizing twice is harmless.
pub fn normalize(ds: &Dataset, column: &str, mode: NormalizeMode) -> Result<Dataset, DatasetError> {
    let meta = ds
        .column(column)
        .ok_or_else(|| DatasetError::UnknownColumn(column.to_string()))?;
    if meta.kind != ColumnKind::Numeric {
        return Err(DatasetError::NotNumeric(column.to_string()));
    }
    let present: Vec<(usize, f64)> = ds
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.number(column).map(|v| (i, v)))
        .collect();
    if present.is_empty() {
        return Err(DatasetError::AllAbsent(column.to_string()));
    }

    let mut normed: BTreeMap<usize, f64> = BTreeMap::new();
    match mode {
        NormalizeMode::Minmax => {
            let lo = meta.observed_min.unwrap();
            let hi = meta.observed_max.unwrap();
            for (i, v) in &present {
                let t = if lo == hi { 0.5 } else { (v - lo) / (hi - lo) };
                normed.insert(*i, t);
            }
        }
        NormalizeMode::Quantile => {
            let n = present.len();
            if n == 1 {
                normed.insert(present[0].0, 0.5);
            } else {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| present[a].1.total_cmp(&present[b].1));
                let mut pos = 0;
                while pos < n {
                    let mut end = pos;
                    while end + 1 < n && present[order[end + 1]].1 == present[order[pos]].1 {
                        end += 1;
                    }
                    let mean_rank = (pos + end) as f64 / 2.0;
                    let frac = mean_rank / (n - 1) as f64;
                    for &o in &order[pos..=end] {
                        normed.insert(present[o].0, frac);
                    }
                    pos = end + 1;
                }
            }
        }
    }

    let derived = format!("{column}__norm");
    let mut out = ds.clone();
    out.columns.retain(|c| c.name != derived);
    for row in &mut out.rows {
        row.values.remove(&derived);
    }
    out.columns.push(ColumnMeta {
        name: derived.clone(),
        kind: ColumnKind::Numeric,
        observed_min: None,
        observed_max: None,
    });
    for (i, row) in out.rows.iter_mut().enumerate() {
        let cell = normed.get(&i).map(|v| CellValue::Number(*v));
        row.values.insert(derived.clone(), cell);
    }
    recompute_stats(&mut out);
    Ok(out)
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} rows x {} columns)",
            self.name,
            self.rows.len(),
            self.columns.len()
        )
    }
}
