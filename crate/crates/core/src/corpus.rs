//! Interaction records and their if/then phrase embeddings.
//!
//! A corpus is a list of if-then rules, each carrying one unit-norm embedding
//! for its trigger phrase and one for its action phrase. Records are read from
//! CSV (header `id,if_text,then_text,if_0..if_{d-1},then_0..then_{d-1}`) or
//! JSON lines carrying the same field names.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Tolerance on `‖v‖ = 1` for vectors held by an [`Interaction`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Input vectors this close to unit norm are silently renormalized on load.
pub const RENORMALIZE_SLACK: f64 = 1e-6;

/// Smallest mean-vector norm accepted when composing a phrase embedding.
pub const MIN_MEAN_NORM: f64 = 1e-12;

/// One if-then rule with its phrase embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub id: i64,
    pub if_text: String,
    pub then_text: String,
    pub if_vec: Vec<f64>,
    pub then_vec: Vec<f64>,
}

impl Interaction {
    /// Builds an interaction from vectors that must already be unit norm.
    pub fn new(
        id: i64,
        if_text: impl Into<String>,
        then_text: impl Into<String>,
        if_vec: Vec<f64>,
        then_vec: Vec<f64>,
    ) -> Result<Self> {
        if if_vec.len() != then_vec.len() {
            return Err(Error::DimensionMismatch {
                expected: if_vec.len(),
                found: then_vec.len(),
                context: format!("then vector of id {id}"),
            });
        }
        for (what, v) in [("if", &if_vec), ("then", &then_vec)] {
            check_finite(v, || format!("{what} vector of id {id}"))?;
            let n = norm(v);
            if n == 0.0 {
                return Err(Error::ZeroNorm(format!("{what} vector of id {id}")));
            }
            if (n - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::NonUnitVector {
                    what: format!("{what} vector of id {id}"),
                    norm: n,
                });
            }
        }
        Ok(Interaction {
            id,
            if_text: if_text.into(),
            then_text: then_text.into(),
            if_vec,
            then_vec,
        })
    }

    /// Builds an interaction, normalizing both vectors to unit length.
    pub fn normalized(
        id: i64,
        if_text: impl Into<String>,
        then_text: impl Into<String>,
        if_vec: Vec<f64>,
        then_vec: Vec<f64>,
    ) -> Result<Self> {
        let if_vec = unit(if_vec, || format!("if vector of id {id}"))?;
        let then_vec = unit(then_vec, || format!("then vector of id {id}"))?;
        Interaction::new(id, if_text, then_text, if_vec, then_vec)
    }

    pub fn dimension(&self) -> usize {
        self.if_vec.len()
    }

    /// Cosine between the interaction's own if and then embeddings.
    pub fn within(&self) -> f64 {
        dot(&self.if_vec, &self.then_vec).clamp(-1.0, 1.0)
    }

    /// The role-reversed interaction: if and then swapped.
    pub fn reversed(&self) -> Interaction {
        Interaction {
            id: self.id,
            if_text: self.then_text.clone(),
            then_text: self.if_text.clone(),
            if_vec: self.then_vec.clone(),
            then_vec: self.if_vec.clone(),
        }
    }
}

/// A validated, immutable corpus of interactions sharing one dimension.
#[derive(Debug, Clone)]
pub struct InteractionSet {
    interactions: Vec<Interaction>,
    dimension: usize,
    index: HashMap<i64, usize>,
    source: Option<PathBuf>,
    renormalized: usize,
}

impl InteractionSet {
    pub fn new(interactions: Vec<Interaction>) -> Result<Self> {
        Self::build(interactions, None, 0)
    }

    fn build(
        interactions: Vec<Interaction>,
        source: Option<PathBuf>,
        renormalized: usize,
    ) -> Result<Self> {
        let first = interactions
            .first()
            .ok_or_else(|| Error::Empty("corpus has no interactions".into()))?;
        let dimension = first.dimension();
        if dimension == 0 {
            return Err(Error::Empty("embedding dimension is zero".into()));
        }
        let mut index = HashMap::with_capacity(interactions.len());
        for (pos, it) in interactions.iter().enumerate() {
            if it.if_vec.len() != dimension || it.then_vec.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: it.if_vec.len().max(it.then_vec.len()),
                    context: format!("id {}", it.id),
                });
            }
            if index.insert(it.id, pos).is_some() {
                return Err(Error::DuplicateId(it.id));
            }
        }
        Ok(InteractionSet {
            interactions,
            dimension,
            index,
            source,
            renormalized,
        })
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interaction> {
        self.interactions.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = i64> + '_ {
        self.interactions.iter().map(|it| it.id)
    }

    /// Row position of `id` in corpus order.
    pub fn position(&self, id: i64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn get(&self, id: i64) -> Option<&Interaction> {
        self.position(id).map(|p| &self.interactions[p])
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    /// Number of vectors rescaled to unit norm while loading.
    pub fn renormalized(&self) -> usize {
        self.renormalized
    }
}

impl<'a> IntoIterator for &'a InteractionSet {
    type Item = &'a Interaction;
    type IntoIter = std::slice::Iter<'a, Interaction>;

    fn into_iter(self) -> Self::IntoIter {
        self.interactions.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// Guesses the format from a file extension (`.jsonl`/`.json` → JSON lines).
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => InputFormat::Jsonl,
            _ => InputFormat::Csv,
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "ndjson" => Ok(InputFormat::Jsonl),
            other => Err(Error::InvalidParameter(format!(
                "unknown input format `{other}` (expected csv or jsonl)"
            ))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputFormat::Csv => f.write_str("csv"),
            InputFormat::Jsonl => f.write_str("jsonl"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Rescale vectors whose norm is off by more than [`RENORMALIZE_SLACK`]
    /// instead of rejecting them.
    pub renormalize: bool,
}

pub fn load_interactions(
    path: impl AsRef<Path>,
    format: InputFormat,
    options: LoadOptions,
) -> Result<InteractionSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut set = read_interactions(BufReader::new(file), format, options)?;
    set.source = Some(path.to_path_buf());
    Ok(set)
}

pub fn read_interactions<R: Read>(
    reader: R,
    format: InputFormat,
    options: LoadOptions,
) -> Result<InteractionSet> {
    let raw = match format {
        InputFormat::Csv => read_csv(reader)?,
        InputFormat::Jsonl => read_jsonl(reader)?,
    };
    let mut renormalized = 0;
    let mut interactions = Vec::with_capacity(raw.len());
    for rec in raw {
        let RawRecord {
            row,
            id,
            if_text,
            then_text,
            if_vec,
            then_vec,
        } = rec;
        let if_vec = conform(if_vec, options, &mut renormalized, || {
            format!("if vector of id {id} (row {row})")
        })?;
        let then_vec = conform(then_vec, options, &mut renormalized, || {
            format!("then vector of id {id} (row {row})")
        })?;
        interactions.push(Interaction::new(id, if_text, then_text, if_vec, then_vec)?);
    }
    InteractionSet::build(interactions, None, renormalized)
}

struct RawRecord {
    row: usize,
    id: i64,
    if_text: String,
    then_text: String,
    if_vec: Vec<f64>,
    then_vec: Vec<f64>,
}

fn conform(
    v: Vec<f64>,
    options: LoadOptions,
    renormalized: &mut usize,
    what: impl Fn() -> String,
) -> Result<Vec<f64>> {
    check_finite(&v, &what)?;
    let n = norm(&v);
    if n <= MIN_MEAN_NORM {
        return Err(Error::ZeroNorm(what()));
    }
    let off = (n - 1.0).abs();
    if off > RENORMALIZE_SLACK && !options.renormalize {
        return Err(Error::NonUnitVector { what: what(), norm: n });
    }
    if off > RENORMALIZE_SLACK {
        *renormalized += 1;
    }
    Ok(v.into_iter().map(|x| x / n).collect())
}

/// Column layout of a header: positions of id, texts and the if/then coordinates.
struct Columns {
    id: usize,
    if_text: usize,
    then_text: usize,
    if_cols: Vec<usize>,
    then_cols: Vec<usize>,
}

impl Columns {
    fn from_names<'a>(names: impl Iterator<Item = &'a str>) -> Result<Columns> {
        let mut id = None;
        let mut if_text = None;
        let mut then_text = None;
        let mut if_cols: Vec<(usize, usize)> = Vec::new();
        let mut then_cols: Vec<(usize, usize)> = Vec::new();
        for (pos, name) in names.enumerate() {
            let name = name.trim();
            match name {
                "id" => id = Some(pos),
                "if_text" => if_text = Some(pos),
                "then_text" => then_text = Some(pos),
                _ => {
                    if let Some(k) = name.strip_prefix("if_").and_then(|k| k.parse().ok()) {
                        if_cols.push((k, pos));
                    } else if let Some(k) =
                        name.strip_prefix("then_").and_then(|k| k.parse().ok())
                    {
                        then_cols.push((k, pos));
                    }
                }
            }
        }
        let missing = |name: &str| Error::MalformedRow {
            row: 0,
            message: format!("header lacks column `{name}`"),
        };
        let if_cols = coordinate_columns("if", if_cols)?;
        let then_cols = coordinate_columns("then", then_cols)?;
        if if_cols.len() != then_cols.len() {
            return Err(Error::DimensionMismatch {
                expected: if_cols.len(),
                found: then_cols.len(),
                context: "then_* columns in header".into(),
            });
        }
        Ok(Columns {
            id: id.ok_or_else(|| missing("id"))?,
            if_text: if_text.ok_or_else(|| missing("if_text"))?,
            then_text: then_text.ok_or_else(|| missing("then_text"))?,
            if_cols,
            then_cols,
        })
    }
}

fn coordinate_columns(prefix: &str, mut cols: Vec<(usize, usize)>) -> Result<Vec<usize>> {
    cols.sort_unstable();
    for (expect, (k, _)) in cols.iter().enumerate() {
        if *k != expect {
            return Err(Error::MalformedRow {
                row: 0,
                message: format!("header has no column `{prefix}_{expect}`"),
            });
        }
    }
    if cols.is_empty() {
        return Err(Error::MalformedRow {
            row: 0,
            message: format!("header has no `{prefix}_*` coordinate columns"),
        });
    }
    Ok(cols.into_iter().map(|(_, pos)| pos).collect())
}

fn read_csv<R: Read>(reader: R) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::from_names(headers.iter())?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // Row 1 is the header.
        let row = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != headers.len() {
            return Err(Error::MalformedRow {
                row,
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        let field = |pos: usize| rec.get(pos).unwrap_or("");
        let id = field(cols.id)
            .trim()
            .parse::<i64>()
            .map_err(|e| Error::MalformedRow {
                row,
                message: format!("id `{}`: {e}", field(cols.id)),
            })?;
        let coords = |positions: &[usize]| -> Result<Vec<f64>> {
            positions
                .iter()
                .map(|&p| {
                    field(p).trim().parse::<f64>().map_err(|e| Error::MalformedRow {
                        row,
                        message: format!("column `{}` value `{}`: {e}", &headers[p], field(p)),
                    })
                })
                .collect()
        };
        out.push(RawRecord {
            row,
            id,
            if_text: field(cols.if_text).to_string(),
            then_text: field(cols.then_text).to_string(),
            if_vec: coords(&cols.if_cols)?,
            then_vec: coords(&cols.then_cols)?,
        });
    }
    Ok(out)
}

fn read_jsonl<R: Read>(reader: R) -> Result<Vec<RawRecord>> {
    let mut out = Vec::new();
    let mut dimension: Option<usize> = None;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedRow { row, message };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| malformed("record is not a JSON object".into()))?;
        let cols = Columns::from_names(obj.keys().map(String::as_str))?;
        // Only the coordinate count is taken from the header scan; fields are read by name.
        let d = cols.if_cols.len();
        if let Some(expected) = dimension {
            if expected != d {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: d,
                    context: format!("row {row}"),
                });
            }
        }
        dimension = Some(d);
        let id = obj
            .get("id")
            .and_then(|v| v.as_i64().or_else(|| v.as_str().and_then(|s| s.parse().ok())))
            .ok_or_else(|| malformed("`id` is not an integer".into()))?;
        let text = |key: &str| -> Result<String> {
            match obj.get(key) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(serde_json::Value::Null) | None => Ok(String::new()),
                Some(other) => Ok(other.to_string()),
            }
        };
        let coords = |prefix: &str| -> Result<Vec<f64>> {
            (0..d)
                .map(|k| {
                    let key = format!("{prefix}_{k}");
                    obj.get(&key)
                        .and_then(serde_json::Value::as_f64)
                        .ok_or_else(|| malformed(format!("`{key}` is not a number")))
                })
                .collect()
        };
        out.push(RawRecord {
            row,
            id,
            if_text: text("if_text")?,
            then_text: text("then_text")?,
            if_vec: coords("if")?,
            then_vec: coords("then")?,
        });
    }
    Ok(out)
}

/// Writes a corpus in the same layout [`load_interactions`] reads.
pub fn write_interactions<W: Write>(
    set: &InteractionSet,
    writer: W,
    format: InputFormat,
) -> Result<()> {
    let d = set.dimension();
    match format {
        InputFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            let mut header = vec!["id".to_string(), "if_text".into(), "then_text".into()];
            header.extend((0..d).map(|k| format!("if_{k}")));
            header.extend((0..d).map(|k| format!("then_{k}")));
            w.write_record(&header)?;
            for it in set {
                let mut rec = vec![it.id.to_string(), it.if_text.clone(), it.then_text.clone()];
                rec.extend(it.if_vec.iter().map(|x| x.to_string()));
                rec.extend(it.then_vec.iter().map(|x| x.to_string()));
                w.write_record(&rec)?;
            }
            w.flush().map_err(|e| Error::io("<writer>", e))?;
        }
        InputFormat::Jsonl => {
            let mut w = BufWriter::new(writer);
            for it in set {
                let mut obj = serde_json::Map::new();
                obj.insert("id".into(), it.id.into());
                obj.insert("if_text".into(), it.if_text.clone().into());
                obj.insert("then_text".into(), it.then_text.clone().into());
                for (k, x) in it.if_vec.iter().enumerate() {
                    obj.insert(format!("if_{k}"), (*x).into());
                }
                for (k, x) in it.then_vec.iter().enumerate() {
                    obj.insert(format!("then_{k}"), (*x).into());
                }
                serde_json::to_writer(&mut w, &serde_json::Value::Object(obj))?;
                w.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
            }
            w.flush().map_err(|e| Error::io("<writer>", e))?;
        }
    }
    Ok(())
}

/// Normed average of word vectors: `(Σw/n) / ‖Σw/n‖`.
pub fn compose_phrase_embedding<V: AsRef<[f64]>>(word_vectors: &[V]) -> Result<Vec<f64>> {
    let first = word_vectors
        .first()
        .ok_or_else(|| Error::Empty("no word vectors to compose".into()))?
        .as_ref();
    let d = first.len();
    let mut sum = vec![0.0; d];
    for (k, w) in word_vectors.iter().enumerate() {
        let w = w.as_ref();
        if w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: w.len(),
                context: format!("word vector {k}"),
            });
        }
        check_finite(w, || format!("word vector {k}"))?;
        for (s, x) in sum.iter_mut().zip(w) {
            *s += x;
        }
    }
    let n = word_vectors.len() as f64;
    let mean: Vec<f64> = sum.into_iter().map(|s| s / n).collect();
    unit(mean, || "mean of word vectors".to_string())
}

/// Composes a phrase embedding from raw text: whitespace tokens, lowercased,
/// minus `stop_words`. Tokens absent from `vocabulary` are skipped.
pub fn compose_phrase_from_text(
    text: &str,
    vocabulary: &HashMap<String, Vec<f64>>,
    stop_words: &HashSet<String>,
) -> Result<Vec<f64>> {
    let vectors: Vec<&Vec<f64>> = text
        .split_whitespace()
        .map(str::to_lowercase)
        .filter(|t| !stop_words.contains(t))
        .filter_map(|t| vocabulary.get(&t))
        .collect();
    if vectors.is_empty() {
        return Err(Error::Empty(format!(
            "phrase `{text}` has no in-vocabulary non-stop words"
        )));
    }
    compose_phrase_embedding(&vectors)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub source: Option<String>,
    pub count: usize,
    pub dimension: usize,
    pub renormalized_vectors: usize,
    pub max_if_norm_deviation: f64,
    pub max_then_norm_deviation: f64,
    pub within_min: f64,
    pub within_max: f64,
    pub within_mean: f64,
    pub within_negative: usize,
}

pub fn validate_corpus(set: &InteractionSet) -> ValidationReport {
    let mut max_if = 0.0f64;
    let mut max_then = 0.0f64;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut negative = 0;
    for it in set {
        max_if = max_if.max((norm(&it.if_vec) - 1.0).abs());
        max_then = max_then.max((norm(&it.then_vec) - 1.0).abs());
        let w = it.within();
        min = min.min(w);
        max = max.max(w);
        sum += w;
        if w < 0.0 {
            negative += 1;
        }
    }
    ValidationReport {
        source: set.source().map(|p| p.display().to_string()),
        count: set.len(),
        dimension: set.dimension(),
        renormalized_vectors: set.renormalized(),
        max_if_norm_deviation: max_if,
        max_then_norm_deviation: max_then,
        within_min: min,
        within_max: max,
        within_mean: sum / set.len() as f64,
        within_negative: negative,
    }
}

fn check_finite(v: &[f64], what: impl Fn() -> String) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}

fn unit(v: Vec<f64>, what: impl Fn() -> String) -> Result<Vec<f64>> {
    let n = norm(&v);
    if !(n > MIN_MEAN_NORM) {
        return Err(Error::ZeroNorm(what()));
    }
    Ok(v.into_iter().map(|x| x / n).collect())
}
