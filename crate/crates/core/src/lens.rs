//! Two-dimensional lenses that drive the Mapper cover.
//!
//! PCA is computed natively over the concatenated `[if | then]` features.
//! Any other projection (t-SNE, UMAP, MDS, ...) is computed elsewhere and
//! imported from a CSV with header `id,x,y`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::corpus::InteractionSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LensProvenance {
    Pca,
    Imported(String),
    /// Coordinates handed in directly by library callers.
    Given(String),
}

impl fmt::Display for LensProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LensProvenance::Pca => f.write_str("pca"),
            LensProvenance::Imported(label) => write!(f, "imported:{label}"),
            LensProvenance::Given(label) => write!(f, "given:{label}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LensCoordinates {
    ids: Vec<i64>,
    coords: Vec<[f64; 2]>,
    provenance: LensProvenance,
}

impl LensCoordinates {
    pub fn new(ids: Vec<i64>, coords: Vec<[f64; 2]>, provenance: LensProvenance) -> Result<Self> {
        if ids.len() != coords.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                found: coords.len(),
                context: "lens coordinates per id".into(),
            });
        }
        if ids.is_empty() {
            return Err(Error::Empty("lens has no points".into()));
        }
        if let Some((id, _)) = ids
            .iter()
            .zip(&coords)
            .find(|(_, c)| !(c[0].is_finite() && c[1].is_finite()))
        {
            return Err(Error::NonFinite(format!("lens coordinate of id {id}")));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::DuplicateId(*dup));
        }
        Ok(LensCoordinates {
            ids,
            coords,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[i64] {
        &self.ids
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn provenance(&self) -> &LensProvenance {
        &self.provenance
    }

    /// `[min, max]` of each lens axis.
    pub fn bounds(&self) -> [(f64, f64); 2] {
        let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for c in &self.coords {
            for axis in 0..2 {
                b[axis].0 = b[axis].0.min(c[axis]);
                b[axis].1 = b[axis].1.max(c[axis]);
            }
        }
        b
    }

    /// Checks that the lens rows line up one-to-one with the corpus rows.
    pub fn check_matches(&self, set: &InteractionSet) -> Result<()> {
        if self.ids.len() != set.len() || !self.ids.iter().copied().eq(set.ids()) {
            return Err(Error::LensCoverage(
                "lens ids are not the corpus ids in corpus order".into(),
            ));
        }
        Ok(())
    }
}

/// Projection of the `[if | then]` feature rows onto their top two principal axes.
pub fn pca_lens(set: &InteractionSet) -> Result<LensCoordinates> {
    let rows: Vec<Vec<f64>> = set
        .iter()
        .map(|it| it.if_vec.iter().chain(&it.then_vec).copied().collect())
        .collect();
    let coords = pca_project(&rows)?;
    LensCoordinates::new(set.ids().collect(), coords, LensProvenance::Pca)
}

/// Top-two principal component scores of arbitrary feature rows.
///
/// Columns are mean-centered. Each component's sign is fixed so that its
/// largest-magnitude loading is positive (first such index on ties).
pub fn pca_project(rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
    let n = rows.len();
    if n < 3 {
        return Err(Error::Degenerate(format!(
            "PCA needs at least 3 points, got {n}"
        )));
    }
    let p = rows[0].len();
    if p == 0 {
        return Err(Error::Empty("PCA feature rows are empty".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: rows[bad].len(),
            context: format!("feature row {bad}"),
        });
    }
    let mut mean = vec![0.0; p];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, p, |i, j| rows[i][j] - mean[j]);
    let cov = centered.tr_mul(&centered) / (n as f64 - 1.0);

    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let top = eigen.eigenvalues[order[0]];
    let magnitude = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, x| m.max(x * x));
    if !(top > 1e-20 * magnitude) {
        return Err(Error::Degenerate(
            "all feature rows are identical; PCA has no direction".into(),
        ));
    }

    let mut axes = Vec::with_capacity(2);
    for &k in order.iter().take(2) {
        let mut v: Vec<f64> = eigen.eigenvectors.column(k).iter().copied().collect();
        let lead = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, x)| {
                if x.abs() > best.1 {
                    (i, x.abs())
                } else {
                    best
                }
            })
            .0;
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        axes.push(v);
    }
    // One feature column gives a single axis; the second score is zero.
    while axes.len() < 2 {
        axes.push(vec![0.0; p]);
    }
    let scores = (0..n)
        .map(|i| {
            let row = centered.row(i);
            let s = |axis: &[f64]| row.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>();
            [s(&axes[0]), s(&axes[1])]
        })
        .collect();
    Ok(scores)
}

/// Reads an `id,x,y` lens file and aligns it to corpus order.
pub fn import_lens(path: impl AsRef<Path>, set: &InteractionSet) -> Result<LensCoordinates> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    read_lens(file, set, label)
}

pub fn read_lens<R: Read>(reader: R, set: &InteractionSet, label: String) -> Result<LensCoordinates> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MalformedRow {
                row: 1,
                message: format!("lens header lacks `{name}`"),
            })
    };
    let (ci, cx, cy) = (col("id")?, col("x")?, col("y")?);
    let mut by_id: HashMap<i64, [f64; 2]> = HashMap::with_capacity(set.len());
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let bad = |what: &str, e: String| Error::MalformedRow {
            row,
            message: format!("{what}: {e}"),
        };
        let id: i64 = field(ci).parse().map_err(|e| bad("id", format!("{e}")))?;
        let x: f64 = field(cx).parse().map_err(|e| bad("x", format!("{e}")))?;
        let y: f64 = field(cy).parse().map_err(|e| bad("y", format!("{e}")))?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite(format!("lens coordinate of id {id}")));
        }
        if set.position(id).is_none() {
            return Err(Error::LensCoverage(format!("id {id} is not in the corpus")));
        }
        if by_id.insert(id, [x, y]).is_some() {
            return Err(Error::LensCoverage(format!("id {id} appears more than once")));
        }
    }
    let mut coords = Vec::with_capacity(set.len());
    for id in set.ids() {
        match by_id.get(&id) {
            Some(c) => coords.push(*c),
            None => return Err(Error::LensCoverage(format!("missing id {id}"))),
        }
    }
    LensCoordinates::new(set.ids().collect(), coords, LensProvenance::Imported(label))
}

pub fn write_lens_csv<W: Write>(lens: &LensCoordinates, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "x", "y"])?;
    for (id, c) in lens.ids.iter().zip(&lens.coords) {
        w.write_record([id.to_string(), c[0].to_string(), c[1].to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}
