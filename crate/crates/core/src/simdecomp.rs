//! Decomposition of the cosine similarity between two interactions.
//!
//! For unit vectors `i₁, t₁, i₂, t₂`:
//!
//! ```text
//! cos(i₁ + t₁, i₂ + t₂) = (functional + cross_capacity) / f_within
//! functional     = (cos(i₁, i₂) + cos(t₁, t₂)) / 2
//! cross_capacity = (cos(i₁, t₂) + cos(i₂, t₁)) / 2
//! f_within       = √((1 + cos(i₁, t₁)) (1 + cos(i₂, t₂)))
//! ```
//!
//! The whole-corpus kernel ([`all_profiles`]) scores every interaction as a
//! focal against all others and reduces each focal row to the Pearson
//! correlation between its functional and cross-capacity similarities.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Interaction, InteractionSet};
use crate::error::{Error, Result};
use crate::linalg::{add, dot, norm};

/// Below this, `f_within` is treated as zero and the reconstruction is undefined.
pub const F_WITHIN_FLOOR: f64 = 1e-9;

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
            context: "cosine operands".into(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu <= 1e-12 || nv <= 1e-12 {
        return Err(Error::ZeroNorm("cosine operand".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// `√((1 + w₁)(1 + w₂))`, the denominator of the decomposition.
pub fn f_within_grid(w1: f64, w2: f64) -> f64 {
    ((1.0 + w1) * (1.0 + w2)).max(0.0).sqrt()
}

/// `1 + cos(u, v)` as `|û + v̂|² / 2`, which keeps its relative accuracy when
/// the vectors are nearly opposite (where `1 + cos` cancels).
fn one_plus_cosine(u: &[f64], v: &[f64]) -> f64 {
    let (nu, nv) = (norm(u), norm(v));
    u.iter()
        .zip(v)
        .map(|(x, y)| {
            let s = x / nu + y / nv;
            s * s
        })
        .sum::<f64>()
        / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityComponents {
    pub functional: f64,
    pub cross_capacity: f64,
    pub within_1: f64,
    pub within_2: f64,
    pub f_within: f64,
    /// Direct cosine of the summed if+then vectors. `None` when either sum
    /// vanishes (an interaction with `then = -if`).
    pub whole: Option<f64>,
    /// `(functional + cross_capacity) / f_within`; `None` when `f_within`
    /// is below [`F_WITHIN_FLOOR`].
    pub reconstructed_whole: Option<f64>,
    pub identity_residual: Option<f64>,
}

impl SimilarityComponents {
    pub fn is_defined(&self) -> bool {
        self.reconstructed_whole.is_some()
    }
}

pub fn decompose(a: &Interaction, b: &Interaction) -> Result<SimilarityComponents> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
            context: format!("decompose({}, {})", a.id, b.id),
        });
    }
    let functional = (cosine(&a.if_vec, &b.if_vec)? + cosine(&a.then_vec, &b.then_vec)?) / 2.0;
    let cross_capacity =
        (cosine(&a.if_vec, &b.then_vec)? + cosine(&b.if_vec, &a.then_vec)?) / 2.0;
    let within_1 = cosine(&a.if_vec, &a.then_vec)?;
    let within_2 = cosine(&b.if_vec, &b.then_vec)?;
    let f_within = (one_plus_cosine(&a.if_vec, &a.then_vec) * one_plus_cosine(&b.if_vec, &b.then_vec)).sqrt();

    let whole = cosine(&add(&a.if_vec, &a.then_vec), &add(&b.if_vec, &b.then_vec)).ok();
    let reconstructed_whole =
        (f_within > F_WITHIN_FLOOR).then(|| (functional + cross_capacity) / f_within);
    let identity_residual = match (whole, reconstructed_whole) {
        (Some(w), Some(r)) => Some((w - r).abs()),
        _ => None,
    };
    Ok(SimilarityComponents {
        functional,
        cross_capacity,
        within_1,
        within_2,
        f_within,
        whole,
        reconstructed_whole,
        identity_residual,
    })
}

/// Streaming moments for a Pearson correlation.
///
/// Values are shifted by the first observation so that constant series give
/// exactly zero variance.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    shift_x: f64,
    shift_y: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64, y: f64) {
        if self.n == 0 {
            self.shift_x = x;
            self.shift_y = y;
        }
        let dx = x - self.shift_x;
        let dy = y - self.shift_y;
        self.n += 1;
        self.sx += dx;
        self.sy += dy;
        self.sxx += dx * dx;
        self.syy += dy * dy;
        self.sxy += dx * dy;
    }

    fn pearson(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let n = self.n as f64;
        let vx = self.sxx - self.sx * self.sx / n;
        let vy = self.syy - self.sy * self.sy / n;
        // Spread below ~1e-13 per point is rounding noise, not signal.
        let floor = n * 1e-26;
        if vx <= floor || vy <= floor {
            return None;
        }
        let cov = self.sxy - self.sx * self.sy / n;
        Some((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
    }
}

/// Similarity of one focal interaction with every other interaction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalProfile {
    pub focal_id: i64,
    pub within_focal: f64,
    /// Partner ids in corpus order, focal excluded.
    pub partner_ids: Vec<i64>,
    pub functional: Vec<f64>,
    pub cross_capacity: Vec<f64>,
    /// `None` when either series is constant or has fewer than two points.
    pub r_functional_cc: Option<f64>,
}

/// Row-major packing of the corpus used by the whole-corpus kernels.
///
/// `forward[j] = [if_j | then_j]` and `reverse[j] = [then_j | if_j]`, so that
/// `forward[f]·forward[j] = 2·functional` and `forward[f]·reverse[j] =
/// 2·cross_capacity` for unit vectors.
pub struct PackedCorpus {
    n: usize,
    width: usize,
    forward: Vec<f64>,
    reverse: Vec<f64>,
    within: Vec<f64>,
    ids: Vec<i64>,
}

impl PackedCorpus {
    pub fn new(set: &InteractionSet) -> Self {
        let d = set.dimension();
        let n = set.len();
        let width = 2 * d;
        let mut forward = Vec::with_capacity(n * width);
        let mut reverse = Vec::with_capacity(n * width);
        for it in set {
            forward.extend_from_slice(&it.if_vec);
            forward.extend_from_slice(&it.then_vec);
            reverse.extend_from_slice(&it.then_vec);
            reverse.extend_from_slice(&it.if_vec);
        }
        PackedCorpus {
            n,
            width,
            forward,
            reverse,
            within: set.iter().map(Interaction::within).collect(),
            ids: set.ids().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn fwd(&self, j: usize) -> &[f64] {
        &self.forward[j * self.width..(j + 1) * self.width]
    }

    #[inline]
    fn rev(&self, j: usize) -> &[f64] {
        &self.reverse[j * self.width..(j + 1) * self.width]
    }

    /// `(functional, cross_capacity)` between rows `f` and `j`.
    #[inline]
    pub fn pair(&self, f: usize, j: usize) -> (f64, f64) {
        let row = self.fwd(f);
        let functional = (0.5 * dot(row, self.fwd(j))).clamp(-1.0, 1.0);
        let cross = (0.5 * dot(row, self.rev(j))).clamp(-1.0, 1.0);
        (functional, cross)
    }
}

pub fn focal_profile(focal: &Interaction, set: &InteractionSet) -> Result<FocalProfile> {
    let f = set.position(focal.id).ok_or(Error::UnknownId(focal.id))?;
    let packed = PackedCorpus::new(set);
    Ok(focal_profile_packed(&packed, f))
}

/// Like [`focal_profile`] but against a corpus packed once up front.
pub fn focal_profile_packed(packed: &PackedCorpus, f: usize) -> FocalProfile {
    let mut partner_ids = Vec::with_capacity(packed.n.saturating_sub(1));
    let mut functional = Vec::with_capacity(packed.n.saturating_sub(1));
    let mut cross_capacity = Vec::with_capacity(packed.n.saturating_sub(1));
    let mut moments = Moments::default();
    for j in (0..packed.n).filter(|&j| j != f) {
        let (fu, cc) = packed.pair(f, j);
        moments.push(fu, cc);
        partner_ids.push(packed.ids[j]);
        functional.push(fu);
        cross_capacity.push(cc);
    }
    FocalProfile {
        focal_id: packed.ids[f],
        within_focal: packed.within[f],
        partner_ids,
        functional,
        cross_capacity,
        r_functional_cc: moments.pearson(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub id: i64,
    pub within: f64,
    pub r_functional_cc: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Focal rows processed together against each tile of partners.
    pub block_size: usize,
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            block_size: 256,
            threads: None,
        }
    }
}

/// Partner rows per tile; a tile of both packings stays resident in L2.
const PARTNER_TILE: usize = 512;

/// One `(id, within, r)` row per interaction, in corpus order.
///
/// Output is independent of `block_size` and the worker count: each focal
/// row accumulates its moments over partners in ascending corpus order and
/// writes to its own slot.
pub fn all_profiles(set: &InteractionSet, options: ProfileOptions) -> Result<Vec<ProfileRow>> {
    if options.block_size == 0 {
        return Err(Error::InvalidParameter("block size must be ≥ 1".into()));
    }
    let packed = PackedCorpus::new(set);
    let run = || all_profiles_packed(&packed, options.block_size);
    match options.threads {
        None => Ok(run()),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

fn all_profiles_packed(packed: &PackedCorpus, block_size: usize) -> Vec<ProfileRow> {
    let n = packed.n;
    let mut rows = vec![
        ProfileRow {
            id: 0,
            within: 0.0,
            r_functional_cc: None,
        };
        n
    ];
    rows.par_chunks_mut(block_size)
        .enumerate()
        .for_each(|(b, out)| {
            let start = b * block_size;
            let mut moments = vec![Moments::default(); out.len()];
            for tile in (0..n).step_by(PARTNER_TILE) {
                let tile_end = (tile + PARTNER_TILE).min(n);
                for (k, m) in moments.iter_mut().enumerate() {
                    let f = start + k;
                    for j in tile..tile_end {
                        if j != f {
                            let (fu, cc) = packed.pair(f, j);
                            m.push(fu, cc);
                        }
                    }
                }
            }
            for (k, (slot, m)) in out.iter_mut().zip(&moments).enumerate() {
                let f = start + k;
                *slot = ProfileRow {
                    id: packed.ids[f],
                    within: packed.within[f],
                    r_functional_cc: m.pearson(),
                };
            }
        });
    rows
}

/// CSV with header `id,within,r_functional_cc`; undefined correlations are empty.
pub fn write_profiles_csv<W: Write>(rows: &[ProfileRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "within", "r_functional_cc"])?;
    for row in rows {
        w.write_record([
            row.id.to_string(),
            row.within.to_string(),
            row.r_functional_cc.map(|r| r.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn read_profiles_csv<R: std::io::Read>(reader: R) -> Result<Vec<ProfileRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        let bad = |message: String| Error::MalformedRow { row, message };
        let get = |k: usize| rec.get(k).unwrap_or("").trim();
        let id = get(0).parse().map_err(|e| bad(format!("id: {e}")))?;
        let within = get(1).parse().map_err(|e| bad(format!("within: {e}")))?;
        let r = match get(2) {
            "" | "NA" | "NaN" => None,
            s => Some(s.parse().map_err(|e| bad(format!("r_functional_cc: {e}")))?),
        };
        rows.push(ProfileRow {
            id,
            within,
            r_functional_cc: r,
        });
    }
    Ok(rows)
}
