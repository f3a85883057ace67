//! Exploitation and exploration queries for a focal interaction.
//!
//! Exploitation candidates are the interactions most functionally similar to
//! the focal; exploration candidates are those with the highest cross-capacity
//! similarity. On the network, nodes are colored by the mean of a
//! per-interaction value and thresholded; highlighted nodes reachable from a
//! node holding the focal through other highlighted nodes are contiguous.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::Write;

use serde::Serialize;

use crate::corpus::InteractionSet;
use crate::error::{Error, Result};
use crate::mapper::MapperNetwork;
use crate::render;
use crate::simdecomp::{focal_profile_packed, PackedCorpus};

/// Points within this distance of the diagonal count as on it.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_FUNCTIONAL_THRESHOLD: f64 = 0.7;
pub const DEFAULT_CROSS_CAPACITY_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub id: i64,
    pub if_text: String,
    pub then_text: String,
    pub functional: f64,
    pub cross_capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagonalSide {
    Below,
    On,
    Above,
}

impl DiagonalSide {
    /// Side of `(functional, cross_capacity)` relative to the line `y = x`.
    pub fn of(functional: f64, cross_capacity: f64) -> Self {
        let diff = cross_capacity - functional;
        if diff > DIAGONAL_TOLERANCE {
            DiagonalSide::Above
        } else if diff < -DIAGONAL_TOLERANCE {
            DiagonalSide::Below
        } else {
            DiagonalSide::On
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DiagonalSide::Below => "below",
            DiagonalSide::On => "on",
            DiagonalSide::Above => "above",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub id: i64,
    pub functional: f64,
    pub cross_capacity: f64,
    pub is_focal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalReport {
    pub focal_id: i64,
    pub focal_if_text: String,
    pub focal_then_text: String,
    pub within_focal: f64,
    pub r_functional_cc: Option<f64>,
    /// Top `k` by functional similarity, descending; ties by ascending id.
    pub exploitation: Vec<Candidate>,
    /// Top `k` by cross-capacity similarity, descending; ties by ascending id.
    pub exploration: Vec<Candidate>,
    /// Every partner, in corpus order, followed by the focal itself at
    /// `(1, within_focal)`.
    pub scatter: Vec<ScatterPoint>,
}

impl FocalReport {
    /// Per-interaction functional similarity to the focal, focal included (= 1).
    pub fn functional_values(&self) -> HashMap<i64, f64> {
        self.scatter.iter().map(|p| (p.id, p.functional)).collect()
    }

    /// Per-interaction cross-capacity similarity, focal included (= within).
    pub fn cross_capacity_values(&self) -> HashMap<i64, f64> {
        self.scatter.iter().map(|p| (p.id, p.cross_capacity)).collect()
    }
}

pub fn focal_report(focal_id: i64, set: &InteractionSet, k: usize) -> Result<FocalReport> {
    let packed = PackedCorpus::new(set);
    focal_report_packed(focal_id, set, &packed, k)
}

/// [`focal_report`] against a corpus packed once for many queries.
pub fn focal_report_packed(
    focal_id: i64,
    set: &InteractionSet,
    packed: &PackedCorpus,
    k: usize,
) -> Result<FocalReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("list length k must be ≥ 1".into()));
    }
    let f = set.position(focal_id).ok_or(Error::UnknownId(focal_id))?;
    let profile = focal_profile_packed(packed, f);
    let focal = &set.interactions()[f];

    let mut scatter: Vec<ScatterPoint> = profile
        .partner_ids
        .iter()
        .zip(profile.functional.iter().zip(&profile.cross_capacity))
        .map(|(&id, (&functional, &cross_capacity))| ScatterPoint {
            id,
            functional,
            cross_capacity,
            is_focal: false,
        })
        .collect();

    let candidate = |p: &ScatterPoint| {
        let it = set.get(p.id).expect("partner ids come from the corpus");
        Candidate {
            id: p.id,
            if_text: it.if_text.clone(),
            then_text: it.then_text.clone(),
            functional: p.functional,
            cross_capacity: p.cross_capacity,
        }
    };
    let ranked = |key: fn(&ScatterPoint) -> f64| -> Vec<Candidate> {
        let mut order: Vec<&ScatterPoint> = scatter.iter().collect();
        order.sort_by(|a, b| key(b).total_cmp(&key(a)).then(a.id.cmp(&b.id)));
        order.into_iter().take(k).map(candidate).collect()
    };
    let exploitation = ranked(|p| p.functional);
    let exploration = ranked(|p| p.cross_capacity);

    scatter.push(ScatterPoint {
        id: focal_id,
        functional: 1.0,
        cross_capacity: profile.within_focal,
        is_focal: true,
    });

    Ok(FocalReport {
        focal_id,
        focal_if_text: focal.if_text.clone(),
        focal_then_text: focal.then_text.clone(),
        within_focal: profile.within_focal,
        r_functional_cc: profile.r_functional_cc,
        exploitation,
        exploration,
        scatter,
    })
}

/// Mean member value per node id.
pub fn color_network(
    network: &MapperNetwork,
    values: &HashMap<i64, f64>,
) -> Result<BTreeMap<usize, f64>> {
    network
        .nodes
        .iter()
        .map(|node| {
            let mut sum = 0.0;
            for id in &node.members {
                sum += values.get(id).ok_or(Error::UnknownId(*id))?;
            }
            Ok((node.id, sum / node.members.len() as f64))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContiguityClassification {
    pub threshold: f64,
    pub focal_id: i64,
    /// Node ids containing the focal interaction.
    pub focal_nodes: Vec<usize>,
    /// Node ids whose value exceeds the threshold.
    pub highlighted: Vec<usize>,
    pub contiguous: Vec<usize>,
    pub discontinuous: Vec<usize>,
    /// False when filtering removed every node holding the focal.
    pub focal_in_network: bool,
}

pub fn highlight_and_classify(
    network: &MapperNetwork,
    node_values: &BTreeMap<usize, f64>,
    threshold: f64,
    focal_id: i64,
) -> ContiguityClassification {
    let adj = network.adjacency();
    let n = network.nodes.len();
    let highlighted: Vec<bool> = network
        .nodes
        .iter()
        .map(|node| node_values.get(&node.id).is_some_and(|&v| v > threshold))
        .collect();
    let focal_idx = network.nodes_containing(focal_id);

    let mut reached = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &k in &focal_idx {
        reached[k] = true;
        queue.push_back(k);
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !reached[v] && highlighted[v] {
                reached[v] = true;
                queue.push_back(v);
            }
        }
    }

    let ids = |pred: &dyn Fn(usize) -> bool| -> Vec<usize> {
        let set: BTreeSet<usize> = (0..n).filter(|&k| pred(k)).map(|k| network.nodes[k].id).collect();
        set.into_iter().collect()
    };
    ContiguityClassification {
        threshold,
        focal_id,
        focal_nodes: ids(&|k| focal_idx.contains(&k)),
        highlighted: ids(&|k| highlighted[k]),
        contiguous: ids(&|k| highlighted[k] && reached[k]),
        discontinuous: ids(&|k| highlighted[k] && !reached[k]),
        focal_in_network: !focal_idx.is_empty(),
    }
}

/// Scatter table `id,functional,cross_capacity,side` (focal row last).
pub fn write_scatter_csv<W: Write>(report: &FocalReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "functional", "cross_capacity", "side"])?;
    for p in &report.scatter {
        w.write_record([
            p.id.to_string(),
            p.functional.to_string(),
            p.cross_capacity.to_string(),
            DiagonalSide::of(p.functional, p.cross_capacity).as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

/// CSV and SVG renderings of the focal scatter plot.
pub fn scatter_export(report: &FocalReport) -> Result<(String, String)> {
    let mut csv = Vec::new();
    write_scatter_csv(report, &mut csv)?;
    let csv = String::from_utf8(csv).expect("csv writer emits utf-8");
    Ok((csv, render::scatter_svg(report)))
}
