//! Mapper networks over a 2-D lens.
//!
//! 1. The lens range of each axis is split into `resolution` base intervals,
//!    each widened by `gain` about its center, giving `resolution²`
//!    overlapping bins.
//! 2. Interactions falling in each bin are clustered by single linkage on the
//!    functional cosine distance `1 − functional`, cut at the first empty
//!    histogram bin of merge heights.
//! 3. Every cluster is a node; nodes with identical members are merged and
//!    nodes sharing a member are joined by an edge.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::InteractionSet;
use crate::error::{Error, Result};
use crate::lens::LensCoordinates;
use crate::linalg::dot;

/// Merge heights at or below this are treated as exact ties at zero.
pub const ZERO_HEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub resolution: usize,
    pub gain: f64,
    /// Intervals of lens axis 1 and lens axis 2.
    pub axes: [Vec<Interval>; 2],
    bounds: [(f64, f64); 2],
}

impl Cover {
    pub fn bin_count(&self) -> usize {
        self.axes[0].len() * self.axes[1].len()
    }

    /// Bin index of interval pair `(i, j)`: row-major over axis 1 then axis 2.
    pub fn bin_index(&self, i: usize, j: usize) -> usize {
        i * self.axes[1].len() + j
    }

    /// Fraction of an interval shared with its neighbour, `1 − 1/gain`.
    pub fn overlap_fraction(&self) -> f64 {
        1.0 - 1.0 / self.gain
    }

    /// Intervals of `axis` containing `x`, in ascending order.
    ///
    /// The base interval of `x` is always included, so rounding at interval
    /// ends can never leave a lens point uncovered.
    pub fn intervals_of(&self, axis: usize, x: f64) -> Vec<usize> {
        let intervals = &self.axes[axis];
        let (lo, hi) = self.bounds[axis];
        let n = intervals.len();
        let base = if n == 1 || hi <= lo {
            0
        } else {
            let step = (hi - lo) / n as f64;
            (((x - lo) / step).floor().max(0.0) as usize).min(n - 1)
        };
        let mut out: Vec<usize> = intervals
            .iter()
            .enumerate()
            .filter(|(k, iv)| *k == base || iv.contains(x))
            .map(|(k, _)| k)
            .collect();
        out.dedup();
        out
    }

    /// Bins containing lens point `p`, ascending.
    pub fn bins_of(&self, p: [f64; 2]) -> Vec<usize> {
        let a = self.intervals_of(0, p[0]);
        let b = self.intervals_of(1, p[1]);
        let mut out = Vec::with_capacity(a.len() * b.len());
        for &i in &a {
            for &j in &b {
                out.push(self.bin_index(i, j));
            }
        }
        out
    }
}

pub fn build_cover(lens: &LensCoordinates, resolution: usize, gain: f64) -> Result<Cover> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be ≥ 1".into()));
    }
    if !(gain > 1.0) || !gain.is_finite() {
        return Err(Error::InvalidParameter(format!("gain must be > 1, got {gain}")));
    }
    let bounds = lens.bounds();
    let axis = |(lo, hi): (f64, f64)| -> Vec<Interval> {
        if hi <= lo {
            return vec![Interval {
                center: lo,
                half_width: 0.0,
            }];
        }
        let step = (hi - lo) / resolution as f64;
        (0..resolution)
            .map(|k| Interval {
                center: lo + (k as f64 + 0.5) * step,
                half_width: 0.5 * gain * step,
            })
            .collect()
    };
    Ok(Cover {
        resolution,
        gain,
        axes: [axis(bounds[0]), axis(bounds[1])],
        bounds,
    })
}

/// Corpus positions per non-empty bin, keyed by bin index.
pub fn assign_bins(lens: &LensCoordinates, cover: &Cover) -> BTreeMap<usize, Vec<usize>> {
    let mut bins: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, p) in lens.coords().iter().enumerate() {
        for b in cover.bins_of(*p) {
            bins.entry(b).or_default().push(pos);
        }
    }
    bins
}

/// One merge of a single-linkage dendrogram over local indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

/// Single-linkage merges of `n` points, ascending by `(height, a, b)`.
///
/// Computed from a minimum spanning tree (Prim, O(n²) distance calls, O(n)
/// memory). Heights are clamped at zero. Each merge joins the two clusters
/// containing the local points `a < b`.
pub fn single_linkage(n: usize, distance: impl Fn(usize, usize) -> f64) -> Vec<Merge> {
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut merges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = distance(current, v).max(0.0);
            if d < best[v] {
                best[v] = d;
                parent[v] = current;
            }
            if best[v] < next_d || next == usize::MAX {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        let (a, b) = (parent[next].min(next), parent[next].max(next));
        merges.push(Merge {
            a,
            b,
            height: if next_d <= ZERO_HEIGHT { 0.0 } else { next_d },
        });
        current = next;
    }
    merges.sort_by(|x, y| {
        x.height
            .total_cmp(&y.height)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });
    merges
}

/// Height threshold from the first-gap rule: merges strictly below it are kept.
///
/// Merge heights are histogrammed into `bins` equal-width bins over
/// `[0, max]`; the cut sits at the left edge of the first empty bin. With no
/// empty bin (or all heights zero) the result is `None`: one cluster.
pub fn first_gap_threshold(heights: &[f64], bins: usize) -> Option<f64> {
    let max = heights.iter().copied().fold(0.0f64, f64::max);
    if heights.is_empty() || max <= 0.0 || bins == 0 {
        return None;
    }
    let mut counts = vec![0usize; bins];
    for &h in heights {
        let k = ((h / max) * bins as f64).floor() as usize;
        counts[k.min(bins - 1)] += 1;
    }
    counts
        .iter()
        .position(|&c| c == 0)
        .map(|k| k as f64 * max / bins as f64)
}

/// Clusters of local indices `0..n`, each sorted, ordered by smallest member.
pub fn cut_clusters(n: usize, merges: &[Merge], histogram_bins: usize) -> Vec<Vec<usize>> {
    let heights: Vec<f64> = merges.iter().map(|m| m.height).collect();
    let threshold = first_gap_threshold(&heights, histogram_bins);
    let mut uf = UnionFind::new(n);
    for m in merges {
        if threshold.map_or(true, |t| m.height < t) {
            uf.union(m.a, m.b);
        }
    }
    uf.groups()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Histogram bins for the first-gap cut.
    pub histogram_bins: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams { histogram_bins: 10 }
    }
}

/// Functional cosine distance `1 − functional` between corpus rows.
pub struct FunctionalDistance {
    width: usize,
    rows: Vec<f64>,
}

impl FunctionalDistance {
    pub fn new(set: &InteractionSet) -> Self {
        let mut rows = Vec::with_capacity(set.len() * 2 * set.dimension());
        for it in set {
            rows.extend_from_slice(&it.if_vec);
            rows.extend_from_slice(&it.then_vec);
        }
        FunctionalDistance {
            width: 2 * set.dimension(),
            rows,
        }
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let ra = &self.rows[a * self.width..(a + 1) * self.width];
        let rb = &self.rows[b * self.width..(b + 1) * self.width];
        (1.0 - 0.5 * dot(ra, rb)).max(0.0)
    }
}

/// Single-linkage clusters of the given interactions under functional distance.
pub fn cluster_bin(
    member_ids: &[i64],
    set: &InteractionSet,
    params: ClusterParams,
) -> Result<Vec<Vec<i64>>> {
    let positions: Vec<usize> = member_ids
        .iter()
        .map(|&id| set.position(id).ok_or(Error::UnknownId(id)))
        .collect::<Result<_>>()?;
    let metric = FunctionalDistance::new(set);
    Ok(cluster_positions(&positions, &metric, params)
        .into_iter()
        .map(|c| c.into_iter().map(|p| set.interactions()[p].id).collect())
        .collect())
}

fn cluster_positions(
    positions: &[usize],
    metric: &FunctionalDistance,
    params: ClusterParams,
) -> Vec<Vec<usize>> {
    let merges = single_linkage(positions.len(), |a, b| {
        metric.distance(positions[a], positions[b])
    });
    cut_clusters(positions.len(), &merges, params.histogram_bins)
        .into_iter()
        .map(|local| {
            let mut c: Vec<usize> = local.into_iter().map(|k| positions[k]).collect();
            c.sort_unstable();
            c
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub size: usize,
    pub mean_within: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperNode {
    pub id: usize,
    /// Member interaction ids, ascending.
    pub members: Vec<i64>,
    /// `(bin, cluster)` of every within-bin cluster merged into this node;
    /// the first is the one that assigned the id.
    pub origins: Vec<(usize, usize)>,
    pub stats: NodeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperParameters {
    pub resolution: usize,
    pub gain: f64,
    pub histogram_bins: usize,
    pub lens: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperNetwork {
    pub parameters: MapperParameters,
    pub nodes: Vec<MapperNode>,
    /// Unordered node-id pairs stored as `[low, high]`, sorted.
    pub edges: Vec<[usize; 2]>,
}

impl MapperNetwork {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Map from node id to index in `nodes`.
    pub fn index(&self) -> HashMap<usize, usize> {
        self.nodes.iter().enumerate().map(|(k, n)| (n.id, k)).collect()
    }

    /// Neighbour lists by node index.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let index = self.index();
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for [u, v] in &self.edges {
            let (a, b) = (index[u], index[v]);
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Connected components as sorted lists of node indices, ordered by
    /// smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; adj.len()];
        let mut out = Vec::new();
        for start in 0..adj.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// `edges − nodes + components`: the number of independent cycles.
    pub fn cyclomatic_number(&self) -> usize {
        self.edges.len() + self.components().len() - self.nodes.len()
    }

    /// Node indices containing interaction `id`.
    pub fn nodes_containing(&self, id: i64) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.members.binary_search(&id).is_ok())
            .map(|(k, _)| k)
            .collect()
    }

    /// Number of members shared by the two endpoints of each edge, in edge order.
    pub fn shared_member_counts(&self) -> Vec<usize> {
        let index = self.index();
        self.edges
            .iter()
            .map(|[u, v]| {
                let (a, b) = (&self.nodes[index[u]].members, &self.nodes[index[v]].members);
                sorted_intersection_len(a, b)
            })
            .collect()
    }
}

fn sorted_intersection_len(a: &[i64], b: &[i64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Builds the Mapper network for `set` seen through `lens` and `cover`.
///
/// Bins are clustered in parallel; nodes are numbered in (bin, cluster)
/// order after duplicate member sets are merged.
pub fn build_network(
    lens: &LensCoordinates,
    cover: &Cover,
    set: &InteractionSet,
    params: ClusterParams,
) -> Result<MapperNetwork> {
    lens.check_matches(set)?;
    let metric = FunctionalDistance::new(set);
    let bins: Vec<(usize, Vec<usize>)> = assign_bins(lens, cover).into_iter().collect();
    let clustered: Vec<(usize, Vec<Vec<usize>>)> = bins
        .par_iter()
        .map(|(bin, members)| (*bin, cluster_positions(members, &metric, params)))
        .collect();

    let interactions = set.interactions();
    let mut nodes: Vec<MapperNode> = Vec::new();
    let mut by_members: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut node_positions: Vec<Vec<usize>> = Vec::new();
    for (bin, clusters) in clustered {
        for (c, positions) in clusters.into_iter().enumerate() {
            if let Some(&k) = by_members.get(&positions) {
                nodes[k].origins.push((bin, c));
                continue;
            }
            let id = nodes.len();
            let mut members: Vec<i64> = positions.iter().map(|&p| interactions[p].id).collect();
            members.sort_unstable();
            let mean_within = positions
                .iter()
                .map(|&p| interactions[p].within())
                .sum::<f64>()
                / positions.len() as f64;
            nodes.push(MapperNode {
                id,
                members,
                origins: vec![(bin, c)],
                stats: NodeStats {
                    size: positions.len(),
                    mean_within,
                },
            });
            by_members.insert(positions.clone(), id);
            node_positions.push(positions);
        }
    }

    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); set.len()];
    for (k, positions) in node_positions.iter().enumerate() {
        for &p in positions {
            containing[p].push(k);
        }
    }
    let mut edges = BTreeSet::new();
    for list in &containing {
        for (x, &u) in list.iter().enumerate() {
            for &v in &list[x + 1..] {
                edges.insert([u.min(v), u.max(v)]);
            }
        }
    }

    Ok(MapperNetwork {
        parameters: MapperParameters {
            resolution: cover.resolution,
            gain: cover.gain,
            histogram_bins: params.histogram_bins,
            lens: lens.provenance().to_string(),
        },
        nodes,
        edges: edges.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedComponent {
    pub node_ids: Vec<usize>,
    pub interactions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub min_size: usize,
    pub removed: Vec<RemovedComponent>,
    pub removed_nodes: usize,
    /// Interactions no longer present in any retained node.
    pub dropped_interactions: Vec<i64>,
}

/// Drops connected components with fewer than `min_size` nodes.
pub fn filter_small_components(
    network: &MapperNetwork,
    min_size: usize,
) -> Result<(MapperNetwork, FilterReport)> {
    if min_size == 0 {
        return Err(Error::InvalidParameter("min component size must be ≥ 1".into()));
    }
    let mut keep = vec![true; network.nodes.len()];
    let mut removed = Vec::new();
    for comp in network.components() {
        if comp.len() < min_size {
            let mut ids: BTreeSet<i64> = BTreeSet::new();
            for &k in &comp {
                keep[k] = false;
                ids.extend(network.nodes[k].members.iter().copied());
            }
            removed.push(RemovedComponent {
                node_ids: comp.iter().map(|&k| network.nodes[k].id).collect(),
                interactions: ids.len(),
            });
        }
    }
    let nodes: Vec<MapperNode> = network
        .nodes
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(n, _)| n.clone())
        .collect();
    let kept_ids: BTreeSet<usize> = nodes.iter().map(|n| n.id).collect();
    let edges = network
        .edges
        .iter()
        .filter(|[u, v]| kept_ids.contains(u) && kept_ids.contains(v))
        .copied()
        .collect();
    let retained: BTreeSet<i64> = nodes.iter().flat_map(|n| n.members.iter().copied()).collect();
    let dropped: BTreeSet<i64> = network
        .nodes
        .iter()
        .flat_map(|n| n.members.iter().copied())
        .filter(|id| !retained.contains(id))
        .collect();
    let report = FilterReport {
        min_size,
        removed_nodes: network.nodes.len() - nodes.len(),
        removed,
        dropped_interactions: dropped.into_iter().collect(),
    };
    Ok((
        MapperNetwork {
            parameters: network.parameters.clone(),
            nodes,
            edges,
        },
        report,
    ))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so group labels are order independent.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}
