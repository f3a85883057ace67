//! Louvain modularity optimization.
//!
//! Modularity of a partition with resolution `γ`:
//!
//! ```text
//! Q = Σ_c [ L_c / m − γ (d_c / 2m)² ]
//! ```
//!
//! where `m` is the total edge weight, `L_c` the weight inside community `c`
//! and `d_c` the summed degree of its nodes.

use std::collections::HashMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::MapperNetwork;

/// Minimum modularity gain for a move to count as an improvement.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeighting {
    /// Every edge has weight 1.
    #[default]
    Unweighted,
    /// Edge weight is the number of interactions the two nodes share.
    SharedMembers,
}

/// Undirected weighted graph on nodes `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight per node (each loop counted once).
    loops: Vec<f64>,
    degree: Vec<f64>,
    total_weight: f64,
}

impl Graph {
    /// Builds a graph from `(u, v, w)` triples; parallel edges add up and
    /// `u == v` adds a self-loop.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        let mut loops = vec![0.0; n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) outside {n} nodes"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            if u == v {
                loops[u] += w;
            } else {
                *maps[u].entry(v).or_insert(0.0) += w;
                *maps[v].entry(u).or_insert(0.0) += w;
            }
        }
        let adj: Vec<Vec<(usize, f64)>> = maps
            .into_iter()
            .map(|m| {
                let mut list: Vec<(usize, f64)> = m.into_iter().collect();
                list.sort_unstable_by_key(|(v, _)| *v);
                list
            })
            .collect();
        let degree: Vec<f64> = adj
            .iter()
            .zip(&loops)
            .map(|(list, l)| list.iter().map(|(_, w)| w).sum::<f64>() + 2.0 * l)
            .collect();
        let total_weight = degree.iter().sum::<f64>() / 2.0;
        Ok(Graph {
            adj,
            loops,
            degree,
            total_weight,
        })
    }

    pub fn from_network(network: &MapperNetwork, weighting: EdgeWeighting) -> Self {
        let index = network.index();
        let weights: Vec<f64> = match weighting {
            EdgeWeighting::Unweighted => vec![1.0; network.edges.len()],
            EdgeWeighting::SharedMembers => network
                .shared_member_counts()
                .into_iter()
                .map(|c| c as f64)
                .collect(),
        };
        let edges: Vec<(usize, usize, f64)> = network
            .edges
            .iter()
            .zip(weights)
            .map(|([u, v], w)| (index[u], index[v], w))
            .collect();
        Graph::from_edges(network.nodes.len(), &edges)
            .expect("network edges reference existing nodes with positive weight")
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    /// Node ids, parallel to `assignment`.
    pub node_ids: Vec<usize>,
    /// Community of each node, dense from 0 in order of first appearance.
    pub assignment: Vec<usize>,
    pub modularity: f64,
    pub gamma: f64,
    /// Modularity after each aggregation level, starting from singletons.
    pub level_modularity: Vec<f64>,
}

impl CommunityPartition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    pub fn community_of(&self, node_id: usize) -> Option<usize> {
        self.node_ids
            .iter()
            .position(|&id| id == node_id)
            .map(|k| self.assignment[k])
    }

    /// Node ids per community.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (id, c) in self.node_ids.iter().zip(&self.assignment) {
            out[*c].push(*id);
        }
        out
    }
}

/// Modularity of `assignment` (community label per node index).
pub fn modularity_of(graph: &Graph, assignment: &[usize], gamma: f64) -> Result<f64> {
    if graph.total_weight <= 0.0 {
        return Err(Error::ModularityUndefined);
    }
    if assignment.len() != graph.node_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.node_count(),
            found: assignment.len(),
            context: "partition must assign every node".into(),
        });
    }
    let m = graph.total_weight;
    let k = assignment.iter().max().map_or(0, |x| x + 1);
    let mut inside = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for u in 0..graph.node_count() {
        let cu = assignment[u];
        degree[cu] += graph.degree[u];
        inside[cu] += graph.loops[u];
        for &(v, w) in &graph.adj[u] {
            if v > u && assignment[v] == cu {
                inside[cu] += w;
            }
        }
    }
    Ok(inside
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - gamma * (d / (2.0 * m)).powi(2))
        .sum())
}

/// Modularity of a partition over a Mapper network.
pub fn modularity(
    network: &MapperNetwork,
    partition: &CommunityPartition,
    gamma: f64,
    weighting: EdgeWeighting,
) -> Result<f64> {
    let graph = Graph::from_network(network, weighting);
    let index = network.index();
    let mut assignment = vec![usize::MAX; network.nodes.len()];
    for (id, c) in partition.node_ids.iter().zip(&partition.assignment) {
        let k = *index
            .get(id)
            .ok_or_else(|| Error::InvalidParameter(format!("node {id} is not in the network")))?;
        assignment[k] = *c;
    }
    if assignment.contains(&usize::MAX) {
        return Err(Error::InvalidParameter(
            "partition does not cover every network node".into(),
        ));
    }
    modularity_of(&graph, &assignment, gamma)
}

/// Louvain over a Mapper network; communities are reported per node id.
pub fn louvain_network(
    network: &MapperNetwork,
    gamma: f64,
    seed: u64,
    weighting: EdgeWeighting,
) -> Result<CommunityPartition> {
    let graph = Graph::from_network(network, weighting);
    let mut partition = louvain(&graph, gamma, seed)?;
    partition.node_ids = network.nodes.iter().map(|n| n.id).collect();
    Ok(partition)
}

/// Two-phase Louvain: local moves to the best modularity gain, then
/// aggregation of communities into nodes, until a level makes no move.
///
/// Node visit order in every local-move pass is shuffled from `seed`.
/// Node ids of the result are `0..n`.
pub fn louvain(graph: &Graph, gamma: f64, seed: u64) -> Result<CommunityPartition> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Empty("graph has no nodes".into()));
    }
    let singletons: Vec<usize> = (0..n).collect();
    if graph.total_weight <= 0.0 {
        // Nothing to optimize: every node stays alone.
        return Ok(CommunityPartition {
            node_ids: singletons.clone(),
            assignment: singletons,
            modularity: f64::NAN,
            gamma,
            level_modularity: Vec::new(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = singletons.clone();
    let mut level_graph = graph.clone();
    let mut level_modularity = vec![modularity_of(graph, &singletons, gamma)?];

    loop {
        let (local, moved) = local_moves(&level_graph, gamma, &mut rng);
        if !moved {
            break;
        }
        let (labels, count) = relabel(&local);
        for c in membership.iter_mut() {
            *c = labels[*c];
        }
        level_modularity.push(modularity_of(graph, &membership, gamma)?);
        if count == level_graph.node_count() {
            break;
        }
        level_graph = aggregate(&level_graph, &labels, count);
    }

    let (membership, _) = relabel(&membership);
    let modularity = modularity_of(graph, &membership, gamma)?;
    Ok(CommunityPartition {
        node_ids: singletons,
        assignment: membership,
        modularity,
        gamma,
        level_modularity,
    })
}

/// One local-move phase. Returns the community of each node and whether any
/// node changed community.
fn local_moves(graph: &Graph, gamma: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = graph.node_count();
    let m2 = 2.0 * graph.total_weight;
    let mut community: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = graph.degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    let mut moved_any = false;
    // Scratch: weight from the current node to each neighbouring community.
    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();

    loop {
        order.shuffle(rng);
        let mut moved = false;
        for &u in &order {
            let cu = community[u];
            let ku = graph.degree[u];
            touched.clear();
            for &(v, w) in &graph.adj[u] {
                let cv = community[v];
                if link[cv] == 0.0 {
                    touched.push(cv);
                }
                link[cv] += w;
            }
            total[cu] -= ku;
            // Gain of joining c, up to a shared factor 1/m: k_u,c − γ Σ_c k_u / 2m.
            let gain = |c: usize, link_c: f64| link_c - gamma * total[c] * ku / m2;
            let mut best = cu;
            let mut best_gain = gain(cu, link[cu]);
            touched.sort_unstable();
            for &c in &touched {
                let g = gain(c, link[c]);
                if g > best_gain + MIN_GAIN {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += ku;
            if best != cu {
                community[u] = best;
                moved = true;
                moved_any = true;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            link[cu] = 0.0;
        }
        if !moved {
            break;
        }
    }
    (community, moved_any)
}

/// Dense labels in order of first appearance.
fn relabel(community: &[usize]) -> (Vec<usize>, usize) {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(community.len());
    for &c in community {
        let next = map.len();
        out.push(*map.entry(c).or_insert(next));
    }
    (out, map.len())
}

fn aggregate(graph: &Graph, labels: &[usize], count: usize) -> Graph {
    let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
    for u in 0..graph.node_count() {
        let cu = labels[u];
        if graph.loops[u] > 0.0 {
            *weights.entry((cu, cu)).or_insert(0.0) += graph.loops[u];
        }
        for &(v, w) in &graph.adj[u] {
            if v > u {
                let cv = labels[v];
                let key = (cu.min(cv), cu.max(cv));
                *weights.entry(key).or_insert(0.0) += w;
            }
        }
    }
    let mut edges: Vec<(usize, usize, f64)> =
        weights.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    edges.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    Graph::from_edges(count, &edges).expect("aggregated edges are valid")
}

/// CSV with header `node_id,community`.
pub fn write_communities_csv<W: Write>(partition: &CommunityPartition, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node_id", "community"])?;
    for (id, c) in partition.node_ids.iter().zip(&partition.assignment) {
        w.write_record([id.to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

/// Reads `node_id,community` rows back into `(node id, community)` pairs.
pub fn read_communities_csv<R: std::io::Read>(reader: R) -> Result<Vec<(usize, usize)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |e: std::num::ParseIntError| Error::MalformedRow {
            row: i + 2,
            message: e.to_string(),
        };
        let id = rec.get(0).unwrap_or("").trim().parse().map_err(bad)?;
        let c = rec.get(1).unwrap_or("").trim().parse().map_err(bad)?;
        out.push((id, c));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    fn two_triangles() -> Graph {
        graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    }

    #[test]
    fn one_community_has_zero_modularity() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let q = modularity_of(&g, &[0, 0, 0, 0], 1.0).unwrap();
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn edgeless_modularity_undefined() {
        let g = graph(3, &[]);
        assert!(matches!(
            modularity_of(&g, &[0, 1, 2], 1.0),
            Err(Error::ModularityUndefined)
        ));
    }

    #[test]
    fn bridged_triangles_closed_form() {
        // m = 7; each side: 3 inner edges, degree 7. Q = 2(3/7 − (7/14)²).
        let g = graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]);
        let q = modularity_of(&g, &[0, 0, 0, 1, 1, 1], 1.0).unwrap();
        let expected = 2.0 * (3.0 / 7.0 - 0.25);
        assert!((q - expected).abs() < 1e-15, "{q} vs {expected}");
    }

    #[test]
    fn singletons_on_regular_graph() {
        // Cycle C_n is 2-regular: Q = −n (2 / 2n)² = −1/n.
        for n in 3..9 {
            let edges: Vec<_> = (0..n).map(|k| (k, (k + 1) % n)).collect();
            let g = graph(n, &edges);
            let q = modularity_of(&g, &(0..n).collect::<Vec<_>>(), 1.0).unwrap();
            assert!((q + 1.0 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_triangles_split() {
        let p = louvain(&two_triangles(), 1.0, 0).unwrap();
        assert_eq!(p.assignment, vec![0, 0, 0, 1, 1, 1]);
        assert!((p.modularity - 0.5).abs() < 1e-15);
    }

    #[test]
    fn deterministic_for_seed() {
        let g = graph(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (2, 6)],
        );
        let a = louvain(&g, 1.0, 42).unwrap();
        let b = louvain(&g, 1.0, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn level_modularity_never_decreases() {
        let g = graph(
            10,
            &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (5, 6), (6, 7), (7, 8), (8, 6), (8, 9), (9, 0)],
        );
        for seed in 0..20 {
            let p = louvain(&g, 1.0, seed).unwrap();
            for w in p.level_modularity.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{:?}", p.level_modularity);
            }
        }
    }

    #[test]
    fn gamma_must_be_positive() {
        assert!(louvain(&two_triangles(), 0.0, 0).is_err());
    }

    #[test]
    fn communities_csv_round_trip() {
        let p = louvain(&two_triangles(), 1.0, 0).unwrap();
        let mut buf = Vec::new();
        write_communities_csv(&p, &mut buf).unwrap();
        let rows = read_communities_csv(buf.as_slice()).unwrap();
        assert_eq!(rows[4], (4, 1));
        assert!(String::from_utf8(buf).unwrap().starts_with("node_id,community\n0,0\n"));
    }
}
