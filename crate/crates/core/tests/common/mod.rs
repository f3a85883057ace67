//! Generators and independent reference implementations shared by the
//! integration tests. Nothing here calls into the code under test except to
//! construct inputs.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simnerve_core::lens::{LensCoordinates, LensProvenance};
use simnerve_core::{Interaction, InteractionSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| gauss(rng)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
            return normalize(&v);
        }
    }
}

pub fn interaction(id: i64, if_vec: Vec<f64>, then_vec: Vec<f64>) -> Interaction {
    Interaction::new(id, format!("if {id}"), format!("then {id}"), if_vec, then_vec).unwrap()
}

pub fn random_corpus(n: usize, d: usize, seed: u64) -> InteractionSet {
    let mut r = rng(seed);
    let rows = (0..n)
        .map(|k| {
            let i = unit(&mut r, d);
            let t = unit(&mut r, d);
            interaction(k as i64, i, t)
        })
        .collect();
    InteractionSet::new(rows).unwrap()
}

/// Corpus whose then-vector is a noisy copy of the if-vector, so within
/// similarity spreads over roughly `[0, 1]`.
pub fn correlated_corpus(n: usize, d: usize, seed: u64) -> InteractionSet {
    let mut r = rng(seed);
    let rows = (0..n)
        .map(|k| {
            let i = unit(&mut r, d);
            let mix: f64 = r.gen();
            let noise = unit(&mut r, d);
            let t: Vec<f64> = i.iter().zip(&noise).map(|(a, b)| mix * a + (1.0 - mix) * b).collect();
            interaction(k as i64, i, normalize(&t))
        })
        .collect();
    InteractionSet::new(rows).unwrap()
}

pub fn given_lens(set: &InteractionSet, coords: Vec<[f64; 2]>) -> LensCoordinates {
    LensCoordinates::new(set.ids().collect(), coords, LensProvenance::Given("test".into())).unwrap()
}

// ---------------------------------------------------------------------------
// Plain arithmetic oracles.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 1e-24 || syy <= 1e-24 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Naive agglomerative single linkage: repeatedly merge the two clusters
/// with the smallest minimum inter-member distance, ties to the smallest
/// pair of minimum member indices. Returns merge heights in merge order and
/// the cluster labels obtained by keeping merges below `threshold`.
pub fn naive_single_linkage(dist: &[Vec<f64>]) -> Vec<(f64, usize, usize)> {
    let n = dist.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut d = f64::INFINITY;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        d = d.min(dist[i][j]);
                    }
                }
                let key = (clusters[a][0], clusters[b][0]);
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => {
                        let bkey = (clusters[ba][0], clusters[bb][0]);
                        d < bd || (d == bd && key < bkey)
                    }
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        let (d, a, b) = best.unwrap();
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        merges.push((d, a, b));
    }
    merges
}

/// First-gap cut written out from its definition.
pub fn naive_first_gap(heights: &[f64], bins: usize) -> Option<f64> {
    let max = heights.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return None;
    }
    let width = max / bins as f64;
    for k in 0..bins {
        let lo = k as f64 * width;
        let hi = lo + width;
        let occupied = heights.iter().any(|&h| {
            if k == bins - 1 {
                h >= lo
            } else {
                h >= lo && h < hi
            }
        });
        if !occupied {
            return Some(lo);
        }
    }
    None
}

/// Partition from the naive single linkage cut at the first gap: connected
/// components of the graph with edges `dist < threshold` (single linkage at
/// a height is exactly that).
pub fn naive_clusters(dist: &[Vec<f64>], bins: usize) -> Vec<Vec<usize>> {
    let heights: Vec<f64> = naive_single_linkage(dist).iter().map(|m| m.0).collect();
    let n = dist.len();
    let threshold = naive_first_gap(&heights, bins);
    let mut label: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                let joined = threshold.map_or(true, |t| dist[i][j] < t);
                if i != j && joined && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match groups.iter_mut().find(|g| label[g[0]] == label[i]) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Newman modularity from the adjacency matrix definition.
pub fn modularity_dense(n: usize, edges: &[(usize, usize)], labels: &[usize], gamma: f64) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        a[u][v] += 1.0;
        a[v][u] += 1.0;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - gamma * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// All set partitions of `0..n` as restricted-growth label vectors.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            cur.push(c);
            rec(k + 1, n, cur, max.max(c), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0];
    rec(1, n, &mut cur, 0, &mut out);
    out
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Canonical form of a partition for comparison: groups sorted internally
/// and by first element.
pub fn canonical(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
}
