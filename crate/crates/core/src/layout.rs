//! Fruchterman–Reingold force-directed placement.
//!
//! Ideal edge length `k = √(area / |V|)`. Every pair repels with `k²/d`, every
//! edge attracts with `d²/k`, and each node moves at most the current
//! temperature, which cools linearly to zero. There is no frame: the layout is
//! only defined up to translation of the initial positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::MapperNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub iterations: usize,
    pub seed: u64,
    pub area: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            iterations: 500,
            seed: 0,
            area: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPositions {
    pub node_ids: Vec<usize>,
    pub positions: Vec<[f64; 2]>,
    pub iterations: usize,
    pub seed: u64,
    pub area: f64,
}

impl LayoutPositions {
    pub fn position_of(&self, node_id: usize) -> Option<[f64; 2]> {
        self.node_ids
            .iter()
            .position(|&id| id == node_id)
            .map(|k| self.positions[k])
    }
}

pub fn fr_layout(network: &MapperNetwork, params: LayoutParams) -> Result<LayoutPositions> {
    let index = network.index();
    let edges: Vec<(usize, usize)> = network
        .edges
        .iter()
        .map(|[u, v]| (index[u], index[v]))
        .collect();
    let initial = initial_positions(network.nodes.len(), params)?;
    let positions = fr_from(&initial, &edges, params)?;
    Ok(LayoutPositions {
        node_ids: network.nodes.iter().map(|n| n.id).collect(),
        positions,
        iterations: params.iterations,
        seed: params.seed,
        area: params.area,
    })
}

/// Uniform positions in `[0, √area)²` from the seeded generator.
pub fn initial_positions(n: usize, params: LayoutParams) -> Result<Vec<[f64; 2]>> {
    check(n, params)?;
    let side = params.area.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok((0..n)
        .map(|_| [rng.gen::<f64>() * side, rng.gen::<f64>() * side])
        .collect())
}

fn check(n: usize, params: LayoutParams) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty("network has no nodes to lay out".into()));
    }
    if params.iterations == 0 {
        return Err(Error::InvalidParameter("layout iterations must be ≥ 1".into()));
    }
    if !(params.area > 0.0) || !params.area.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "layout area must be positive, got {}",
            params.area
        )));
    }
    Ok(())
}

/// Runs the force iterations from explicit starting positions.
pub fn fr_from(
    initial: &[[f64; 2]],
    edges: &[(usize, usize)],
    params: LayoutParams,
) -> Result<Vec<[f64; 2]>> {
    let n = initial.len();
    check(n, params)?;
    let k = (params.area / n as f64).sqrt();
    let k2 = k * k;
    let t0 = params.area.sqrt() / 10.0;
    // Coincident nodes are pushed apart along a fixed direction at this distance.
    let min_d = 1e-9 * k;
    let mut pos = initial.to_vec();
    let mut disp = vec![[0.0f64; 2]; n];

    for iter in 0..params.iterations {
        let temperature = t0 * (1.0 - iter as f64 / params.iterations as f64);
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);

        for u in 0..n {
            for v in u + 1..n {
                let (dir, d) = direction(pos[u], pos[v], u, v, min_d);
                let f = k2 / d;
                disp[u][0] += dir[0] * f;
                disp[u][1] += dir[1] * f;
                disp[v][0] -= dir[0] * f;
                disp[v][1] -= dir[1] * f;
            }
        }
        for &(u, v) in edges {
            if u == v {
                continue;
            }
            let (dir, d) = direction(pos[u], pos[v], u, v, min_d);
            let f = d * d / k;
            disp[u][0] -= dir[0] * f;
            disp[u][1] -= dir[1] * f;
            disp[v][0] += dir[0] * f;
            disp[v][1] += dir[1] * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len > 0.0 && len.is_finite() {
                let step = len.min(temperature) / len;
                p[0] += d[0] * step;
                p[1] += d[1] * step;
            }
        }
    }
    Ok(pos)
}

/// Unit vector from `b` to `a` and their distance, floored at `min_d`.
#[inline]
fn direction(a: [f64; 2], b: [f64; 2], u: usize, v: usize, min_d: f64) -> ([f64; 2], f64) {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let d = (dx * dx + dy * dy).sqrt();
    if d >= min_d {
        return ([dx / d, dy / d], d);
    }
    let angle = ((u * 7919 + v * 104_729) % 360) as f64 * std::f64::consts::PI / 180.0;
    ([angle.cos(), angle.sin()], min_d)
}
