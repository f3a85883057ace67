//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simnerve_core::{Interaction, InteractionSet};

fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `n` interactions with independent uniformly-random unit if/then vectors.
pub fn random_corpus(n: usize, d: usize, seed: u64) -> InteractionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|k| {
            let i = unit(&mut rng, d);
            let t = unit(&mut rng, d);
            Interaction::new(k as i64, String::new(), String::new(), i, t)
                .expect("vectors are unit norm")
        })
        .collect();
    InteractionSet::new(rows).expect("ids are distinct")
}

/// Random graph on `n` nodes with edge probability `p`, as weighted edges.
pub fn random_edges(n: usize, p: f64, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    edges
}
