//! Seeded random inputs for certification sweeps and tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{SkewGraph, WeightVector};
use crate::scalar::rat;

/// Deterministic generator for a given seed; all randomness in the crate
/// and the CLI goes through this.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random skew graph on `n` vertices labeled `"1".."n"` with arc values
/// drawn uniformly from {-1, 0, 1}.
pub fn random_graph(n: usize, rng: &mut impl Rng) -> SkewGraph {
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v: i64 = rng.gen_range(-1..=1);
            if v != 0 {
                arcs.push((labels[i].clone(), labels[j].clone(), rat(v)));
            }
        }
    }
    SkewGraph::new(labels, arcs).expect("sampled arcs are consistent")
}

/// Random weight vector on the vertices of `g` with weights in `1..=max`.
pub fn random_weights(g: &SkewGraph, max: usize, rng: &mut impl Rng) -> WeightVector {
    WeightVector::new(
        g.labels()
            .iter()
            .map(|l| (l.clone(), rng.gen_range(1..=max))),
    )
    .expect("weights are positive")
}

/// `count` points sampled uniformly from the box `[lo, hi]^dim`.
pub fn points_in_box(
    dim: usize,
    count: usize,
    lo: f64,
    hi: f64,
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect()
}
