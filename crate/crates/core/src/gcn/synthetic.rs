use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::t2g::{GraphBatch, PooledGraph};

/// Two-class toy corpus: class 0 graphs are stars, class 1 graphs are chains.
///
/// Graph `i` has class `i % 2` and 4 to 10 nodes. Node features are drawn
/// from N(+0.5, 1) for stars and N(-0.5, 1) for chains, independently per
/// coordinate. Edges are listed in both directions.
pub fn star_chain_dataset(n_graphs: usize, dim: usize, seed: u64) -> Vec<PooledGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists = [
        Normal::new(0.5, 1.0).expect("valid normal"),
        Normal::new(-0.5, 1.0).expect("valid normal"),
    ];
    (0..n_graphs)
        .map(|i| {
            let class = i % 2;
            let k = rng.random_range(4..=10);
            let mut edges = Vec::with_capacity(2 * (k - 1));
            for v in 1..k {
                let u = if class == 0 { 0 } else { v - 1 };
                edges.push((u, v));
                edges.push((v, u));
            }
            let features = Array2::from_shape_simple_fn((k, dim), || dists[class].sample(&mut rng));
            PooledGraph {
                features,
                edges,
                label: Some(class),
            }
        })
        .collect()
}

/// Consecutive chunks of `batch_size` graphs.
pub fn batches(graphs: &[PooledGraph], batch_size: usize) -> Vec<GraphBatch> {
    graphs
        .chunks(batch_size.max(1))
        .map(|c| GraphBatch::from_graphs(c).expect("non-empty chunk with shared dim"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let a = star_chain_dataset(10, 3, 5);
        let b = star_chain_dataset(10, 3, 5);
        assert_eq!(a, b);
        for (i, g) in a.iter().enumerate() {
            let k = g.node_count();
            assert!((4..=10).contains(&k));
            assert_eq!(g.edges.len(), 2 * (k - 1));
            assert_eq!(g.label, Some(i % 2));
            if i % 2 == 0 {
                assert!(g.edges.iter().all(|&(u, v)| u == 0 || v == 0));
            } else {
                assert!(g.edges.iter().all(|&(u, v)| u.abs_diff(v) == 1));
            }
        }
        assert_eq!(batches(&a, 4).len(), 3);
    }
}
