#![allow(clippy::needless_range_loop)]
use ndarray::Array2;
use newsgraph::gcn::synthetic::{batches, star_chain_dataset};
use newsgraph::gcn::train;
use newsgraph::{AdamState, Checkpoint, GcnConfig, GcnModel, GraphBatch, PooledGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph(rng: &mut ChaCha8Rng, k: usize, dim: usize, label: usize) -> PooledGraph {
    let mut edges = Vec::new();
    for v in 1..k {
        let u = rng.random_range(0..v);
        edges.push((u, v));
    }
    PooledGraph {
        features: Array2::from_shape_simple_fn((k, dim), || rng.random_range(-1.0..1.0)),
        edges,
        label: Some(label),
    }
}

// Dense, loop-by-loop forward pass written from the layer equations.
fn reference_logits(model: &GcnModel, batch: &GraphBatch) -> Vec<Vec<f64>> {
    let n = batch.n_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
    }
    for &(s, d) in &batch.edges {
        a[s][d] = 1.0;
        a[d][s] = 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let mut h: Vec<Vec<f64>> = batch
        .features
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    for layer in &model.params.layers {
        let (din, dout) = layer.weight.dim();
        let mut next = vec![vec![0.0; dout]; n];
        for i in 0..n {
            for o in 0..dout {
                let mut z = layer.bias[o];
                for j in 0..n {
                    if a[i][j] == 0.0 {
                        continue;
                    }
                    let w = a[i][j] / (deg[i].sqrt() * deg[j].sqrt());
                    for k in 0..din {
                        z += w * h[j][k] * layer.weight[[k, o]];
                    }
                }
                next[i][o] = z.max(0.0);
            }
        }
        h = next;
    }
    let c = &model.params.classifier;
    (0..batch.n_graphs())
        .map(|g| {
            let block = batch.block(g);
            let size = block.len() as f64;
            (0..c.weight.ncols())
                .map(|o| {
                    let mut out = c.bias[o];
                    for k in 0..c.weight.nrows() {
                        let mean: f64 = block.clone().map(|i| h[i][k]).sum::<f64>() / size;
                        out += mean * c.weight[[k, o]];
                    }
                    out
                })
                .collect()
        })
        .collect()
}

#[test]
fn forward_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = GcnModel::new(GcnConfig::new(3, 2).with_hidden(5).with_layers(3), 3);
    let batch =
        GraphBatch::from_graphs(&[graph(&mut rng, 4, 3, 0), graph(&mut rng, 3, 3, 1)]).unwrap();
    let got = model.logits(&batch).unwrap();
    let want = reference_logits(&model, &batch);
    for g in 0..2 {
        for c in 0..2 {
            assert!(
                (got[[g, c]] - want[g][c]).abs() < 1e-12,
                "{} vs {}",
                got[[g, c]],
                want[g][c]
            );
        }
    }
}

#[test]
fn zero_model_gives_uniform_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = GcnModel::zeros(GcnConfig::new(2, 5).with_hidden(3).with_layers(2));
    let batch = GraphBatch::from_graphs(&[graph(&mut rng, 3, 2, 4)]).unwrap();
    assert!(model.logits(&batch).unwrap().iter().all(|&v| v == 0.0));
    assert!((model.loss(&batch).unwrap() - 5f64.ln()).abs() < 1e-15);
}

#[test]
fn zero_lr_leaves_parameters() {
    let graphs = star_chain_dataset(8, 3, 1);
    let data = batches(&graphs, 4);
    let mut model = GcnModel::new(GcnConfig::new(3, 2).with_hidden(4).with_layers(2), 1);
    let before = model.clone();
    let lens = model
        .params
        .tensors()
        .iter()
        .map(|t| t.len())
        .collect::<Vec<_>>();
    let log = train(&mut model, &data, 3, &mut AdamState::new(0.0, lens), 1).unwrap();
    assert_eq!(model, before);
    assert!(log.epochs.windows(2).all(|w| w[0].loss == w[1].loss));
}

#[test]
fn training_is_reproducible_and_checkpoints_round_trip() {
    let run = || {
        let data = batches(&star_chain_dataset(32, 4, 7), 8);
        let mut model = GcnModel::new(GcnConfig::new(4, 2).with_hidden(8).with_layers(2), 7);
        let lens = model
            .params
            .tensors()
            .iter()
            .map(|t| t.len())
            .collect::<Vec<_>>();
        let mut adam = AdamState::new(1e-2, lens);
        let log = train(&mut model, &data, 5, &mut adam, 7).unwrap();
        (
            log.to_csv(),
            Checkpoint {
                model,
                classes: vec!["0".into(), "1".into()],
                adam: Some(adam),
            },
        )
    };
    let (log_a, ck_a) = run();
    let (log_b, ck_b) = run();
    assert_eq!(log_a, log_b);
    assert_eq!(ck_a.to_json(), ck_b.to_json());
    assert_eq!(Checkpoint::from_json(&ck_a.to_json()).unwrap(), ck_a);
}

proptest! {
    #[test]
    fn layer_outputs_are_permutation_equivariant(k in 2usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = GcnModel::new(GcnConfig::new(3, 2).with_hidden(4).with_layers(2), seed);
        let g = graph(&mut rng, k, 3, 0);
        let mut p: Vec<usize> = (0..k).collect();
        rand::seq::SliceRandom::shuffle(p.as_mut_slice(), &mut rng);
        let mut features = Array2::zeros((k, 3));
        for i in 0..k {
            features.row_mut(p[i]).assign(&g.features.row(i));
        }
        let permuted = PooledGraph { features, edges: g.edges.iter().map(|&(a, b)| (p[a], p[b])).collect(), label: g.label };
        let (la, ca) = model.forward(&GraphBatch::from_graphs(&[g]).unwrap()).unwrap();
        let (lb, cb) = model.forward(&GraphBatch::from_graphs(&[permuted]).unwrap()).unwrap();
        for (za, zb) in ca.pre_activations.iter().zip(&cb.pre_activations) {
            for i in 0..k {
                for c in 0..za.ncols() {
                    prop_assert!((za[[i, c]] - zb[[p[i], c]]).abs() < 1e-10);
                }
            }
        }
        for (x, y) in la.iter().zip(lb.iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
