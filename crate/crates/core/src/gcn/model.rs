use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GcnError, NormalizedAdjacency};
use crate::t2g::GraphBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcnConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub n_layers: usize,
    pub n_classes: usize,
}

impl GcnConfig {
    pub const DEFAULT_HIDDEN: usize = 768;
    pub const DEFAULT_LAYERS: usize = 4;

    pub fn new(input_dim: usize, n_classes: usize) -> Self {
        GcnConfig {
            input_dim,
            hidden_dim: Self::DEFAULT_HIDDEN,
            n_layers: Self::DEFAULT_LAYERS,
            n_classes,
        }
    }

    pub fn with_hidden(mut self, hidden_dim: usize) -> Self {
        self.hidden_dim = hidden_dim;
        self
    }

    pub fn with_layers(mut self, n_layers: usize) -> Self {
        self.n_layers = n_layers;
        self
    }

    /// `(fan_in, fan_out)` of each convolution layer, then of the classifier.
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.n_layers + 1);
        let mut d = self.input_dim;
        for _ in 0..self.n_layers {
            dims.push((d, self.hidden_dim));
            d = self.hidden_dim;
        }
        dims.push((d, self.n_classes));
        dims
    }
}

/// Affine map `x·W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense {
            weight: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    /// Uniform in ±sqrt(6 / (fan_in + fan_out)), zero bias.
    fn glorot(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        Dense {
            weight: Array2::from_shape_simple_fn((fan_in, fan_out), || {
                rng.random_range(-limit..limit)
            }),
            bias: Array1::zeros(fan_out),
        }
    }

    fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weight) + &self.bias
    }
}

/// All trainable tensors; also the shape of a gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub layers: Vec<Dense>,
    pub classifier: Dense,
}

impl GcnParams {
    pub fn zeros(config: &GcnConfig) -> Self {
        let mut dense: Vec<Dense> = config
            .shapes()
            .into_iter()
            .map(|(i, o)| Dense::zeros(i, o))
            .collect();
        let classifier = dense.pop().expect("classifier shape");
        GcnParams {
            layers: dense,
            classifier,
        }
    }

    fn all(&self) -> impl Iterator<Item = &Dense> {
        self.layers.iter().chain(std::iter::once(&self.classifier))
    }

    /// Flat views in a fixed order: each layer's weight then bias, classifier last.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.all()
            .flat_map(|d| {
                [
                    d.weight.as_slice().expect("standard layout"),
                    d.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .chain(std::iter::once(&mut self.classifier))
            .flat_map(|d| {
                [
                    d.weight.as_slice_mut().expect("standard layout"),
                    d.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub adjacency: NormalizedAdjacency,
    /// Â·H_l for each layer.
    pub propagated: Vec<Array2<f64>>,
    /// Pre-activations Â·H_l·W_l + b_l.
    pub pre_activations: Vec<Array2<f64>>,
    /// Per-graph mean of the last layer's output.
    pub pooled: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub config: GcnConfig,
    pub params: GcnParams,
}

impl GcnModel {
    pub fn new(config: GcnConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dense: Vec<Dense> = config
            .shapes()
            .into_iter()
            .map(|(i, o)| Dense::glorot(i, o, &mut rng))
            .collect();
        let classifier = dense.pop().expect("classifier shape");
        GcnModel {
            config,
            params: GcnParams {
                layers: dense,
                classifier,
            },
        }
    }

    pub fn zeros(config: GcnConfig) -> Self {
        GcnModel {
            config,
            params: GcnParams::zeros(&config),
        }
    }

    /// Per-graph logits (graphs × classes) and the cache for [`Self::loss_and_grad`].
    pub fn forward(&self, batch: &GraphBatch) -> Result<(Array2<f64>, ForwardCache), GcnError> {
        if batch.features.ncols() != self.config.input_dim {
            return Err(GcnError::DimMismatch {
                expected: self.config.input_dim,
                found: batch.features.ncols(),
            });
        }
        let adjacency = NormalizedAdjacency::new(&batch.edges, batch.n_nodes())?;
        let mut h = batch.features.clone();
        let mut propagated = Vec::with_capacity(self.params.layers.len());
        let mut pre_activations = Vec::with_capacity(self.params.layers.len());
        for layer in &self.params.layers {
            let ah = adjacency.propagate(&h);
            let z = layer.apply(&ah);
            h = z.mapv(|v| v.max(0.0));
            propagated.push(ah);
            pre_activations.push(z);
        }
        let pooled = mean_pool(&h, batch);
        let logits = self.params.classifier.apply(&pooled);
        Ok((
            logits,
            ForwardCache {
                adjacency,
                propagated,
                pre_activations,
                pooled,
            },
        ))
    }

    pub fn logits(&self, batch: &GraphBatch) -> Result<Array2<f64>, GcnError> {
        Ok(self.forward(batch)?.0)
    }

    pub fn predict(&self, batch: &GraphBatch) -> Result<Vec<usize>, GcnError> {
        Ok(argmax_rows(&self.logits(batch)?))
    }

    /// Mean softmax cross-entropy over the batch's graphs and its gradient.
    pub fn loss_and_grad(&self, batch: &GraphBatch) -> Result<(f64, GcnParams), GcnError> {
        let (loss, grads, _) = self.loss_grad_logits(batch)?;
        Ok((loss, grads))
    }

    pub(crate) fn loss_grad_logits(
        &self,
        batch: &GraphBatch,
    ) -> Result<(f64, GcnParams, Array2<f64>), GcnError> {
        let labels = batch.labels.as_ref().ok_or(GcnError::MissingLabels)?;
        if let Some(&bad) = labels.iter().find(|&&y| y >= self.config.n_classes) {
            return Err(GcnError::LabelOutOfRange {
                label: bad,
                n_classes: self.config.n_classes,
            });
        }
        let (logits, cache) = self.forward(batch)?;
        let (loss, dlogits) = softmax_cross_entropy(&logits, labels);

        let mut grads = GcnParams::zeros(&self.config);
        grads.classifier.weight = cache.pooled.t().dot(&dlogits);
        grads.classifier.bias = dlogits.sum_axis(Axis(0));
        let dpooled = dlogits.dot(&self.params.classifier.weight.t());

        // mean pooling: each node receives its graph's gradient / node count
        let mut dh = Array2::zeros((batch.n_nodes(), self.config.hidden_dim_out()));
        for g in 0..batch.n_graphs() {
            let block = batch.block(g);
            let n = block.len() as f64;
            for i in block {
                dh.row_mut(i).assign(&(&dpooled.row(g) / n));
            }
        }

        for l in (0..self.params.layers.len()).rev() {
            let z = &cache.pre_activations[l];
            let dz = &dh * &z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            grads.layers[l].weight = cache.propagated[l].t().dot(&dz);
            grads.layers[l].bias = dz.sum_axis(Axis(0));
            if l > 0 {
                // Â is symmetric, so Âᵀ·X = Â·X
                dh = cache
                    .adjacency
                    .propagate(&dz.dot(&self.params.layers[l].weight.t()));
            }
        }
        Ok((loss, grads, logits))
    }

    /// Mean cross-entropy without gradients.
    pub fn loss(&self, batch: &GraphBatch) -> Result<f64, GcnError> {
        let labels = batch.labels.as_ref().ok_or(GcnError::MissingLabels)?;
        let logits = self.logits(batch)?;
        Ok(softmax_cross_entropy(&logits, labels).0)
    }
}

impl GcnConfig {
    fn hidden_dim_out(&self) -> usize {
        if self.n_layers == 0 {
            self.input_dim
        } else {
            self.hidden_dim
        }
    }
}

fn mean_pool(h: &Array2<f64>, batch: &GraphBatch) -> Array2<f64> {
    let mut pooled = Array2::zeros((batch.n_graphs(), h.ncols()));
    for g in 0..batch.n_graphs() {
        let block = batch.block(g);
        if block.is_empty() {
            continue;
        }
        let n = block.len() as f64;
        let mut acc = pooled.row_mut(g);
        for i in block {
            acc += &h.row(i);
        }
        acc /= n;
    }
    pooled
}

/// Mean loss and d(loss)/d(logits).
fn softmax_cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let g = logits.nrows() as f64;
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    for (r, row) in logits.rows().into_iter().enumerate() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let exps = row.mapv(|v| (v - max).exp());
        let sum = exps.sum();
        let y = labels[r];
        loss += sum.ln() - (row[y] - max);
        let mut grow = grad.row_mut(r);
        grow.assign(&(exps / sum));
        grow[y] -= 1.0;
        grow /= g;
    }
    (loss / g, grad)
}

pub fn argmax_rows(m: &Array2<f64>) -> Vec<usize> {
    m.rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::t2g::PooledGraph;
    use ndarray::array;

    fn graph(features: Array2<f64>, edges: &[(usize, usize)], label: usize) -> PooledGraph {
        PooledGraph {
            features,
            edges: edges.to_vec(),
            label: Some(label),
        }
    }

    #[test]
    fn shapes_chain() {
        let c = GcnConfig::new(5, 3).with_hidden(7);
        assert_eq!(c.shapes(), vec![(5, 7), (7, 7), (7, 7), (7, 7), (7, 3)]);
        let m = GcnModel::new(c, 1);
        assert_eq!(m.params.tensors().len(), 10);
        let limit = (6.0f64 / 12.0).sqrt();
        assert!(m.params.layers[0].weight.iter().all(|w| w.abs() <= limit));
    }

    #[test]
    fn zero_weights_give_zero_logits() {
        let m = GcnModel::zeros(GcnConfig::new(2, 3).with_hidden(4));
        let b = GraphBatch::from_graphs(&[
            graph(array![[1.0, 2.0], [3.0, 4.0]], &[(0, 1)], 0),
            graph(array![[5.0, -1.0]], &[], 1),
        ])
        .unwrap();
        let logits = m.logits(&b).unwrap();
        assert_eq!(logits, Array2::<f64>::zeros((2, 3)));
        let (loss, _) = m.loss_and_grad(&b).unwrap();
        assert!((loss - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn identity_layer_on_single_node() {
        let mut m = GcnModel::zeros(GcnConfig::new(2, 2).with_hidden(2).with_layers(1));
        m.params.layers[0].weight = Array2::eye(2);
        m.params.classifier.weight = array![[1.0, -2.0], [0.5, 3.0]];
        m.params.classifier.bias = array![0.25, -0.25];
        let x = array![[2.0, 4.0]];
        let b = GraphBatch::from_graphs(&[graph(x.clone(), &[], 0)]).unwrap();
        let expected = x.dot(&m.params.classifier.weight) + &m.params.classifier.bias;
        assert_eq!(m.logits(&b).unwrap(), expected);
    }

    #[test]
    fn saturated_logits_drive_loss_to_zero() {
        let mut m = GcnModel::zeros(GcnConfig::new(1, 2).with_hidden(1).with_layers(1));
        m.params.classifier.bias = array![50.0, -50.0];
        let b = GraphBatch::from_graphs(&[graph(array![[1.0]], &[], 0)]).unwrap();
        assert!(m.loss(&b).unwrap() < 1e-40);
    }

    #[test]
    fn errors() {
        let m = GcnModel::zeros(GcnConfig::new(3, 2).with_hidden(2));
        let b = GraphBatch::from_graphs(&[graph(array![[1.0, 2.0]], &[], 0)]).unwrap();
        assert!(matches!(
            m.forward(&b),
            Err(GcnError::DimMismatch {
                expected: 3,
                found: 2
            })
        ));
        let mut unlabeled =
            GraphBatch::from_graphs(&[graph(array![[1.0, 2.0, 3.0]], &[], 0)]).unwrap();
        unlabeled.labels = None;
        assert!(matches!(
            m.loss_and_grad(&unlabeled),
            Err(GcnError::MissingLabels)
        ));
        let bad = GraphBatch::from_graphs(&[graph(array![[1.0, 2.0, 3.0]], &[], 5)]).unwrap();
        assert!(matches!(
            m.loss_and_grad(&bad),
            Err(GcnError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn argmax_first_wins_ties() {
        assert_eq!(
            argmax_rows(&array![[1.0, 3.0, 3.0], [0.0, 0.0, 0.0]]),
            vec![1, 0]
        );
    }
}
