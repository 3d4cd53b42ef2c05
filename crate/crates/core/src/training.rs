//! Fully connected classifier with leaky-ReLU hidden layers, softmax
//! cross-entropy loss, and plain mini-batch SGD.
//!
//! Weight matrices are stored `fan_out x fan_in`, row-major. The flat
//! parameter order is layer by layer, weights then biases, which makes
//! `flatten`/`unflatten` the bridge between a model and an [`UpdateVector`].

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::UpdateVector;
use crate::data::Dataset;
use crate::error::TrainingError;

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLayout {
    pub layer_sizes: Vec<usize>,
    pub leaky_slope: f64,
}

impl ModelLayout {
    pub fn new(layer_sizes: Vec<usize>, leaky_slope: f64) -> Result<Self, TrainingError> {
        if layer_sizes.len() < 2 {
            return Err(TrainingError::LayoutTooShort(layer_sizes.len()));
        }
        if layer_sizes.contains(&0) {
            return Err(TrainingError::ZeroWidthLayer);
        }
        Ok(Self {
            layer_sizes,
            leaky_slope,
        })
    }

    /// `input -> 32 -> 16 -> 8 -> classes`.
    pub fn funnel(input: usize, classes: usize) -> Self {
        Self {
            layer_sizes: vec![input, 32, 16, 8, classes],
            leaky_slope: DEFAULT_LEAKY_SLOPE,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            bias: vec![0.0; fan_out],
        }
    }

    /// `out[r][o] = bias[o] + sum_i input[r][i] * w[o][i]` for `rows` inputs.
    fn apply(&self, input: &[f64], rows: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows * self.fan_out);
        for r in 0..rows {
            let x = &input[r * self.fan_in..(r + 1) * self.fan_in];
            for o in 0..self.fan_out {
                let w = &self.weights[o * self.fan_in..(o + 1) * self.fan_in];
                let mut acc = self.bias[o];
                for (a, b) in w.iter().zip(x) {
                    acc += a * b;
                }
                out.push(acc);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layout: ModelLayout,
    layers: Vec<DenseLayer>,
}

impl ModelParams {
    pub fn zeros(layout: &ModelLayout) -> Self {
        Self {
            layers: layout
                .layer_sizes
                .windows(2)
                .map(|w| DenseLayer::zeros(w[0], w[1]))
                .collect(),
            layout: layout.clone(),
        }
    }

    pub fn layout(&self) -> &ModelLayout {
        &self.layout
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn flatten(&self) -> UpdateVector {
        let mut flat = Vec::with_capacity(self.layout.param_count());
        for layer in &self.layers {
            flat.extend_from_slice(&layer.weights);
            flat.extend_from_slice(&layer.bias);
        }
        UpdateVector::new(flat)
    }

    pub fn unflatten(flat: &UpdateVector, layout: &ModelLayout) -> Result<Self, TrainingError> {
        let expected = layout.param_count();
        let values = flat.as_slice();
        if values.len() != expected {
            return Err(TrainingError::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        let mut params = Self::zeros(layout);
        let mut at = 0;
        for layer in &mut params.layers {
            let w = layer.weights.len();
            layer.weights.copy_from_slice(&values[at..at + w]);
            at += w;
            let b = layer.bias.len();
            layer.bias.copy_from_slice(&values[at..at + b]);
            at += b;
        }
        Ok(params)
    }

    fn axpy(&mut self, scale: f64, other: &ModelParams) {
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            for (a, b) in mine.weights.iter_mut().zip(&theirs.weights) {
                *a += scale * b;
            }
            for (a, b) in mine.bias.iter_mut().zip(&theirs.bias) {
                *a += scale * b;
            }
        }
    }
}

/// Glorot-uniform weights, zero biases.
pub fn init_model<R: Rng + ?Sized>(layout: &ModelLayout, rng: &mut R) -> ModelParams {
    let mut params = ModelParams::zeros(layout);
    for layer in &mut params.layers {
        let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
        for w in &mut layer.weights {
            *w = rng.random_range(-limit..limit);
        }
    }
    params
}

/// Intermediate values of a forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub rows: usize,
    /// Input to each layer: the batch itself, then each hidden activation.
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer; the last one is the logits.
    pub pre_activations: Vec<Vec<f64>>,
}

impl ForwardPass {
    pub fn logits(&self) -> &[f64] {
        self.pre_activations.last().expect("at least one layer")
    }
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

/// Runs `features` (row-major, `rows = features.len() / input_dim`) through
/// the network.
pub fn forward(params: &ModelParams, features: &[f64]) -> Result<ForwardPass, TrainingError> {
    let input_dim = params.layout.input_dim();
    if !features.len().is_multiple_of(input_dim) {
        return Err(TrainingError::InputDimension {
            expected: input_dim,
            found: features.len(),
        });
    }
    let rows = features.len() / input_dim;
    let slope = params.layout.leaky_slope;
    let last = params.layers.len() - 1;

    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut pre_activations = Vec::with_capacity(params.layers.len());
    let mut current = features.to_vec();
    for (l, layer) in params.layers.iter().enumerate() {
        let z = layer.apply(&current, rows);
        let next = if l == last {
            Vec::new()
        } else {
            z.iter().map(|&v| leaky(v, slope)).collect()
        };
        inputs.push(current);
        pre_activations.push(z);
        current = next;
    }
    Ok(ForwardPass {
        rows,
        inputs,
        pre_activations,
    })
}

/// Row-wise softmax, in place, returning each row's `log-sum-exp`.
fn softmax_rows(logits: &mut [f64], classes: usize) -> Vec<f64> {
    logits
        .chunks_mut(classes)
        .map(|row| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            for v in row.iter_mut() {
                *v /= total;
            }
            max + total.ln()
        })
        .collect()
}

fn check_labels(labels: &[usize], classes: usize) -> Result<(), TrainingError> {
    match labels.iter().find(|&&l| l >= classes) {
        Some(&label) => Err(TrainingError::LabelOutOfRange { label, classes }),
        None => Ok(()),
    }
}

/// Mean softmax cross-entropy of a batch.
pub fn mean_cross_entropy(
    params: &ModelParams,
    features: &[f64],
    labels: &[usize],
) -> Result<f64, TrainingError> {
    let classes = params.layout.outputs();
    check_labels(labels, classes)?;
    let pass = forward(params, features)?;
    let mut logits = pass.logits().to_vec();
    let raw = logits.clone();
    let lse = softmax_rows(&mut logits, classes);
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(r, &y)| lse[r] - raw[r * classes + y])
        .sum();
    Ok(total / labels.len() as f64)
}

/// Mean batch loss and its gradient with respect to every parameter.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub loss: f64,
    pub params: ModelParams,
}

pub fn backward(
    params: &ModelParams,
    features: &[f64],
    labels: &[usize],
) -> Result<Gradient, TrainingError> {
    let classes = params.layout.outputs();
    check_labels(labels, classes)?;
    let pass = forward(params, features)?;
    if pass.rows != labels.len() || labels.is_empty() {
        return Err(TrainingError::InputDimension {
            expected: labels.len() * params.layout.input_dim(),
            found: features.len(),
        });
    }
    let rows = pass.rows;
    let inv_rows = 1.0 / rows as f64;
    let slope = params.layout.leaky_slope;

    let mut delta = pass.logits().to_vec();
    let lse = softmax_rows(&mut delta, classes);
    let mut loss = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        loss += lse[r] - pass.logits()[r * classes + y];
        delta[r * classes + y] -= 1.0;
    }
    for d in &mut delta {
        *d *= inv_rows;
    }

    let mut grads = ModelParams::zeros(&params.layout);
    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let input = &pass.inputs[l];
        let g = &mut grads.layers[l];
        for r in 0..rows {
            let x = &input[r * layer.fan_in..(r + 1) * layer.fan_in];
            for o in 0..layer.fan_out {
                let d = delta[r * layer.fan_out + o];
                if d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let gw = &mut g.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
                for (w, xi) in gw.iter_mut().zip(x) {
                    *w += d * xi;
                }
            }
        }
        if l == 0 {
            break;
        }
        let below = &pass.pre_activations[l - 1];
        let mut next = vec![0.0; rows * layer.fan_in];
        for r in 0..rows {
            let out = &mut next[r * layer.fan_in..(r + 1) * layer.fan_in];
            for o in 0..layer.fan_out {
                let d = delta[r * layer.fan_out + o];
                let w = &layer.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
                for (acc, wi) in out.iter_mut().zip(w) {
                    *acc += d * wi;
                }
            }
            for (acc, &z) in out
                .iter_mut()
                .zip(&below[r * layer.fan_in..(r + 1) * layer.fan_in])
            {
                if z <= 0.0 {
                    *acc *= slope;
                }
            }
        }
        delta = next;
    }

    Ok(Gradient {
        loss: loss * inv_rows,
        params: grads,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            local_epochs: 5,
            batch_size: 32,
            learning_rate: 0.01,
        }
    }
}

/// Runs `cfg.local_epochs` epochs of shuffled mini-batch SGD on `params` in
/// place and returns the mean batch loss of each epoch.
pub fn train_epochs<R: Rng + ?Sized>(
    params: &mut ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<f64>, TrainingError> {
    if data.is_empty() {
        return Err(TrainingError::EmptyData);
    }
    if data.dim() != params.layout.input_dim() {
        return Err(TrainingError::InputDimension {
            expected: params.layout.input_dim(),
            found: data.dim(),
        });
    }
    let batch_size = cfg.batch_size.max(1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch_features = Vec::with_capacity(batch_size * data.dim());
    let mut batch_labels = Vec::with_capacity(batch_size);
    let mut history = Vec::with_capacity(cfg.local_epochs);

    for _ in 0..cfg.local_epochs {
        order.shuffle(rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(batch_size) {
            batch_features.clear();
            batch_labels.clear();
            for &i in chunk {
                batch_features.extend_from_slice(data.row(i));
                batch_labels.push(data.labels()[i]);
            }
            let grad = backward(params, &batch_features, &batch_labels)?;
            params.axpy(-cfg.learning_rate, &grad.params);
            epoch_loss += grad.loss;
            batches += 1;
        }
        history.push(epoch_loss / batches as f64);
    }
    Ok(history)
}

/// Local training from the global model; the transmitted update is the
/// full parameter vector after training.
pub fn local_train<R: Rng + ?Sized>(
    global: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<UpdateVector, TrainingError> {
    let mut local = global.clone();
    train_epochs(&mut local, data, cfg, rng)?;
    Ok(local.flatten())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
}

/// Argmax accuracy (ties to the lower class) and mean cross-entropy.
pub fn evaluate(params: &ModelParams, data: &Dataset) -> Result<Evaluation, TrainingError> {
    if data.is_empty() {
        return Err(TrainingError::EmptyData);
    }
    let classes = params.layout.outputs();
    check_labels(data.labels(), classes)?;
    const CHUNK: usize = 1024;
    let mut correct = 0usize;
    let mut loss = 0.0;
    for start in (0..data.len()).step_by(CHUNK) {
        let end = (start + CHUNK).min(data.len());
        let pass = forward(
            params,
            &data.features()[start * data.dim()..end * data.dim()],
        )?;
        let raw = pass.logits();
        let mut probs = raw.to_vec();
        let lse = softmax_rows(&mut probs, classes);
        for (r, row) in raw.chunks(classes).enumerate() {
            let y = data.labels()[start + r];
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            if best == y {
                correct += 1;
            }
            loss += lse[r] - row[y];
        }
    }
    Ok(Evaluation {
        accuracy: correct as f64 / data.len() as f64,
        loss: loss / data.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::rng::stream_from_seed;

    fn layout(sizes: &[usize]) -> ModelLayout {
        ModelLayout::new(sizes.to_vec(), DEFAULT_LEAKY_SLOPE).unwrap()
    }

    #[test]
    fn layout_validation_and_counts() {
        assert!(ModelLayout::new(vec![3], 0.2).is_err());
        assert!(ModelLayout::new(vec![3, 0, 2], 0.2).is_err());
        assert_eq!(layout(&[4, 3, 2]).param_count(), 23);
        assert_eq!(
            ModelLayout::funnel(100, 2).param_count(),
            100 * 32 + 32 + 32 * 16 + 16 + 16 * 8 + 8 + 8 * 2 + 2
        );
    }

    #[test]
    fn init_is_seeded_with_zero_bias() {
        let l = layout(&[4, 3, 2]);
        let a = init_model(&l, &mut stream_from_seed(1));
        let b = init_model(&l, &mut stream_from_seed(1));
        assert_eq!(a, b);
        assert_eq!(a.flatten().len(), 23);
        for layer in a.layers() {
            assert!(layer.bias.iter().all(|&b| b == 0.0));
            let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
            assert!(layer.weights.iter().all(|w| w.abs() <= limit));
        }
    }

    #[test]
    fn flatten_round_trip_and_length_check() {
        let l = layout(&[4, 3, 2]);
        let p = init_model(&l, &mut stream_from_seed(2));
        let flat = p.flatten();
        assert_eq!(ModelParams::unflatten(&flat, &l).unwrap(), p);
        assert_eq!(p.flatten(), flat);
        assert!(matches!(
            ModelParams::unflatten(&UpdateVector::new(vec![0.0; 22]), &l),
            Err(TrainingError::LengthMismatch {
                expected: 23,
                found: 22
            })
        ));
    }

    #[test]
    fn flatten_order_is_layer_major() {
        let l = layout(&[2, 2, 1]);
        let mut p = ModelParams::zeros(&l);
        p.layers_mut()[0].weights = vec![1.0, 2.0, 3.0, 4.0];
        p.layers_mut()[0].bias = vec![5.0, 6.0];
        p.layers_mut()[1].weights = vec![7.0, 8.0];
        p.layers_mut()[1].bias = vec![9.0];
        assert_eq!(
            p.flatten().as_slice(),
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
        );
    }

    #[test]
    fn zero_model_gives_zero_logits() {
        let p = ModelParams::zeros(&layout(&[3, 5, 4]));
        let pass = forward(&p, &[1.0, -2.0, 3.0, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(pass.rows, 2);
        assert!(pass.logits().iter().all(|&v| v == 0.0));
        assert!(forward(&p, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn unit_slope_is_affine() {
        let l = ModelLayout::new(vec![3, 4, 2], 1.0).unwrap();
        let p = init_model(&l, &mut stream_from_seed(3));
        let x = [0.3, -1.2, 2.0];
        let logits = forward(&p, &x).unwrap().logits().to_vec();
        // compose the two affine maps by hand
        let (a, b) = (&p.layers()[0], &p.layers()[1]);
        for o in 0..2 {
            let mut expect = b.bias[o];
            for h in 0..4 {
                let mut hidden = a.bias[h];
                for i in 0..3 {
                    hidden += a.weights[h * 3 + i] * x[i];
                }
                expect += b.weights[o * 4 + h] * hidden;
            }
            assert!((logits[o] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_computed_two_by_two() {
        let mut p = ModelParams::zeros(&layout(&[2, 2, 2]));
        p.layers_mut()[0].weights = vec![1.0, -1.0, 0.5, 2.0];
        p.layers_mut()[0].bias = vec![0.0, -1.0];
        p.layers_mut()[1].weights = vec![1.0, 1.0, -1.0, 3.0];
        p.layers_mut()[1].bias = vec![0.5, 0.0];
        // x = [1, 2]: z1 = [1-2, 0.5+4-1] = [-1, 3.5]; a1 = [-0.2, 3.5]
        // logits = [-0.2+3.5+0.5, 0.2+10.5] = [3.8, 10.7]
        let logits = forward(&p, &[1.0, 2.0]).unwrap().logits().to_vec();
        assert!((logits[0] - 3.8).abs() < 1e-12);
        assert!((logits[1] - 10.7).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let l = layout(&[3, 4, 2]);
        let mut rng = stream_from_seed(4);
        for _ in 0..5 {
            let p = init_model(&l, &mut rng);
            let features: Vec<f64> = (0..6 * 3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let labels: Vec<usize> = (0..6).map(|_| rng.random_range(0..2)).collect();
            let err = oracle::gradient_check(&p, &features, &labels, 1e-5).unwrap();
            assert!(err < 1e-4, "max relative error {err}");
        }
    }

    #[test]
    fn uniform_logits_output_bias_gradient() {
        let p = ModelParams::zeros(&layout(&[2, 3, 2]));
        let g = backward(&p, &[1.0, 2.0, -1.0, 0.5], &[1, 1]).unwrap();
        assert_eq!(g.params.layers()[1].bias, vec![0.5, -0.5]);
        let g = backward(&p, &[1.0, 2.0, -1.0, 0.5], &[0, 1]).unwrap();
        assert_eq!(g.params.layers()[1].bias, vec![0.0, 0.0]);
        assert!((g.loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn duplicated_batch_same_gradient() {
        let l = layout(&[3, 4, 2]);
        let p = init_model(&l, &mut stream_from_seed(5));
        let x = [0.1, 0.2, 0.3, -1.0, 0.0, 1.0];
        let y = [0, 1];
        let once = backward(&p, &x, &y).unwrap().params.flatten();
        let x2: Vec<f64> = x.iter().chain(&x).copied().collect();
        let twice = backward(&p, &x2, &[0, 1, 0, 1]).unwrap().params.flatten();
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    fn separable(seed: u64) -> Dataset {
        crate::data::generate_synthetic(2, 6, 100, 5.0, &mut stream_from_seed(seed)).unwrap()
    }

    #[test]
    fn zero_learning_rate_returns_global() {
        let data = separable(6);
        let g = init_model(&layout(&[6, 8, 2]), &mut stream_from_seed(7));
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert_eq!(
            local_train(&g, &data, &cfg, &mut stream_from_seed(8)).unwrap(),
            g.flatten()
        );
    }

    #[test]
    fn local_training_is_seeded() {
        let data = separable(9);
        let g = init_model(&layout(&[6, 8, 2]), &mut stream_from_seed(10));
        let cfg = TrainConfig::default();
        let a = local_train(&g, &data, &cfg, &mut stream_from_seed(11)).unwrap();
        let b = local_train(&g, &data, &cfg, &mut stream_from_seed(11)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, g.flatten());
    }

    #[test]
    fn loss_trends_down() {
        let data = separable(12);
        let mut p = init_model(&layout(&[6, 16, 8, 2]), &mut stream_from_seed(13));
        let cfg = TrainConfig {
            local_epochs: 20,
            batch_size: 16,
            learning_rate: 0.05,
        };
        let history = train_epochs(&mut p, &data, &cfg, &mut stream_from_seed(14)).unwrap();
        // allow batch noise between neighbours, but the trend must be down
        let first: f64 = history[..5].iter().sum::<f64>() / 5.0;
        let last: f64 = history[15..].iter().sum::<f64>() / 5.0;
        assert!(last < 0.5 * first, "{history:?}");
        for w in history.windows(2) {
            assert!(w[1] < w[0] * 1.25, "{history:?}");
        }
        assert!(evaluate(&p, &data).unwrap().accuracy > 0.95);
    }

    #[test]
    fn evaluate_closed_forms() {
        // zero model: uniform logits, argmax ties go to class 0
        let data = Dataset::new(vec![1.0, -1.0, 2.0, 0.0], vec![0, 1, 0, 1], 1, 2).unwrap();
        let zero = ModelParams::zeros(&layout(&[1, 2]));
        let e = evaluate(&zero, &data).unwrap();
        assert_eq!(e.accuracy, 0.5);
        assert!((e.loss - 2f64.ln()).abs() < 1e-15);

        // single linear layer predicting sign(x): label = (x < 0)
        let mut p = ModelParams::zeros(&layout(&[1, 2]));
        p.layers_mut()[0].weights = vec![1.0, -1.0];
        let data = Dataset::new(vec![2.0, -3.0, 0.5], vec![0, 1, 0], 1, 2).unwrap();
        assert_eq!(evaluate(&p, &data).unwrap().accuracy, 1.0);
    }

    #[test]
    fn untrained_net_is_at_chance_on_random_labels() {
        let mut rng = stream_from_seed(15);
        let n = 10_000;
        let features: Vec<f64> = (0..n * 8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..10)).collect();
        let data = Dataset::new(features, labels, 8, 10).unwrap();
        let p = init_model(&layout(&[8, 16, 10]), &mut rng);
        let acc = evaluate(&p, &data).unwrap().accuracy;
        assert!((acc - 0.1).abs() < 0.03, "accuracy {acc}");
    }
}
