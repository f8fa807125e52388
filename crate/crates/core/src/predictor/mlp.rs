//! Dense ReLU network with a softmax head, trained by minibatch SGD on mean
//! cross-entropy.
//!
//! Parameters are `f64`. Each layer stores its weights as an `out x in`
//! matrix, so a batch of row-vector inputs maps through `x * W^T + b`.

use std::io::{Read, Write};

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layer widths used for pass prediction: 180 inputs, two hidden layers and
/// one output per teammate.
pub const PASS_DIMS: [usize; 4] = [180, 350, 250, 11];

pub const MODEL_SCHEMA: &str = "mlp-v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out x in`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    fn apply(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.w.t());
        z += &self.b;
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Dense>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 64,
            epochs: 20,
            seed: 0,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be >= 0".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch_size and epochs must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_accuracy: f64,
}

/// Inputs as rows plus class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Examples {
    pub inputs: Array2<f64>,
    pub labels: Vec<usize>,
}

impl Examples {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn relu_inplace(z: &mut Array2<f64>) {
    z.mapv_inplace(|v| v.max(0.0));
}

/// Row-wise softmax, shifted by the row max.
fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let sum = row.sum();
        row /= sum;
    }
}

fn log_sum_exp(row: ndarray::ArrayView1<f64>) -> f64 {
    let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl MlpModel {
    /// He-normal weights (std `sqrt(2 / fan_in)`), zero biases.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Config(format!("bad layer dims {dims:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|d| {
                let (fan_in, fan_out) = (d[0], d[1]);
                let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt())
                    .expect("positive std");
                let w = Array2::from_shape_simple_fn((fan_out, fan_in), || normal.sample(&mut rng));
                Dense {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("model needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.b.len() != l.out_dim() {
                return Err(Error::DimensionMismatch {
                    expected: l.out_dim(),
                    got: l.b.len(),
                });
            }
            if i > 0 && layers[i - 1].out_dim() != l.in_dim() {
                return Err(Error::DimensionMismatch {
                    expected: layers[i - 1].out_dim(),
                    got: l.in_dim(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].in_dim()];
        d.extend(self.layers.iter().map(Dense::out_dim));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").out_dim()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: cols,
            });
        }
        Ok(())
    }

    /// Output-layer logits for a batch of rows.
    pub fn logits(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(inputs.ncols())?;
        let mut a = inputs.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            a = layer.apply(&a.view());
            if i < last {
                relu_inplace(&mut a);
            }
        }
        Ok(a)
    }

    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut z = self.logits(inputs)?;
        softmax_rows(&mut z);
        Ok(z)
    }

    /// Class probabilities for one input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(self.forward_batch(x)?.row(0).to_vec())
    }

    /// Mean cross-entropy over the batch (plus `l2 / 2 * |W|^2`) and its
    /// gradient for every parameter.
    pub fn loss_and_gradients(
        &self,
        inputs: ArrayView2<f64>,
        labels: &[usize],
        l2: f64,
    ) -> Result<(f64, Gradients)> {
        if labels.is_empty() {
            return Err(Error::EmptyBatch);
        }
        self.check_input(inputs.ncols())?;
        if inputs.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.nrows(),
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.output_dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: bad + 1,
            });
        }
        let n = labels.len() as f64;
        let last = self.layers.len() - 1;

        // Forward, keeping pre-activations and activations.
        let mut acts: Vec<Array2<f64>> = vec![inputs.to_owned()];
        let mut pre: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&acts[i].view());
            if i < last {
                let mut a = z.clone();
                relu_inplace(&mut a);
                pre.push(z);
                acts.push(a);
            } else {
                pre.push(z);
            }
        }

        let logits = &pre[last];
        let mut loss = 0.0;
        for (row, &y) in logits.rows().into_iter().zip(labels) {
            loss += log_sum_exp(row) - row[y];
        }
        loss /= n;

        let mut delta = logits.clone();
        softmax_rows(&mut delta);
        for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
            row[y] -= 1.0;
        }
        delta /= n;

        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let mut dw = delta.t().dot(&acts[i]);
            let db = delta.sum_axis(Axis(0));
            if l2 != 0.0 {
                dw.scaled_add(l2, &layer.w);
            }
            if i > 0 {
                let mut da = delta.dot(&layer.w);
                ndarray::Zip::from(&mut da)
                    .and(&pre[i - 1])
                    .for_each(|d, &z| {
                        if z <= 0.0 {
                            *d = 0.0;
                        }
                    });
                delta = da;
            }
            grads.push((dw, db));
        }
        grads.reverse();
        if l2 != 0.0 {
            let sq: f64 = self.layers.iter().map(|l| l.w.iter().map(|v| v * v).sum::<f64>()).sum();
            loss += 0.5 * l2 * sq;
        }
        Ok((loss, Gradients { layers: grads }))
    }

    fn apply_step(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (dw, db)) in self.layers.iter_mut().zip(&grads.layers) {
            layer.w.scaled_add(-lr, dw);
            layer.b.scaled_add(-lr, db);
        }
    }

    /// Top-1 accuracy; 0 on an empty set.
    pub fn accuracy(&self, data: &Examples) -> Result<f64> {
        if data.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        let chunk = 1024;
        let mut start = 0;
        while start < data.len() {
            let end = (start + chunk).min(data.len());
            let z = self.logits(data.inputs.slice(s![start..end, ..]))?;
            for (row, &y) in z.rows().into_iter().zip(&data.labels[start..end]) {
                if argmax(row.as_slice().expect("standard layout")) == y {
                    correct += 1;
                }
            }
            start = end;
        }
        Ok(correct as f64 / data.len() as f64)
    }

    /// Minibatch SGD. Shuffling is seeded from `config.seed`, so equal
    /// inputs give bit-identical parameters.
    pub fn train(
        mut self,
        train: &Examples,
        test: &Examples,
        config: &TrainConfig,
        mut on_epoch: impl FnMut(&EpochStats),
    ) -> Result<(MlpModel, Vec<EpochStats>)> {
        config.check()?;
        for set in [train, test] {
            if !set.is_empty() {
                self.check_input(set.inputs.ncols())?;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut history = Vec::with_capacity(config.epochs);
        for epoch in 1..=config.epochs {
            order.shuffle(&mut rng);
            let mut loss_sum = 0.0;
            let mut seen = 0usize;
            for batch in order.chunks(config.batch_size) {
                let x = train.inputs.select(Axis(0), batch);
                let y: Vec<usize> = batch.iter().map(|&i| train.labels[i]).collect();
                let (loss, grads) = self.loss_and_gradients(x.view(), &y, config.l2)?;
                loss_sum += loss * batch.len() as f64;
                seen += batch.len();
                if config.learning_rate != 0.0 {
                    self.apply_step(&grads, config.learning_rate);
                }
            }
            let stats = EpochStats {
                epoch,
                train_loss: if seen > 0 { loss_sum / seen as f64 } else { 0.0 },
                test_accuracy: self.accuracy(test)?,
            };
            on_epoch(&stats);
            history.push(stats);
        }
        Ok((self, history))
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        let file = ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            dims: self.dims(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    w: l.w.iter().copied().collect(),
                    b: l.b.to_vec(),
                })
                .collect(),
        };
        serde_json::to_writer(out, &file)?;
        Ok(())
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(input)?;
        if file.schema != MODEL_SCHEMA {
            return Err(Error::Parse(format!("unsupported model schema {}", file.schema)));
        }
        if file.dims.len() != file.layers.len() + 1 {
            return Err(Error::Parse("dims do not match layer count".into()));
        }
        let layers = file
            .layers
            .into_iter()
            .zip(file.dims.windows(2))
            .map(|(l, d)| {
                let w = Array2::from_shape_vec((d[1], d[0]), l.w)
                    .map_err(|e| Error::Parse(format!("weights: {e}")))?;
                Ok(Dense {
                    w,
                    b: Array1::from_vec(l.b),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = Self::from_layers(layers)?;
        if !model.is_finite() {
            return Err(Error::Parse("non-finite model parameters".into()));
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    dims: Vec<usize>,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    w: Vec<f64>,
    b: Vec<f64>,
}
