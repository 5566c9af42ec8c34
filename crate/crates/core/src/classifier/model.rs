use std::path::Path;

use negswitch_neural::{categorical_crossentropy, Activation, Adam, LayerSpec, Network, Tensor};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::seed;

pub const CLASSIFIER_FORMAT: &str = "negswitch-classifier";
pub const CLASSIFIER_VERSION: u32 = 1;
pub const FILTERS: usize = 32;
pub const KERNEL: usize = 5;
pub const DENSE_WIDTH: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            epochs: 35,
            lr: 1e-4,
            batch_size: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    pub network: Network,
    pub class_ids: Vec<String>,
    pub k: usize,
    pub validation_accuracy: f64,
}

#[derive(Serialize, Deserialize)]
struct ClassifierFile {
    format: String,
    version: u32,
    k: usize,
    class_ids: Vec<String>,
    validation_accuracy: f64,
    network: serde_json::Value,
}

/// Stacked valid convolutions need `k ≥ 1 + layers·(kernel − 1)`; shorter
/// windows keep as many layers as fit, at least one with a shrunken kernel.
fn conv_plan(k: usize) -> Vec<usize> {
    let fit = (k - 1) / (KERNEL - 1);
    if fit == 0 {
        vec![k]
    } else {
        vec![KERNEL; fit.min(3)]
    }
}

pub fn classifier_network(k: usize, classes: usize, seed_value: u64) -> Result<Network> {
    let mut specs = Vec::new();
    let mut channels = 1;
    let mut len = k;
    for kernel in conv_plan(k) {
        specs.push(LayerSpec::Conv1d {
            in_channels: channels,
            filters: FILTERS,
            kernel_size: kernel,
            activation: Activation::Relu,
        });
        channels = FILTERS;
        len = len + 1 - kernel;
    }
    specs.push(LayerSpec::Dense {
        inputs: len * channels,
        outputs: DENSE_WIDTH,
        activation: Activation::Relu,
    });
    specs.push(LayerSpec::Dense {
        inputs: DENSE_WIDTH,
        outputs: classes,
        activation: Activation::Softmax,
    });
    Ok(Network::new(vec![k, 1], specs, seed_value)?)
}

fn batch_tensors(samples: &[&Sample], k: usize, classes: usize) -> Result<(Tensor, Tensor)> {
    let mut x = Vec::with_capacity(samples.len() * k);
    let mut y = vec![0.0; samples.len() * classes];
    for (i, s) in samples.iter().enumerate() {
        x.extend_from_slice(&s.window);
        y[i * classes + s.label] = 1.0;
    }
    Ok((
        Tensor::new(vec![samples.len(), k, 1], x)?,
        Tensor::new(vec![samples.len(), classes], y)?,
    ))
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = i;
        }
    }
    best
}

impl ClassifierModel {
    /// Class probabilities for one window of length `k`.
    pub fn classify(&self, window: &[f64]) -> Result<Vec<f64>> {
        if window.len() != self.k {
            return Err(Error::Structural(format!(
                "window length {} does not match k = {}",
                window.len(),
                self.k
            )));
        }
        let out = self.network.predict(Tensor::new(vec![1, self.k, 1], window.to_vec())?)?;
        Ok(out.into_data())
    }

    pub fn predict_labels(&self, samples: &[&Sample]) -> Result<Vec<usize>> {
        let mut labels = Vec::with_capacity(samples.len());
        for chunk in samples.chunks(256) {
            let (x, _) = batch_tensors(chunk, self.k, self.class_ids.len())?;
            let out = self.network.predict(x)?;
            labels.extend((0..chunk.len()).map(|i| argmax(out.sample(i))));
        }
        Ok(labels)
    }

    /// Fraction of `samples` whose argmax matches the label; `None` if empty.
    pub fn accuracy(&self, samples: &[&Sample]) -> Result<Option<f64>> {
        if samples.is_empty() {
            return Ok(None);
        }
        let predicted = self.predict_labels(samples)?;
        let hits = predicted.iter().zip(samples).filter(|(p, s)| **p == s.label).count();
        Ok(Some(hits as f64 / samples.len() as f64))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ClassifierFile {
            format: CLASSIFIER_FORMAT.into(),
            version: CLASSIFIER_VERSION,
            k: self.k,
            class_ids: self.class_ids.clone(),
            validation_accuracy: self.validation_accuracy,
            network: serde_json::from_str(&self.network.to_json()?)?,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ClassifierFile = serde_json::from_str(text)?;
        if file.format != CLASSIFIER_FORMAT || file.version != CLASSIFIER_VERSION {
            return Err(Error::Config(format!(
                "unsupported classifier file {} v{}",
                file.format, file.version
            )));
        }
        let network = Network::from_json(&file.network.to_string())?;
        if network.input_shape() != [file.k, 1] || network.output_shape() != [file.class_ids.len()] {
            return Err(Error::Structural("classifier network does not match its manifest".into()));
        }
        Ok(Self {
            network,
            class_ids: file.class_ids,
            k: file.k,
            validation_accuracy: file.validation_accuracy,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Mini-batch Adam on categorical cross-entropy. Returns the model and
/// per-epoch statistics.
pub fn train_classifier(dataset: &Dataset, config: &ClassifierConfig) -> Result<(ClassifierModel, Vec<EpochStats>)> {
    let classes = dataset.class_count();
    if dataset.train.is_empty() {
        return Err(Error::Dataset("empty training set".into()));
    }
    if config.batch_size == 0 || !(config.lr > 0.0) {
        return Err(Error::Config("batch size and learning rate must be positive".into()));
    }
    let mut model = ClassifierModel {
        network: classifier_network(dataset.k, classes, seed::derive(config.seed, &[1]))?,
        class_ids: dataset.class_ids.clone(),
        k: dataset.k,
        validation_accuracy: 0.0,
    };
    let mut opt = Adam::for_params(&model.network.params(), config.lr);
    let mut rng = seed::rng(seed::derive(config.seed, &[2]));
    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    let validation: Vec<&Sample> = dataset.validation.iter().collect();
    let mut stats = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut hits) = (0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &dataset.train[i]).collect();
            let (x, y) = batch_tensors(&batch, dataset.k, classes)?;
            let trace = model.network.forward_trace(x)?;
            let (loss, grad) = categorical_crossentropy(trace.output(), &y)?;
            if !loss.is_finite() {
                return Err(Error::Divergence(format!("non-finite classifier loss at epoch {epoch}")));
            }
            hits += batch
                .iter()
                .enumerate()
                .filter(|(i, s)| argmax(trace.output().sample(*i)) == s.label)
                .count();
            loss_sum += loss * batch.len() as f64;
            let (grads, _) = model.network.backward_trace(&trace, &grad)?;
            opt.step(model.network.params_mut(), &grads.slices())?;
        }
        let n = dataset.train.len() as f64;
        stats.push(EpochStats {
            epoch,
            train_loss: loss_sum / n,
            train_accuracy: hits as f64 / n,
            validation_accuracy: model.accuracy(&validation)?.unwrap_or(f64::NAN),
        });
    }
    model.validation_accuracy = stats.last().map_or(f64::NAN, |s| s.validation_accuracy);
    Ok((model, stats))
}
