use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::layer::{Layer, LayerSpec};
use crate::tensor::Tensor;

pub const MODEL_FORMAT: &str = "negswitch-network";
pub const MODEL_VERSION: u32 = 1;

/// Intermediate activations of one forward pass: `values[0]` is the input,
/// `values[i + 1]` the output of layer `i`.
#[derive(Clone, Debug)]
pub struct Trace {
    values: Vec<Tensor>,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        self.values.last().expect("trace always holds the input")
    }
}

/// Parameter gradients, one `(weight, bias)` pair per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Tensor, Tensor)>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| {
                    (
                        Tensor::zeros(l.weight.shape().to_vec()),
                        Tensor::zeros(l.bias.shape().to_vec()),
                    )
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in w.data_mut().iter_mut().zip(ow.data()) {
                *x += y;
            }
            for (x, y) in b.data_mut().iter_mut().zip(ob.data()) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (w, b) in self.layers.iter_mut() {
            w.data_mut().iter_mut().for_each(|x| *x *= factor);
            b.data_mut().iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|(w, b)| [w.data(), b.data()])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|x| x.is_finite()))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
}

/// A fixed sequence of layers with explicit reverse-mode gradients.
#[derive(Clone, Debug)]
pub struct Network {
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
    shapes: Vec<Vec<usize>>,
    cache: Option<Trace>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.input_shape == other.input_shape && self.layers == other.layers
    }
}

impl Network {
    /// Builds a network with Glorot-uniform weights drawn from `seed`.
    /// `input_shape` is the per-sample shape, e.g. `[7]` or `[20, 1]`.
    pub fn new(input_shape: Vec<usize>, specs: Vec<LayerSpec>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs.into_iter().map(|s| Layer::init(s, &mut rng)).collect();
        Self::from_layers(input_shape, layers)
    }

    pub fn from_layers(input_shape: Vec<usize>, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(NeuralError::Config("network needs at least one layer".into()));
        }
        if input_shape.is_empty() || input_shape.contains(&0) {
            return Err(NeuralError::Config(format!(
                "invalid input shape {input_shape:?}"
            )));
        }
        let mut shapes = Vec::with_capacity(layers.len());
        let mut current = input_shape.clone();
        for layer in &layers {
            current = layer.spec.output_shape(&current)?;
            let (ws, bs) = layer.spec.param_shapes();
            if layer.weight.shape() != ws.as_slice() || layer.bias.shape() != bs.as_slice() {
                return Err(NeuralError::Shape(format!(
                    "parameters do not match layer {:?}",
                    layer.spec
                )));
            }
            shapes.push(current.clone());
        }
        Ok(Self {
            input_shape,
            layers,
            shapes,
            cache: None,
        })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        self.shapes.last().expect("non-empty")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Flat views of every parameter buffer, in the same order as [`Gradients::slices`].
    pub fn params(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.data(), l.bias.data()])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.data_mut(), l.bias.data_mut()])
            .collect()
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        let ok = match input.shape().split_first() {
            Some((_, sample)) if !sample.is_empty() => {
                sample == self.input_shape.as_slice()
                    || (matches!(self.layers[0].spec, LayerSpec::Dense { .. })
                        && sample.iter().product::<usize>()
                            == self.input_shape.iter().product::<usize>())
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(NeuralError::Shape(format!(
                "input {:?} does not match [batch, {:?}]",
                input.shape(),
                self.input_shape
            )))
        }
    }

    /// Forward pass keeping every intermediate for [`Network::backward_trace`].
    pub fn forward_trace(&self, input: Tensor) -> Result<Trace> {
        self.check_input(&input)?;
        let batch = input.batch();
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        let mut shape = vec![batch];
        shape.extend_from_slice(&self.input_shape);
        values.push(input.reshape(shape)?);
        for (layer, out_shape) in self.layers.iter().zip(&self.shapes) {
            let next = layer.forward(values.last().expect("non-empty"), out_shape);
            values.push(next);
        }
        Ok(Trace { values })
    }

    /// Pure inference.
    pub fn predict(&self, input: Tensor) -> Result<Tensor> {
        Ok(self
            .forward_trace(input)?
            .values
            .pop()
            .expect("non-empty"))
    }

    /// Forward pass that caches intermediates on the network for [`Network::backward`].
    pub fn forward(&mut self, input: Tensor) -> Result<Tensor> {
        let trace = self.forward_trace(input)?;
        let out = trace.output().clone();
        self.cache = Some(trace);
        Ok(out)
    }

    /// Backward pass against the cached forward; see [`Network::backward_trace`].
    pub fn backward(&self, grad_output: &Tensor) -> Result<(Gradients, Tensor)> {
        let trace = self.cache.as_ref().ok_or(NeuralError::NoForwardCache)?;
        self.backward_trace(trace, grad_output)
    }

    /// Reverse-mode gradients of a scalar loss given `dL/d(output)`.
    /// Returns parameter gradients and `dL/d(input)`.
    pub fn backward_trace(&self, trace: &Trace, grad_output: &Tensor) -> Result<(Gradients, Tensor)> {
        if grad_output.len() != trace.output().len() {
            return Err(NeuralError::Shape(format!(
                "output gradient {:?} does not match output {:?}",
                grad_output.shape(),
                trace.output().shape()
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = grad_output.data().to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let (dw, db, dx) = layer.backward(&trace.values[i], &trace.values[i + 1], &upstream);
            grads.push((
                Tensor::new(layer.weight.shape().to_vec(), dw_or_empty(dw, &layer.weight))?,
                Tensor::new(layer.bias.shape().to_vec(), dw_or_empty(db, &layer.bias))?,
            ));
            upstream = dx;
        }
        grads.reverse();
        let input_grad = Tensor::new(trace.values[0].shape().to_vec(), upstream)?;
        Ok((Gradients { layers: grads }, input_grad))
    }

    /// `self ← tau·source + (1 − tau)·self`, elementwise over all parameters.
    pub fn blend_from(&mut self, source: &Network, tau: f64) -> Result<()> {
        if self.layers.len() != source.layers.len() {
            return Err(NeuralError::Shape("blend between different architectures".into()));
        }
        for (dst, src) in self.params_mut().into_iter().zip(source.params()) {
            if dst.len() != src.len() {
                return Err(NeuralError::Shape("blend between different architectures".into()));
            }
            for (d, s) in dst.iter_mut().zip(src) {
                *d = tau * s + (1.0 - tau) * *d;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            input_shape: self.input_shape.clone(),
            layers: self.layers.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(NeuralError::Format(format!("unknown format {:?}", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(NeuralError::Format(format!("unsupported version {}", file.version)));
        }
        Self::from_layers(file.input_shape, file.layers)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn dw_or_empty(grad: Vec<f64>, param: &Tensor) -> Vec<f64> {
    if grad.is_empty() {
        vec![0.0; param.len()]
    } else {
        grad
    }
}
