use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{NeuralError, Result};
use crate::gemm::{gemm, View};
use crate::tensor::Tensor;

/// Layer description. Dense layers flatten whatever per-sample shape they receive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense {
        inputs: usize,
        outputs: usize,
        activation: Activation,
    },
    /// Valid cross-correlation with stride 1 over `[length, channels]` samples.
    Conv1d {
        in_channels: usize,
        filters: usize,
        kernel_size: usize,
        activation: Activation,
    },
    Softmax,
}

impl LayerSpec {
    /// Per-sample output shape for a given per-sample input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match *self {
            LayerSpec::Dense {
                inputs, outputs, ..
            } => {
                let n: usize = input.iter().product();
                if inputs == 0 || outputs == 0 {
                    return Err(NeuralError::Config("dense dimensions must be positive".into()));
                }
                if n != inputs {
                    return Err(NeuralError::Shape(format!(
                        "dense layer expects {inputs} inputs, got shape {input:?}"
                    )));
                }
                Ok(vec![outputs])
            }
            LayerSpec::Conv1d {
                in_channels,
                filters,
                kernel_size,
                ..
            } => {
                if in_channels == 0 || filters == 0 || kernel_size == 0 {
                    return Err(NeuralError::Config("conv dimensions must be positive".into()));
                }
                match input {
                    [len, ch] if *ch == in_channels && *len >= kernel_size => {
                        Ok(vec![len - kernel_size + 1, filters])
                    }
                    _ => Err(NeuralError::Shape(format!(
                        "conv1d expects [length >= {kernel_size}, {in_channels}], got {input:?}"
                    ))),
                }
            }
            LayerSpec::Softmax => {
                if input.is_empty() {
                    return Err(NeuralError::Shape("softmax on scalar samples".into()));
                }
                Ok(input.to_vec())
            }
        }
    }

    pub(crate) fn param_shapes(&self) -> (Vec<usize>, Vec<usize>) {
        match *self {
            LayerSpec::Dense {
                inputs, outputs, ..
            } => (vec![inputs, outputs], vec![outputs]),
            LayerSpec::Conv1d {
                in_channels,
                filters,
                kernel_size,
                ..
            } => (vec![kernel_size, in_channels, filters], vec![filters]),
            LayerSpec::Softmax => (vec![0], vec![0]),
        }
    }

    fn fans(&self) -> (usize, usize) {
        match *self {
            LayerSpec::Dense {
                inputs, outputs, ..
            } => (inputs, outputs),
            LayerSpec::Conv1d {
                in_channels,
                filters,
                kernel_size,
                ..
            } => (kernel_size * in_channels, kernel_size * filters),
            LayerSpec::Softmax => (0, 0),
        }
    }
}

/// A layer with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Layer {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(spec: LayerSpec, rng: &mut R) -> Self {
        let (ws, bs) = spec.param_shapes();
        let (fan_in, fan_out) = spec.fans();
        let mut weight = Tensor::zeros(ws);
        if fan_in + fan_out > 0 {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in weight.data_mut() {
                *w = rng.random_range(-limit..limit);
            }
        }
        Self {
            spec,
            weight,
            bias: Tensor::zeros(bs),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// Forward pass on a batch; `input` is `[batch, ..sample]`, already shape-checked.
    pub(crate) fn forward(&self, input: &Tensor, out_sample: &[usize]) -> Tensor {
        let batch = input.batch();
        let mut shape = vec![batch];
        shape.extend_from_slice(out_sample);
        let mut out = Tensor::zeros(shape);
        match self.spec {
            LayerSpec::Dense {
                inputs,
                outputs,
                activation,
            } => {
                let y = out.data_mut();
                gemm(
                    batch,
                    inputs,
                    outputs,
                    View::row_major(input.data(), inputs),
                    View::row_major(self.weight.data(), outputs),
                    0.0,
                    y,
                );
                for row in y.chunks_mut(outputs) {
                    for (v, b) in row.iter_mut().zip(self.bias.data()) {
                        *v += b;
                    }
                }
                activation.apply(y, outputs);
            }
            LayerSpec::Conv1d {
                in_channels,
                filters,
                kernel_size,
                activation,
            } => {
                let len = input.sample_len() / in_channels;
                let out_len = out_sample[0];
                let cols = kernel_size * in_channels;
                let y = out.data_mut();
                for b in 0..batch {
                    let x = &input.data()[b * len * in_channels..(b + 1) * len * in_channels];
                    // Rows of the implicit im2col matrix overlap in memory: row t starts at t*C.
                    let windows = View {
                        data: x,
                        row_stride: in_channels,
                        col_stride: 1,
                    };
                    let yb = &mut y[b * out_len * filters..(b + 1) * out_len * filters];
                    gemm(
                        out_len,
                        cols,
                        filters,
                        windows,
                        View::row_major(self.weight.data(), filters),
                        0.0,
                        yb,
                    );
                    for row in yb.chunks_mut(filters) {
                        for (v, b) in row.iter_mut().zip(self.bias.data()) {
                            *v += b;
                        }
                    }
                }
                activation.apply(y, filters);
            }
            LayerSpec::Softmax => {
                let width = *out_sample.last().unwrap_or(&1);
                out.data_mut().copy_from_slice(input.data());
                Activation::Softmax.apply(out.data_mut(), width);
            }
        }
        out
    }

    /// Backward pass. Returns `(weight_grad, bias_grad, input_grad)`.
    pub(crate) fn backward(
        &self,
        input: &Tensor,
        output: &Tensor,
        grad_output: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let batch = input.batch();
        let mut dz = grad_output.to_vec();
        let mut dx = vec![0.0; input.len()];
        match self.spec {
            LayerSpec::Dense {
                inputs,
                outputs,
                activation,
            } => {
                activation.backward(output.data(), &mut dz, outputs);
                let mut dw = vec![0.0; inputs * outputs];
                gemm(
                    inputs,
                    batch,
                    outputs,
                    View::transposed(input.data(), inputs),
                    View::row_major(&dz, outputs),
                    0.0,
                    &mut dw,
                );
                let mut db = vec![0.0; outputs];
                for row in dz.chunks(outputs) {
                    for (acc, g) in db.iter_mut().zip(row) {
                        *acc += g;
                    }
                }
                gemm(
                    batch,
                    outputs,
                    inputs,
                    View::row_major(&dz, outputs),
                    View::transposed(self.weight.data(), outputs),
                    0.0,
                    &mut dx,
                );
                (dw, db, dx)
            }
            LayerSpec::Conv1d {
                in_channels,
                filters,
                kernel_size,
                activation,
            } => {
                activation.backward(output.data(), &mut dz, filters);
                let len = input.sample_len() / in_channels;
                let out_len = output.sample_len() / filters;
                let cols = kernel_size * in_channels;
                let mut dw = vec![0.0; cols * filters];
                let mut db = vec![0.0; filters];
                let mut dcols = vec![0.0; out_len * cols];
                for b in 0..batch {
                    let x = &input.data()[b * len * in_channels..(b + 1) * len * in_channels];
                    let dzb = &dz[b * out_len * filters..(b + 1) * out_len * filters];
                    // dW += colsᵀ · dZ
                    gemm(
                        cols,
                        out_len,
                        filters,
                        View {
                            data: x,
                            row_stride: 1,
                            col_stride: in_channels,
                        },
                        View::row_major(dzb, filters),
                        1.0,
                        &mut dw,
                    );
                    for row in dzb.chunks(filters) {
                        for (acc, g) in db.iter_mut().zip(row) {
                            *acc += g;
                        }
                    }
                    // dcols = dZ · Wᵀ, then scatter-add the overlapping windows.
                    gemm(
                        out_len,
                        filters,
                        cols,
                        View::row_major(dzb, filters),
                        View::transposed(self.weight.data(), filters),
                        0.0,
                        &mut dcols,
                    );
                    let dxb = &mut dx[b * len * in_channels..(b + 1) * len * in_channels];
                    for t in 0..out_len {
                        let dst = &mut dxb[t * in_channels..t * in_channels + cols];
                        for (d, s) in dst.iter_mut().zip(&dcols[t * cols..(t + 1) * cols]) {
                            *d += s;
                        }
                    }
                }
                (dw, db, dx)
            }
            LayerSpec::Softmax => {
                let width = *output.shape().last().unwrap_or(&1);
                Activation::Softmax.backward(output.data(), &mut dz, width);
                (Vec::new(), Vec::new(), dz)
            }
        }
    }
}
