//! Minimal differentiable network core: dense and 1D-convolution layers,
//! activations, losses, exact reverse-mode gradients and Adam.
//!
//! Networks are fixed layer sequences. Tensors are `[batch, ..sample]`,
//! row-major; convolutions take channels-last `[batch, length, channels]`.

mod activation;
mod adam;
mod error;
mod gemm;
mod layer;
mod loss;
mod network;
mod tensor;

pub use activation::{softmax_in_place, Activation};
pub use adam::Adam;
pub use error::{NeuralError, Result};
pub use layer::{Layer, LayerSpec};
pub use loss::{categorical_crossentropy, mse, PROB_CLIP};
pub use network::{Gradients, Network, Trace, MODEL_FORMAT, MODEL_VERSION};
pub use tensor::Tensor;
