use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
    /// Row-wise softmax over the last dimension.
    Softmax,
}

impl Activation {
    /// Applies the activation in place. `width` is the size of the last dimension.
    pub(crate) fn apply(self, z: &mut [f64], width: usize) {
        match self {
            Activation::Relu => z.iter_mut().for_each(|x| *x = x.max(0.0)),
            Activation::Tanh => z.iter_mut().for_each(|x| *x = x.tanh()),
            Activation::Linear => {}
            Activation::Softmax => {
                for row in z.chunks_mut(width) {
                    softmax_in_place(row);
                }
            }
        }
    }

    /// Converts `grad` (w.r.t. the activation output `a`) into the gradient
    /// w.r.t. the pre-activation, in place.
    pub(crate) fn backward(self, a: &[f64], grad: &mut [f64], width: usize) {
        match self {
            Activation::Relu => {
                for (g, &y) in grad.iter_mut().zip(a) {
                    if y <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            Activation::Tanh => {
                for (g, &y) in grad.iter_mut().zip(a) {
                    *g *= 1.0 - y * y;
                }
            }
            Activation::Linear => {}
            Activation::Softmax => {
                for (grow, arow) in grad.chunks_mut(width).zip(a.chunks(width)) {
                    let dot: f64 = grow.iter().zip(arow).map(|(g, s)| g * s).sum();
                    for (g, &s) in grow.iter_mut().zip(arow) {
                        *g = s * (*g - dot);
                    }
                }
            }
        }
    }
}

pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}
