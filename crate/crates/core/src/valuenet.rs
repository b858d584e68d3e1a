//! Dense feed-forward value network with hand-written backpropagation.
//!
//! Hidden layers use ReLU, the output layer is linear (one Q-value per
//! algorithm). Weights are row-major `(outputs, inputs)`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        check_sizes(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut layer = Dense::zeros(fan_in, fan_out);
                for v in &mut layer.weights {
                    *v = rng.random_range(-limit..=limit);
                }
                layer
            })
            .collect();
        Ok(Mlp { layers })
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Mlp {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(ArenaError::Shape("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(ArenaError::Shape(format!("layer {i} buffers do not match its shape")));
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(ArenaError::Shape(format!(
                    "layer {i} expects {} inputs but previous layer has {} outputs",
                    l.inputs,
                    layers[i - 1].outputs
                )));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(ArenaError::Shape(format!("layer {i} has non-finite parameters")));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        sizes
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(ArenaError::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(ArenaError::Shape(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.input_size()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).1.pop().expect("at least one layer"))
    }

    // (pre-activations, activations); activations[0] is the input.
    fn trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = Vec::with_capacity(self.layers.len() + 1);
        act.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(&act[i]);
            let a = if i == last {
                z.clone()
            } else {
                z.iter().map(|v| v.max(0.0)).collect()
            };
            pre.push(z);
            act.push(a);
        }
        (pre, act)
    }

    /// Gradient of `(target - Q(x)[index])^2`; returns the loss too.
    pub fn backward(&self, x: &[f64], index: usize, target: f64) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        if index >= self.output_size() {
            return Err(ArenaError::Shape(format!(
                "output index {index} out of range for {} outputs",
                self.output_size()
            )));
        }
        let (pre, act) = self.trace(x);
        let q = act[act.len() - 1][index];
        let err = q - target;
        let mut grads = Gradients::zeros_like(self);

        let mut delta = vec![0.0; self.output_size()];
        delta[index] = 2.0 * err;
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = &act[i];
            let g = &mut grads.layers[i];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (w, &v) in row.iter_mut().zip(input) {
                    *w += d * v;
                }
            }
            if i > 0 {
                let mut next = vec![0.0; layer.inputs];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (n, &w) in next.iter_mut().zip(row) {
                        *n += d * w;
                    }
                }
                for (n, &z) in next.iter_mut().zip(&pre[i - 1]) {
                    if z <= 0.0 {
                        *n = 0.0;
                    }
                }
                delta = next;
            }
        }
        Ok((err * err, grads))
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(ArenaError::Shape(format!(
            "layer sizes must list at least input and output, all nonzero: {sizes:?}"
        )));
    }
    Ok(())
}

/// Deep copy used to sync the target network.
pub fn copy_params(src: &Mlp) -> Mlp {
    src.clone()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|x| *x *= k);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }
}

/// Adaptive-moment optimizer state with bias correction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        let n = net.param_count();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

pub fn opt_step(net: &mut Mlp, grads: &Gradients, state: &mut Adam) -> Result<()> {
    let g = grads.flat();
    if g.len() != net.param_count() || state.m.len() != g.len() {
        return Err(ArenaError::Shape(format!(
            "gradient/optimizer sizes ({}, {}) do not match {} parameters",
            g.len(),
            state.m.len(),
            net.param_count()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let mut params = net.params();
    for i in 0..params.len() {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    net.set_params(&params)
}

pub const CHECKPOINT_FORMAT: &str = "lc-arena-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpCheckpoint {
    pub format: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub params: Vec<f64>,
}

impl MlpCheckpoint {
    pub fn from_net(net: &Mlp) -> Self {
        MlpCheckpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            layer_sizes: net.layer_sizes(),
            params: net.params(),
        }
    }

    pub fn to_net(&self) -> Result<Mlp> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(ArenaError::Config(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        let mut net = Mlp::zeros(&self.layer_sizes)?;
        net.set_params(&self.params)?;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| ArenaError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ArenaError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
