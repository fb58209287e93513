//! Small fully connected networks with hand-written backpropagation.
//!
//! Hidden layers use the rectifier. The head is either linear (regression,
//! state values, Q-values) or softmax (a policy over discrete actions).
//! Everything is `f64`.

mod gradcheck;
mod optim;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

pub use gradcheck::{grad_check, grad_check_with, relative_error, FULL_CHECK_LIMIT, RELATIVE_ERROR_FLOOR};
pub use optim::{Optimizer, OptimizerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    Linear,
    Softmax,
}

/// Dense layer with row-major `outputs × inputs` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: alloc::vec![0.0; inputs * outputs],
            biases: alloc::vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.biases) {
            let mut acc = *b;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out.push(acc);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    head: Head,
    seed: u64,
    layers: Vec<Dense>,
    /// Bumped on every parameter update; caches remember the value they saw.
    #[serde(skip)]
    version: u64,
}

/// Activations recorded by a forward pass, needed by `backward`.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    version: u64,
    /// `layer_inputs[l]` is the input of layer `l` (rectified for `l > 0`).
    layer_inputs: Vec<Vec<f64>>,
    logits: Vec<f64>,
    output: Vec<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// Pre-head values of the last layer (equal to `output` for linear heads).
    pub fn logits(&self) -> &[f64] {
        &self.logits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Parameter gradients, shaped like the network that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseGrad>,
}

impl Gradients {
    pub fn zero(&mut self) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|g| *g = 0.0);
            l.biases.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.values_mut() {
            *v *= factor;
        }
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|g| g.is_finite())
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.values().map(|g| g * g).sum())
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Mlp {
    /// Creates a network with He-uniform hidden layers and zero biases.
    ///
    /// Hidden weights are drawn from `U(-a, a)` with `a = sqrt(6 / fan_in)`.
    /// The output layer uses `a = sqrt(3 / fan_in)`, scaled by 0.01 for a
    /// softmax head so a fresh policy starts close to uniform.
    pub fn new(sizes: &[usize], head: Head, seed: u64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::validation("a network needs at least an input and an output size"));
        }
        if sizes.contains(&0) {
            return Err(Error::validation("layer sizes must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|l| {
                let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
                let mut layer = Dense::zeros(fan_in, fan_out);
                let bound = if l + 1 < n {
                    math::sqrt(6.0 / fan_in as f64)
                } else {
                    let s = if head == Head::Softmax { 0.01 } else { 1.0 };
                    s * math::sqrt(3.0 / fan_in as f64)
                };
                for w in &mut layer.weights {
                    *w = rng.gen_range(-bound..bound);
                }
                layer
            })
            .collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            head,
            seed,
            layers,
            version: 0,
        })
    }

    /// Assembles a network from explicit layers (used by model loaders).
    pub fn from_layers(head: Head, seed: u64, layers: Vec<Dense>) -> Result<Self> {
        let first = layers.first().ok_or_else(|| Error::validation("no layers"))?;
        let mut sizes = alloc::vec![first.inputs];
        for (i, l) in layers.iter().enumerate() {
            if l.inputs != *sizes.last().expect("non-empty") {
                return Err(Error::validation(alloc::format!("layer {i} input size mismatch")));
            }
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs || l.outputs == 0 {
                return Err(Error::validation(alloc::format!("layer {i} parameter shape mismatch")));
            }
            sizes.push(l.outputs);
        }
        Ok(Self {
            sizes,
            head,
            seed,
            layers,
            version: 0,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    /// Mutable parameter access. Invalidates outstanding caches.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.version += 1;
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }

    fn locate(&self, mut i: usize) -> Option<(usize, bool, usize)> {
        for (l, layer) in self.layers.iter().enumerate() {
            if i < layer.weights.len() {
                return Some((l, false, i));
            }
            i -= layer.weights.len();
            if i < layer.biases.len() {
                return Some((l, true, i));
            }
            i -= layer.biases.len();
        }
        None
    }

    /// Parameter `i` in [`Mlp::params`] order.
    pub fn param(&self, i: usize) -> Option<f64> {
        let (l, bias, j) = self.locate(i)?;
        let layer = &self.layers[l];
        Some(if bias { layer.biases[j] } else { layer.weights[j] })
    }

    pub fn set_param(&mut self, i: usize, value: f64) -> Result<()> {
        let (l, bias, j) = self
            .locate(i)
            .ok_or_else(|| Error::validation("parameter index out of range"))?;
        let layer = &mut self.layers[l];
        if bias {
            layer.biases[j] = value;
        } else {
            layer.weights[j] = value;
        }
        self.version += 1;
        Ok(())
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| DenseGrad {
                    weights: alloc::vec![0.0; l.weights.len()],
                    biases: alloc::vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    /// Copies parameters from `other` (same architecture) into `self`.
    pub fn copy_params_from(&mut self, other: &Mlp) -> Result<()> {
        if self.sizes != other.sizes {
            return Err(Error::validation("cannot copy parameters between different architectures"));
        }
        self.layers.clone_from(&other.layers);
        self.version += 1;
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardCache> {
        let mut cache = ForwardCache::default();
        self.forward_into(x, &mut cache)?;
        Ok(cache)
    }

    /// Forward pass reusing the buffers in `cache`.
    pub fn forward_into(&self, x: &[f64], cache: &mut ForwardCache) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::Dimension {
                expected: self.input_len(),
                actual: x.len(),
            });
        }
        let n = self.layers.len();
        cache.layer_inputs.resize_with(n, Vec::new);
        cache.layer_inputs[0].clear();
        cache.layer_inputs[0].extend_from_slice(x);
        for l in 0..n {
            let (inputs, rest) = cache.layer_inputs.split_at_mut(l + 1);
            let out = if l + 1 < n { &mut rest[0] } else { &mut cache.logits };
            self.layers[l].forward(&inputs[l], out);
            if l + 1 < n {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        cache.output.clear();
        match self.head {
            Head::Linear => cache.output.extend_from_slice(&cache.logits),
            Head::Softmax => {
                let lse = math::log_sum_exp(&cache.logits);
                cache.output.extend(cache.logits.iter().map(|&z| math::exp(z - lse)));
            }
        }
        cache.version = self.version;
        Ok(())
    }

    /// Convenience forward returning only the output.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.output)
    }

    /// Accumulates into `grads` the parameter gradient for the given gradient
    /// with respect to the network output.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &[f64], grads: &mut Gradients) -> Result<()> {
        if grad_output.len() != self.output_len() {
            return Err(Error::Dimension {
                expected: self.output_len(),
                actual: grad_output.len(),
            });
        }
        match self.head {
            Head::Linear => self.backward_logits(cache, grad_output, grads),
            Head::Softmax => {
                let p = &cache.output;
                let dot: f64 = grad_output.iter().zip(p).map(|(g, p)| g * p).sum();
                let grad_logits: Vec<f64> = grad_output.iter().zip(p).map(|(g, p)| p * (g - dot)).collect();
                self.backward_logits(cache, &grad_logits, grads)
            }
        }
    }

    /// Like [`Mlp::backward`] but takes the gradient with respect to the
    /// pre-head values (logits) directly.
    pub fn backward_logits(&self, cache: &ForwardCache, grad_logits: &[f64], grads: &mut Gradients) -> Result<()> {
        if cache.version != self.version || cache.layer_inputs.len() != self.layers.len() {
            return Err(Error::Contract(
                "forward cache does not belong to the current parameters".into(),
            ));
        }
        if grad_logits.len() != self.output_len() {
            return Err(Error::Dimension {
                expected: self.output_len(),
                actual: grad_logits.len(),
            });
        }
        if grads.layers.len() != self.layers.len() {
            return Err(Error::validation("gradient buffer shape does not match the network"));
        }
        let mut delta: Vec<f64> = grad_logits.to_vec();
        let mut prev = Vec::new();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &cache.layer_inputs[l];
            let g = &mut grads.layers[l];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, &xi) in row.iter_mut().zip(input) {
                    *gw += d * xi;
                }
            }
            if l > 0 {
                prev.clear();
                prev.resize(layer.inputs, 0.0);
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
                for (p, &a) in prev.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                core::mem::swap(&mut delta, &mut prev);
            }
        }
        Ok(())
    }
}

/// Log-probabilities from logits.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let lse = math::log_sum_exp(logits);
    logits.iter().map(|&z| z - lse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn same_seed_same_parameters_and_zero_biases() {
        let a = Mlp::new(&[40, 64, 64, 1], Head::Linear, 7).unwrap();
        let b = Mlp::new(&[40, 64, 64, 1], Head::Linear, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.layers().iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        let c = Mlp::new(&[40, 64, 64, 1], Head::Linear, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn parameter_count_for_surrogate_shape() {
        let m = Mlp::new(&[40, 64, 64, 1], Head::Linear, 0).unwrap();
        assert_eq!(m.parameter_count(), 40 * 64 + 64 + 64 * 64 + 64 + 64 + 1);
        assert_eq!(m.parameter_count(), 6849);
    }

    #[test]
    fn zero_sized_layer_is_rejected() {
        assert!(Mlp::new(&[4, 0, 2], Head::Linear, 0).is_err());
        assert!(Mlp::new(&[4], Head::Linear, 0).is_err());
    }

    fn zeroed(sizes: &[usize], head: Head) -> Mlp {
        let mut m = Mlp::new(sizes, head, 1).unwrap();
        m.params_mut().for_each(|p| *p = 0.0);
        m
    }

    #[test]
    fn zero_weights_give_zero_or_uniform_output() {
        let lin = zeroed(&[3, 8, 1], Head::Linear);
        assert_eq!(lin.predict(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0]);
        let sm = zeroed(&[3, 8, 32], Head::Softmax);
        let p = sm.predict(&[1.0, -2.0, 0.5]).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 32.0).abs() < 1e-15));
    }

    #[test]
    fn softmax_sums_to_one() {
        let m = Mlp::new(&[5, 16, 32], Head::Softmax, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p = m.predict(&x).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn forward_is_bit_identical_on_repeat() {
        let m = Mlp::new(&[5, 16, 3], Head::Linear, 3).unwrap();
        let x = [0.3, -0.1, 2.0, 0.0, 1.0];
        assert_eq!(m.predict(&x).unwrap(), m.predict(&x).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = Mlp::new(&[5, 3], Head::Linear, 3).unwrap();
        assert!(matches!(m.forward(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn single_linear_layer_gradient_is_outer_product() {
        let m = Mlp::new(&[3, 2], Head::Linear, 5).unwrap();
        let x = [1.0, 2.0, -1.0];
        let g = [0.5, -2.0];
        let cache = m.forward(&x).unwrap();
        let mut grads = m.zero_gradients();
        m.backward(&cache, &g, &mut grads).unwrap();
        for o in 0..2 {
            for i in 0..3 {
                assert_eq!(grads.layers[0].weights[o * 3 + i], g[o] * x[i]);
            }
            assert_eq!(grads.layers[0].biases[o], g[o]);
        }
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let m = Mlp::new(&[4, 8, 8, 3], Head::Softmax, 5).unwrap();
        let cache = m.forward(&[1.0, 0.0, -1.0, 2.0]).unwrap();
        let mut grads = m.zero_gradients();
        m.backward(&cache, &[0.0; 3], &mut grads).unwrap();
        assert!(grads.values().all(|&g| g == 0.0));
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut m = Mlp::new(&[2, 4, 1], Head::Linear, 5).unwrap();
        let cache = m.forward(&[1.0, 1.0]).unwrap();
        let mut grads = m.zero_gradients();
        let mut opt = Optimizer::sgd(0.1).unwrap();
        m.backward(&cache, &[1.0], &mut grads).unwrap();
        opt.step(&mut m, &grads).unwrap();
        assert!(matches!(m.backward(&cache, &[1.0], &mut grads), Err(Error::Contract(_))));
    }
}
