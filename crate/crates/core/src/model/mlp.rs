//! Dense ReLU network with exact mean-squared-error backpropagation.

use rand::Rng;

use crate::error::{Error, Result};

/// Feed-forward network: affine + ReLU on hidden layers, affine output.
///
/// Weights are stored per layer in row-major `(out, in)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Gradient of the loss with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(m: &Mlp) -> Self {
        Gradients {
            weights: m.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: m.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn clear(&mut self) {
        self.weights.iter_mut().flatten().for_each(|g| *g = 0.0);
        self.biases.iter_mut().flatten().for_each(|g| *g = 0.0);
    }

    /// Flattened in [`Mlp::params`] order.
    pub fn flat(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }
}

/// Per-sample activation buffers reused across backprop calls.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    // activations[0] is the input, activations[l + 1] the output of layer l
    activations: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next_delta: Vec<f64>,
}

impl Mlp {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidDataset(format!(
                "invalid layer sizes {layer_sizes:?}"
            )));
        }
        let weights = layer_sizes
            .windows(2)
            .map(|w| vec![0.0; w[0] * w[1]])
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(layer_sizes)?;
        for (l, w) in m.weights.iter_mut().enumerate() {
            let limit = (6.0 / (layer_sizes[l] + layer_sizes[l + 1]) as f64).sqrt();
            for v in w.iter_mut() {
                *v = rng.random_range(-limit..limit);
            }
        }
        Ok(m)
    }

    pub fn from_parts(
        layer_sizes: &[usize],
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let shape = Self::zeros(layer_sizes)?;
        if weights.len() != shape.weights.len() || biases.len() != shape.biases.len() {
            return Err(Error::Shape {
                expected: shape.weights.len(),
                got: weights.len(),
            });
        }
        for (got, want) in weights.iter().zip(&shape.weights) {
            if got.len() != want.len() {
                return Err(Error::Shape {
                    expected: want.len(),
                    got: got.len(),
                });
            }
        }
        for (got, want) in biases.iter().zip(&shape.biases) {
            if got.len() != want.len() {
                return Err(Error::Shape {
                    expected: want.len(),
                    got: got.len(),
                });
            }
        }
        let m = Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        };
        if !m.params().all(f64::is_finite) {
            return Err(Error::InvalidDataset("non-finite network parameter".into()));
        }
        Ok(m)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        &self.weights[layer]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        &self.biases[layer]
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// All parameters, layer by layer: weights (row-major) then biases.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()))
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut scratch = self.scratch();
        self.forward_into(input, &mut scratch);
        Ok(scratch.activations.pop().unwrap())
    }

    pub(crate) fn scratch(&self) -> Scratch {
        Scratch {
            activations: self.layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            delta: Vec::new(),
            next_delta: Vec::new(),
        }
    }

    fn forward_into(&self, input: &[f64], s: &mut Scratch) {
        s.activations[0].copy_from_slice(input);
        let last = self.num_layers() - 1;
        for l in 0..self.num_layers() {
            let (prev, rest) = s.activations.split_at_mut(l + 1);
            let x = &prev[l];
            let out = &mut rest[0];
            let n_in = self.layer_sizes[l];
            for (o, (row, b)) in out
                .iter_mut()
                .zip(self.weights[l].chunks_exact(n_in).zip(&self.biases[l]))
            {
                let z = row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + w * xi);
                *o = if l < last { z.max(0.0) } else { z };
            }
        }
    }

    /// Adds `scale * d(sum of squared errors)/d(params)` for one sample into
    /// `grads` and returns the sample's sum of squared errors.
    pub(crate) fn accumulate(
        &self,
        input: &[f64],
        target: &[f64],
        scale: f64,
        grads: &mut Gradients,
        s: &mut Scratch,
    ) -> f64 {
        self.forward_into(input, s);
        let output = s.activations.last().unwrap();
        s.delta.clear();
        let mut sse = 0.0;
        for (y, t) in output.iter().zip(target) {
            let e = y - t;
            sse += e * e;
            s.delta.push(2.0 * e * scale);
        }
        for l in (0..self.num_layers()).rev() {
            let n_in = self.layer_sizes[l];
            let x = &s.activations[l];
            for (o, &d) in s.delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grads.biases[l][o] += d;
                let g = &mut grads.weights[l][o * n_in..(o + 1) * n_in];
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi += d * xi;
                }
            }
            if l == 0 {
                break;
            }
            // Back through the weights, then through the ReLU of layer l-1.
            s.next_delta.clear();
            s.next_delta.resize(n_in, 0.0);
            for (o, &d) in s.delta.iter().enumerate() {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                for (nd, w) in s.next_delta.iter_mut().zip(row) {
                    *nd += w * d;
                }
            }
            for (nd, a) in s.next_delta.iter_mut().zip(x) {
                if *a <= 0.0 {
                    *nd = 0.0;
                }
            }
            std::mem::swap(&mut s.delta, &mut s.next_delta);
        }
        sse
    }

    pub(crate) fn zero_gradients(&self) -> Gradients {
        Gradients::zeros_like(self)
    }

    fn check_batch(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
        if inputs.len() != targets.len() {
            return Err(Error::Shape {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        for (x, t) in inputs.iter().zip(targets) {
            if x.len() != self.input_dim() {
                return Err(Error::Shape {
                    expected: self.input_dim(),
                    got: x.len(),
                });
            }
            if t.len() != self.output_dim() {
                return Err(Error::Shape {
                    expected: self.output_dim(),
                    got: t.len(),
                });
            }
        }
        Ok(())
    }

    /// Mean squared error over every output of every sample in the batch.
    pub fn mse(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
        self.check_batch(inputs, targets)?;
        if inputs.is_empty() {
            return Ok(0.0);
        }
        let mut s = self.scratch();
        let mut sse = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            self.forward_into(x, &mut s);
            sse += s
                .activations
                .last()
                .unwrap()
                .iter()
                .zip(t)
                .map(|(y, t)| (y - t) * (y - t))
                .sum::<f64>();
        }
        Ok(sse / (inputs.len() * self.output_dim()) as f64)
    }

    /// Loss and exact gradient of [`Mlp::mse`] with respect to every
    /// parameter.
    pub fn gradient(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(f64, Gradients)> {
        self.check_batch(inputs, targets)?;
        let mut grads = self.zero_gradients();
        if inputs.is_empty() {
            return Ok((0.0, grads));
        }
        let scale = 1.0 / (inputs.len() * self.output_dim()) as f64;
        let mut s = self.scratch();
        let mut sse = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            sse += self.accumulate(x, t, scale, &mut grads, &mut s);
        }
        Ok((sse * scale, grads))
    }

    pub(crate) fn gradient_indexed(
        &self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
        batch: &[usize],
        grads: &mut Gradients,
        s: &mut Scratch,
    ) -> f64 {
        grads.clear();
        let scale = 1.0 / (batch.len() * self.output_dim()) as f64;
        let mut sse = 0.0;
        for &i in batch {
            sse += self.accumulate(&inputs[i], &targets[i], scale, grads, s);
        }
        sse * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_zero() {
        let m = Mlp::zeros(&[19, 10, 10, 2]).unwrap();
        assert_eq!(m.forward(&[0.7; 19]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn single_affine_layer() {
        let m = Mlp::from_parts(&[1, 1], vec![vec![2.0]], vec![vec![1.0]]).unwrap();
        assert_eq!(m.forward(&[3.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn identity_network_on_nonnegative_inputs() {
        let eye = vec![1.0, 0.0, 0.0, 1.0];
        let m = Mlp::from_parts(&[2, 2, 2], vec![eye.clone(), eye], vec![vec![0.0; 2]; 2]).unwrap();
        assert_eq!(m.forward(&[0.25, 3.5]).unwrap(), vec![0.25, 3.5]);
        // negative inputs are cut by the hidden ReLU
        assert_eq!(m.forward(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn param_counts() {
        assert_eq!(Mlp::zeros(&[19, 10, 10, 2]).unwrap().param_count(), 332);
        assert_eq!(Mlp::zeros(&[19, 10, 10, 1]).unwrap().param_count(), 321);
        assert_eq!(Mlp::zeros(&[1, 1]).unwrap().param_count(), 2);
        let m = Mlp::zeros(&[19, 10, 10, 2]).unwrap();
        assert_eq!(m.params().count(), m.param_count());
    }

    #[test]
    fn shape_errors() {
        let m = Mlp::zeros(&[3, 2]).unwrap();
        assert!(matches!(
            m.forward(&[1.0]),
            Err(Error::Shape {
                expected: 3,
                got: 1
            })
        ));
        assert!(matches!(
            m.gradient(&[vec![1.0, 2.0, 3.0]], &[vec![1.0]]),
            Err(Error::Shape { .. })
        ));
        assert!(Mlp::zeros(&[3]).is_err());
        assert!(Mlp::from_parts(&[1, 1], vec![vec![1.0, 2.0]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn hand_calculus_gradient() {
        let m = Mlp::from_parts(&[1, 1], vec![vec![1.0]], vec![vec![0.0]]).unwrap();
        let (loss, g) = m.gradient(&[vec![1.0]], &[vec![0.0]]).unwrap();
        assert_eq!(loss, 1.0);
        assert_eq!(g.weights[0][0], 2.0);
        assert_eq!(g.biases[0][0], 2.0);
    }

    #[test]
    fn zero_error_batch_has_zero_gradient() {
        let m = Mlp::from_parts(&[2, 1], vec![vec![0.5, -1.0]], vec![vec![0.1]]).unwrap();
        let x = vec![vec![1.0, 2.0], vec![-3.0, 0.5]];
        let t: Vec<Vec<f64>> = x.iter().map(|x| m.forward(x).unwrap()).collect();
        let (loss, g) = m.gradient(&x, &t).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.flat().iter().all(|&v| v == 0.0));
    }
}
