//! Fully connected feed-forward networks over a flat parameter vector.
//!
//! Parameter layout is layer-major: for each layer (hidden layers first, then
//! the output layer), for each neuron in that layer, the neuron's incoming
//! weights in input order followed by its bias. A width-10 network with one
//! hidden layer on two inputs therefore stores
//! `[w(h0,x0), w(h0,x1), b(h0), w(h1,x0), ..., b(h9), w(o,h0), ..., w(o,h9), b(o)]`.
//!
//! Hidden layers share one activation; the output layer is linear.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    ReLU,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::ReLU => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output. ReLU at 0 gives 0.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::ReLU => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "Tanh",
            Activation::ReLU => "ReLU",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub activation: Activation,
    pub output_dim: usize,
}

/// The six canonical topologies: activation x {1, 3, 5} hidden layers of width 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Topology {
    Tanh1,
    Tanh3,
    Tanh5,
    ReLU1,
    ReLU3,
    ReLU5,
}

impl Topology {
    pub const ALL: [Topology; 6] = [
        Topology::Tanh1,
        Topology::Tanh3,
        Topology::Tanh5,
        Topology::ReLU1,
        Topology::ReLU3,
        Topology::ReLU5,
    ];

    pub fn architecture(self) -> Architecture {
        let (activation, layers) = match self {
            Topology::Tanh1 => (Activation::Tanh, 1),
            Topology::Tanh3 => (Activation::Tanh, 3),
            Topology::Tanh5 => (Activation::Tanh, 5),
            Topology::ReLU1 => (Activation::ReLU, 1),
            Topology::ReLU3 => (Activation::ReLU, 3),
            Topology::ReLU5 => (Activation::ReLU, 5),
        };
        Architecture::new(2, layers, 10, activation)
    }

    pub fn name(self) -> &'static str {
        match self {
            Topology::Tanh1 => "Tanh1",
            Topology::Tanh3 => "Tanh3",
            Topology::Tanh5 => "Tanh5",
            Topology::ReLU1 => "ReLU1",
            Topology::ReLU3 => "ReLU3",
            Topology::ReLU5 => "ReLU5",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Topology::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTopology(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Every entry i.i.d. N(0, 1).
    NormalUnit,
    /// Per layer, uniform in +-1/sqrt(fan_in), biases included.
    FanInUniform,
}

impl Architecture {
    pub fn new(input_dim: usize, hidden_layers: usize, hidden_width: usize, activation: Activation) -> Self {
        Architecture {
            input_dim,
            hidden_layers,
            hidden_width,
            activation,
            output_dim: 1,
        }
    }

    /// `Tanh1`-style name for canonical shapes, `Tanh2x16`-style otherwise.
    pub fn name(&self) -> String {
        if let Some(t) = self.topology() {
            return t.name().to_string();
        }
        format!("{}{}x{}", self.activation, self.hidden_layers, self.hidden_width)
    }

    pub fn topology(&self) -> Option<Topology> {
        Topology::ALL.into_iter().find(|t| t.architecture() == *self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_layers == 0 || self.hidden_width == 0 || self.output_dim == 0 {
            return Err(Error::InvalidConfig(format!("degenerate architecture {self:?}")));
        }
        Ok(())
    }

    /// Layer widths from input to output.
    fn widths(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.input_dim)
            .chain(std::iter::repeat_n(self.hidden_width, self.hidden_layers))
            .chain(std::iter::once(self.output_dim))
    }

    /// `(fan_in, fan_out)` per weight layer.
    fn layers(&self) -> Vec<(usize, usize)> {
        let w: Vec<usize> = self.widths().collect();
        w.windows(2).map(|p| (p[0], p[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|&(i, o)| (i + 1) * o).sum()
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        let expected = self.param_count();
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: params.len(),
            });
        }
        Ok(())
    }

    fn check_batch(&self, params: &[f64], inputs: &[f64], targets: &[f64]) -> Result<()> {
        self.check_len(params)?;
        if targets.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if self.output_dim != 1 {
            return Err(Error::InvalidConfig("batch MSE needs a single output".into()));
        }
        if inputs.len() != targets.len() * self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: targets.len() * self.input_dim,
                actual: inputs.len(),
            });
        }
        Ok(())
    }

    /// Runs one sample through the network, leaving every layer's output in
    /// `acts` (`acts[0]` is the input).
    fn forward_into(&self, layers: &[(usize, usize)], params: &[f64], input: &[f64], acts: &mut [Vec<f64>]) {
        acts[0].copy_from_slice(input);
        let last = layers.len() - 1;
        let mut offset = 0;
        for (l, &(fan_in, fan_out)) in layers.iter().enumerate() {
            let (prev, next) = acts.split_at_mut(l + 1);
            let x = &prev[l];
            let out = &mut next[0];
            for (j, o) in out.iter_mut().enumerate() {
                let row = &params[offset + j * (fan_in + 1)..offset + (j + 1) * (fan_in + 1)];
                let z = row[..fan_in].iter().zip(x.iter()).map(|(w, v)| w * v).sum::<f64>() + row[fan_in];
                *o = if l == last { z } else { self.activation.apply(z) };
            }
            offset += fan_out * (fan_in + 1);
        }
    }

    fn buffers(&self) -> Vec<Vec<f64>> {
        self.widths().map(|w| vec![0.0; w]).collect()
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> Result<f64> {
        self.check_len(params)?;
        if input.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: input.len(),
            });
        }
        let mut acts = self.buffers();
        self.forward_into(&self.layers(), params, input, &mut acts);
        Ok(acts.last().expect("output layer")[0])
    }

    /// Mean squared error over a batch. `inputs` is row-major, `input_dim`
    /// values per sample.
    pub fn batch_mse(&self, params: &[f64], inputs: &[f64], targets: &[f64]) -> Result<f64> {
        self.check_batch(params, inputs, targets)?;
        let layers = self.layers();
        let mut acts = self.buffers();
        let mut sum = 0.0;
        for (x, t) in inputs.chunks_exact(self.input_dim).zip(targets) {
            self.forward_into(&layers, params, x, &mut acts);
            let e = acts.last().expect("output layer")[0] - t;
            sum += e * e;
        }
        Ok(sum / targets.len() as f64)
    }

    /// Batch MSE and its exact gradient with respect to `params`, by
    /// reverse-mode accumulation over the batch.
    pub fn mse_value_and_gradient(
        &self,
        params: &[f64],
        inputs: &[f64],
        targets: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        self.check_batch(params, inputs, targets)?;
        let layers = self.layers();
        let offsets: Vec<usize> = layers
            .iter()
            .scan(0, |acc, &(i, o)| {
                let start = *acc;
                *acc += (i + 1) * o;
                Some(start)
            })
            .collect();
        let m = targets.len() as f64;
        let mut grad = vec![0.0; params.len()];
        let mut acts = self.buffers();
        let mut delta: Vec<f64> = Vec::with_capacity(self.hidden_width.max(self.input_dim));
        let mut prev_delta: Vec<f64> = Vec::with_capacity(self.hidden_width.max(self.input_dim));
        let mut sum = 0.0;

        for (x, t) in inputs.chunks_exact(self.input_dim).zip(targets) {
            self.forward_into(&layers, params, x, &mut acts);
            let e = acts.last().expect("output layer")[0] - t;
            sum += e * e;
            delta.clear();
            delta.push(2.0 * e / m);

            for l in (0..layers.len()).rev() {
                let (fan_in, _) = layers[l];
                let input = &acts[l];
                prev_delta.clear();
                prev_delta.resize(fan_in, 0.0);
                for (j, &d) in delta.iter().enumerate() {
                    let start = offsets[l] + j * (fan_in + 1);
                    let g = &mut grad[start..start + fan_in + 1];
                    let w = &params[start..start + fan_in];
                    for k in 0..fan_in {
                        g[k] += d * input[k];
                        prev_delta[k] += d * w[k];
                    }
                    g[fan_in] += d;
                }
                if l > 0 {
                    for (pd, &a) in prev_delta.iter_mut().zip(input.iter()) {
                        *pd *= self.activation.derivative_from_output(a);
                    }
                }
                std::mem::swap(&mut delta, &mut prev_delta);
            }
        }
        Ok((sum / m, grad))
    }

    pub fn mse_gradient(&self, params: &[f64], inputs: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
        self.mse_value_and_gradient(params, inputs, targets).map(|(_, g)| g)
    }

    pub fn init_weights(&self, seed: u64, scheme: InitScheme) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        match scheme {
            InitScheme::NormalUnit => (0..self.param_count())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
            InitScheme::FanInUniform => {
                let mut out = Vec::with_capacity(self.param_count());
                for (fan_in, fan_out) in self.layers() {
                    let bound = 1.0 / (fan_in as f64).sqrt();
                    for _ in 0..fan_out * (fan_in + 1) {
                        out.push(rng.random_range(-bound..=bound));
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tanh1() -> Architecture {
        Topology::Tanh1.architecture()
    }

    #[test]
    fn canonical_param_counts() {
        assert_eq!(Topology::Tanh1.architecture().param_count(), 41);
        assert_eq!(Topology::ReLU3.architecture().param_count(), 261);
        assert_eq!(Topology::Tanh5.architecture().param_count(), 481);
        assert_eq!(Topology::ReLU5.architecture().param_count(), 481);
        // closed form (in+1)w + (L-1)(w+1)w + (w+1)
        let a = Architecture::new(2, 4, 7, Activation::Tanh);
        assert_eq!(a.param_count(), 3 * 7 + 3 * 8 * 7 + 8);
    }

    #[test]
    fn zero_params_give_zero_output() {
        for t in Topology::ALL {
            let a = t.architecture();
            let p = vec![0.0; a.param_count()];
            assert_eq!(a.forward(&p, &[0.3, -0.7]).unwrap(), 0.0);
        }
    }

    #[test]
    fn dead_relu_layer_outputs_bias() {
        let a = Topology::ReLU1.architecture();
        let mut p = vec![0.5; 41];
        for j in 0..10 {
            p[j * 3 + 2] = -100.0;
        }
        p[40] = 0.125;
        assert_eq!(a.forward(&p, &[1.0, 1.0]).unwrap(), 0.125);
    }

    #[test]
    fn hand_computed_tanh1() {
        // weights chosen so the expected value is easy to derive by hand:
        // hidden j has w = (0.1 j, -0.05 j), b = 0.01 j; output w_j = (-1)^j 0.2, b = 0.3
        let a = tanh1();
        let mut p = Vec::new();
        for j in 0..10 {
            let j = j as f64;
            p.extend([0.1 * j, -0.05 * j, 0.01 * j]);
        }
        for j in 0..10 {
            p.push(if j % 2 == 0 { 0.2 } else { -0.2 });
        }
        p.push(0.3);
        let x = [0.5, -0.4];
        let mut expected = 0.3;
        for j in 0..10 {
            let jf = j as f64;
            let z = 0.1 * jf * 0.5 + (-0.05 * jf) * (-0.4) + 0.01 * jf;
            expected += if j % 2 == 0 { 0.2 } else { -0.2 } * z.tanh();
        }
        let got = a.forward(&p, &x).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        // j = 1: z = 0.05 + 0.02 + 0.01 = 0.08
        assert!((expected - 0.3).abs() > 1e-3);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = tanh1();
        assert!(matches!(
            a.forward(&[0.0; 40], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 41, actual: 40 })
        ));
        assert!(matches!(a.batch_mse(&[0.0; 41], &[], &[]), Err(Error::EmptyBatch)));
    }

    #[test]
    fn mse_examples() {
        let a = tanh1();
        let p = vec![0.0; 41];
        let inputs = [0.1, 0.2, -0.3, 0.4, 0.9, -0.9];
        assert_eq!(a.batch_mse(&p, &inputs, &[0.5; 3]).unwrap(), 0.25);

        let q = a.init_weights(4, InitScheme::NormalUnit);
        let targets: Vec<f64> = inputs.chunks(2).map(|x| a.forward(&q, x).unwrap()).collect();
        assert_eq!(a.batch_mse(&q, &inputs, &targets).unwrap(), 0.0);
        let g = a.mse_gradient(&q, &inputs, &targets).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn output_bias_gradient_at_zero() {
        let a = tanh1();
        let p = vec![0.0; 41];
        let inputs = [0.1, 0.2, -0.3, 0.4, 0.9, -0.9, 0.0, 0.5];
        let targets = [0.2, 0.7, 0.1, 0.4];
        let g = a.mse_gradient(&p, &inputs, &targets).unwrap();
        let expect = -(2.0 / 4.0) * targets.iter().sum::<f64>();
        assert!((g[40] - expect).abs() < 1e-15);
    }

    #[test]
    fn init_schemes() {
        let a = Topology::Tanh5.architecture();
        let w = a.init_weights(1, InitScheme::FanInUniform);
        assert_eq!(w.len(), 481);
        assert_eq!(w, a.init_weights(1, InitScheme::FanInUniform));
        // first layer has fan-in 2, deeper layers fan-in 10
        assert!(w[..30].iter().all(|v| v.abs() <= 1.0 / 2f64.sqrt()));
        assert!(w[30..].iter().all(|v| v.abs() <= 1.0 / 10f64.sqrt()));

        let big = Architecture::new(2, 1, 25_000, Activation::Tanh);
        let n = big.init_weights(9, InitScheme::NormalUnit);
        assert!(n.len() >= 100_000);
        let mean = n.iter().sum::<f64>() / n.len() as f64;
        assert!(mean.abs() < 0.02, "{mean}");
    }

    #[test]
    fn topology_names_round_trip() {
        for t in Topology::ALL {
            assert_eq!(t.name().parse::<Topology>().unwrap(), t);
            assert_eq!(t.architecture().name(), t.name());
        }
        assert!("Sigmoid2".parse::<Topology>().is_err());
        assert_eq!(Architecture::new(2, 2, 16, Activation::ReLU).name(), "ReLU2x16");
    }
}
