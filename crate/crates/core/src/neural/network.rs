use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Fully connected layer. `weights` is row-major `out_dim × in_dim`; an empty
/// `bias` means the layer has no bias term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation, with_bias: bool) -> Self {
        Dense {
            in_dim,
            out_dim,
            activation,
            weights: vec![0.0; in_dim * out_dim],
            bias: if with_bias {
                vec![0.0; out_dim]
            } else {
                Vec::new()
            },
        }
    }

    /// Weights and bias uniform in `±scale/sqrt(in_dim)`.
    pub fn uniform(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        scale: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let bound = scale / (in_dim.max(1) as f64).sqrt();
        let mut layer = Dense::zeros(in_dim, out_dim, activation, true);
        for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *w = rng.random_range(-bound..=bound);
        }
        layer
    }

    pub fn has_bias(&self) -> bool {
        !self.bias.is_empty()
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut z = if self.has_bias() { self.bias[o] } else { 0.0 };
            for (w, xi) in row.iter().zip(x) {
                z += w * xi;
            }
            out.push(self.activation.apply(z));
        }
    }
}

/// Per-layer parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradients {
    pub fn scale(&mut self, s: f64) {
        for v in self.values_mut() {
            *v *= s;
        }
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn is_zero(&self) -> bool {
        self.values().all(|&v| v == 0.0)
    }
}

/// Activations recorded by [`Network::forward_trace`]; `activations[0]` is
/// the input and `activations[i + 1]` the output of layer `i`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace holds the input")
    }
}

/// Dense feed-forward network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<Dense>,
}

impl Network {
    pub fn new(layers: Vec<Dense>) -> Result<Self, NeuralError> {
        if layers.is_empty() {
            return Err(NeuralError::Empty);
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.in_dim * l.out_dim
                || !(l.bias.is_empty() || l.bias.len() == l.out_dim)
            {
                return Err(NeuralError::Shape(format!("layer {i} parameter count")));
            }
            if i > 0 && layers[i - 1].out_dim != l.in_dim {
                return Err(NeuralError::Shape(format!(
                    "layer {} outputs {} but layer {i} expects {}",
                    i - 1,
                    layers[i - 1].out_dim,
                    l.in_dim
                )));
            }
        }
        let net = Network { layers };
        if net.params().any(|p| !p.is_finite()) {
            return Err(NeuralError::NonFinite);
        }
        Ok(net)
    }

    /// Multi-layer perceptron with uniform fan-in initialization. The output
    /// layer is drawn in `±out_scale/sqrt(fan_in)` so initial outputs start
    /// near zero.
    pub fn mlp(
        in_dim: usize,
        hidden: &[usize],
        out_dim: usize,
        hidden_activation: Activation,
        out_activation: Activation,
        out_scale: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = in_dim;
        for &h in hidden {
            layers.push(Dense::uniform(prev, h, hidden_activation, 1.0, rng));
            prev = h;
        }
        layers.push(Dense::uniform(
            prev,
            out_dim,
            out_activation,
            out_scale,
            rng,
        ));
        Network { layers }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn same_architecture(&self, other: &Network) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.in_dim == b.in_dim
                    && a.out_dim == b.out_dim
                    && a.activation == b.activation
                    && a.bias.len() == b.bias.len()
            })
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NeuralError> {
        if x.len() != self.in_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.in_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<Trace, NeuralError> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for l in &self.layers {
            let mut out = Vec::with_capacity(l.out_dim);
            l.forward_into(activations.last().expect("non-empty"), &mut out);
            activations.push(out);
        }
        Ok(Trace { activations })
    }

    /// Gradients of `upstream · f(x)` with respect to the parameters and the input.
    pub fn backward(
        &self,
        trace: &Trace,
        upstream: &[f64],
    ) -> Result<(Gradients, Vec<f64>), NeuralError> {
        let mut grads = self.zero_gradients();
        let dx = self.accumulate_backward(trace, upstream, &mut grads)?;
        Ok((grads, dx))
    }

    /// Like [`backward`](Self::backward) but adds into `grads`.
    pub fn accumulate_backward(
        &self,
        trace: &Trace,
        upstream: &[f64],
        grads: &mut Gradients,
    ) -> Result<Vec<f64>, NeuralError> {
        if upstream.len() != self.out_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.out_dim(),
                got: upstream.len(),
            });
        }
        if trace.activations.len() != self.layers.len() + 1
            || grads.layers.len() != self.layers.len()
        {
            return Err(NeuralError::Shape(
                "trace or gradient does not match network".into(),
            ));
        }
        let mut delta = upstream.to_vec();
        for (i, l) in self.layers.iter().enumerate().rev() {
            let input = &trace.activations[i];
            let output = &trace.activations[i + 1];
            for (d, &y) in delta.iter_mut().zip(output) {
                *d *= l.activation.derivative(y);
            }
            let g = &mut grads.layers[i];
            let mut dx = vec![0.0; l.in_dim];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = o * l.in_dim;
                let wrow = &l.weights[row..row + l.in_dim];
                let grow = &mut g.weights[row..row + l.in_dim];
                for j in 0..l.in_dim {
                    grow[j] += d * input[j];
                    dx[j] += d * wrow[j];
                }
                if l.has_bias() {
                    g.bias[o] += d;
                }
            }
            delta = dx;
        }
        Ok(delta)
    }

    /// `self ← rho · online + (1 - rho) · self`.
    pub fn soft_update_from(&mut self, online: &Network, rho: f64) -> Result<(), NeuralError> {
        if !self.same_architecture(online) {
            return Err(NeuralError::ArchitectureMismatch);
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(NeuralError::InvalidRate(rho));
        }
        if rho == 1.0 {
            self.layers.clone_from(&online.layers);
            return Ok(());
        }
        for (t, o) in self.params_mut().zip(online.params()) {
            *t = rho * o + (1.0 - rho) * *t;
        }
        Ok(())
    }
}

/// Target update: `target ← rho · online + (1 - rho) · target`.
pub fn soft_update(target: &mut Network, online: &Network, rho: f64) -> Result<(), NeuralError> {
    target.soft_update_from(online, rho)
}

/// Hard copy, `rho = 1`.
pub fn copy_into(target: &mut Network, online: &Network) -> Result<(), NeuralError> {
    target.soft_update_from(online, 1.0)
}
