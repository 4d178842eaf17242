//! Feedforward ReLU networks: representation, evaluation, subgradients.
//!
//! A network is a stack of dense layers. Every layer but the last applies
//! ReLU; the last layer is affine (identity activation). Construction
//! normalizes networks whose final layer is declared ReLU by appending an
//! identity output layer, so the rest of the crate can rely on the shape
//! "hidden ReLU layers + one affine output layer".

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("layer {layer}: weight row {row} has {got} entries, expected {expected}")]
    RowWidth { layer: usize, row: usize, got: usize, expected: usize },
    #[error("layer {layer}: {rows} weight rows but {biases} bias entries")]
    BiasLength { layer: usize, rows: usize, biases: usize },
    #[error("layer {layer}: hidden layers must use relu activation")]
    HiddenIdentity { layer: usize },
    #[error("layer {layer} is empty")]
    EmptyLayer { layer: usize },
    #[error("network has no layers")]
    NoLayers,
    #[error("input has {got} entries, expected {expected}")]
    InputDim { got: usize, expected: usize },
    #[error("loss vector has {got} entries, expected {expected}")]
    LossDim { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    /// Affine output, serialized as `"none"`.
    #[serde(rename = "none")]
    Identity,
}

/// One dense layer: `out = act(weights * in + bias)`.
///
/// `weights` is row-major: one row per output neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }

    /// Affine part only: `weights * x + bias`.
    pub fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

/// Identifies a hidden (ReLU) neuron: `layer` is 0-based among hidden
/// layers, `index` is the neuron's position within the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeuronId {
    pub layer: usize,
    pub index: usize,
}

/// Result of a forward pass: final outputs plus the pre-activation value
/// of every hidden neuron (indexed `[layer][neuron]`).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTrace {
    pub outputs: Vec<f64>,
    pub pre_activations: Vec<Vec<f64>>,
}

impl EvalTrace {
    /// Activation status of a hidden neuron under the convention that a
    /// pre-activation of exactly zero counts as inactive.
    pub fn is_active(&self, id: NeuronId) -> bool {
        self.pre_activations[id.layer][id.index] > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl Network {
    /// Validates layer shapes and activation placement. A final ReLU layer
    /// is legal on input and is normalized by appending an identity layer,
    /// so afterwards every hidden layer is ReLU and the last is affine.
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Network, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::NoLayers);
        }
        let mut prev = input_dim;
        let last = layers.len() - 1;
        for (li, layer) in layers.iter().enumerate() {
            if layer.bias.is_empty() {
                return Err(NetworkError::EmptyLayer { layer: li });
            }
            if layer.weights.len() != layer.bias.len() {
                return Err(NetworkError::BiasLength {
                    layer: li,
                    rows: layer.weights.len(),
                    biases: layer.bias.len(),
                });
            }
            for (ri, row) in layer.weights.iter().enumerate() {
                if row.len() != prev {
                    return Err(NetworkError::RowWidth {
                        layer: li,
                        row: ri,
                        got: row.len(),
                        expected: prev,
                    });
                }
            }
            if li < last && layer.activation != Activation::Relu {
                return Err(NetworkError::HiddenIdentity { layer: li });
            }
            prev = layer.out_dim();
        }
        let mut layers = layers;
        if layers[last].activation == Activation::Relu {
            let dim = layers[last].out_dim();
            let eye = (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            layers.push(Layer { weights: eye, bias: vec![0.0; dim], activation: Activation::Identity });
        }
        Ok(Network { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Hidden layers only (everything before the affine output layer).
    pub fn hidden_layers(&self) -> &[Layer] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn output_layer(&self) -> &Layer {
        self.layers.last().expect("validated nonempty")
    }

    /// Total number of hidden (ReLU) neurons.
    pub fn num_hidden(&self) -> usize {
        self.hidden_layers().iter().map(Layer::out_dim).sum()
    }

    /// Hidden neuron ids in (layer, index) order.
    pub fn hidden_neurons(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.hidden_layers()
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| (0..layer.out_dim()).map(move |i| NeuronId { layer: l, index: i }))
    }

    /// Forward pass recording every hidden pre-activation.
    pub fn forward(&self, x: &[f64]) -> Result<EvalTrace, NetworkError> {
        if x.len() != self.input_dim {
            return Err(NetworkError::InputDim { got: x.len(), expected: self.input_dim });
        }
        let mut pre_activations = Vec::with_capacity(self.layers.len() - 1);
        let mut cur = x.to_vec();
        for layer in self.hidden_layers() {
            let pre = layer.affine(&cur);
            cur = pre.iter().map(|&z| z.max(0.0)).collect();
            pre_activations.push(pre);
        }
        let outputs = self.output_layer().affine(&cur);
        Ok(EvalTrace { outputs, pre_activations })
    }

    /// Subgradient of `loss . outputs` with respect to the inputs, where
    /// `loss` is a linear functional over the outputs. At a ReLU kink
    /// (pre-activation exactly zero) the inactive branch is used, matching
    /// the activation convention of [`EvalTrace::is_active`].
    pub fn gradient(&self, x: &[f64], loss: &[f64]) -> Result<Vec<f64>, NetworkError> {
        if loss.len() != self.output_dim() {
            return Err(NetworkError::LossDim { got: loss.len(), expected: self.output_dim() });
        }
        let trace = self.forward(x)?;
        // Backward pass: `grad` holds d(loss)/d(post-activation of layer l).
        let mut grad = loss.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            // Through the activation of layer l (output layer is affine).
            if layer.activation == Activation::Relu {
                for (g, &z) in grad.iter_mut().zip(&trace.pre_activations[l]) {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            // Through the affine map: grad_in = W^T grad_out.
            let in_dim = layer.weights[0].len();
            let mut next = vec![0.0; in_dim];
            for (row, &g) in layer.weights.iter().zip(&grad) {
                if g != 0.0 {
                    for (n, &w) in next.iter_mut().zip(row) {
                        *n += w * g;
                    }
                }
            }
            grad = next;
        }
        Ok(grad)
    }
}


#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Reference forward pass using explicit index loops, kept deliberately
    /// naive so it can arbitrate the iterator-based implementation.
    #[allow(clippy::needless_range_loop)]
    fn forward_naive(net: &Network, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for (li, layer) in net.layers().iter().enumerate() {
            let mut out = vec![0.0; layer.out_dim()];
            for i in 0..layer.out_dim() {
                let mut acc = layer.bias[i];
                for j in 0..cur.len() {
                    acc += layer.weights[i][j] * cur[j];
                }
                out[i] = acc;
            }
            if li + 1 < net.layers().len() {
                for v in &mut out {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            cur = out;
        }
        cur
    }

    /// Central finite differences of `loss . outputs`.
    fn fd_gradient(net: &Network, x: &[f64], loss: &[f64], h: f64) -> Vec<f64> {
        let eval = |x: &[f64]| -> f64 {
            let out = net.forward(x).unwrap().outputs;
            loss.iter().zip(&out).map(|(l, o)| l * o).sum()
        };
        (0..x.len())
            .map(|i| {
                let mut hi = x.to_vec();
                let mut lo = x.to_vec();
                hi[i] += h;
                lo[i] -= h;
                (eval(&hi) - eval(&lo)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn tiny_net_counterexample_point() {
        let net = tiny_net();
        let t = net.forward(&[-1.0, 2.0]).unwrap();
        assert_eq!(t.outputs, vec![-3.5]);
    }

    #[test]
    fn tiny_net_origin_trace() {
        let net = tiny_net();
        let t = net.forward(&[0.0, 0.0]).unwrap();
        assert_eq!(t.pre_activations, vec![vec![1.0, -1.0]]);
        assert!(t.is_active(NeuronId { layer: 0, index: 0 }));
        assert!(!t.is_active(NeuronId { layer: 0, index: 1 }));
        assert_eq!(t.outputs, vec![-2.0]);
    }

    #[test]
    fn gradient_at_origin() {
        let net = tiny_net();
        let g = net.gradient(&[0.0, 0.0], &[1.0]).unwrap();
        assert_eq!(g, vec![0.5, -0.5]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // 100 random points per network; skip points too close to a kink
        // for the finite-difference stencil to be one-sided.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for seed in 0..20 {
            let net = random_net(seed);
            let bx: Vec<_> = (0..net.input_dim()).map(|_| (-2.0, 2.0)).collect();
            let loss: Vec<f64> = (0..net.output_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut checked = 0;
            while checked < 100 {
                let x = sample_box(&mut rng, &bx);
                let trace = net.forward(&x).unwrap();
                let near_kink = trace
                    .pre_activations
                    .iter()
                    .flatten()
                    .any(|z| z.abs() < 1e-3);
                if near_kink {
                    continue;
                }
                checked += 1;
                let g = net.gradient(&x, &loss).unwrap();
                let fd = fd_gradient(&net, &x, &loss, h);
                for (a, b) in g.iter().zip(&fd) {
                    let scale = a.abs().max(b.abs()).max(1e-8);
                    assert!(
                        (a - b).abs() / scale < 1e-4,
                        "gradient {a} vs finite difference {b} (seed {seed})"
                    );
                }
            }
        }
    }

    #[test]
    fn forward_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..50 {
            let net = random_net(seed);
            let bx: Vec<_> = (0..net.input_dim()).map(|_| (-3.0, 3.0)).collect();
            for _ in 0..20 {
                let x = sample_box(&mut rng, &bx);
                let fast = net.forward(&x).unwrap().outputs;
                let slow = forward_naive(&net, &x);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn piecewise_linear_along_segments() {
        // f((p+q)/2) should be the average of f(p), f(q) whenever no neuron
        // changes phase along [p, q]; checked via 3-point collinearity.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for seed in 0..20 {
            let net = random_net(seed);
            let bx: Vec<_> = (0..net.input_dim()).map(|_| (-2.0, 2.0)).collect();
            let mut found = 0;
            while found < 20 {
                let p = sample_box(&mut rng, &bx);
                let q: Vec<f64> = p.iter().map(|v| v + rng.gen_range(-1e-3..1e-3)).collect();
                let tp = net.forward(&p).unwrap();
                let tq = net.forward(&q).unwrap();
                let same_pattern = net
                    .hidden_neurons()
                    .all(|n| tp.is_active(n) == tq.is_active(n));
                if !same_pattern {
                    continue;
                }
                found += 1;
                let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
                let tm = net.forward(&mid).unwrap();
                for ((a, b), m) in tp.outputs.iter().zip(&tq.outputs).zip(&tm.outputs) {
                    assert!((0.5 * (a + b) - m).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn final_relu_layer_gets_identity_tail() {
        let net = Network::new(
            1,
            vec![Layer {
                weights: vec![vec![1.0]],
                bias: vec![0.0],
                activation: Activation::Relu,
            }],
        )
        .unwrap();
        assert_eq!(net.layers().len(), 2);
        assert_eq!(net.num_hidden(), 1);
        assert_eq!(net.forward(&[-2.0]).unwrap().outputs, vec![0.0]);
        assert_eq!(net.forward(&[3.0]).unwrap().outputs, vec![3.0]);
    }

    #[test]
    fn shape_errors() {
        let bad = Network::new(
            2,
            vec![Layer {
                weights: vec![vec![1.0]],
                bias: vec![0.0],
                activation: Activation::Identity,
            }],
        );
        assert_eq!(bad, Err(NetworkError::RowWidth { layer: 0, row: 0, got: 1, expected: 2 }));
        let bad = Network::new(
            1,
            vec![
                Layer { weights: vec![vec![1.0]], bias: vec![0.0], activation: Activation::Identity },
                Layer { weights: vec![vec![1.0]], bias: vec![0.0], activation: Activation::Identity },
            ],
        );
        assert_eq!(bad, Err(NetworkError::HiddenIdentity { layer: 0 }));
        let net = tiny_net();
        assert!(matches!(net.forward(&[0.0]), Err(NetworkError::InputDim { .. })));
    }
}
