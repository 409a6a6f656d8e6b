//! Multilayer perceptron, RBF network, and the Adam optimizer.

pub mod fastjet;

use crate::error::NetError;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};
use std::path::Path;

/// Hidden-layer activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    ReLU,
    /// Cubic rectifier `max(0,x)^3`, C^2 and biharmonic-friendly.
    RePU3,
    /// `exp(-x^2)`.
    Gaussian,
}

impl Activation {
    pub fn apply<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::ReLU => z.max0(),
            Activation::RePU3 => z.max0().powi(3),
            Activation::Gaussian => (-(z * z)).exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::ReLU => "relu",
            Activation::RePU3 => "repu3",
            Activation::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::ReLU),
            "repu3" => Some(Activation::RePU3),
            "gaussian" => Some(Activation::Gaussian),
            _ => None,
        }
    }
}

/// Dense feedforward network with a linear output layer.
///
/// Parameters are stored flat in layer order, each layer as the row-major
/// weight matrix followed by its bias vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub params: Vec<f64>,
}

/// Number of parameters for a width list.
pub fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
}

impl Mlp {
    /// Glorot-uniform weights (range `±sqrt(6/(fan_in+fan_out))`), zero
    /// biases; the same seed always yields the same parameters.
    pub fn init(widths: &[usize], activation: Activation, seed: u64) -> Result<Self, NetError> {
        if widths.len() < 3 || widths.iter().any(|&w| w == 0) {
            return Err(NetError::BadArchitecture);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(widths));
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-limit..limit));
            }
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        Ok(Mlp { widths: widths.to_vec(), activation, params })
    }

    pub fn in_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn out_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Forward pass on any scalar type using the stored parameters.
    pub fn forward<S: Scalar>(&self, x: &[S]) -> S {
        let lifted: Vec<S> = self.params.iter().map(|&p| S::from_f64(p)).collect();
        self.forward_with_params(x, &lifted)
    }

    /// Forward pass with explicit parameter values (e.g. tape variables).
    pub fn forward_with_params<S: Scalar>(&self, x: &[S], params: &[S]) -> S {
        assert_eq!(x.len(), self.widths[0], "input dimension mismatch");
        assert_eq!(params.len(), self.params.len(), "parameter length mismatch");
        let n_layers = self.widths.len() - 1;
        let mut act: Vec<S> = x.to_vec();
        let mut offset = 0usize;
        for l in 0..n_layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &params[offset..offset + n_in * n_out];
            let b = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_out * (n_in + 1);
            let mut next = Vec::with_capacity(n_out);
            for i in 0..n_out {
                let mut z = b[i];
                for j in 0..n_in {
                    z += w[i * n_in + j] * act[j];
                }
                next.push(if l + 1 == n_layers {
                    z // linear output layer
                } else {
                    self.activation.apply(z)
                });
            }
            act = next;
        }
        act[0]
    }
}

/// Radial-basis network: fixed Gaussian centers; only the support widths
/// and the output weights are trainable. Parameters are `[widths..,
/// out_weights..]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RbfNet {
    pub centers: Vec<f64>,
    pub params: Vec<f64>,
}

impl RbfNet {
    /// Widths start at 1, output weights at 0 perturbed deterministically.
    pub fn init(centers: Vec<f64>, seed: u64) -> Self {
        let n = centers.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![1.0; n];
        for _ in 0..n {
            params.push(rng.gen_range(-0.1..0.1));
        }
        RbfNet { centers, params }
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward<S: Scalar>(&self, x: &[S]) -> S {
        let lifted: Vec<S> = self.params.iter().map(|&p| S::from_f64(p)).collect();
        self.forward_with_params(x, &lifted)
    }

    pub fn forward_with_params<S: Scalar>(&self, x: &[S], params: &[S]) -> S {
        let n = self.centers.len();
        let mut out = S::zero();
        for i in 0..n {
            let z = params[i] * (x[0] - S::from_f64(self.centers[i]));
            out += params[n + i] * (-(z * z)).exp();
        }
        out
    }
}

/// Either network kind behind one parameter-vector interface.
#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    Mlp(Mlp),
    Rbf(RbfNet),
}

impl Network {
    pub fn n_params(&self) -> usize {
        match self {
            Network::Mlp(m) => m.n_params(),
            Network::Rbf(r) => r.n_params(),
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            Network::Mlp(m) => m.in_dim(),
            Network::Rbf(_) => 1,
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            Network::Mlp(m) => &m.params,
            Network::Rbf(r) => &r.params,
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Network::Mlp(m) => &mut m.params,
            Network::Rbf(r) => &mut r.params,
        }
    }

    pub fn forward<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Network::Mlp(m) => m.forward(x),
            Network::Rbf(r) => r.forward(x),
        }
    }

    /// Negate the network output by flipping the output layer. Used to
    /// select between the two equally valid signs of an Eikonal solution.
    pub fn negate_output(&mut self) {
        match self {
            Network::Mlp(m) => {
                let tail = m.widths[m.widths.len() - 2] + 1;
                let n = m.params.len();
                for p in &mut m.params[n - tail..] {
                    *p = -*p;
                }
            }
            Network::Rbf(r) => {
                let n = r.centers.len();
                for p in &mut r.params[n..] {
                    *p = -*p;
                }
            }
        }
    }

    pub fn forward_with_params<S: Scalar>(&self, x: &[S], params: &[S]) -> S {
        match self {
            Network::Mlp(m) => m.forward_with_params(x, params),
            Network::Rbf(r) => r.forward_with_params(x, params),
        }
    }
}

/// Adam optimizer state.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(n: usize, lr: f64) -> Self {
        AdamState { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n], v: vec![0.0; n], step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One full-batch Adam update with bias correction. A non-finite gradient
/// aborts the step and leaves `theta` untouched.
pub fn adam_step(state: &mut AdamState, theta: &mut [f64], grad: &[f64]) -> Result<(), NetError> {
    assert_eq!(theta.len(), grad.len());
    assert_eq!(theta.len(), state.m.len());
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(NetError::NonFiniteGradient { index });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for i in 0..theta.len() {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        let mhat = state.m[i] / bc1;
        let vhat = state.v[i] / bc2;
        theta[i] -= state.lr * mhat / (vhat.sqrt() + state.eps);
    }
    Ok(())
}

const CHECKPOINT_HEADER: &str = "adf-pinn checkpoint v1";

/// Write parameters as a versioned text checkpoint: header, architecture
/// line, width list, then one decimal per line in layer order.
pub fn save_checkpoint(net: &Network, path: &Path) -> Result<(), NetError> {
    let mut out = String::new();
    out.push_str(CHECKPOINT_HEADER);
    out.push('\n');
    match net {
        Network::Mlp(m) => {
            out.push_str(&format!("mlp {}\n", m.activation.name()));
            out.push_str("widths");
            for w in &m.widths {
                out.push_str(&format!(" {w}"));
            }
            out.push('\n');
        }
        Network::Rbf(r) => {
            out.push_str("rbf gaussian\n");
            out.push_str("centers");
            for c in &r.centers {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
        }
    }
    for p in net.params() {
        out.push_str(&format!("{p}\n"));
    }
    let mut f = std::fs::File::create(path).map_err(|e| NetError::CheckpointIo(e.to_string()))?;
    f.write_all(out.as_bytes()).map_err(|e| NetError::CheckpointIo(e.to_string()))
}

/// Read a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> Result<Network, NetError> {
    let f = std::fs::File::open(path).map_err(|e| NetError::CheckpointIo(e.to_string()))?;
    let mut lines = std::io::BufReader::new(f).lines();
    let mut next = || -> Result<String, NetError> {
        lines
            .next()
            .ok_or_else(|| NetError::CheckpointFormat("unexpected end of file".into()))?
            .map_err(|e| NetError::CheckpointIo(e.to_string()))
    };
    if next()? != CHECKPOINT_HEADER {
        return Err(NetError::CheckpointFormat("bad header".into()));
    }
    let kind_line = next()?;
    let mut kind_parts = kind_line.split_whitespace();
    let kind = kind_parts.next().unwrap_or_default().to_string();
    let act = kind_parts.next().unwrap_or_default().to_string();
    let meta = next()?;
    let mut params = Vec::new();
    for line in lines {
        let line = line.map_err(|e| NetError::CheckpointIo(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        params.push(
            line.trim()
                .parse::<f64>()
                .map_err(|_| NetError::CheckpointFormat(format!("bad decimal {line:?}")))?,
        );
    }
    match kind.as_str() {
        "mlp" => {
            let activation = Activation::parse(&act)
                .ok_or_else(|| NetError::CheckpointFormat(format!("unknown activation {act}")))?;
            let widths: Vec<usize> = meta
                .split_whitespace()
                .skip(1)
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| NetError::CheckpointFormat("bad width list".into()))?;
            if params.len() != param_count(&widths) {
                return Err(NetError::ParamLengthMismatch {
                    expected: param_count(&widths),
                    got: params.len(),
                });
            }
            Ok(Network::Mlp(Mlp { widths, activation, params }))
        }
        "rbf" => {
            let centers: Vec<f64> = meta
                .split_whitespace()
                .skip(1)
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| NetError::CheckpointFormat("bad center list".into()))?;
            if params.len() != 2 * centers.len() {
                return Err(NetError::ParamLengthMismatch {
                    expected: 2 * centers.len(),
                    got: params.len(),
                });
            }
            Ok(Network::Rbf(RbfNet { centers, params }))
        }
        other => Err(NetError::CheckpointFormat(format!("unknown network kind {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::fd;
    use crate::jet::Jet2;
    use approx::assert_relative_eq;

    #[test]
    fn same_seed_same_parameters() {
        let a = Mlp::init(&[1, 30, 30, 1], Activation::Tanh, 42).unwrap();
        let b = Mlp::init(&[1, 30, 30, 1], Activation::Tanh, 42).unwrap();
        assert_eq!(a.params, b.params);
        let c = Mlp::init(&[1, 30, 30, 1], Activation::Tanh, 43).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn parameter_count_formula() {
        // sum over layers of n_out * (n_in + 1)
        assert_eq!(param_count(&[2, 50, 50, 1]), 2 * 50 + 50 + 50 * 50 + 50 + 50 + 1);
        assert_eq!(param_count(&[2, 50, 50, 1]), 2751);
        let m = Mlp::init(&[2, 50, 50, 1], Activation::Tanh, 0).unwrap();
        assert_eq!(m.n_params(), 2751);
        assert_eq!(param_count(&[1, 30, 30, 1]), 30 * 2 + 30 * 31 + 31);
    }

    #[test]
    fn zero_weights_forward_is_final_bias() {
        let mut m = Mlp::init(&[2, 5, 1], Activation::Tanh, 1).unwrap();
        for p in m.params.iter_mut() {
            *p = 0.0;
        }
        let n = m.params.len();
        m.params[n - 1] = 0.75; // output bias is the last parameter
        assert_relative_eq!(m.forward(&[0.3, -0.8]), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn single_hidden_layer_is_weighted_activations() {
        let m = Mlp::init(&[1, 4, 1], Activation::Tanh, 7).unwrap();
        let x = 0.37;
        // manual: sum_i c_i tanh(w_i x + b_i) + c0
        let w = &m.params[0..4];
        let b = &m.params[4..8];
        let c = &m.params[8..12];
        let c0 = m.params[12];
        let manual: f64 =
            (0..4).map(|i| c[i] * (w[i] * x + b[i]).tanh()).sum::<f64>() + c0;
        assert_relative_eq!(m.forward(&[x]), manual, epsilon = 1e-14);
    }

    #[test]
    fn relu_net_zero_bias_positively_homogeneous() {
        let mut m = Mlp::init(&[2, 8, 1], Activation::ReLU, 3).unwrap();
        // zero all biases
        for i in 16..24 {
            m.params[i] = 0.0;
        }
        let n = m.params.len();
        m.params[n - 1] = 0.0;
        let x = [0.4, -0.9];
        let alpha = 2.7;
        let fx = m.forward(&x);
        let fax = m.forward(&[alpha * x[0], alpha * x[1]]);
        assert_relative_eq!(fax, alpha * fx, epsilon = 1e-12);
    }

    #[test]
    fn jet_forward_matches_finite_difference_gradient() {
        let m = Mlp::init(&[2, 10, 10, 1], Activation::Tanh, 5).unwrap();
        let x = [0.3, -0.6];
        let f = |p: &[f64]| m.forward(p);
        for j in 0..2 {
            let xs: Vec<Jet2<f64>> = x
                .iter()
                .enumerate()
                .map(|(k, &v)| Jet2::seed(v, if k == j { 1.0 } else { 0.0 }))
                .collect();
            let out = m.forward(&xs);
            let mut dir = [0.0; 2];
            dir[j] = 1.0;
            assert_relative_eq!(out.c[1], fd::d1(&f, &x, &dir, 1e-5), max_relative = 1e-6);
        }
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut st = AdamState::new(1, 1e-3);
        let mut theta = [0.0f64];
        adam_step(&mut st, &mut theta, &[1.0]).unwrap();
        assert_relative_eq!(theta[0], -1e-3, max_relative = 1e-6);
    }

    #[test]
    fn adam_zero_gradient_keeps_theta() {
        let mut st = AdamState::new(2, 1e-2);
        let mut theta = [0.4, -0.2];
        adam_step(&mut st, &mut theta, &[0.0, 0.0]).unwrap();
        assert_eq!(theta, [0.4, -0.2]);
    }

    #[test]
    fn adam_descends_constant_gradient() {
        let mut st = AdamState::new(1, 1e-2);
        let mut theta = [1.0f64];
        for _ in 0..100 {
            adam_step(&mut st, &mut theta, &[2.0]).unwrap();
        }
        assert!(theta[0] < 0.1);
    }

    #[test]
    fn adam_rejects_non_finite_gradient() {
        let mut st = AdamState::new(1, 1e-2);
        let mut theta = [1.0f64];
        let err = adam_step(&mut st, &mut theta, &[f64::NAN]).unwrap_err();
        assert!(matches!(err, NetError::NonFiniteGradient { index: 0 }));
        assert_eq!(theta, [1.0]);
    }

    #[test]
    fn adam_lr_zero_is_identity() {
        let mut st = AdamState::new(1, 0.0);
        let mut theta = [0.5f64];
        for _ in 0..10 {
            adam_step(&mut st, &mut theta, &[1.3]).unwrap();
        }
        assert_eq!(theta, [0.5]);
    }

    #[test]
    fn checkpoint_roundtrip_is_exact() {
        let dir = std::env::temp_dir().join("adfpinn-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("net.ckpt");
        let m = Network::Mlp(Mlp::init(&[2, 7, 1], Activation::RePU3, 11).unwrap());
        save_checkpoint(&m, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(m, loaded);
        let r = Network::Rbf(RbfNet::init(vec![0.0, 0.5, 1.0], 2));
        save_checkpoint(&r, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), r);
    }

    #[test]
    fn rbf_has_widths_plus_output_weights() {
        let centers: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let r = RbfNet::init(centers, 1);
        assert_eq!(r.n_params(), 20);
    }
}
