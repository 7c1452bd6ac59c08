//! Fully connected feed-forward networks with hand-coded reverse-mode
//! gradients, squared or softmax cross-entropy loss and the regulariser
//! `η/(2(r+1)) |θ|^{2(r+1)}`.
//!
//! Parameter layout: the weight matrices of every layer in order, each
//! row-major (`fan_out × fan_in`), followed by the bias vectors of the layers
//! that have one, in the same order. Data samples are laid out `x = (y, z)`.

use crate::data::DataLaw;
use crate::error::{Error, Result};
use crate::oracle::{norm, Exponents, GradientOracle, ParamVector, RngStream};
use serde::{Deserialize, Serialize};

/// Hidden or output activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// Derivative given the pre-activation `v` and output `a`. The ReLU
    /// derivative at exactly 0 is taken to be 0.
    fn derivative(self, v: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// Loss `ℓ(y, 𝔑)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `|y − o|²`.
    Squared,
    /// `−Σ y_i log softmax(o)_i`; a softmax is applied to the raw outputs.
    CrossEntropy,
}

/// One affine layer followed by an activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub fan_in: usize,
    pub fan_out: usize,
    pub activation: Activation,
    pub bias: bool,
}

/// A feed-forward network bound to a loss, a regulariser and a data law.
#[derive(Debug, Clone)]
pub struct FeedForwardNet {
    layers: Vec<LayerSpec>,
    pub loss: LossKind,
    pub eta: f64,
    pub r: f64,
    exponents: Exponents,
    w_off: Vec<usize>,
    b_off: Vec<Option<usize>>,
    d: usize,
    law: DataLaw,
}

impl FeedForwardNet {
    /// Builds a network from consecutive layer specs.
    pub fn new(layers: Vec<LayerSpec>, loss: LossKind, eta: f64, r: f64, law: DataLaw) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("layer list"));
        }
        for w in layers.windows(2) {
            if w[0].fan_out != w[1].fan_in {
                return Err(Error::DimensionMismatch {
                    context: "consecutive layers",
                    expected: w[0].fan_out,
                    found: w[1].fan_in,
                });
            }
        }
        if !(eta >= 0.0 && r >= 0.0) {
            return Err(Error::InvalidConfig(format!("eta = {eta}, r = {r} must be nonnegative")));
        }
        let m = layers[0].fan_in + layers[layers.len() - 1].fan_out;
        if law.dim() != m {
            return Err(Error::DimensionMismatch {
                context: "network data law (y, z)",
                expected: m,
                found: law.dim(),
            });
        }
        let mut off = 0;
        let mut w_off = Vec::new();
        for l in &layers {
            w_off.push(off);
            off += l.fan_in * l.fan_out;
        }
        let mut b_off = Vec::new();
        for l in &layers {
            if l.bias {
                b_off.push(Some(off));
                off += l.fan_out;
            } else {
                b_off.push(None);
            }
        }
        Ok(Self {
            layers,
            loss,
            eta,
            r,
            exponents: Exponents { q: 1.0, r, rho: 1.0 },
            w_off,
            b_off,
            d: off,
            law,
        })
    }

    /// `W2 ReLU(W1 z + b1) + b2` with `d1` hidden units.
    pub fn one_layer(m1: usize, d1: usize, m2: usize, loss: LossKind, eta: f64, r: f64, law: DataLaw) -> Result<Self> {
        Self::new(
            vec![
                LayerSpec { fan_in: m1, fan_out: d1, activation: Activation::Relu, bias: true },
                LayerSpec { fan_in: d1, fan_out: m2, activation: Activation::Identity, bias: true },
            ],
            loss,
            eta,
            r,
            law,
        )
    }

    /// `W5 ReLU(W4 ReLU(W3 z + b3) + b4) + b5`.
    #[allow(clippy::too_many_arguments)]
    pub fn two_layer(
        m1: usize,
        d1: usize,
        d2: usize,
        m2: usize,
        loss: LossKind,
        eta: f64,
        r: f64,
        law: DataLaw,
    ) -> Result<Self> {
        Self::new(
            vec![
                LayerSpec { fan_in: m1, fan_out: d1, activation: Activation::Relu, bias: true },
                LayerSpec { fan_in: d1, fan_out: d2, activation: Activation::Relu, bias: true },
                LayerSpec { fan_in: d2, fan_out: m2, activation: Activation::Identity, bias: true },
            ],
            loss,
            eta,
            r,
            law,
        )
    }

    /// The transfer-learning network `Σ_j W2^{1j} tanh(Σ_k W1^{jk} ReLU(⟨W0^{k·}, z⟩ + b0^k) + b1^j)`
    /// with no output bias; parameters `([W0], [W1], [W2], b0, b1)`.
    pub fn transfer_two_layer(m1: usize, d1: usize, d2: usize, eta: f64, r: f64, law: DataLaw) -> Result<Self> {
        Self::new(
            vec![
                LayerSpec { fan_in: m1, fan_out: d1, activation: Activation::Relu, bias: true },
                LayerSpec { fan_in: d1, fan_out: d2, activation: Activation::Tanh, bias: true },
                LayerSpec { fan_in: d2, fan_out: 1, activation: Activation::Identity, bias: false },
            ],
            LossKind::Squared,
            eta,
            r,
            law,
        )
    }

    /// Overrides the structural exponents reported to the bounds module.
    pub fn with_exponents(mut self, q: f64, rho: f64) -> Self {
        self.exponents = Exponents { q, r: self.r, rho };
        self
    }

    /// Layer specs.
    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Parameter count `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Input dimension `m1`.
    pub fn m1(&self) -> usize {
        self.layers[0].fan_in
    }

    /// Output dimension `m2`.
    pub fn m2(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out
    }

    /// Weight matrix of layer `l` inside `theta`.
    pub fn weights<'a>(&self, theta: &'a [f64], l: usize) -> &'a [f64] {
        let s = &self.layers[l];
        &theta[self.w_off[l]..self.w_off[l] + s.fan_in * s.fan_out]
    }

    fn forward_all(&self, theta: &[f64], z: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut acts = vec![z.to_vec()];
        let mut pres = Vec::with_capacity(self.layers.len());
        for (l, s) in self.layers.iter().enumerate() {
            let w = self.weights(theta, l);
            let input = &acts[l];
            let mut pre = vec![0.0; s.fan_out];
            for (o, p) in pre.iter_mut().enumerate() {
                let row = &w[o * s.fan_in..(o + 1) * s.fan_in];
                let mut acc = 0.0;
                for (a, b) in row.iter().zip(input) {
                    acc += a * b;
                }
                *p = acc + self.b_off[l].map_or(0.0, |b| theta[b + o]);
            }
            let a: Vec<f64> = pre.iter().map(|&v| s.activation.apply(v)).collect();
            pres.push(pre);
            acts.push(a);
        }
        (pres, acts)
    }

    /// Raw network output `𝔑(θ, z)`.
    pub fn forward(&self, theta: &[f64], z: &[f64]) -> Vec<f64> {
        self.forward_all(theta, z).1.pop().expect("at least one layer")
    }

    /// Class probabilities `softmax(𝔑(θ, z))`.
    pub fn predict_proba(&self, theta: &[f64], z: &[f64]) -> Vec<f64> {
        softmax(&self.forward(theta, z))
    }

    /// Data loss `ℓ(y, 𝔑(θ,z))` without the regulariser.
    pub fn data_loss(&self, theta: &[f64], y: &[f64], z: &[f64]) -> f64 {
        loss_value(self.loss, y, &self.forward(theta, z))
    }

    /// Regulariser `η/(2(r+1)) |θ|^{2(r+1)}`.
    pub fn regulariser(&self, theta: &[f64]) -> f64 {
        if self.eta == 0.0 {
            return 0.0;
        }
        self.eta / (2.0 * (self.r + 1.0)) * norm(theta).powf(2.0 * (self.r + 1.0))
    }

    /// Data loss and its gradient (written into `grad`), by reverse mode.
    pub fn data_loss_grad(&self, theta: &[f64], y: &[f64], z: &[f64], grad: &mut [f64]) -> f64 {
        let (pres, acts) = self.forward_all(theta, z);
        let out = &acts[self.layers.len()];
        let loss = loss_value(self.loss, y, out);
        let mut delta: Vec<f64> = match self.loss {
            LossKind::Squared => y.iter().zip(out).map(|(a, b)| -2.0 * (a - b)).collect(),
            LossKind::CrossEntropy => {
                let p = softmax(out);
                let mass: f64 = y.iter().sum();
                p.iter().zip(y).map(|(pi, yi)| pi * mass - yi).collect()
            }
        };
        grad.fill(0.0);
        for l in (0..self.layers.len()).rev() {
            let s = self.layers[l];
            for (o, dv) in delta.iter_mut().enumerate() {
                *dv *= s.activation.derivative(pres[l][o], acts[l + 1][o]);
            }
            let input = &acts[l];
            let wo = self.w_off[l];
            for (o, &dv) in delta.iter().enumerate() {
                if dv == 0.0 {
                    continue;
                }
                let g = &mut grad[wo + o * s.fan_in..wo + (o + 1) * s.fan_in];
                for (gi, xi) in g.iter_mut().zip(input) {
                    *gi += dv * xi;
                }
            }
            if let Some(b) = self.b_off[l] {
                grad[b..b + s.fan_out].copy_from_slice(&delta);
            }
            if l > 0 {
                let w = self.weights(theta, l);
                let mut prev = vec![0.0; s.fan_in];
                for (o, &dv) in delta.iter().enumerate() {
                    if dv == 0.0 {
                        continue;
                    }
                    let row = &w[o * s.fan_in..(o + 1) * s.fan_in];
                    for (p, wi) in prev.iter_mut().zip(row) {
                        *p += dv * wi;
                    }
                }
                delta = prev;
            }
        }
        loss
    }
}

fn softmax(o: &[f64]) -> Vec<f64> {
    let max = o.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = o.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn loss_value(kind: LossKind, y: &[f64], out: &[f64]) -> f64 {
    match kind {
        LossKind::Squared => y.iter().zip(out).map(|(a, b)| (a - b) * (a - b)).sum(),
        LossKind::CrossEntropy => {
            let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + out.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            -y.iter().zip(out).map(|(yi, oi)| yi * (oi - lse)).sum::<f64>()
        }
    }
}

/// Loss (with regulariser) and its full gradient at one sample `(z, y)`.
pub fn ffn_forward_backward(net: &FeedForwardNet, theta: &ParamVector, z: &[f64], y: &[f64]) -> Result<(f64, ParamVector)> {
    if theta.dim() != net.dim() {
        return Err(Error::DimensionMismatch {
            context: "network parameter",
            expected: net.dim(),
            found: theta.dim(),
        });
    }
    if z.len() != net.m1() || y.len() != net.m2() {
        return Err(Error::DimensionMismatch {
            context: "network sample",
            expected: net.m1() + net.m2(),
            found: z.len() + y.len(),
        });
    }
    let t = theta.as_slice();
    let mut grad = vec![0.0; net.dim()];
    let loss = net.data_loss_grad(t, y, z, &mut grad) + net.regulariser(t);
    if !loss.is_finite() {
        return Err(Error::NonFinite("network loss"));
    }
    let mut f = vec![0.0; net.dim()];
    net.eval_f(t, &[], &mut f);
    for (g, fi) in grad.iter_mut().zip(&f) {
        *g += fi;
    }
    Ok((loss, ParamVector::new(grad)?))
}

/// Xavier (Glorot) uniform initialisation: weights drawn from
/// `U(−√(6/(fan_in+fan_out)), +√(6/(fan_in+fan_out)))`, biases zero.
pub fn xavier_init(net: &FeedForwardNet, rng: &mut RngStream) -> ParamVector {
    let mut theta = vec![0.0; net.dim()];
    for (l, s) in net.layers.iter().enumerate() {
        let bound = (6.0 / (s.fan_in + s.fan_out) as f64).sqrt();
        let wo = net.w_off[l];
        for w in &mut theta[wo..wo + s.fan_in * s.fan_out] {
            *w = (2.0 * rng.uniform() - 1.0) * bound;
        }
    }
    ParamVector::new(theta).expect("finite initialisation")
}

impl GradientOracle for FeedForwardNet {
    fn dim_param(&self) -> usize {
        self.d
    }
    fn dim_data(&self) -> usize {
        self.m1() + self.m2()
    }
    fn exponents(&self) -> Exponents {
        self.exponents
    }
    fn eval_u(&self, theta: &[f64], x: &[f64]) -> f64 {
        let (y, z) = x.split_at(self.m2());
        self.data_loss(theta, y, z) + self.regulariser(theta)
    }
    /// `F = η θ |θ|^{2r}`.
    fn eval_f(&self, theta: &[f64], _x: &[f64], out: &mut [f64]) {
        let s = if self.eta == 0.0 { 0.0 } else { self.eta * norm(theta).powf(2.0 * self.r) };
        for (o, t) in out.iter_mut().zip(theta) {
            *o = s * t;
        }
    }
    fn eval_g(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        let (y, z) = x.split_at(self.m2());
        self.data_loss_grad(theta, y, z, out);
    }
    fn eval_h(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        self.eval_g(theta, x, out);
        if self.eta != 0.0 {
            let s = self.eta * norm(theta).powf(2.0 * self.r);
            for (o, t) in out.iter_mut().zip(theta) {
                *o += s * t;
            }
        }
    }
    fn data_law(&self) -> &DataLaw {
        &self.law
    }
}
