//! A small fully-connected network with reverse-mode gradients.
//!
//! The encoder applies `linear -> ReLU` per hidden layer; a residual
//! connection carries the covariates into the first hidden layer's output
//! (through a learned projection when the input width differs from the
//! hidden width). Scalar heads sit on the last hidden layer, each with its
//! own output activation. Parameters live in one flat `Vec<f64>` whose layout
//! is fixed by the configuration, which keeps the optimizer, gradient checks,
//! and serialization trivial.

mod adam;
mod train;

pub use adam::{adam_step, adam_step_with, AdamState};
pub use train::{train, Objective, TrainConfig, TrainLog};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output activation applied by a head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Exp,
    Softplus,
    Identity,
}

impl Activation {
    fn apply(self, o: f64) -> f64 {
        match self {
            Activation::Exp => o.exp(),
            Activation::Softplus => o.max(0.0) + (-o.abs()).exp().ln_1p(),
            Activation::Identity => o,
        }
    }

    fn derivative(self, o: f64, out: f64) -> f64 {
        match self {
            Activation::Exp => out,
            Activation::Softplus => 1.0 / (1.0 + (-o).exp()),
            Activation::Identity => 1.0,
        }
    }
}

/// Network shape and regularization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub head_activations: Vec<Activation>,
    pub dropout_rate: f64,
    pub residual: bool,
}

impl MlpConfig {
    pub fn new(input_dim: usize, head_activations: Vec<Activation>) -> Result<Self> {
        let config = Self {
            input_dim,
            hidden_dims: vec![32, 32],
            head_activations,
            dropout_rate: 0.1,
            residual: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidParameter("input_dim must be positive".into()));
        }
        if self.hidden_dims.is_empty() || self.hidden_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(
                "hidden_dims must be nonempty and positive".into(),
            ));
        }
        if self.head_activations.is_empty() {
            return Err(Error::InvalidParameter("at least one head required".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidParameter(format!(
                "dropout_rate must lie in [0,1), got {}",
                self.dropout_rate
            )));
        }
        Ok(())
    }

    pub fn head_count(&self) -> usize {
        self.head_activations.len()
    }

    /// Whether the skip path needs a learned projection.
    pub fn has_projection(&self) -> bool {
        self.residual && self.input_dim != self.hidden_dims[0]
    }

    pub fn param_count(&self) -> usize {
        let mut n = 0;
        let mut fan_in = self.input_dim;
        for &h in &self.hidden_dims {
            n += h * fan_in + h;
            fan_in = h;
        }
        if self.has_projection() {
            n += self.hidden_dims[0] * self.input_dim;
        }
        n += self.head_count() * (fan_in + 1);
        n
    }
}

/// Flat parameter vector laid out as `[W_0, b_0, P?, W_1, b_1, ...,
/// head_0 w, head_0 b, ...]`, row-major matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub values: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(config: &MlpConfig) -> Self {
        Self {
            values: vec![0.0; config.param_count()],
        }
    }

    /// Fan-in-scaled uniform initialization, `U(-1/sqrt(fan_in),
    /// 1/sqrt(fan_in))`; biases start at zero. The tighter bound keeps the
    /// exponential output heads near 1 at the start of training.
    pub fn init<R: Rng>(config: &MlpConfig, rng: &mut R) -> Self {
        let mut values = vec![0.0; config.param_count()];
        let mut offset = 0;
        let mut fan_in = config.input_dim;
        for (l, &h) in config.hidden_dims.iter().enumerate() {
            let limit = 1.0 / (fan_in as f64).sqrt();
            for v in &mut values[offset..offset + h * fan_in] {
                *v = rng.gen_range(-limit..limit);
            }
            offset += h * fan_in + h; // biases remain zero
            if l == 0 && config.has_projection() {
                let limit = 1.0 / (config.input_dim as f64).sqrt();
                for v in &mut values[offset..offset + h * config.input_dim] {
                    *v = rng.gen_range(-limit..limit);
                }
                offset += h * config.input_dim;
            }
            fan_in = h;
        }
        let limit = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..config.head_count() {
            for v in &mut values[offset..offset + fan_in] {
                *v = rng.gen_range(-limit..limit);
            }
            offset += fan_in + 1;
        }
        debug_assert_eq!(offset, values.len());
        Self { values }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Offsets of each tensor inside the flat parameter vector.
struct Layout {
    layer_w: Vec<usize>,
    layer_b: Vec<usize>,
    projection: Option<usize>,
    head_w: Vec<usize>,
    head_b: Vec<usize>,
}

impl Layout {
    fn of(config: &MlpConfig) -> Self {
        let mut layer_w = Vec::new();
        let mut layer_b = Vec::new();
        let mut projection = None;
        let mut offset = 0;
        let mut fan_in = config.input_dim;
        for (l, &h) in config.hidden_dims.iter().enumerate() {
            layer_w.push(offset);
            offset += h * fan_in;
            layer_b.push(offset);
            offset += h;
            if l == 0 && config.has_projection() {
                projection = Some(offset);
                offset += h * config.input_dim;
            }
            fan_in = h;
        }
        let mut head_w = Vec::new();
        let mut head_b = Vec::new();
        for _ in 0..config.head_count() {
            head_w.push(offset);
            offset += fan_in;
            head_b.push(offset);
            offset += 1;
        }
        Self {
            layer_w,
            layer_b,
            projection,
            head_w,
            head_b,
        }
    }
}

/// Activations recorded by a training-mode forward pass, consumed by
/// [`backward`].
pub struct ForwardCache {
    x: Vec<f64>,
    preacts: Vec<Vec<f64>>,
    dropped: Vec<Vec<f64>>,
    masks: Option<Vec<Vec<f64>>>,
    head_pre: Vec<f64>,
    head_out: Vec<f64>,
}

fn check_input(config: &MlpConfig, x: &[f64]) -> Result<()> {
    if x.len() != config.input_dim {
        return Err(Error::DimensionMismatch {
            expected: config.input_dim,
            got: x.len(),
        });
    }
    Ok(())
}

fn run_forward(
    config: &MlpConfig,
    params: &MlpParams,
    x: &[f64],
    mut dropout: Option<&mut dyn FnMut() -> f64>,
) -> (Vec<f64>, ForwardCache)
{
    let layout = Layout::of(config);
    let p = &params.values;
    let keep = 1.0 - config.dropout_rate;
    let mut preacts = Vec::with_capacity(config.hidden_dims.len());
    let mut dropped = Vec::with_capacity(config.hidden_dims.len());
    let mut masks = dropout.as_ref().map(|_| Vec::new());

    let mut h_prev: Vec<f64> = x.to_vec();
    for (l, &h) in config.hidden_dims.iter().enumerate() {
        let fan_in = h_prev.len();
        let w = layout.layer_w[l];
        let b = layout.layer_b[l];
        let mut z = vec![0.0; h];
        for i in 0..h {
            let row = &p[w + i * fan_in..w + (i + 1) * fan_in];
            let mut acc = p[b + i];
            for (wij, xj) in row.iter().zip(&h_prev) {
                acc += wij * xj;
            }
            z[i] = acc;
        }
        let mut a: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
        if l == 0 && config.residual {
            if let Some(proj) = layout.projection {
                for i in 0..h {
                    let row = &p[proj + i * config.input_dim..proj + (i + 1) * config.input_dim];
                    let mut acc = 0.0;
                    for (pij, xj) in row.iter().zip(x) {
                        acc += pij * xj;
                    }
                    a[i] += acc;
                }
            } else {
                for i in 0..h {
                    a[i] += x[i];
                }
            }
        }
        let d = if let Some(draw) = dropout.as_deref_mut() {
            let mask: Vec<f64> = (0..h)
                .map(|_| if draw() < keep { 1.0 / keep } else { 0.0 })
                .collect();
            let d: Vec<f64> = a.iter().zip(&mask).map(|(ai, mi)| ai * mi).collect();
            masks.as_mut().unwrap().push(mask);
            d
        } else {
            a
        };
        preacts.push(z);
        dropped.push(d.clone());
        h_prev = d;
    }

    let heads = config.head_count();
    let mut head_pre = vec![0.0; heads];
    let mut head_out = vec![0.0; heads];
    for k in 0..heads {
        let w = layout.head_w[k];
        let mut acc = p[layout.head_b[k]];
        for (wj, hj) in p[w..w + h_prev.len()].iter().zip(&h_prev) {
            acc += wj * hj;
        }
        head_pre[k] = acc;
        head_out[k] = config.head_activations[k].apply(acc);
    }

    let outputs = head_out.clone();
    (
        outputs,
        ForwardCache {
            x: x.to_vec(),
            preacts,
            dropped,
            masks,
            head_pre,
            head_out,
        },
    )
}

/// Deterministic inference pass: no dropout, no cache retention cost beyond
/// the returned head outputs.
pub fn forward_eval(config: &MlpConfig, params: &MlpParams, x: &[f64]) -> Result<Vec<f64>> {
    check_input(config, x)?;
    Ok(run_forward(config, params, x, None).0)
}

/// Training pass with dropout masks drawn from `rng` (inverted scaling, so
/// inference needs no rescaling) and cached activations for [`backward`].
pub fn forward_train<R: Rng>(
    config: &MlpConfig,
    params: &MlpParams,
    x: &[f64],
    rng: &mut R,
) -> Result<(Vec<f64>, ForwardCache)> {
    check_input(config, x)?;
    if config.dropout_rate > 0.0 {
        let mut draw = || rng.gen::<f64>();
        Ok(run_forward(config, params, x, Some(&mut draw)))
    } else {
        Ok(run_forward(config, params, x, None))
    }
}

/// Reverse-mode pass. `dloss_dout` holds the loss gradient at each head
/// output; gradients are accumulated into `grad` (same layout as the
/// parameters) scaled by `scale`.
pub fn backward(
    config: &MlpConfig,
    params: &MlpParams,
    cache: &ForwardCache,
    dloss_dout: &[f64],
    grad: &mut [f64],
    scale: f64,
) -> Result<()> {
    if dloss_dout.len() != config.head_count() {
        return Err(Error::DimensionMismatch {
            expected: config.head_count(),
            got: dloss_dout.len(),
        });
    }
    if grad.len() != params.values.len() {
        return Err(Error::DimensionMismatch {
            expected: params.values.len(),
            got: grad.len(),
        });
    }
    let layout = Layout::of(config);
    let p = &params.values;
    let last = config.hidden_dims.len() - 1;
    let h_last = &cache.dropped[last];

    let mut dh = vec![0.0; h_last.len()];
    for k in 0..config.head_count() {
        let dpre = dloss_dout[k]
            * config.head_activations[k].derivative(cache.head_pre[k], cache.head_out[k]);
        let w = layout.head_w[k];
        for j in 0..h_last.len() {
            grad[w + j] += scale * dpre * h_last[j];
            dh[j] += dpre * p[w + j];
        }
        grad[layout.head_b[k]] += scale * dpre;
    }

    for l in (0..=last).rev() {
        let h = config.hidden_dims[l];
        // Back through dropout.
        if let Some(masks) = &cache.masks {
            for (dhi, mi) in dh.iter_mut().zip(&masks[l]) {
                *dhi *= mi;
            }
        }
        let below: &[f64] = if l == 0 { &cache.x } else { &cache.dropped[l - 1] };
        let w = layout.layer_w[l];
        let b = layout.layer_b[l];
        let mut dbelow = vec![0.0; below.len()];
        for i in 0..h {
            let dz = if cache.preacts[l][i] > 0.0 { dh[i] } else { 0.0 };
            if dz != 0.0 {
                let row_off = w + i * below.len();
                for j in 0..below.len() {
                    grad[row_off + j] += scale * dz * below[j];
                    dbelow[j] += dz * p[row_off + j];
                }
                grad[b + i] += scale * dz;
            }
        }
        if l == 0 && config.residual {
            // The skip path feeds the first hidden layer's output directly.
            if let Some(proj) = layout.projection {
                for i in 0..h {
                    if dh[i] != 0.0 {
                        let row_off = proj + i * config.input_dim;
                        for j in 0..config.input_dim {
                            grad[row_off + j] += scale * dh[i] * cache.x[j];
                        }
                    }
                }
            }
            // dx is not needed: inputs are data, not parameters.
        }
        dh = dbelow;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_config(heads: Vec<Activation>) -> MlpConfig {
        MlpConfig {
            input_dim: 2,
            hidden_dims: vec![3, 3],
            head_activations: heads,
            dropout_rate: 0.0,
            residual: true,
        }
    }

    #[test]
    fn zero_params_exp_heads_output_one() {
        let config = tiny_config(vec![Activation::Exp, Activation::Exp, Activation::Exp]);
        let params = MlpParams::zeros(&config);
        let out = forward_eval(&config, &params, &[0.3, -0.7]).unwrap();
        assert_eq!(out, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eval_is_deterministic() {
        let config = tiny_config(vec![Activation::Identity]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = MlpParams::init(&config, &mut rng);
        let a = forward_eval(&config, &params, &[1.0, 2.0]).unwrap();
        let b = forward_eval(&config, &params, &[1.0, 2.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hand_computed_single_layer() {
        // One hidden layer of width 2 on 2 inputs, identity head, no residual.
        let config = MlpConfig {
            input_dim: 2,
            hidden_dims: vec![2],
            head_activations: vec![Activation::Identity],
            dropout_rate: 0.0,
            residual: false,
        };
        // Layout: W0 (2x2), b0 (2), head w (2), head b (1).
        let params = MlpParams {
            values: vec![1.0, -2.0, 0.5, 0.25, 0.1, -0.1, 2.0, 3.0, 0.7],
        };
        let x = [1.0, 0.5];
        // z = [1*1 - 2*0.5 + 0.1, 0.5*1 + 0.25*0.5 - 0.1] = [0.1, 0.525]
        // relu(z) = z; head = 2*0.1 + 3*0.525 + 0.7 = 2.475
        let out = forward_eval(&config, &params, &x).unwrap();
        assert!((out[0] - 2.475).abs() < 1e-15);
    }

    #[test]
    fn input_dim_mismatch_is_error() {
        let config = tiny_config(vec![Activation::Identity]);
        let params = MlpParams::zeros(&config);
        assert!(forward_eval(&config, &params, &[1.0]).is_err());
    }

    #[test]
    fn residual_changes_output() {
        // input width == hidden width, so the skip is the identity and both
        // configurations share one parameter layout.
        let mut config = MlpConfig {
            input_dim: 3,
            hidden_dims: vec![3],
            head_activations: vec![Activation::Identity],
            dropout_rate: 0.0,
            residual: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = MlpParams::init(&config, &mut rng);
        let with = forward_eval(&config, &params, &[0.4, 0.9, -0.2]).unwrap();
        config.residual = false;
        let without = forward_eval(&config, &params, &[0.4, 0.9, -0.2]).unwrap();
        assert_ne!(with, without);
    }

    #[test]
    fn head_bias_gradient_is_activation_derivative() {
        let config = tiny_config(vec![Activation::Exp]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = MlpParams::init(&config, &mut rng);
        let (out, cache) = forward_train(&config, &params, &[0.2, -0.4], &mut rng).unwrap();
        let mut grad = vec![0.0; params.values.len()];
        backward(&config, &params, &cache, &[1.0], &mut grad, 1.0).unwrap();
        // d(sum of outputs)/d(head bias) = exp(preactivation) = output.
        let bias_grad = grad[params.values.len() - 1];
        assert!((bias_grad - out[0]).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences_all_heads() {
        for heads in [
            vec![Activation::Exp, Activation::Exp, Activation::Exp],
            vec![Activation::Identity, Activation::Softplus],
        ] {
            let config = MlpConfig {
                input_dim: 2,
                hidden_dims: vec![3, 2],
                head_activations: heads,
                dropout_rate: 0.0,
                residual: true,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let params = MlpParams::init(&config, &mut rng);
            let x = [0.7, -0.3];
            // Loss = weighted sum of head outputs.
            let weights: Vec<f64> = (0..config.head_count())
                .map(|k| 0.5 + 0.25 * k as f64)
                .collect();
            let (_, cache) = forward_train(&config, &params, &x, &mut rng).unwrap();
            let mut grad = vec![0.0; params.values.len()];
            backward(&config, &params, &cache, &weights, &mut grad, 1.0).unwrap();

            let loss = |p: &MlpParams| {
                let out = forward_eval(&config, p, &x).unwrap();
                out.iter().zip(&weights).map(|(o, w)| o * w).sum::<f64>()
            };
            let h = 1e-6;
            for i in 0..params.values.len() {
                let mut lo = params.clone();
                let mut hi = params.clone();
                lo.values[i] -= h;
                hi.values[i] += h;
                let fd = (loss(&hi) - loss(&lo)) / (2.0 * h);
                let scale = grad[i].abs().max(fd.abs()).max(1e-6);
                assert!(
                    (grad[i] - fd).abs() / scale < 1e-4,
                    "param {i}: analytic {} vs fd {fd}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn dead_relu_paths_have_zero_gradient() {
        let config = MlpConfig {
            input_dim: 1,
            hidden_dims: vec![2],
            head_activations: vec![Activation::Identity],
            dropout_rate: 0.0,
            residual: false,
        };
        // First hidden unit always negative preactivation for positive input.
        let params = MlpParams {
            values: vec![-5.0, 1.0, -1.0, 0.0, 1.0, 1.0, 0.0],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, cache) = forward_train(&config, &params, &[2.0], &mut rng).unwrap();
        let mut grad = vec![0.0; params.values.len()];
        backward(&config, &params, &cache, &[1.0], &mut grad, 1.0).unwrap();
        // Weight and bias feeding the dead unit get no gradient.
        assert_eq!(grad[0], 0.0);
        assert_eq!(grad[2], 0.0);
        // The live unit does.
        assert!(grad[1] != 0.0);
    }
}
