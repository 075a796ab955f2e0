use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::numcore::{
    conv2d, conv2d_backward, conv2d_backward_params, linear, linear_backward,
    linear_backward_params, max_pool2d, max_pool2d_backward, relu, relu_backward, upsample_nearest,
    upsample_nearest_backward, Conv2dConfig, Tensor,
};

/// Per-tensor RNG: the stream depends only on the model seed and the
/// parameter name, so equally named tensors in different architectures get
/// identical initial values.
fn param_rng(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&h.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Glorot-uniform weights in `(−a, a)`, `a = sqrt(6/(fan_in+fan_out))`.
pub(crate) fn glorot(
    seed: u64,
    name: &str,
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
) -> Tensor {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new(-a, a);
    let mut rng = param_rng(seed, name);
    let len = shape.iter().product();
    let values = (0..len).map(|_| dist.sample(&mut rng)).collect();
    Tensor::from_vec(shape, values).expect("shape is positive")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Dense {
    pub(crate) fn init(seed: u64, name: &str, inputs: usize, outputs: usize) -> Self {
        Self {
            weight: glorot(
                seed,
                &format!("{name}.weight"),
                &[outputs, inputs],
                inputs,
                outputs,
            ),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }
}

pub(crate) struct DenseTrace {
    pub input: Tensor,
    pub pre: Tensor,
    pub act: Option<Tensor>,
}

impl DenseTrace {
    pub fn output(&self) -> &Tensor {
        self.act.as_ref().unwrap_or(&self.pre)
    }

    pub fn output_mut(&mut self) -> &mut Tensor {
        self.act.as_mut().unwrap_or(&mut self.pre)
    }
}

/// Dense layers with ReLU between them (none after the last).
pub(crate) fn mlp_forward(layers: &[Dense], x: Tensor) -> Result<Vec<DenseTrace>> {
    let mut traces: Vec<DenseTrace> = Vec::with_capacity(layers.len());
    let mut input = x;
    for (i, layer) in layers.iter().enumerate() {
        let pre = linear(&input, &layer.weight, &layer.bias)?;
        let act = (i + 1 < layers.len()).then(|| relu(&pre));
        let trace = DenseTrace { input, pre, act };
        input = trace.output().clone();
        traces.push(trace);
    }
    Ok(traces)
}

/// Backward through [`mlp_forward`]; the last trace's output grad must be
/// set. Returns the gradient w.r.t. the MLP input when `input_grad`.
pub(crate) fn mlp_backward(
    layers: &mut [Dense],
    traces: &mut [DenseTrace],
    input_grad: bool,
) -> Result<Option<Vec<f64>>> {
    for i in (0..layers.len()).rev() {
        let t = &mut traces[i];
        if let Some(act) = &t.act {
            relu_backward(&mut t.pre, act);
        }
        let layer = &mut layers[i];
        if i == 0 && !input_grad {
            linear_backward_params(&t.input, &mut layer.weight, &mut layer.bias, &t.pre)?;
            return Ok(None);
        }
        linear_backward(&mut t.input, &mut layer.weight, &mut layer.bias, &t.pre)?;
        if i > 0 {
            let g = t.input.grad().to_vec();
            traces[i - 1].output_mut().grad_mut().copy_from_slice(&g);
        }
    }
    Ok(Some(traces[0].input.grad().to_vec()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conv {
    pub kernels: Tensor,
    pub bias: Tensor,
}

impl Conv {
    pub(crate) fn init(seed: u64, name: &str, c_in: usize, c_out: usize, k: usize) -> Self {
        Self {
            kernels: glorot(
                seed,
                &format!("{name}.weight"),
                &[c_out, c_in, k, k],
                c_in * k * k,
                c_out * k * k,
            ),
            bias: Tensor::zeros(&[c_out]),
        }
    }

    pub(crate) fn config(&self) -> Conv2dConfig {
        Conv2dConfig {
            stride: 1,
            padding: self.kernels.shape()[2] / 2,
        }
    }
}

/// conv → ReLU → max-pool.
pub(crate) struct EncoderStageTrace {
    pub input: Tensor,
    pub pre: Tensor,
    /// Post-ReLU feature maps of this stage.
    pub act: Tensor,
    pub pooled: Tensor,
}

pub(crate) fn encoder_forward(
    convs: &[Conv],
    pool: usize,
    x: Tensor,
) -> Result<Vec<EncoderStageTrace>> {
    let mut traces: Vec<EncoderStageTrace> = Vec::with_capacity(convs.len());
    let mut input = x;
    for conv in convs {
        let pre = conv2d(&input, &conv.kernels, &conv.bias, conv.config())?;
        let act = relu(&pre);
        let pooled = max_pool2d(&act, (pool, pool))?;
        let next = pooled.clone();
        traces.push(EncoderStageTrace {
            input,
            pre,
            act,
            pooled,
        });
        input = next;
    }
    Ok(traces)
}

/// Backward through [`encoder_forward`] starting from the last stage's
/// `pooled.grad`.
pub(crate) fn encoder_backward(
    convs: &mut [Conv],
    pool: usize,
    traces: &mut [EncoderStageTrace],
    input_grad: bool,
) -> Result<()> {
    for i in (0..convs.len()).rev() {
        let t = &mut traces[i];
        max_pool2d_backward(&mut t.act, (pool, pool), &t.pooled)?;
        relu_backward(&mut t.pre, &t.act);
        let conv = &mut convs[i];
        let cfg = conv.config();
        if i == 0 && !input_grad {
            conv2d_backward_params(&t.input, &mut conv.kernels, &mut conv.bias, cfg, &t.pre)?;
        } else {
            conv2d_backward(&mut t.input, &mut conv.kernels, &mut conv.bias, cfg, &t.pre)?;
        }
        if i > 0 {
            let g = t.input.grad().to_vec();
            traces[i - 1].pooled.grad_mut().copy_from_slice(&g);
        }
    }
    Ok(())
}

/// upsample → conv → ReLU (ReLU omitted on the final stage).
pub(crate) struct DecoderStageTrace {
    pub input: Tensor,
    pub up: Tensor,
    pub pre: Tensor,
    pub act: Option<Tensor>,
}

impl DecoderStageTrace {
    pub fn output(&self) -> &Tensor {
        self.act.as_ref().unwrap_or(&self.pre)
    }
}

pub(crate) fn decoder_forward(
    convs: &[Conv],
    targets: &[(usize, usize)],
    x: Tensor,
) -> Result<Vec<DecoderStageTrace>> {
    let mut traces: Vec<DecoderStageTrace> = Vec::with_capacity(convs.len());
    let mut input = x;
    for (i, (conv, &target)) in convs.iter().zip(targets).enumerate() {
        let up = upsample_nearest(&input, target)?;
        let pre = conv2d(&up, &conv.kernels, &conv.bias, conv.config())?;
        let act = (i + 1 < convs.len()).then(|| relu(&pre));
        let t = DecoderStageTrace {
            input,
            up,
            pre,
            act,
        };
        input = t.output().clone();
        traces.push(t);
    }
    Ok(traces)
}

/// Backward through [`decoder_forward`]; the final output grad must be set
/// (on `pre` of the last stage). Leaves the gradient w.r.t. the decoder
/// input in `traces[0].input.grad()`.
pub(crate) fn decoder_backward(convs: &mut [Conv], traces: &mut [DecoderStageTrace]) -> Result<()> {
    for i in (0..convs.len()).rev() {
        let t = &mut traces[i];
        if let Some(act) = &t.act {
            relu_backward(&mut t.pre, act);
        }
        let conv = &mut convs[i];
        let cfg = conv.config();
        conv2d_backward(&mut t.up, &mut conv.kernels, &mut conv.bias, cfg, &t.pre)?;
        upsample_nearest_backward(&mut t.input, &t.up)?;
        if i > 0 {
            let g = t.input.grad().to_vec();
            let prev = &mut traces[i - 1];
            match prev.act.as_mut() {
                Some(a) => a.grad_mut().copy_from_slice(&g),
                None => prev.pre.grad_mut().copy_from_slice(&g),
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_is_deterministic_and_bounded() {
        let a = glorot(7, "conv0.weight", &[4, 3], 3, 4);
        let b = glorot(7, "conv0.weight", &[4, 3], 3, 4);
        let c = glorot(7, "conv1.weight", &[4, 3], 3, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        let bound = (6.0f64 / 7.0).sqrt();
        assert!(a.values().iter().all(|v| v.abs() < bound));
    }
}
