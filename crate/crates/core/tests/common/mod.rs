//! Shared helpers for integration tests: independent oracles and small
//! fixtures. Nothing here calls into the code paths it checks.

#![allow(dead_code)]

pub mod suite;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skelsign::data::{GestureLabel, PaddedSample};
use skelsign::models::Model;
use skelsign::numcore::Tensor;
use skelsign::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let len = shape.iter().product();
    Tensor::from_vec(shape, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_sample(
    rng: &mut ChaCha8Rng,
    t_max: usize,
    joints: usize,
    label: GestureLabel,
) -> PaddedSample {
    PaddedSample {
        name: format!("toy{}", rng.gen::<u16>()),
        joint_count: joints,
        t_max,
        grid: (0..t_max * 3 * joints)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect(),
        original_length: t_max,
        label: Some(label),
    }
}

/// Copies a model's parameters into standalone tensors.
pub fn params_of(model: &Model) -> Vec<Tensor> {
    model
        .named_parameters()
        .into_iter()
        .map(|(_, t)| t.clone())
        .collect()
}

/// Runs `f` on `model` with `params` substituted in, then copies the
/// accumulated gradients back out to `params`.
pub fn with_params<F>(model: &mut Model, params: &mut [Tensor], f: F) -> Result<Tensor>
where
    F: FnOnce(&mut Model) -> Result<f64>,
{
    for (dst, src) in model.parameters_mut().into_iter().zip(params.iter()) {
        dst.values_mut().copy_from_slice(src.values());
        dst.zero_grad();
    }
    let loss = f(model)?;
    for (src, dst) in model.parameters_mut().into_iter().zip(params.iter_mut()) {
        dst.grad_mut().copy_from_slice(src.grad());
    }
    Ok(Tensor::scalar(loss))
}

// ---- brute-force oracles -------------------------------------------------

pub fn matmul_oracle(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for p in 0..k {
                s += a[i * k + p] * b[p * n + j];
            }
            out[i * n + j] = s;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn conv2d_oracle(
    input: &[f64],
    (c_in, h, w): (usize, usize, usize),
    kernels: &[f64],
    (c_out, kh, kw): (usize, usize, usize),
    bias: &[f64],
    stride: usize,
    padding: usize,
) -> (Vec<f64>, usize, usize) {
    let oh = (h + 2 * padding - kh) / stride + 1;
    let ow = (w + 2 * padding - kw) / stride + 1;
    let mut out = vec![0.0; c_out * oh * ow];
    for co in 0..c_out {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut s = bias[co];
                for ci in 0..c_in {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let iy = (oy * stride + ky) as isize - padding as isize;
                            let ix = (ox * stride + kx) as isize - padding as isize;
                            if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                continue;
                            }
                            s += input[(ci * h + iy as usize) * w + ix as usize]
                                * kernels[((co * c_in + ci) * kh + ky) * kw + kx];
                        }
                    }
                }
                out[(co * oh + oy) * ow + ox] = s;
            }
        }
    }
    (out, oh, ow)
}

pub fn max_pool_oracle(
    input: &[f64],
    (c, h, w): (usize, usize, usize),
    (ph, pw): (usize, usize),
) -> Vec<f64> {
    let (oh, ow) = (h / ph, w / pw);
    let mut out = Vec::new();
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let window: Vec<f64> = (0..ph)
                    .flat_map(|dy| (0..pw).map(move |dx| (dy, dx)))
                    .map(|(dy, dx)| input[(ch * h + oy * ph + dy) * w + ox * pw + dx])
                    .collect();
                out.push(window.into_iter().fold(f64::NEG_INFINITY, f64::max));
            }
        }
    }
    out
}

pub fn gap_oracle(input: &[f64], (c, h, w): (usize, usize, usize)) -> Vec<f64> {
    (0..c)
        .map(|ch| {
            let mut s = 0.0;
            for i in 0..h * w {
                s += input[ch * h * w + i];
            }
            s / (h * w) as f64
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
