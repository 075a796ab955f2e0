//! Per-component gradient checks and oracle comparisons, shared by the
//! numcore tests and the acceptance gate.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use skelsign::data::GestureLabel;
use skelsign::numcore::*;
use skelsign::training::contrastive_loss;
use skelsign::Result;

use super::{
    conv2d_oracle, gap_oracle, matmul_oracle, max_abs_diff, max_pool_oracle, random_tensor, rng,
};

pub const GRAD_COMPONENTS: [&str; 9] = [
    "dense",
    "conv2d",
    "max_pool2d",
    "global_avg_pool",
    "relu",
    "lstm_cell",
    "softmax_ce",
    "mse",
    "contrastive",
];

pub const ORACLE_OPS: [&str; 4] = ["matmul", "conv2d", "max_pool2d", "global_avg_pool"];

const EPS: f64 = 1e-6;

/// Sets `out.grad` to `r` and returns `Σ r·out`, the scalar whose gradient
/// the layer's backward pass propagates.
fn project(out: &mut Tensor, r: &[f64]) -> Tensor {
    out.grad_mut().copy_from_slice(r);
    Tensor::scalar(out.values().iter().zip(r).map(|(a, b)| a * b).sum())
}

fn projection(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn check(params: &mut [Tensor], f: impl FnMut(&mut [Tensor]) -> Result<Tensor>) -> f64 {
    grad_check(params, EPS, f).unwrap()
}

/// Relative finite-difference error of one component on a random toy
/// instance drawn from `seed`.
pub fn grad_error(component: &str, seed: u64) -> f64 {
    let mut r = rng(seed);
    match component {
        "dense" => {
            let (i, o) = (r.gen_range(1..6), r.gen_range(1..6));
            let mut p = vec![
                random_tensor(&mut r, &[i]),
                random_tensor(&mut r, &[o, i]),
                random_tensor(&mut r, &[o]),
            ];
            let proj = projection(&mut r, o);
            let dense = check(&mut p, |p| {
                let mut out = linear(&p[0], &p[1], &p[2])?;
                let loss = project(&mut out, &proj);
                let [x, w, b] = p else { unreachable!() };
                linear_backward(x, w, b, &out)?;
                Ok(loss)
            });
            let (m, k, n) = (r.gen_range(1..5), r.gen_range(1..5), r.gen_range(1..5));
            let mut p = vec![
                random_tensor(&mut r, &[m, k]),
                random_tensor(&mut r, &[k, n]),
            ];
            let proj = projection(&mut r, m * n);
            let mm = check(&mut p, |p| {
                let mut out = matmul(&p[0], &p[1])?;
                let loss = project(&mut out, &proj);
                let [a, b] = p else { unreachable!() };
                matmul_backward(a, b, &out)?;
                Ok(loss)
            });
            dense.max(mm)
        }
        "conv2d" => {
            let (c_in, c_out) = (r.gen_range(1..3), r.gen_range(1..3));
            let cfg = Conv2dConfig {
                stride: r.gen_range(1..3),
                padding: r.gen_range(0..2),
            };
            let mut p = vec![
                random_tensor(&mut r, &[c_in, 5, 6]),
                random_tensor(&mut r, &[c_out, c_in, 3, 3]),
                random_tensor(&mut r, &[c_out]),
            ];
            let len = conv2d(&p[0], &p[1], &p[2], cfg).unwrap().len();
            let proj = projection(&mut r, len);
            check(&mut p, |p| {
                let mut out = conv2d(&p[0], &p[1], &p[2], cfg)?;
                let loss = project(&mut out, &proj);
                let [x, k, b] = p else { unreachable!() };
                conv2d_backward(x, k, b, cfg, &out)?;
                Ok(loss)
            })
        }
        "max_pool2d" => {
            let mut p = vec![random_tensor(&mut r, &[2, 4, 6])];
            let proj = projection(&mut r, 2 * 2 * 3);
            check(&mut p, |p| {
                let mut out = max_pool2d(&p[0], (2, 2))?;
                let loss = project(&mut out, &proj);
                max_pool2d_backward(&mut p[0], (2, 2), &out)?;
                Ok(loss)
            })
        }
        "global_avg_pool" => {
            let mut p = vec![random_tensor(&mut r, &[3, 4, 5])];
            let proj = projection(&mut r, 3);
            check(&mut p, |p| {
                let mut out = global_avg_pool(&p[0])?;
                let loss = project(&mut out, &proj);
                global_avg_pool_backward(&mut p[0], &out)?;
                Ok(loss)
            })
        }
        "relu" => {
            // keep inputs away from the kink, where the derivative jumps
            let values = (0..12)
                .map(|_| {
                    let v: f64 = r.gen_range(0.1..1.0);
                    if r.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            let mut p = vec![Tensor::from_vec(&[3, 4], values).unwrap()];
            let proj = projection(&mut r, 12);
            check(&mut p, |p| {
                let mut out = relu(&p[0]);
                let loss = project(&mut out, &proj);
                relu_backward(&mut p[0], &out);
                Ok(loss)
            })
        }
        "lstm_cell" => {
            let (i, h) = (r.gen_range(1..5), r.gen_range(1..5));
            let mut p = vec![
                random_tensor(&mut r, &[i]),
                random_tensor(&mut r, &[h]),
                random_tensor(&mut r, &[h]),
                random_tensor(&mut r, &[4 * h, i]),
                random_tensor(&mut r, &[4 * h, h]),
                random_tensor(&mut r, &[4 * h]),
            ];
            let (rh, rc) = (projection(&mut r, h), projection(&mut r, h));
            check(&mut p, |p| {
                let mut weights = LstmWeights::new(p[3].clone(), p[4].clone(), p[5].clone())?;
                let state = LstmState {
                    hidden: p[1].values().to_vec(),
                    cell: p[2].values().to_vec(),
                };
                let step = lstm_cell(p[0].values(), &state, &weights)?;
                let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                let loss = dot(&step.next.hidden, &rh) + dot(&step.next.cell, &rc);
                let g = lstm_cell_backward(&step, &mut weights, &rh, &rc)?;
                p[0].grad_mut().copy_from_slice(&g.x);
                p[1].grad_mut().copy_from_slice(&g.hidden);
                p[2].grad_mut().copy_from_slice(&g.cell);
                p[3].grad_mut().copy_from_slice(weights.input.grad());
                p[4].grad_mut().copy_from_slice(weights.recurrent.grad());
                p[5].grad_mut().copy_from_slice(weights.bias.grad());
                Ok(Tensor::scalar(loss))
            })
        }
        "softmax_ce" => {
            let k = r.gen_range(2..6);
            let target = r.gen_range(0..k);
            let mut p = vec![random_tensor(&mut r, &[k])];
            check(&mut p, |p| {
                let ce = softmax_cross_entropy(p[0].values(), target)?;
                ce.backward(&mut p[0], 1.0);
                Ok(Tensor::scalar(ce.loss))
            })
        }
        "mse" => {
            let target = random_tensor(&mut r, &[2, 3]);
            let mut p = vec![random_tensor(&mut r, &[2, 3])];
            check(&mut p, |p| {
                let loss = mse_loss(&p[0], &target)?;
                mse_backward(&mut p[0], &target, 1.0)?;
                Ok(Tensor::scalar(loss))
            })
        }
        "contrastive" => {
            use GestureLabel::{Bi, Mono};
            let labels = [Mono, Bi, Mono, Bi, Bi];
            let tau = r.gen_range(0.2..1.0);
            let mut p = vec![random_tensor(&mut r, &[5, 4])];
            check(&mut p, |p| {
                let rows: Vec<&[f64]> = p[0].values().chunks(4).collect();
                let c = contrastive_loss(&rows, &labels, tau)?;
                p[0].grad_mut().copy_from_slice(&c.grads.concat());
                Ok(Tensor::scalar(c.loss))
            })
        }
        other => panic!("unknown component {other}"),
    }
}

/// Max absolute difference between one op and its brute-force oracle on a
/// random small instance drawn from `seed`.
pub fn oracle_error(op: &str, seed: u64) -> f64 {
    let mut r = rng(seed);
    match op {
        "matmul" => {
            let (m, k, n) = (r.gen_range(1..7), r.gen_range(1..7), r.gen_range(1..7));
            let a = random_tensor(&mut r, &[m, k]);
            let b = random_tensor(&mut r, &[k, n]);
            let got = matmul(&a, &b).unwrap();
            assert_eq!(got.shape(), &[m, n]);
            max_abs_diff(
                got.values(),
                &matmul_oracle(a.values(), b.values(), m, k, n),
            )
        }
        "conv2d" => {
            let (c_in, c_out) = (r.gen_range(1..4), r.gen_range(1..4));
            let (kh, kw) = (r.gen_range(1..4), r.gen_range(1..4));
            let (h, w) = (r.gen_range(kh..8), r.gen_range(kw..8));
            let cfg = Conv2dConfig {
                stride: r.gen_range(1..3),
                padding: r.gen_range(0..2),
            };
            let x = random_tensor(&mut r, &[c_in, h, w]);
            let k = random_tensor(&mut r, &[c_out, c_in, kh, kw]);
            let b = random_tensor(&mut r, &[c_out]);
            let got = conv2d(&x, &k, &b, cfg).unwrap();
            let (want, oh, ow) = conv2d_oracle(
                x.values(),
                (c_in, h, w),
                k.values(),
                (c_out, kh, kw),
                b.values(),
                cfg.stride,
                cfg.padding,
            );
            assert_eq!(got.shape(), &[c_out, oh, ow]);
            max_abs_diff(got.values(), &want)
        }
        "max_pool2d" => {
            let (c, ph, pw) = (r.gen_range(1..4), r.gen_range(1..4), r.gen_range(1..4));
            let h = ph * r.gen_range(1..4) + r.gen_range(0..ph);
            let w = pw * r.gen_range(1..4) + r.gen_range(0..pw);
            let x = random_tensor(&mut r, &[c, h, w]);
            let got = max_pool2d(&x, (ph, pw)).unwrap();
            assert_eq!(got.shape(), &[c, h / ph, w / pw]);
            max_abs_diff(
                got.values(),
                &max_pool_oracle(x.values(), (c, h, w), (ph, pw)),
            )
        }
        "global_avg_pool" => {
            let (c, h, w) = (r.gen_range(1..5), r.gen_range(1..7), r.gen_range(1..7));
            let x = random_tensor(&mut r, &[c, h, w]);
            let got = global_avg_pool(&x).unwrap();
            max_abs_diff(got.values(), &gap_oracle(x.values(), (c, h, w)))
        }
        other => panic!("unknown op {other}"),
    }
}
