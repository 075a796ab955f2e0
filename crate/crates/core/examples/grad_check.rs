//! Finite-difference check of hand-written backward passes: a conv layer on
//! its own, then every parameter of a small CNN end to end.
//!
//!     cargo run --release --example grad_check

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skelsign::data::{GestureLabel, PaddedSample};
use skelsign::models::{Architecture, Model, ModelKind, ModelSpec};
use skelsign::numcore::{conv2d, conv2d_backward, grad_check, Conv2dConfig, Tensor};

fn random(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn main() -> skelsign::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    // objective: sum of the conv output, so the upstream gradient is all ones
    let cfg = Conv2dConfig {
        stride: 1,
        padding: 1,
    };
    let mut params = vec![
        random(&mut rng, &[2, 5, 6]),
        random(&mut rng, &[3, 2, 3, 3]),
        random(&mut rng, &[3]),
    ];
    let err = grad_check(&mut params, 1e-6, |p| {
        let mut out = conv2d(&p[0], &p[1], &p[2], cfg)?;
        out.grad_mut().fill(1.0);
        let loss = out.values().iter().sum();
        let [x, k, b] = p else { unreachable!() };
        conv2d_backward(x, k, b, cfg, &out)?;
        Ok(Tensor::scalar(loss))
    })?;
    println!("conv2d relative error {err:.2e}");

    let arch = Architecture {
        conv_channels: vec![2, 3],
        cnn_head_hidden: 4,
        ..Architecture::default()
    };
    let mut model = Model::build(ModelSpec::new(ModelKind::Cnn, 8, 4, 0).with_arch(arch))?;
    let sample = PaddedSample {
        name: "toy".into(),
        joint_count: 4,
        t_max: 8,
        grid: (0..8 * 12).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        original_length: 8,
        label: Some(GestureLabel::Bi),
    };
    let mut params: Vec<Tensor> = model
        .named_parameters()
        .into_iter()
        .map(|(_, t)| t.clone())
        .collect();
    println!(
        "cnn: {} parameters in {} tensors",
        model.num_parameters(),
        params.len()
    );
    let err = grad_check(&mut params, 1e-5, |p| {
        for (dst, src) in model.parameters_mut().into_iter().zip(p.iter()) {
            dst.values_mut().copy_from_slice(src.values());
            dst.zero_grad();
        }
        let loss = model
            .classifier_step(&sample, GestureLabel::Bi.index(), 1.0)?
            .loss;
        for (src, dst) in model.parameters_mut().into_iter().zip(p.iter_mut()) {
            dst.grad_mut().copy_from_slice(src.grad());
        }
        Ok(Tensor::scalar(loss))
    })?;
    println!("cnn cross-entropy relative error {err:.2e}");
    Ok(())
}
