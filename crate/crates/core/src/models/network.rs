use crate::data::PaddedSample;
use crate::error::{Error, Result};
use crate::numcore::{
    linear, linear_backward_params, lstm_cell, lstm_cell_backward_no_input, max_pool2d_backward,
    mse_backward, softmax_cross_entropy, CrossEntropy, LstmState, LstmWeights, Tensor,
};

use super::layers::{
    decoder_backward, decoder_forward, encoder_backward, encoder_forward, glorot, mlp_backward,
    mlp_forward, Conv, DecoderStageTrace, Dense, EncoderStageTrace,
};
use super::spec::{ModelKind, ModelSpec, NUM_CLASSES};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Network {
    Fc {
        layers: Vec<Dense>,
    },
    Cnn {
        convs: Vec<Conv>,
        head: Vec<Dense>,
    },
    Lstm {
        cell: LstmWeights,
        head: Dense,
    },
    Autoencoder {
        encoder: Vec<Conv>,
        decoder: Vec<Conv>,
    },
}

/// A realised architecture with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    pub(crate) net: Network,
}

/// Logits plus the post-ReLU feature maps of the last conv layer.
#[derive(Clone, Debug)]
pub struct CnnOutput {
    pub logits: Vec<f64>,
    pub feature_maps: Tensor,
}

/// Forward state of one autoencoder pass, kept for the backward pass.
pub struct AutoencoderPass {
    input: Tensor,
    encoder: Vec<EncoderStageTrace>,
    decoder: Vec<DecoderStageTrace>,
}

impl AutoencoderPass {
    pub fn reconstruction(&self) -> &Tensor {
        self.decoder.last().expect("decoder has stages").output()
    }

    /// Flattened last pooled encoder map.
    pub fn latent(&self) -> &[f64] {
        self.encoder
            .last()
            .expect("encoder has stages")
            .pooled
            .values()
    }

    pub fn input(&self) -> &Tensor {
        &self.input
    }
}

fn conv_stack(spec: &ModelSpec) -> Vec<Conv> {
    let a = &spec.arch;
    let mut c_in = 1;
    a.conv_channels
        .iter()
        .enumerate()
        .map(|(i, &c_out)| {
            let conv = Conv::init(spec.seed, &format!("conv{i}"), c_in, c_out, a.kernel_size);
            c_in = c_out;
            conv
        })
        .collect()
}

fn dense_chain(seed: u64, prefix: &str, widths: &[usize]) -> Vec<Dense> {
    widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| Dense::init(seed, &format!("{prefix}{i}"), w[0], w[1]))
        .collect()
}

impl Model {
    /// Deterministic initialisation from `spec.seed`.
    pub fn build(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let a = &spec.arch;
        let net = match spec.kind {
            ModelKind::Fc => {
                let mut widths = vec![spec.flat_len()];
                widths.extend(&a.fc_hidden);
                widths.push(NUM_CLASSES);
                Network::Fc {
                    layers: dense_chain(spec.seed, "fc", &widths),
                }
            }
            ModelKind::Cnn => Network::Cnn {
                convs: conv_stack(&spec),
                head: dense_chain(
                    spec.seed,
                    "head",
                    &[spec.latent_len(), a.cnn_head_hidden, NUM_CLASSES],
                ),
            },
            ModelKind::Lstm => {
                let (h, i) = (a.lstm_hidden, spec.frame_width());
                let mut bias = Tensor::zeros(&[4 * h]);
                bias.values_mut()[h..2 * h]
                    .iter_mut()
                    .for_each(|b| *b = a.lstm_forget_bias);
                Network::Lstm {
                    cell: LstmWeights::new(
                        glorot(spec.seed, "lstm.input", &[4 * h, i], i, 4 * h),
                        glorot(spec.seed, "lstm.recurrent", &[4 * h, h], h, 4 * h),
                        bias,
                    )?,
                    head: Dense::init(spec.seed, "lstm_head", h, NUM_CLASSES),
                }
            }
            ModelKind::Autoencoder => {
                let ch = &a.conv_channels;
                let decoder = (0..ch.len())
                    .rev()
                    .enumerate()
                    .map(|(j, k)| {
                        let out = if k == 0 { 1 } else { ch[k - 1] };
                        Conv::init(spec.seed, &format!("decoder{j}"), ch[k], out, a.kernel_size)
                    })
                    .collect();
                Network::Autoencoder {
                    encoder: conv_stack(&spec),
                    decoder,
                }
            }
        };
        Ok(Self { spec, net })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn named_parameters(&self) -> Vec<(String, &Tensor)> {
        fn dense<'a>(prefix: &str, layers: &'a [Dense], out: &mut Vec<(String, &'a Tensor)>) {
            for (i, l) in layers.iter().enumerate() {
                out.push((format!("{prefix}{i}.weight"), &l.weight));
                out.push((format!("{prefix}{i}.bias"), &l.bias));
            }
        }
        fn conv<'a>(prefix: &str, convs: &'a [Conv], out: &mut Vec<(String, &'a Tensor)>) {
            for (i, c) in convs.iter().enumerate() {
                out.push((format!("{prefix}{i}.weight"), &c.kernels));
                out.push((format!("{prefix}{i}.bias"), &c.bias));
            }
        }
        let mut out = Vec::new();
        match &self.net {
            Network::Fc { layers } => dense("fc", layers, &mut out),
            Network::Cnn { convs, head } => {
                conv("conv", convs, &mut out);
                dense("head", head, &mut out);
            }
            Network::Lstm { cell, head } => {
                out.push(("lstm.input".into(), &cell.input));
                out.push(("lstm.recurrent".into(), &cell.recurrent));
                out.push(("lstm.bias".into(), &cell.bias));
                dense("lstm_head", std::slice::from_ref(head), &mut out);
            }
            Network::Autoencoder { encoder, decoder } => {
                conv("conv", encoder, &mut out);
                conv("decoder", decoder, &mut out);
            }
        }
        out
    }

    /// Same order as [`Model::named_parameters`].
    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        fn dense<'a>(layers: &'a mut [Dense], out: &mut Vec<&'a mut Tensor>) {
            for l in layers {
                out.push(&mut l.weight);
                out.push(&mut l.bias);
            }
        }
        fn conv<'a>(convs: &'a mut [Conv], out: &mut Vec<&'a mut Tensor>) {
            for c in convs {
                out.push(&mut c.kernels);
                out.push(&mut c.bias);
            }
        }
        let mut out = Vec::new();
        match &mut self.net {
            Network::Fc { layers } => dense(layers, &mut out),
            Network::Cnn { convs, head } => {
                conv(convs, &mut out);
                dense(head, &mut out);
            }
            Network::Lstm { cell, head } => {
                out.push(&mut cell.input);
                out.push(&mut cell.recurrent);
                out.push(&mut cell.bias);
                dense(std::slice::from_mut(head), &mut out);
            }
            Network::Autoencoder { encoder, decoder } => {
                conv(encoder, &mut out);
                conv(decoder, &mut out);
            }
        }
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.named_parameters().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        self.parameters_mut()
            .into_iter()
            .for_each(Tensor::zero_grad);
    }

    fn expect_kind(&self, kind: ModelKind, op: &str) -> Result<()> {
        if self.kind() != kind {
            return Err(Error::Contract(format!(
                "{op} requires a {kind} model, got {}",
                self.kind()
            )));
        }
        Ok(())
    }

    /// `1 × t_max × 3n` input tensor for a sample of matching geometry.
    pub fn sample_grid(&self, sample: &PaddedSample) -> Result<Tensor> {
        if sample.t_max != self.spec.t_max || sample.joint_count != self.spec.joints {
            return Err(Error::Shape(format!(
                "sample `{}` is {}×{} joints, model expects {}×{}",
                sample.name, sample.t_max, sample.joint_count, self.spec.t_max, self.spec.joints
            )));
        }
        Tensor::from_vec(
            &[1, self.spec.t_max, self.spec.frame_width()],
            sample.grid.clone(),
        )
    }

    fn check_grid(&self, grid: &Tensor) -> Result<()> {
        let expected = [1, self.spec.t_max, self.spec.frame_width()];
        if grid.shape() != expected {
            return Err(Error::Shape(format!(
                "input grid {:?}, model expects {expected:?}",
                grid.shape()
            )));
        }
        Ok(())
    }

    pub fn forward_fc(&self, flat: &[f64]) -> Result<Vec<f64>> {
        self.expect_kind(ModelKind::Fc, "forward_fc")?;
        if flat.len() != self.spec.flat_len() {
            return Err(Error::Shape(format!(
                "fc input has length {}, expected {}",
                flat.len(),
                self.spec.flat_len()
            )));
        }
        let Network::Fc { layers } = &self.net else {
            unreachable!()
        };
        let traces = mlp_forward(layers, Tensor::vector(flat.to_vec()))?;
        Ok(traces.last().expect("layers").output().values().to_vec())
    }

    pub fn forward_cnn(&self, grid: &Tensor) -> Result<CnnOutput> {
        self.expect_kind(ModelKind::Cnn, "forward_cnn")?;
        self.check_grid(grid)?;
        let Network::Cnn { convs, head } = &self.net else {
            unreachable!()
        };
        let mut stages = encoder_forward(convs, self.spec.arch.pool, grid.clone())?;
        let flat = stages.last().expect("stages").pooled.clone();
        let n = flat.len();
        let traces = mlp_forward(head, flat.reshape(&[n])?)?;
        let feature_maps = stages.pop().expect("stages").act;
        Ok(CnnOutput {
            logits: traces.last().expect("head").output().values().to_vec(),
            feature_maps,
        })
    }

    pub fn forward_lstm<F: AsRef<[f64]>>(&self, frames: &[F]) -> Result<Vec<f64>> {
        self.expect_kind(ModelKind::Lstm, "forward_lstm")?;
        let (logits, _) = self.lstm_forward_steps(frames)?;
        Ok(logits)
    }

    fn lstm_forward_steps<F: AsRef<[f64]>>(
        &self,
        frames: &[F],
    ) -> Result<(Vec<f64>, Vec<crate::numcore::LstmStep>)> {
        if frames.len() != self.spec.t_max {
            return Err(Error::Shape(format!(
                "lstm input has {} frames, expected {}",
                frames.len(),
                self.spec.t_max
            )));
        }
        let Network::Lstm { cell, head } = &self.net else {
            unreachable!()
        };
        let mut state = LstmState::zeros(cell.hidden_size());
        let mut steps = Vec::with_capacity(frames.len());
        for frame in frames {
            let step = lstm_cell(frame.as_ref(), &state, cell)?;
            state = step.next.clone();
            steps.push(step);
        }
        let logits = linear(&Tensor::vector(state.hidden), &head.weight, &head.bias)?;
        Ok((logits.into_values(), steps))
    }

    /// Returns `(reconstruction, latent)`.
    pub fn forward_autoencoder(&self, grid: &Tensor) -> Result<(Tensor, Vec<f64>)> {
        let pass = self.autoencoder_pass(grid)?;
        Ok((pass.reconstruction().clone(), pass.latent().to_vec()))
    }

    pub fn autoencoder_pass(&self, grid: &Tensor) -> Result<AutoencoderPass> {
        self.expect_kind(ModelKind::Autoencoder, "forward_autoencoder")?;
        self.check_grid(grid)?;
        let Network::Autoencoder { encoder, decoder } = &self.net else {
            unreachable!()
        };
        let enc = encoder_forward(encoder, self.spec.arch.pool, grid.clone())?;
        let sizes = self.spec.conv_sizes();
        let targets: Vec<_> = sizes[..encoder.len()].iter().rev().copied().collect();
        let dec = decoder_forward(
            decoder,
            &targets,
            enc.last().expect("stages").pooled.clone(),
        )?;
        Ok(AutoencoderPass {
            input: grid.clone(),
            encoder: enc,
            decoder: dec,
        })
    }

    /// Backpropagates `mse_scale · mse(reconstruction, input)` plus, when
    /// given, an external gradient on the latent vector.
    pub fn autoencoder_backward(
        &mut self,
        pass: &mut AutoencoderPass,
        mse_scale: f64,
        latent_grad: Option<&[f64]>,
    ) -> Result<()> {
        self.expect_kind(ModelKind::Autoencoder, "autoencoder_backward")?;
        let pool = self.spec.arch.pool;
        let Network::Autoencoder { encoder, decoder } = &mut self.net else {
            unreachable!()
        };
        let last = pass.decoder.last_mut().expect("stages");
        mse_backward(&mut last.pre, &pass.input, mse_scale)?;
        decoder_backward(decoder, &mut pass.decoder)?;
        let d_latent = pass.decoder[0].input.grad();
        let pooled = &mut pass.encoder.last_mut().expect("stages").pooled;
        pooled.grad_mut().copy_from_slice(d_latent);
        if let Some(extra) = latent_grad {
            if extra.len() != pooled.len() {
                return Err(Error::Shape(format!(
                    "latent gradient has length {}, expected {}",
                    extra.len(),
                    pooled.len()
                )));
            }
            for (g, e) in pooled.grad_mut().iter_mut().zip(extra) {
                *g += e;
            }
        }
        encoder_backward(encoder, pool, &mut pass.encoder, false)
    }

    /// Class logits for a classifier model.
    pub fn logits(&self, sample: &PaddedSample) -> Result<Vec<f64>> {
        match self.kind() {
            ModelKind::Fc => {
                self.sample_grid(sample)?;
                self.forward_fc(&sample.grid)
            }
            ModelKind::Cnn => Ok(self.forward_cnn(&self.sample_grid(sample)?)?.logits),
            ModelKind::Lstm => {
                self.sample_grid(sample)?;
                self.forward_lstm(&sample.grid.chunks(sample.width()).collect::<Vec<_>>())
            }
            ModelKind::Autoencoder => Err(Error::Contract(
                "an autoencoder has no classification logits".into(),
            )),
        }
    }

    /// One forward/backward pass of `scale · CE(logits, target)`;
    /// accumulates parameter gradients.
    pub fn classifier_step(
        &mut self,
        sample: &PaddedSample,
        target: usize,
        scale: f64,
    ) -> Result<CrossEntropy> {
        let grid = self.sample_grid(sample)?;
        let pool = self.spec.arch.pool;
        match &mut self.net {
            Network::Fc { layers } => {
                let n = grid.len();
                let mut traces = mlp_forward(layers, grid.reshape(&[n])?)?;
                let out = traces.last_mut().expect("layers").output_mut();
                let ce = softmax_cross_entropy(out.values(), target)?;
                ce.backward(out, scale);
                mlp_backward(layers, &mut traces, false)?;
                Ok(ce)
            }
            Network::Cnn { convs, head } => {
                let mut stages = encoder_forward(convs, pool, grid)?;
                let flat = stages.last().expect("stages").pooled.clone();
                let n = flat.len();
                let mut traces = mlp_forward(head, flat.reshape(&[n])?)?;
                let out = traces.last_mut().expect("head").output_mut();
                let ce = softmax_cross_entropy(out.values(), target)?;
                ce.backward(out, scale);
                let d_flat = mlp_backward(head, &mut traces, true)?.expect("input grad");
                stages
                    .last_mut()
                    .expect("stages")
                    .pooled
                    .grad_mut()
                    .copy_from_slice(&d_flat);
                encoder_backward(convs, pool, &mut stages, false)?;
                Ok(ce)
            }
            Network::Lstm { .. } => {
                let frames: Vec<&[f64]> = sample.grid.chunks(sample.width()).collect();
                let (logits, steps) = self.lstm_forward_steps(&frames)?;
                let Network::Lstm { cell, head } = &mut self.net else {
                    unreachable!()
                };
                let ce = softmax_cross_entropy(&logits, target)?;
                let last = &steps.last().expect("t_max > 0").next;
                let mut h = Tensor::vector(last.hidden.clone());
                let mut out = Tensor::vector(logits);
                ce.backward(&mut out, scale);
                linear_backward_params(&h, &mut head.weight, &mut head.bias, &out)?;
                // d hidden = headᵀ · d logits
                let width = head.weight.shape()[1];
                for (r, &d) in out.grad().iter().enumerate() {
                    for (g, &w) in h
                        .grad_mut()
                        .iter_mut()
                        .zip(&head.weight.values()[r * width..])
                    {
                        *g += d * w;
                    }
                }
                let mut d_hidden = h.grad().to_vec();
                let mut d_cell = vec![0.0; d_hidden.len()];
                for step in steps.iter().rev() {
                    let g = lstm_cell_backward_no_input(step, cell, &d_hidden, &d_cell)?;
                    d_hidden = g.hidden;
                    d_cell = g.cell;
                }
                Ok(ce)
            }
            Network::Autoencoder { .. } => Err(Error::Contract(
                "classifier_step requires a classifier model".into(),
            )),
        }
    }

    /// Gradient of one class logit w.r.t. the last conv layer's post-ReLU
    /// feature maps. Parameters are left untouched.
    pub fn cnn_class_gradient(&self, sample: &PaddedSample, class: usize) -> Result<CnnOutput> {
        self.expect_kind(ModelKind::Cnn, "gradcam")?;
        if class >= NUM_CLASSES {
            return Err(Error::Index {
                index: class,
                len: NUM_CLASSES,
            });
        }
        let grid = self.sample_grid(sample)?;
        let Network::Cnn { convs, head } = &self.net else {
            unreachable!()
        };
        let pool = self.spec.arch.pool;
        let mut stages = encoder_forward(convs, pool, grid)?;
        let mut stage = stages.pop().expect("stages");
        let n = stage.pooled.len();
        let mut head = head.clone();
        let mut traces = mlp_forward(&head, stage.pooled.clone().reshape(&[n])?)?;
        let out = traces.last_mut().expect("head").output_mut();
        let logits = out.values().to_vec();
        out.grad_mut()[class] = 1.0;
        let d_flat = mlp_backward(&mut head, &mut traces, true)?.expect("input grad");
        stage.pooled.grad_mut().copy_from_slice(&d_flat);
        max_pool2d_backward(&mut stage.act, (pool, pool), &stage.pooled)?;
        Ok(CnnOutput {
            logits,
            feature_maps: stage.act,
        })
    }
}

/// CNN classifier whose conv stack is copied from `auto`'s encoder and whose
/// dense head is freshly initialised from `head_seed`.
pub fn extract_encoder(auto: &Model, head_seed: u64) -> Result<Model> {
    let Network::Autoencoder { encoder, .. } = &auto.net else {
        return Err(Error::Contract(format!(
            "extract_encoder requires an autoencoder, got {}",
            auto.kind()
        )));
    };
    let mut spec = auto.spec.clone();
    spec.kind = ModelKind::Cnn;
    spec.seed = head_seed;
    let mut model = Model::build(spec)?;
    let Network::Cnn { convs, .. } = &mut model.net else {
        unreachable!()
    };
    for (dst, src) in convs.iter_mut().zip(encoder) {
        dst.kernels = src.kernels.clone();
        dst.bias = src.bias.clone();
        dst.kernels.zero_grad();
        dst.bias.zero_grad();
    }
    Ok(model)
}
