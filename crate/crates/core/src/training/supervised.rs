use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{DatasetSplits, GestureLabel, PaddedSample};
use crate::error::{Error, Result};
use crate::models::{Model, ModelKind};
use crate::numcore::{mse_loss, softmax_cross_entropy};

use super::{contrastive_loss, Evaluation, HyperParams, Optimizer, TrainReport};

/// Shuffle generator for one epoch; the stream is the epoch index so every
/// epoch's order depends only on (seed, epoch).
fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    rng
}

fn label_of(sample: &PaddedSample) -> Result<GestureLabel> {
    sample
        .label
        .ok_or_else(|| Error::Contract(format!("sample `{}` has no label", sample.name)))
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Predicted class; ties go to class 0 (Mono).
pub fn predict(model: &Model, sample: &PaddedSample) -> Result<GestureLabel> {
    GestureLabel::from_index(argmax_first(&model.logits(sample)?))
}

pub fn evaluate(model: &Model, samples: &[PaddedSample]) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(Error::Contract(
            "cannot evaluate on an empty sample list".into(),
        ));
    }
    let mut confusion = [[0usize; 2]; 2];
    let mut misclassified = Vec::new();
    let mut loss = 0.0;
    for s in samples {
        let actual = label_of(s)?.index();
        let logits = model.logits(s)?;
        loss += softmax_cross_entropy(&logits, actual)?.loss;
        let predicted = argmax_first(&logits);
        confusion[actual][predicted] += 1;
        if predicted != actual {
            misclassified.push(s.name.clone());
        }
    }
    let n = samples.len();
    Ok(Evaluation {
        accuracy: (confusion[0][0] + confusion[1][1]) as f64 / n as f64,
        loss: loss / n as f64,
        confusion,
        misclassified,
    })
}

/// Mini-batch training on softmax cross-entropy. The test split is
/// evaluated once, after the last epoch.
pub fn train_supervised(
    model: &mut Model,
    splits: &DatasetSplits,
    hp: &HyperParams,
) -> Result<TrainReport> {
    hp.validate()?;
    if model.kind() == ModelKind::Autoencoder {
        return Err(Error::Contract(
            "train_supervised requires a classifier".into(),
        ));
    }
    if splits.train.is_empty() {
        return Err(Error::Contract("training split is empty".into()));
    }
    let targets = splits
        .train
        .iter()
        .map(|s| label_of(s).map(GestureLabel::index))
        .collect::<Result<Vec<_>>>()?;
    for s in splits.validation.iter().chain(&splits.test) {
        label_of(s)?;
    }

    let start = Instant::now();
    let mut opt = Optimizer::new(hp);
    let mut report = TrainReport {
        model: model.kind().to_string(),
        seed: hp.seed,
        epochs: hp.epochs,
        train_size: splits.train.len(),
        validation_size: splits.validation.len(),
        test_size: splits.test.len(),
        train_loss: Vec::with_capacity(hp.epochs),
        train_accuracy: Vec::with_capacity(hp.epochs),
        validation_loss: Vec::with_capacity(hp.epochs),
        validation_accuracy: Vec::with_capacity(hp.epochs),
        test_validation_accuracy: None,
        test: None,
        wall_clock_seconds: 0.0,
    };

    let mut order: Vec<usize> = (0..splits.train.len()).collect();
    for epoch in 0..hp.epochs {
        order.sort_unstable();
        order.shuffle(&mut epoch_rng(hp.seed, epoch));
        let (mut loss, mut correct) = (0.0, 0usize);
        for batch in order.chunks(hp.batch_size) {
            model.zero_grad();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let ce = model.classifier_step(&splits.train[i], targets[i], scale)?;
                loss += ce.loss;
                correct += usize::from(argmax_first(&ce.probs) == targets[i]);
            }
            opt.step(&mut model.parameters_mut());
        }
        let n = splits.train.len() as f64;
        report.train_loss.push(loss / n);
        report.train_accuracy.push(correct as f64 / n);
        if !splits.validation.is_empty() {
            let val = evaluate(model, &splits.validation)?;
            report.validation_loss.push(val.loss);
            report.validation_accuracy.push(val.accuracy);
        }
    }

    if !splits.test.is_empty() {
        let test = evaluate(model, &splits.test)?;
        let mut correct = test.correct();
        let mut total = test.total();
        if !splits.validation.is_empty() {
            let val = evaluate(model, &splits.validation)?;
            correct += val.correct();
            total += val.total();
        }
        report.test_validation_accuracy = Some(correct as f64 / total as f64);
        report.test = Some(test);
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Pairs of same-label indices, shuffled and packed into batches so that
/// every batch holds a positive pair when the data allows it. The last batch
/// may exceed `batch_size` by up to two unpaired samples.
fn balanced_batches(
    labels: &[GestureLabel],
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let mut units: Vec<Vec<usize>> = Vec::new();
    for class in GestureLabel::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        units.extend(idx.chunks(2).map(<[usize]>::to_vec));
    }
    units.shuffle(rng);
    // singletons go last so they can join a batch that already has a pair
    units.sort_by_key(|u| u.len() == 1);
    let mut batches: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    for unit in units {
        if !current.is_empty() && current.len() + unit.len() > batch_size.max(2) {
            batches.push(std::mem::take(&mut current));
        }
        current.extend(unit);
    }
    if !current.is_empty() {
        let has_pair = GestureLabel::ALL
            .iter()
            .any(|&c| current.iter().filter(|&&i| labels[i] == c).count() >= 2);
        match batches.last_mut() {
            // at most one leftover per class, so the overflow is bounded
            Some(prev) if !has_pair => prev.extend(current),
            _ => batches.push(current),
        }
    }
    batches
}

/// Reconstruction pretraining: minimises `mse(recon, input)` per sample plus,
/// when `contrastive_weight > 0`, `λ ·` the contrastive loss of each batch's
/// latents. Only the loss curve is filled in.
pub fn train_reconstruction(
    auto: &mut Model,
    samples: &[PaddedSample],
    hp: &HyperParams,
) -> Result<TrainReport> {
    hp.validate()?;
    if auto.kind() != ModelKind::Autoencoder {
        return Err(Error::Contract(
            "train_reconstruction requires an autoencoder".into(),
        ));
    }
    if samples.is_empty() {
        return Err(Error::Contract(
            "cannot pretrain on an empty dataset".into(),
        ));
    }
    let lambda = hp.contrastive_weight;
    let labels = if lambda > 0.0 {
        samples.iter().map(label_of).collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let grids = samples
        .iter()
        .map(|s| auto.sample_grid(s))
        .collect::<Result<Vec<_>>>()?;

    let start = Instant::now();
    let mut opt = Optimizer::new(hp);
    let mut train_loss = Vec::with_capacity(hp.epochs);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in 0..hp.epochs {
        let mut rng = epoch_rng(hp.seed, epoch);
        let batches = if lambda > 0.0 {
            balanced_batches(&labels, hp.batch_size, &mut rng)
        } else {
            order.sort_unstable();
            order.shuffle(&mut rng);
            order.chunks(hp.batch_size).map(<[usize]>::to_vec).collect()
        };
        let mut total = 0.0;
        for batch in &batches {
            auto.zero_grad();
            let scale = 1.0 / batch.len() as f64;
            if lambda > 0.0 {
                let mut passes = batch
                    .iter()
                    .map(|&i| auto.autoencoder_pass(&grids[i]))
                    .collect::<Result<Vec<_>>>()?;
                let batch_labels: Vec<_> = batch.iter().map(|&i| labels[i]).collect();
                let latents: Vec<&[f64]> = passes.iter().map(|p| p.latent()).collect();
                let term = match contrastive_loss(&latents, &batch_labels, hp.temperature) {
                    Ok(c) => Some(c),
                    // a batch without a positive pair contributes no contrastive term
                    Err(Error::Contract(msg)) if msg.contains("positive pair") => None,
                    Err(e) => return Err(e),
                };
                if let Some(c) = &term {
                    total += lambda * c.loss * batch.len() as f64;
                }
                for (k, pass) in passes.iter_mut().enumerate() {
                    total += mse_loss(pass.reconstruction(), &grids[batch[k]])?;
                    let extra: Option<Vec<f64>> = term
                        .as_ref()
                        .map(|c| c.grads[k].iter().map(|g| lambda * g).collect());
                    auto.autoencoder_backward(pass, scale, extra.as_deref())?;
                }
            } else {
                for &i in batch {
                    let mut pass = auto.autoencoder_pass(&grids[i])?;
                    total += mse_loss(pass.reconstruction(), &grids[i])?;
                    auto.autoencoder_backward(&mut pass, scale, None)?;
                }
            }
            opt.step(&mut auto.parameters_mut());
        }
        train_loss.push(total / samples.len() as f64);
    }
    Ok(TrainReport {
        model: auto.kind().to_string(),
        seed: hp.seed,
        epochs: hp.epochs,
        train_size: samples.len(),
        validation_size: 0,
        test_size: 0,
        train_loss,
        train_accuracy: Vec::new(),
        validation_loss: Vec::new(),
        validation_accuracy: Vec::new(),
        test_validation_accuracy: None,
        test: None,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}
