use crate::data::{split_dataset, DatasetSplits, PaddedSample, SplitScheme};
use crate::error::{Error, Result};
use crate::models::{extract_encoder, Architecture, Model, ModelKind, ModelSpec};

use super::{train_reconstruction, train_supervised, HyperParams, TrainReport};

/// SSL run and its matched low-label baseline on the same split.
#[derive(Clone, Debug, PartialEq)]
pub struct SslComparison {
    pub splits: DatasetSplits,
    pub pretraining: TrainReport,
    pub ssl: TrainReport,
    pub baseline: TrainReport,
}

fn geometry(samples: &[PaddedSample]) -> Result<(usize, usize)> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Insufficient("no samples".into()))?;
    Ok((first.t_max, first.joint_count))
}

fn pipeline(
    samples: &[PaddedSample],
    arch: &Architecture,
    hp_unsup: &HyperParams,
    hp_sup: &HyperParams,
    seed: u64,
) -> Result<(DatasetSplits, TrainReport, TrainReport)> {
    let splits = split_dataset(samples, SplitScheme::Ssl, seed)?;
    let (t_max, joints) = geometry(samples)?;
    let spec = ModelSpec::new(ModelKind::Autoencoder, t_max, joints, seed).with_arch(arch.clone());
    let mut auto = Model::build(spec)?;
    // the pretext task never sees labels unless the contrastive term needs them
    let unlabelled: Vec<PaddedSample> = if hp_unsup.contrastive_weight > 0.0 {
        splits.unsupervised.clone()
    } else {
        splits
            .unsupervised
            .iter()
            .map(|s| s.clone().with_label(None))
            .collect()
    };
    let pretraining = train_reconstruction(&mut auto, &unlabelled, hp_unsup)?;
    let mut classifier = extract_encoder(&auto, seed)?;
    let downstream = train_supervised(&mut classifier, &splits, hp_sup)?;
    Ok((splits, pretraining, downstream))
}

/// Splits with the SSL scheme, pretrains an autoencoder on the unsupervised
/// set, transplants its encoder into a CNN and fine-tunes on the 5/5
/// labelled splits. Returns (pretraining, downstream) reports.
///
/// All models derive their initialisation from `seed`, so with zero
/// pretraining epochs the downstream run matches a plain CNN trained from
/// `seed` on the same split.
pub fn run_ssl_pipeline(
    samples: &[PaddedSample],
    arch: &Architecture,
    hp_unsup: &HyperParams,
    hp_sup: &HyperParams,
    seed: u64,
) -> Result<(TrainReport, TrainReport)> {
    let (_, pretraining, downstream) = pipeline(samples, arch, hp_unsup, hp_sup, seed)?;
    Ok((pretraining, downstream))
}

/// [`run_ssl_pipeline`] plus a randomly initialised CNN trained on the same
/// labelled splits with the same hyperparameters.
pub fn run_ssl_comparison(
    samples: &[PaddedSample],
    arch: &Architecture,
    hp_unsup: &HyperParams,
    hp_sup: &HyperParams,
    seed: u64,
) -> Result<SslComparison> {
    let (splits, pretraining, ssl) = pipeline(samples, arch, hp_unsup, hp_sup, seed)?;
    let (t_max, joints) = geometry(samples)?;
    let spec = ModelSpec::new(ModelKind::Cnn, t_max, joints, seed).with_arch(arch.clone());
    let mut cnn = Model::build(spec)?;
    let baseline = train_supervised(&mut cnn, &splits, hp_sup)?;
    Ok(SslComparison {
        splits,
        pretraining,
        ssl,
        baseline,
    })
}
