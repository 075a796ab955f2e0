use crate::data::GestureLabel;
use crate::error::{Error, Result};
use crate::numcore::softmax;

/// Loss value plus its gradient with respect to every latent vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Contrastive {
    pub loss: f64,
    pub grads: Vec<Vec<f64>>,
}

/// Label-selected (supervised) contrastive loss over cosine similarities.
///
/// For each anchor with at least one same-label partner, the loss is the
/// mean negative log-probability of its positives under a softmax over all
/// other samples, with logits `cos / τ`. Anchors without a positive are
/// skipped; the result is the mean over the remaining anchors.
pub fn contrastive_loss<V: AsRef<[f64]>>(
    latents: &[V],
    labels: &[GestureLabel],
    temperature: f64,
) -> Result<Contrastive> {
    let n = latents.len();
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{n} latents but {} labels",
            labels.len()
        )));
    }
    if n < 2 {
        return Err(Error::Contract(
            "contrastive loss needs at least 2 samples".into(),
        ));
    }
    if !(temperature > 0.0) {
        return Err(Error::Contract(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let dim = latents[0].as_ref().len();
    let mut unit = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    for (i, z) in latents.iter().enumerate() {
        let z = z.as_ref();
        if z.len() != dim {
            return Err(Error::Shape(format!(
                "latent {i} has length {}, expected {dim}",
                z.len()
            )));
        }
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Contract(format!("latent {i} is zero or non-finite")));
        }
        norms.push(norm);
        unit.push(z.iter().map(|v| v / norm).collect::<Vec<_>>());
    }
    let sim =
        |i: usize, j: usize| -> f64 { unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum() };
    let anchors: Vec<usize> = (0..n)
        .filter(|&i| (0..n).any(|j| j != i && labels[j] == labels[i]))
        .collect();
    if anchors.is_empty() {
        return Err(Error::Contract("batch has no positive pair".into()));
    }
    let m = anchors.len() as f64;

    // d loss / d s_ij, accumulated per anchor
    let mut ds = vec![vec![0.0; n]; n];
    let mut loss = 0.0;
    for &i in &anchors {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let logits: Vec<f64> = others.iter().map(|&j| sim(i, j) / temperature).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        let probs = softmax(&logits);
        let positives = others.iter().filter(|&&j| labels[j] == labels[i]).count() as f64;
        let mut pos_mean = 0.0;
        for (k, &j) in others.iter().enumerate() {
            let is_pos = labels[j] == labels[i];
            if is_pos {
                pos_mean += logits[k] / positives;
            }
            let target = if is_pos { 1.0 / positives } else { 0.0 };
            ds[i][j] += (probs[k] - target) / (temperature * m);
        }
        loss += (lse - pos_mean) / m;
    }

    let mut d_unit = vec![vec![0.0; dim]; n];
    for i in 0..n {
        for j in 0..n {
            let g = ds[i][j];
            if g == 0.0 {
                continue;
            }
            for d in 0..dim {
                d_unit[i][d] += g * unit[j][d];
                d_unit[j][d] += g * unit[i][d];
            }
        }
    }
    // project out the radial component: d(z/|z|)/dz = (I − ẑẑᵀ)/|z|
    let grads = (0..n)
        .map(|i| {
            let radial: f64 = d_unit[i].iter().zip(&unit[i]).map(|(a, b)| a * b).sum();
            d_unit[i]
                .iter()
                .zip(&unit[i])
                .map(|(g, u)| (g - radial * u) / norms[i])
                .collect()
        })
        .collect();
    Ok(Contrastive { loss, grads })
}
