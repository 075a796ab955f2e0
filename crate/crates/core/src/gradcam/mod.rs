//! Grad-CAM on the CNN: class-score gradients at the last conv layer are
//! globally averaged into channel weights, the weighted feature-map sum is
//! rectified, stretched back to the input grid, and max-pooled per joint.

mod export;

pub use export::{export_result, read_heatmap_csv, read_highlights, ExportPaths, Highlight};

use crate::data::{GestureLabel, PaddedSample};
use crate::error::{Error, Result};
use crate::models::{Model, ModelKind};
use crate::numcore::{global_avg_pool, relu, Tensor};

pub const DEFAULT_TOP_K: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCamResult {
    pub class_index: GestureLabel,
    pub logits: Vec<f64>,
    /// `H' × W'` map at the last conv layer's resolution.
    pub conv_heatmap: Tensor,
    /// `t_max × 3n`, aligned with the model input.
    pub input_heatmap: Tensor,
    /// `t_max × n`.
    pub joint_scores: Tensor,
    /// Per frame, the `k` most salient joints, most salient first.
    pub top_joints: Vec<Vec<usize>>,
    /// Frames past the end of the recording (zero padding).
    pub padded: Vec<bool>,
}

/// `ReLU(Σ_c α_c · A_c)` with `α_c` the spatial mean of `∂score/∂A_c`, read
/// from `maps.grad()`. `maps` is `C × H × W`; the result is `H × W`.
pub fn weighted_activation_map(maps: &Tensor) -> Result<Tensor> {
    let (c, h, w) = match maps.shape() {
        &[c, h, w] => (c, h, w),
        s => {
            return Err(Error::Shape(format!(
                "feature maps must be C×H×W, got {s:?}"
            )))
        }
    };
    let grads = Tensor::from_vec(maps.shape(), maps.grad().to_vec())?;
    let alpha = global_avg_pool(&grads)?;
    let mut sum = vec![0.0; h * w];
    for (ch, &a) in alpha.values().iter().enumerate().take(c) {
        let plane = &maps.values()[ch * h * w..(ch + 1) * h * w];
        for (s, &v) in sum.iter_mut().zip(plane) {
            *s += a * v;
        }
    }
    Ok(relu(&Tensor::from_vec(&[h, w], sum)?))
}

/// Grad-CAM map at the last conv layer for `class_index`'s pre-softmax logit.
pub fn compute_conv_heatmap(
    model: &Model,
    sample: &PaddedSample,
    class_index: usize,
) -> Result<Tensor> {
    weighted_activation_map(&model.cnn_class_gradient(sample, class_index)?.feature_maps)
}

/// Bilinear resize with aligned corners: the four corner values map exactly
/// onto the output corners, and a constant map stays constant.
pub fn upsample_to_input(heatmap: &Tensor, rows: usize, cols: usize) -> Result<Tensor> {
    let (h, w) = match heatmap.shape() {
        &[h, w] => (h, w),
        s => return Err(Error::Shape(format!("heatmap must be 2-D, got {s:?}"))),
    };
    if rows < h || cols < w {
        return Err(Error::Contract(format!(
            "cannot upsample {h}×{w} to the smaller {rows}×{cols}"
        )));
    }
    // source coordinate and weight for each destination index
    let axis = |dst: usize, src: usize| -> Vec<(usize, usize, f64)> {
        (0..dst)
            .map(|i| {
                if dst == 1 || src == 1 {
                    return (0, 0, 0.0);
                }
                let pos = (i * (src - 1)) as f64 / (dst - 1) as f64;
                let lo = (pos.floor() as usize).min(src - 1);
                let hi = (lo + 1).min(src - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    };
    let (ys, xs) = (axis(rows, h), axis(cols, w));
    let v = heatmap.values();
    let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
    let mut out = Vec::with_capacity(rows * cols);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            let top = lerp(v[y0 * w + x0], v[y0 * w + x1], tx);
            let bottom = lerp(v[y1 * w + x0], v[y1 * w + x1], tx);
            out.push(lerp(top, bottom, ty));
        }
    }
    Tensor::from_vec(&[rows, cols], out)
}

/// Max over each joint's (x, y, z) columns.
pub fn joint_importance(input_heatmap: &Tensor, joints: usize) -> Result<Tensor> {
    let (t, width) = match input_heatmap.shape() {
        &[t, w] => (t, w),
        s => return Err(Error::Shape(format!("heatmap must be 2-D, got {s:?}"))),
    };
    if joints == 0 || width != 3 * joints {
        return Err(Error::Shape(format!(
            "heatmap width {width} does not match {joints} joints"
        )));
    }
    let scores = input_heatmap
        .values()
        .chunks(3)
        .map(|c| c[0].max(c[1]).max(c[2]))
        .collect();
    Tensor::from_vec(&[t, joints], scores)
}

/// Per row, the indices of the `k` largest scores sorted by descending
/// score; equal scores are ordered by lower index.
pub fn top_k_joints(joint_scores: &Tensor, k: usize) -> Result<Vec<Vec<usize>>> {
    let (t, n) = match joint_scores.shape() {
        &[t, n] => (t, n),
        s => return Err(Error::Shape(format!("joint scores must be 2-D, got {s:?}"))),
    };
    if k == 0 || k > n {
        return Err(Error::Contract(format!("k must lie in 1..={n}, got {k}")));
    }
    Ok((0..t)
        .map(|f| {
            let row = &joint_scores.values()[f * n..(f + 1) * n];
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            idx.truncate(k);
            idx
        })
        .collect())
}

/// Full Grad-CAM for one sample. `class` defaults to the predicted class
/// (ties toward Mono).
pub fn grad_cam(
    model: &Model,
    sample: &PaddedSample,
    class: Option<GestureLabel>,
    k: usize,
) -> Result<GradCamResult> {
    if model.kind() != ModelKind::Cnn {
        return Err(Error::Contract(format!(
            "gradcam requires cnn, got {}",
            model.kind()
        )));
    }
    if k == 0 || k > sample.joint_count {
        return Err(Error::Contract(format!(
            "k must lie in 1..={}, got {k}",
            sample.joint_count
        )));
    }
    let predicted = {
        let l = model.logits(sample)?;
        if l[1] > l[0] {
            GestureLabel::Bi
        } else {
            GestureLabel::Mono
        }
    };
    let class_index = class.unwrap_or(predicted);
    let out = model.cnn_class_gradient(sample, class_index.index())?;
    let conv_heatmap = weighted_activation_map(&out.feature_maps)?;
    let input_heatmap = upsample_to_input(&conv_heatmap, sample.t_max, sample.width())?;
    let joint_scores = joint_importance(&input_heatmap, sample.joint_count)?;
    let top_joints = top_k_joints(&joint_scores, k)?;
    Ok(GradCamResult {
        class_index,
        logits: out.logits,
        conv_heatmap,
        input_heatmap,
        joint_scores,
        top_joints,
        padded: (0..sample.t_max)
            .map(|f| f >= sample.original_length)
            .collect(),
    })
}
