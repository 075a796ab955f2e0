use std::ops::Range;

use crate::data::{GestureLabel, SkeletonSequence};
use crate::error::{Error, Result};

use super::JointRoleMap;

/// Path length of the centroid of `joints`: `Σ_f ‖c_f − c_{f−1}‖`.
pub fn displacement(seq: &SkeletonSequence, joints: Range<usize>) -> f64 {
    let count = joints.len() as f64;
    let centroid = |f: usize| {
        let mut c = [0.0; 3];
        for j in joints.clone() {
            let p = seq.joint(f, j);
            for d in 0..3 {
                c[d] += p[d] / count;
            }
        }
        c
    };
    let mut total = 0.0;
    let mut prev = centroid(0);
    for f in 1..seq.len() {
        let cur = centroid(f);
        total += (0..3)
            .map(|d| (cur[d] - prev[d]).powi(2))
            .sum::<f64>()
            .sqrt();
        prev = cur;
    }
    total
}

/// `[D(left hand), D(right hand)]`.
pub fn hand_displacements(seq: &SkeletonSequence, roles: &JointRoleMap) -> [f64; 2] {
    [
        displacement(seq, roles.left.clone()),
        displacement(seq, roles.right.clone()),
    ]
}

/// Logistic regression on `(ln D_left, ln D_right)`: a no-learning-needed
/// sanity check that the synthetic classes are separable from motion alone.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementBaseline {
    roles: JointRoleMap,
    mean: [f64; 2],
    scale: [f64; 2],
    weights: [f64; 2],
    bias: f64,
}

const FLOOR: f64 = 1e-12;

impl DisplacementBaseline {
    fn raw(seq: &SkeletonSequence, roles: &JointRoleMap) -> [f64; 2] {
        hand_displacements(seq, roles).map(|d| d.max(FLOOR).ln())
    }

    fn features(&self, seq: &SkeletonSequence) -> [f64; 2] {
        let r = Self::raw(seq, &self.roles);
        [
            (r[0] - self.mean[0]) / self.scale[0],
            (r[1] - self.mean[1]) / self.scale[1],
        ]
    }

    /// Full-batch gradient descent on the mean log-loss of standardised features.
    pub fn fit(
        seqs: &[SkeletonSequence],
        labels: &[GestureLabel],
        roles: &JointRoleMap,
    ) -> Result<Self> {
        if seqs.is_empty() || seqs.len() != labels.len() {
            return Err(Error::Contract(format!(
                "baseline needs matching, nonempty inputs ({} sequences, {} labels)",
                seqs.len(),
                labels.len()
            )));
        }
        let raw: Vec<[f64; 2]> = seqs.iter().map(|s| Self::raw(s, roles)).collect();
        let n = raw.len() as f64;
        let mut mean = [0.0; 2];
        let mut scale = [0.0; 2];
        for d in 0..2 {
            mean[d] = raw.iter().map(|r| r[d]).sum::<f64>() / n;
            let var = raw.iter().map(|r| (r[d] - mean[d]).powi(2)).sum::<f64>() / n;
            scale[d] = var.sqrt().max(FLOOR);
        }
        let mut model = Self {
            roles: roles.clone(),
            mean,
            scale,
            weights: [0.0; 2],
            bias: 0.0,
        };
        let xs: Vec<[f64; 2]> = seqs.iter().map(|s| model.features(s)).collect();
        let ys: Vec<f64> = labels.iter().map(|l| l.index() as f64).collect();
        for _ in 0..2000 {
            let (mut gw, mut gb) = ([0.0; 2], 0.0);
            for (x, y) in xs.iter().zip(&ys) {
                let err = model.prob(x) - y;
                gw[0] += err * x[0] / n;
                gw[1] += err * x[1] / n;
                gb += err / n;
            }
            model.weights[0] -= 0.5 * gw[0];
            model.weights[1] -= 0.5 * gw[1];
            model.bias -= 0.5 * gb;
        }
        Ok(model)
    }

    fn prob(&self, x: &[f64; 2]) -> f64 {
        let z = self.weights[0] * x[0] + self.weights[1] * x[1] + self.bias;
        1.0 / (1.0 + (-z).exp())
    }

    /// Probability of the two-handed class.
    pub fn prob_bi(&self, seq: &SkeletonSequence) -> f64 {
        self.prob(&self.features(seq))
    }

    pub fn predict(&self, seq: &SkeletonSequence) -> GestureLabel {
        if self.prob_bi(seq) > 0.5 {
            GestureLabel::Bi
        } else {
            GestureLabel::Mono
        }
    }

    pub fn accuracy(&self, seqs: &[SkeletonSequence], labels: &[GestureLabel]) -> f64 {
        let hits = seqs
            .iter()
            .zip(labels)
            .filter(|(s, &l)| self.predict(s) == l)
            .count();
        hits as f64 / seqs.len().max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[[f64; 3]]) -> SkeletonSequence {
        let frames = points.iter().map(|p| p.to_vec()).collect();
        let ts = (0..points.len()).map(|f| f as f64).collect();
        SkeletonSequence::new("l", 1, frames, ts).unwrap()
    }

    #[test]
    fn displacement_is_path_length() {
        let s = line(&[[0.0, 0.0, 0.0], [3.0, 4.0, 0.0], [3.0, 4.0, 1.0]]);
        assert!((displacement(&s, 0..1) - 6.0).abs() < 1e-12);
        let still = line(&[[1.0, 1.0, 1.0]; 4]);
        assert_eq!(displacement(&still, 0..1), 0.0);
    }
}
