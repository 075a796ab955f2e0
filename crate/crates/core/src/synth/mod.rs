//! Synthetic one-handed / two-handed gesture generator.
//!
//! Joint roles for the default 79-joint rig: joints 0..39 are the body
//! (torso, legs, head), 39..59 the left hand and 59..79 the right hand. Body
//! joints hold a fixed pose with sensor noise. A moving hand is raised and
//! traces a sinusoidal 3D loop; an idle hand hangs low and only jitters.
//!
//! Coordinates are root-relative: the pelvis sits at the origin, feet at
//! y = −0.8 and the head at y = +0.8.

mod baseline;

pub use baseline::{displacement, hand_displacements, DisplacementBaseline};

use std::fs;
use std::ops::Range;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{
    pad_sequence, write_labels, write_skeleton_csv, GestureLabel, PaddedSample, SkeletonSequence,
};
use crate::error::{Error, Result};

pub const LABELS_FILE: &str = "labels.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub joint_count: usize,
    pub min_frames: usize,
    pub max_frames: usize,
    /// Standard deviation of per-coordinate sensor noise.
    pub noise: f64,
    /// Radius of the hand loop.
    pub amplitude: f64,
    pub frame_rate: f64,
    /// Share of Mono samples in a generated dataset.
    pub mono_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            joint_count: 79,
            min_frames: 40,
            max_frames: 100,
            noise: 0.01,
            amplitude: 1.0,
            frame_rate: 120.0,
            mono_fraction: 0.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Contract(format!("invalid synth config: {m}")));
        if self.joint_count < 3 {
            return bad("need at least 3 joints");
        }
        if self.min_frames < 2 || self.min_frames > self.max_frames {
            return bad("need 2 ≤ min_frames ≤ max_frames");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be finite and nonnegative");
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return bad("amplitude must be positive");
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return bad("frame_rate must be positive");
        }
        if !(0.0..=1.0).contains(&self.mono_fraction) {
            return bad("mono_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn roles(&self) -> JointRoleMap {
        JointRoleMap::for_joints(self.joint_count)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hand {
    Left,
    Right,
}

/// Partition of joint indices into body, left hand and right hand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointRoleMap {
    pub rest: Range<usize>,
    pub left: Range<usize>,
    pub right: Range<usize>,
}

impl JointRoleMap {
    /// Each hand gets ~20/79 of the joints (at least one); the body takes
    /// the leading indices.
    pub fn for_joints(n: usize) -> Self {
        let hand = (n * 20 / 79).max(1);
        let rest = n - 2 * hand;
        Self {
            rest: 0..rest,
            left: rest..rest + hand,
            right: rest + hand..n,
        }
    }

    pub fn hand(&self, hand: Hand) -> Range<usize> {
        match hand {
            Hand::Left => self.left.clone(),
            Hand::Right => self.right.clone(),
        }
    }

    pub fn joint_count(&self) -> usize {
        self.right.end
    }
}

const IDLE_HEIGHT: f64 = -0.1;
/// Loop centre height above the idle height, in units of amplitude plus a
/// fixed gap, so a moving hand never dips to the idle hand's level.
const RAISE_GAP: f64 = 0.4;

/// Fixed body pose: a column of joints spread over the torso height.
fn body_position(j: usize, rest: usize) -> [f64; 3] {
    let h = -0.8 + 1.6 * j as f64 / rest.max(1) as f64;
    [0.1 * ((j % 5) as f64 - 2.0), h, 0.05 * ((j % 3) as f64)]
}

/// Joint `k` of a hand relative to the wrist; a 5-wide finger fan.
fn finger_offset(k: usize) -> [f64; 3] {
    [
        0.02 * (k % 5) as f64,
        -0.03 * (k / 5) as f64,
        0.01 * (k % 2) as f64,
    ]
}

fn raised_height(cfg: &SynthConfig) -> f64 {
    IDLE_HEIGHT + RAISE_GAP + 0.5 * cfg.amplitude
}

fn wrist(hand: Hand, height: f64) -> [f64; 3] {
    let x = match hand {
        Hand::Left => -0.35,
        Hand::Right => 0.35,
    };
    [x, height, 0.2]
}

/// Sinusoidal loop: an ellipse with semi-axes `a` (horizontal) and `a/2`
/// (vertical) plus a depth oscillation at twice the frequency.
#[derive(Clone, Copy, Debug)]
struct Arc {
    omega: f64,
    phase: f64,
    amplitude: f64,
}

impl Arc {
    fn sample(rng: &mut impl Rng, amplitude: f64) -> Self {
        Self {
            omega: 2.0 * std::f64::consts::PI * rng.gen_range(1.5..2.5),
            phase: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
            amplitude,
        }
    }

    fn offset(&self, t: f64) -> [f64; 3] {
        let th = self.omega * t + self.phase;
        let a = self.amplitude;
        [a * th.cos(), 0.5 * a * th.sin(), 0.3 * a * (2.0 * th).sin()]
    }
}

enum HandMotion {
    Idle { height: f64 },
    Moving(Arc),
}

fn render(
    cfg: &SynthConfig,
    name: &str,
    frames: usize,
    left: HandMotion,
    right: HandMotion,
    rng: &mut ChaCha8Rng,
) -> SkeletonSequence {
    let roles = cfg.roles();
    let noise = Normal::new(0.0, cfg.noise).expect("validated noise");
    let mut jitter = |v: f64| {
        if cfg.noise > 0.0 {
            v + noise.sample(rng)
        } else {
            v
        }
    };
    let timestamps: Vec<f64> = (0..frames).map(|f| f as f64 / cfg.frame_rate).collect();
    let mut out = Vec::with_capacity(frames);
    for &t in &timestamps {
        let mut row = Vec::with_capacity(3 * cfg.joint_count);
        for j in roles.rest.clone() {
            row.extend(body_position(j, roles.rest.len()));
        }
        for (hand, motion) in [(Hand::Left, &left), (Hand::Right, &right)] {
            let base = match motion {
                HandMotion::Idle { height } => wrist(hand, *height),
                HandMotion::Moving(arc) => {
                    let w = wrist(hand, raised_height(cfg));
                    let o = arc.offset(t);
                    [w[0] + o[0], w[1] + o[1], w[2] + o[2]]
                }
            };
            for k in 0..roles.hand(hand).len() {
                let f = finger_offset(k);
                row.extend([base[0] + f[0], base[1] + f[1], base[2] + f[2]]);
            }
        }
        out.push(row.into_iter().map(&mut jitter).collect());
    }
    SkeletonSequence::new(name, cfg.joint_count, out, timestamps)
        .expect("generator emits valid sequences")
}

/// One gesture. Mono moves a randomly chosen hand; Bi moves both with
/// independent frequencies and phases.
pub fn generate_sample(
    class: GestureLabel,
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SkeletonSequence> {
    cfg.validate()?;
    let frames = rng.gen_range(cfg.min_frames..=cfg.max_frames);
    let (left, right) = match class {
        GestureLabel::Mono => {
            let arc = HandMotion::Moving(Arc::sample(rng, cfg.amplitude));
            let idle = HandMotion::Idle {
                height: IDLE_HEIGHT,
            };
            if rng.gen_bool(0.5) {
                (arc, idle)
            } else {
                (idle, arc)
            }
        }
        GestureLabel::Bi => (
            HandMotion::Moving(Arc::sample(rng, cfg.amplitude)),
            HandMotion::Moving(Arc::sample(rng, cfg.amplitude)),
        ),
    };
    Ok(render(cfg, "gesture", frames, left, right, rng))
}

/// Hand that moves in a Mono sample: the one with the larger displacement.
pub fn moving_hand(seq: &SkeletonSequence, roles: &JointRoleMap) -> Hand {
    let [l, r] = hand_displacements(seq, roles);
    if l >= r {
        Hand::Left
    } else {
        Hand::Right
    }
}

/// A Mono gesture whose idle hand is held at the moving hand's mean height,
/// so posture alone looks two-handed.
pub fn make_ambiguous_sample(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<SkeletonSequence> {
    cfg.validate()?;
    let frames = rng.gen_range(cfg.min_frames..=cfg.max_frames);
    let arc = Arc::sample(rng, cfg.amplitude);
    let mean_offset = (0..frames)
        .map(|f| arc.offset(f as f64 / cfg.frame_rate)[1])
        .sum::<f64>()
        / frames as f64;
    let idle = HandMotion::Idle {
        height: raised_height(cfg) + mean_offset,
    };
    let moving = HandMotion::Moving(arc);
    Ok(if rng.gen_bool(0.5) {
        render(cfg, "ambiguous", frames, moving, idle, rng)
    } else {
        render(cfg, "ambiguous", frames, idle, moving, rng)
    })
}

/// A generated, labelled corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthDataset {
    pub sequences: Vec<SkeletonSequence>,
    pub labels: Vec<GestureLabel>,
}

impl SynthDataset {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn longest(&self) -> usize {
        self.sequences
            .iter()
            .map(SkeletonSequence::len)
            .max()
            .unwrap_or(0)
    }

    pub fn count(&self, label: GestureLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Zero-padded samples; `t_max` defaults to the longest sequence.
    pub fn padded(&self, t_max: Option<usize>) -> Result<Vec<PaddedSample>> {
        let t_max = t_max.unwrap_or_else(|| self.longest());
        self.sequences
            .iter()
            .zip(&self.labels)
            .map(|(s, &l)| Ok(pad_sequence(s, t_max)?.with_label(Some(l))))
            .collect()
    }

    /// Writes `<name>.csv` per sequence plus `labels.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for seq in &self.sequences {
            let path = dir.join(format!("{}.csv", seq.name));
            let mut buf = Vec::new();
            write_skeleton_csv(seq, &mut buf).map_err(|e| Error::io(&path, e))?;
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join(LABELS_FILE);
        write_labels(
            &path,
            self.sequences
                .iter()
                .map(|s| s.name.as_str())
                .zip(self.labels.iter().copied()),
        )
    }
}

/// `count` gestures with `round(count · mono_fraction)` Mono samples in
/// shuffled order, named `gesture_000`, `gesture_001`, ….
pub fn generate_dataset(count: usize, cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    if count < 2 {
        return Err(Error::Contract(format!(
            "dataset needs at least 2 samples, got {count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mono = (count as f64 * cfg.mono_fraction).round() as usize;
    let mut labels: Vec<GestureLabel> = (0..count)
        .map(|i| {
            if i < mono {
                GestureLabel::Mono
            } else {
                GestureLabel::Bi
            }
        })
        .collect();
    labels.shuffle(&mut rng);
    let width = count.saturating_sub(1).to_string().len().max(3);
    let sequences = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let mut s = generate_sample(l, cfg, &mut rng)?;
            s.name = format!("gesture_{i:0width$}");
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(SynthDataset { sequences, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn default_roles_partition_79_joints() {
        let r = JointRoleMap::for_joints(79);
        assert_eq!(
            (r.rest.clone(), r.left.clone(), r.right.clone()),
            (0..39, 39..59, 59..79)
        );
        let small = JointRoleMap::for_joints(3);
        assert_eq!(
            (small.rest.len(), small.left.len(), small.right.len()),
            (1, 1, 1)
        );
    }

    #[test]
    fn noiseless_idle_hand_is_constant() {
        let cfg = SynthConfig {
            noise: 0.0,
            ..SynthConfig::default()
        };
        let roles = cfg.roles();
        for _ in 0..5 {
            let s = generate_sample(GestureLabel::Mono, &cfg, &mut rng()).unwrap();
            let idle = match moving_hand(&s, &roles) {
                Hand::Left => roles.right.clone(),
                Hand::Right => roles.left.clone(),
            };
            for f in 1..s.len() {
                for j in idle.clone() {
                    assert_eq!(s.joint(f, j), s.joint(0, j));
                }
            }
        }
    }

    #[test]
    fn noiseless_bi_moves_both_hands_every_frame() {
        let cfg = SynthConfig {
            noise: 0.0,
            ..SynthConfig::default()
        };
        let roles = cfg.roles();
        let s = generate_sample(GestureLabel::Bi, &cfg, &mut rng()).unwrap();
        for f in 1..s.len() {
            for hand in [&roles.left, &roles.right] {
                let a = s.joint(f, hand.start);
                let b = s.joint(f - 1, hand.start);
                assert!(a != b);
            }
        }
    }

    #[test]
    fn durations_and_timestamps() {
        let cfg = SynthConfig::default();
        let mut r = rng();
        for _ in 0..50 {
            let s = generate_sample(GestureLabel::Bi, &cfg, &mut r).unwrap();
            assert!((40..=100).contains(&s.len()));
            assert!((s.timestamps[1] - 1.0 / 120.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dataset_balance_and_names() {
        let ds = generate_dataset(111, &SynthConfig::default()).unwrap();
        assert_eq!(ds.len(), 111);
        assert_eq!(ds.count(GestureLabel::Mono), 56);
        assert_eq!(ds.sequences[7].name, "gesture_007");
        assert!(generate_dataset(1, &SynthConfig::default()).is_err());
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            SynthConfig {
                joint_count: 2,
                ..SynthConfig::default()
            },
            SynthConfig {
                min_frames: 50,
                max_frames: 40,
                ..SynthConfig::default()
            },
            SynthConfig {
                noise: -1.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                mono_fraction: 1.5,
                ..SynthConfig::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
