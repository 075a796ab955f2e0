mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skelsign::data::{
    load_dataset, parse_skeleton_csv, read_labels, write_skeleton_csv, GestureLabel,
    SkeletonSequence,
};
use skelsign::synth::{
    displacement, generate_dataset, generate_sample, hand_displacements, make_ambiguous_sample,
    moving_hand, DisplacementBaseline, Hand, SynthConfig, LABELS_FILE,
};

fn quiet() -> SynthConfig {
    SynthConfig {
        noise: 0.0,
        ..SynthConfig::default()
    }
}

/// Mean height (y) of a joint range's centroid over all frames.
fn mean_height(seq: &SkeletonSequence, joints: std::ops::Range<usize>) -> f64 {
    let n = joints.len() as f64;
    let total: f64 = (0..seq.len())
        .map(|f| joints.clone().map(|j| seq.joint(f, j)[1]).sum::<f64>() / n)
        .sum();
    total / seq.len() as f64
}

#[test]
fn moving_hands_travel_an_order_of_magnitude_further() {
    let cfg = SynthConfig::default();
    let roles = cfg.roles();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let mono = generate_sample(GestureLabel::Mono, &cfg, &mut rng).unwrap();
        let [l, r] = hand_displacements(&mono, &roles);
        let (moving, still) = if moving_hand(&mono, &roles) == Hand::Left {
            (l, r)
        } else {
            (r, l)
        };
        assert!(moving > 10.0 * still, "{moving} vs {still}");

        let bi = generate_sample(GestureLabel::Bi, &cfg, &mut rng).unwrap();
        let [l, r] = hand_displacements(&bi, &roles);
        assert!(l > 10.0 * still && r > 10.0 * still);
    }
}

#[test]
fn ambiguous_samples_share_height_but_not_motion() {
    let cfg = quiet();
    let roles = cfg.roles();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let seq = make_ambiguous_sample(&cfg, &mut rng).unwrap();
        let moving = moving_hand(&seq, &roles);
        let idle = if moving == Hand::Left {
            Hand::Right
        } else {
            Hand::Left
        };
        let (hm, hi) = (
            mean_height(&seq, roles.hand(moving)),
            mean_height(&seq, roles.hand(idle)),
        );
        assert!((hm - hi).abs() <= 0.05 * hm.abs(), "{hm} vs {hi}");
        let (dm, di) = (
            displacement(&seq, roles.hand(moving)),
            displacement(&seq, roles.hand(idle)),
        );
        assert!(di < dm / 10.0, "{di} vs {dm}");
    }
}

#[test]
fn idle_hand_rests_below_the_moving_hand() {
    let cfg = quiet();
    let roles = cfg.roles();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let seq = generate_sample(GestureLabel::Mono, &cfg, &mut rng).unwrap();
        let moving = moving_hand(&seq, &roles);
        let idle = if moving == Hand::Left {
            Hand::Right
        } else {
            Hand::Left
        };
        assert!(mean_height(&seq, roles.hand(moving)) > mean_height(&seq, roles.hand(idle)));
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let seq = generate_sample(GestureLabel::Bi, &SynthConfig::default(), &mut rng).unwrap();
    let mut buf = Vec::new();
    write_skeleton_csv(&seq, &mut buf).unwrap();
    let back = parse_skeleton_csv(&seq.name, buf.as_slice()).unwrap();
    assert_eq!(back, seq);
}

#[test]
fn written_dataset_loads_back() {
    let cfg = SynthConfig {
        seed: 5,
        ..SynthConfig::default()
    };
    let data = generate_dataset(12, &cfg).unwrap();
    let dir = tempfile::TempDir::new().unwrap();
    data.write(dir.path()).unwrap();
    let labels = read_labels(&dir.path().join(LABELS_FILE)).unwrap();
    assert_eq!(labels.len(), 12);
    let loaded = load_dataset(dir.path(), &dir.path().join(LABELS_FILE), None).unwrap();
    let padded = data.padded(None).unwrap();
    assert_eq!(loaded.len(), padded.len());
    for (a, b) in loaded.iter().zip(&padded) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.label, b.label);
        assert_eq!(a.grid, b.grid);
    }
}

#[test]
fn generation_is_seed_deterministic() {
    let cfg = SynthConfig {
        seed: 9,
        ..SynthConfig::default()
    };
    let a = generate_dataset(20, &cfg).unwrap();
    assert_eq!(a, generate_dataset(20, &cfg).unwrap());
    assert_ne!(
        a,
        generate_dataset(20, &SynthConfig { seed: 10, ..cfg }).unwrap()
    );
}

#[test]
fn displacement_baseline_separates_the_classes() {
    let cfg = SynthConfig {
        seed: 1,
        ..SynthConfig::default()
    };
    let data = generate_dataset(111, &cfg).unwrap();
    let model = DisplacementBaseline::fit(&data.sequences, &data.labels, &cfg.roles()).unwrap();
    assert!(model.accuracy(&data.sequences, &data.labels) >= 0.9);
}

#[test]
fn small_joint_counts_still_have_hands() {
    let cfg = SynthConfig {
        joint_count: 6,
        ..quiet()
    };
    let roles = cfg.roles();
    assert_eq!(roles.joint_count(), 6);
    assert!(!roles.hand(Hand::Left).is_empty() && !roles.hand(Hand::Right).is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let seq = generate_sample(GestureLabel::Mono, &cfg, &mut rng).unwrap();
    assert_eq!(seq.joint_count, 6);
}
