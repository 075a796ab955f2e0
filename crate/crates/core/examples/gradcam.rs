//! Train a CNN, then check where Grad-CAM says it looks: for correctly
//! classified one-handed gestures, how often the top-10 joints of a real
//! frame include a joint of the moving hand. Exports one sample's heatmap
//! and highlight file to `target/gradcam-example/`.
//!
//!     cargo run --release --example gradcam

use std::path::Path;

use skelsign::data::{split_dataset, GestureLabel, SplitScheme};
use skelsign::gradcam::{export_result, grad_cam, DEFAULT_TOP_K};
use skelsign::models::{Model, ModelKind, ModelSpec};
use skelsign::synth::{generate_dataset, moving_hand, SynthConfig};
use skelsign::training::{predict, train_supervised, HyperParams};

fn main() -> skelsign::Result<()> {
    let seed = 1;
    let cfg = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    let data = generate_dataset(111, &cfg)?;
    let samples = data.padded(Some(100))?;
    let splits = split_dataset(&samples, SplitScheme::Sl, seed)?;
    let mut cnn = Model::build(ModelSpec::new(ModelKind::Cnn, 100, 79, seed))?;
    let hp = HyperParams {
        epochs: 20,
        seed,
        ..HyperParams::default()
    };
    let report = train_supervised(&mut cnn, &splits, &hp)?;
    println!(
        "test accuracy {:.3}",
        report.test_accuracy().unwrap_or(f64::NAN)
    );

    let roles = cfg.roles();
    let (mut hits, mut idle_hits, mut frames, mut used) = (0, 0, 0, 0);
    for (seq, sample) in data.sequences.iter().zip(&samples) {
        if sample.label != Some(GestureLabel::Mono) || predict(&cnn, sample)? != GestureLabel::Mono
        {
            continue;
        }
        let moving = moving_hand(seq, &roles);
        let hand = roles.hand(moving);
        let idle = if hand == roles.left {
            roles.right.clone()
        } else {
            roles.left.clone()
        };
        let cam = grad_cam(&cnn, sample, None, DEFAULT_TOP_K)?;
        for (top, padded) in cam.top_joints.iter().zip(&cam.padded) {
            if !padded {
                frames += 1;
                hits += usize::from(top.iter().any(|j| hand.contains(j)));
                idle_hits += usize::from(top.iter().any(|j| idle.contains(j)));
            }
        }
        if used == 0 {
            let paths = export_result(&cam, Path::new("target/gradcam-example"), &sample.name)?;
            println!(
                "wrote {} and {}",
                paths.heatmap.display(),
                paths.highlights.display()
            );
            println!(
                "frame 0 top joints: {:?} (moving hand {moving:?} = joints {hand:?})",
                cam.top_joints[0]
            );
        }
        used += 1;
    }
    println!(
        "{used} correctly classified Mono samples: moving hand in top-{DEFAULT_TOP_K} on {hits}/{frames} real frames ({:.1}%)",
        100.0 * hits as f64 / frames.max(1) as f64
    );
    println!(
        "idle hand in top-{DEFAULT_TOP_K} on {idle_hits}/{frames} real frames ({:.1}%)",
        100.0 * idle_hits as f64 / frames.max(1) as f64
    );
    Ok(())
}
