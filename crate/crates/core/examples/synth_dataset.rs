//! Generate a labelled corpus, write it as CSV files and check that the
//! classes are separable by a one-line statistic: how far each hand travels.
//!
//!     cargo run --release --example synth_dataset -- [count] [out dir]

use std::path::PathBuf;

use skelsign::data::GestureLabel;
use skelsign::synth::{generate_dataset, hand_displacements, DisplacementBaseline, SynthConfig};

fn main() -> skelsign::Result<()> {
    let mut args = std::env::args().skip(1);
    let count = args.next().map_or(111, |v| v.parse().expect("count"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/synth-example".into()));

    let cfg = SynthConfig {
        seed: 1,
        ..SynthConfig::default()
    };
    let data = generate_dataset(count, &cfg)?;
    data.write(&out)?;
    println!(
        "wrote {} sequences to {} ({} Mono, {} Bi, longest {} frames)",
        data.len(),
        out.display(),
        data.count(GestureLabel::Mono),
        data.count(GestureLabel::Bi),
        data.longest()
    );

    let roles = cfg.roles();
    for (seq, label) in data.sequences.iter().zip(&data.labels).take(6) {
        let [l, r] = hand_displacements(seq, &roles);
        println!(
            "{:<12} {label:<4} {:>3} frames  left hand {l:>7.3}  right hand {r:>7.3}",
            seq.name,
            seq.len()
        );
    }

    let baseline = DisplacementBaseline::fit(&data.sequences, &data.labels, &roles)?;
    println!(
        "displacement baseline accuracy {:.3}",
        baseline.accuracy(&data.sequences, &data.labels)
    );
    Ok(())
}
