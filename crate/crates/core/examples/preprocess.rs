//! Read a directory of skeleton CSVs, zero-pad to the longest recording and
//! split it both ways.
//!
//!     cargo run --release --example preprocess -- [data dir]
//!
//! Without an argument a small corpus is generated into a temp directory.

use std::path::PathBuf;

use skelsign::data::{flatten, load_dataset, split_dataset, SplitScheme};
use skelsign::synth::{generate_dataset, SynthConfig, LABELS_FILE};

fn main() -> skelsign::Result<()> {
    let dir = match std::env::args().nth(1) {
        Some(d) => PathBuf::from(d),
        None => {
            let dir = std::env::temp_dir().join("skelsign-preprocess");
            generate_dataset(
                111,
                &SynthConfig {
                    seed: 1,
                    ..SynthConfig::default()
                },
            )?
            .write(&dir)?;
            dir
        }
    };
    let samples = load_dataset(&dir, &dir.join(LABELS_FILE), None)?;
    let first = &samples[0];
    println!(
        "{} samples, {} joints, t_max {} -> flattened length {}",
        samples.len(),
        first.joint_count,
        first.t_max,
        flatten(first).len()
    );
    let shortest = samples
        .iter()
        .min_by_key(|s| s.original_length)
        .expect("nonempty");
    println!(
        "{} has {} real frames and {} padded",
        shortest.name,
        shortest.original_length,
        shortest.t_max - shortest.original_length
    );

    for scheme in [SplitScheme::Sl, SplitScheme::Ssl] {
        let s = split_dataset(&samples, scheme, 0)?;
        println!(
            "{scheme:?}: train {} / validation {} / test {} / unsupervised {}",
            s.train.len(),
            s.validation.len(),
            s.test.len(),
            s.unsupervised.len()
        );
    }
    Ok(())
}
