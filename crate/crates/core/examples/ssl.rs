//! Low-label comparison: a CNN trained on 5 train / 5 validation samples
//! from scratch versus the same CNN initialised from an autoencoder
//! pretrained on the remaining 101 unlabelled samples.
//!
//!     cargo run --release --example ssl -- [seeds] [pretrain epochs] [finetune epochs]

use skelsign::models::Architecture;
use skelsign::synth::{generate_dataset, SynthConfig};
use skelsign::training::{run_ssl_comparison, HyperParams};

fn main() -> skelsign::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(5, |v| v.parse().expect("seed count"));
    let pre_epochs = args.next().map_or(30, |v| v.parse().expect("epochs"));
    let sup_epochs = args.next().map_or(150, |v| v.parse().expect("epochs"));

    let data = generate_dataset(
        111,
        &SynthConfig {
            seed: 1,
            ..SynthConfig::default()
        },
    )?;
    let samples = data.padded(Some(100))?;
    let arch = Architecture::default();
    let (mut ssl_sum, mut base_sum) = (0.0, 0.0);
    for seed in 0..seeds {
        let hp_unsup = HyperParams {
            epochs: pre_epochs,
            seed,
            ..HyperParams::default()
        };
        let hp_sup = HyperParams {
            epochs: sup_epochs,
            seed,
            ..HyperParams::default()
        };
        let run = run_ssl_comparison(&samples, &arch, &hp_unsup, &hp_sup, seed)?;
        let ssl = run.ssl.test_accuracy().unwrap_or(f64::NAN);
        let base = run.baseline.test_accuracy().unwrap_or(f64::NAN);
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        println!(
            "seed {seed}: reconstruction {:.5} -> {:.5}  supervised(10% labels) {base:.4}  ssl {ssl:.4}",
            run.pretraining.train_loss.first().copied().unwrap_or(f64::NAN),
            last(&run.pretraining.train_loss),
        );
        for (name, r) in [("baseline", &run.baseline), ("ssl", &run.ssl)] {
            println!(
                "    {name:<8} train loss {:.4} acc {:.2}  val loss {:.4} acc {:.2}",
                last(&r.train_loss),
                last(&r.train_accuracy),
                last(&r.validation_loss),
                last(&r.validation_accuracy)
            );
        }
        ssl_sum += ssl;
        base_sum += base;
    }
    let n = seeds as f64;
    println!(
        "mean supervised(10% labels) {:.4}  mean ssl {:.4}",
        base_sum / n,
        ssl_sum / n
    );
    Ok(())
}
