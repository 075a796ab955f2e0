//! Train one classifier on a freshly generated 111-sample corpus with the
//! 66/11/34 split.
//!
//!     cargo run --release --example supervised -- <fc|cnn|lstm> [epochs] [lr] [lstm forget bias]

use skelsign::data::{split_dataset, SplitScheme};
use skelsign::models::{Model, ModelKind, ModelSpec};
use skelsign::synth::{generate_dataset, SynthConfig};
use skelsign::training::{train_supervised, HyperParams};

fn main() -> skelsign::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ModelKind = args.next().as_deref().unwrap_or("cnn").parse()?;
    let epochs = args.next().map_or(20, |e| e.parse().expect("epochs"));
    let seed = 1;
    let hp = HyperParams::recommended(kind);
    let lr = args
        .next()
        .map_or(hp.learning_rate, |v| v.parse().expect("learning rate"));
    let mut spec = ModelSpec::new(kind, 100, 79, seed);
    if let Some(v) = args.next() {
        spec.arch.lstm_forget_bias = v.parse().expect("forget bias");
    }

    let data = generate_dataset(
        111,
        &SynthConfig {
            seed,
            ..SynthConfig::default()
        },
    )?;
    let samples = data.padded(Some(100))?;
    let splits = split_dataset(&samples, SplitScheme::Sl, seed)?;
    let mut model = Model::build(spec)?;
    println!("{kind}: {} parameters", model.num_parameters());

    let hp = HyperParams {
        epochs,
        seed,
        learning_rate: lr,
        ..hp
    };
    let report = train_supervised(&mut model, &splits, &hp)?;
    for e in 0..epochs {
        println!(
            "epoch {:>3}  loss {:.4}  acc {:.3}  val loss {:.4}  val acc {:.3}",
            e + 1,
            report.train_loss[e],
            report.train_accuracy[e],
            report.validation_loss[e],
            report.validation_accuracy[e]
        );
    }
    let test = report.test.as_ref().expect("test split is nonempty");
    println!(
        "test accuracy {:.4}  confusion {:?}",
        test.accuracy, test.confusion
    );
    println!("misclassified: {:?}", test.misclassified);
    println!("wall clock {:.1}s", report.wall_clock_seconds);
    Ok(())
}
