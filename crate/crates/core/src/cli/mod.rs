//! `skelsign` command line: `synth`, `train`, `ssl`, `gradcam`, `eval`.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{
    load_dataset, pad_sequence, read_sequence, split_dataset, GestureLabel, PaddedSample,
    SplitScheme,
};
use crate::error::Error;
use crate::gradcam::{export_result, grad_cam, DEFAULT_TOP_K};
use crate::models::{load_checkpoint, save_checkpoint, Architecture, Model, ModelKind, ModelSpec};
use crate::synth::{generate_dataset, SynthConfig, LABELS_FILE};
use crate::training::{
    evaluate, run_ssl_comparison, train_supervised, Evaluation, HyperParams, OptimizerKind,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "skelsign",
    version,
    about = "Hand-gesture recognition on 3D skeleton sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic labelled corpus.
    Synth(SynthArgs),
    /// Train a classifier and write its report and checkpoint.
    Train(TrainArgs),
    /// Autoencoder pretraining + fine-tuning vs. the matched low-label baseline.
    Ssl(SslArgs),
    /// Grad-CAM heatmap and per-frame top joints for one sample.
    Gradcam(GradcamArgs),
    /// Evaluate a checkpoint on a labelled directory.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct SeedArg {
    /// Master seed; falls back to $SKELSIGN_SEED, then 0.
    #[arg(long, env = "SKELSIGN_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 111)]
    pub count: usize,
    #[arg(long, default_value_t = 79)]
    pub joints: usize,
    #[arg(long, default_value = "data")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Directory of skeleton CSV files.
    #[arg(long)]
    pub data: PathBuf,
    /// Label file; defaults to `<data>/labels.csv`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

impl DataArgs {
    fn labels(&self) -> PathBuf {
        self.labels
            .clone()
            .unwrap_or_else(|| self.data.join(LABELS_FILE))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Fc,
    Cnn,
    Lstm,
}

impl From<ClassifierArg> for ModelKind {
    fn from(k: ClassifierArg) -> Self {
        match k {
            ClassifierArg::Fc => ModelKind::Fc,
            ClassifierArg::Cnn => ModelKind::Cnn,
            ClassifierArg::Lstm => ModelKind::Lstm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Sl,
    Ssl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Args, Debug)]
pub struct HpArgs {
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    /// Defaults to 1e-4 for fc and 1e-3 otherwise.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
}

impl HpArgs {
    fn hyper_params(&self, kind: ModelKind, seed: u64) -> HyperParams {
        let base = HyperParams::recommended(kind);
        HyperParams {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr.unwrap_or(base.learning_rate),
            optimizer: match self.optimizer {
                OptimizerArg::Adam => OptimizerKind::adam(),
                OptimizerArg::Sgd => OptimizerKind::Sgd,
            },
            seed,
            ..base
        }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ClassifierArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Sl)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub data: DataArgs,
    /// Padded length; defaults to the longest sequence.
    #[arg(long)]
    pub t_max: Option<usize>,
    #[command(flatten)]
    pub hp: HpArgs,
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct SslArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Reconstruction epochs on the unlabelled set.
    #[arg(long, default_value_t = 30)]
    pub pretrain_epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub pretrain_lr: f64,
    /// Weight λ of the contrastive term during pretraining (uses labels).
    #[arg(long, default_value_t = 0.0)]
    pub contrastive_weight: f64,
    #[arg(long, default_value_t = 0.5)]
    pub temperature: f64,
    #[command(flatten)]
    pub hp: HpArgs,
    #[arg(long, default_value = "ssl-run")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Mono,
    Bi,
}

#[derive(Args, Debug)]
pub struct GradcamArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Skeleton CSV of the sample to explain.
    #[arg(long)]
    pub sample: PathBuf,
    /// Class to explain; defaults to the predicted class.
    #[arg(long, value_enum)]
    pub class: Option<ClassArg>,
    /// Joints highlighted per frame [default: 10, or the joint count if smaller].
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "gradcam")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub seed: SeedArg,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(Error::Format(format!("cannot write output: {e}")))
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Ssl(a) => cmd_ssl(a, out),
        Command::Gradcam(a) => cmd_gradcam(a, out),
        Command::Eval(a) => cmd_eval(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn create_dir(dir: &Path) -> std::result::Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load(data: &DataArgs, t_max: Option<usize>) -> std::result::Result<Vec<PaddedSample>, Failure> {
    let samples = load_dataset(&data.data, &data.labels(), t_max)?;
    if samples.is_empty() {
        return Err(Failure::Usage(format!(
            "no skeleton CSV files in {}",
            data.data.display()
        )));
    }
    Ok(samples)
}

fn print_evaluation(out: &mut dyn Write, prefix: &str, e: &Evaluation) -> std::io::Result<()> {
    writeln!(out, "{prefix}accuracy = {:.4}", e.accuracy)?;
    writeln!(
        out,
        "{prefix}confusion (rows actual Mono/Bi, cols predicted Mono/Bi):"
    )?;
    for (label, row) in ["Mono", "Bi"].iter().zip(&e.confusion) {
        writeln!(out, "  {label:<4} {:>4} {:>4}", row[0], row[1])?;
    }
    writeln!(
        out,
        "{prefix}misclassified = [{}]",
        e.misclassified.join(", ")
    )
}

fn synth_summary(count: usize, mono: usize, t_max: usize, seed: u64) -> String {
    format!(
        "seed = {seed}\ncount = {count}\nmono = {mono}\nbi = {}\nt_max = {t_max}",
        count - mono
    )
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> CmdResult {
    if a.count < 2 {
        return Err(Failure::Usage(format!(
            "--count must be at least 2, got {}",
            a.count
        )));
    }
    let cfg = SynthConfig {
        joint_count: a.joints,
        seed: a.seed.seed,
        ..SynthConfig::default()
    };
    if let Err(e) = cfg.validate() {
        return Err(Failure::Usage(e.to_string()));
    }
    let data = generate_dataset(a.count, &cfg)?;
    data.write(&a.out)?;
    writeln!(
        out,
        "{}",
        synth_summary(
            a.count,
            data.count(GestureLabel::Mono),
            data.longest(),
            a.seed.seed
        )
    )?;
    writeln!(
        out,
        "wrote {} files + {LABELS_FILE} to {}",
        a.count,
        a.out.display()
    )?;
    Ok(())
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> CmdResult {
    let seed = a.seed.seed;
    writeln!(out, "seed = {seed}")?;
    let kind = ModelKind::from(a.model);
    let samples = load(&a.data, a.t_max)?;
    let scheme = match a.scheme {
        SchemeArg::Sl => SplitScheme::Sl,
        SchemeArg::Ssl => SplitScheme::Ssl,
    };
    let splits = split_dataset(&samples, scheme, seed)?;
    let first = &samples[0];
    let mut model = Model::build(ModelSpec::new(kind, first.t_max, first.joint_count, seed))?;
    let hp = a.hp.hyper_params(kind, seed);
    hp.validate()?;
    let report = train_supervised(&mut model, &splits, &hp)?;

    create_dir(&a.out)?;
    let report_path = a.out.join("report.toml");
    let ckpt_path = a.out.join("model.ckpt");
    report.save(&report_path)?;
    save_checkpoint(&model, &ckpt_path)?;

    writeln!(out, "model = {kind}")?;
    writeln!(
        out,
        "train/validation/test = {}/{}/{}",
        report.train_size, report.validation_size, report.test_size
    )?;
    if let Some(test) = &report.test {
        print_evaluation(out, "test ", test)?;
    }
    if let Some(acc) = report.test_validation_accuracy {
        writeln!(out, "test+validation accuracy = {acc:.4}")?;
    }
    writeln!(out, "report = {}", report_path.display())?;
    writeln!(out, "checkpoint = {}", ckpt_path.display())?;
    Ok(())
}

fn cmd_ssl(a: &SslArgs, out: &mut dyn Write) -> CmdResult {
    let seed = a.seed.seed;
    writeln!(out, "seed = {seed}")?;
    let samples = load(&a.data, a.t_max)?;
    let hp_sup = a.hp.hyper_params(ModelKind::Cnn, seed);
    let hp_unsup = HyperParams {
        epochs: a.pretrain_epochs,
        learning_rate: a.pretrain_lr,
        contrastive_weight: a.contrastive_weight,
        temperature: a.temperature,
        ..hp_sup.clone()
    };
    hp_sup.validate()?;
    hp_unsup.validate()?;
    let run = run_ssl_comparison(&samples, &Architecture::default(), &hp_unsup, &hp_sup, seed)?;

    create_dir(&a.out)?;
    for (name, report) in [
        ("pretrain_report.toml", &run.pretraining),
        ("ssl_report.toml", &run.ssl),
        ("baseline_report.toml", &run.baseline),
    ] {
        report.save(&a.out.join(name))?;
    }
    let acc = |r: &crate::training::TrainReport| r.test_accuracy().unwrap_or(f64::NAN);
    writeln!(
        out,
        "train/validation/unsupervised(=test) = {}/{}/{}",
        run.splits.train.len(),
        run.splits.validation.len(),
        run.splits.unsupervised.len()
    )?;
    if let Some(loss) = run.pretraining.train_loss.last() {
        writeln!(out, "final reconstruction loss = {loss:.6}")?;
    }
    writeln!(
        out,
        "supervised(10% labels) accuracy = {:.4}",
        acc(&run.baseline)
    )?;
    writeln!(out, "ssl accuracy = {:.4}", acc(&run.ssl))?;
    writeln!(out, "reports = {}", a.out.display())?;
    Ok(())
}

fn cmd_gradcam(a: &GradcamArgs, out: &mut dyn Write) -> CmdResult {
    writeln!(out, "seed = {}", a.seed.seed)?;
    let model = load_checkpoint(&a.checkpoint)?;
    if model.kind() != ModelKind::Cnn {
        return Err(Failure::Runtime(Error::Contract(format!(
            "gradcam requires cnn, checkpoint holds {}",
            model.kind()
        ))));
    }
    let seq = read_sequence(&a.sample)?;
    let sample = pad_sequence(&seq, model.spec().t_max)?;
    let class = a.class.map(|c| match c {
        ClassArg::Mono => GestureLabel::Mono,
        ClassArg::Bi => GestureLabel::Bi,
    });
    let result = grad_cam(
        &model,
        &sample,
        class,
        a.k.unwrap_or(DEFAULT_TOP_K.min(sample.joint_count)),
    )?;
    let predicted = if result.logits[1] > result.logits[0] {
        GestureLabel::Bi
    } else {
        GestureLabel::Mono
    };
    let paths = export_result(&result, &a.out, &sample.name)?;
    writeln!(out, "predicted = {predicted}")?;
    writeln!(out, "explained class = {}", result.class_index)?;
    writeln!(out, "heatmap = {}", paths.heatmap.display())?;
    writeln!(out, "highlights = {}", paths.highlights.display())?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    writeln!(out, "seed = {}", a.seed.seed)?;
    let model = load_checkpoint(&a.checkpoint)?;
    if model.kind() == ModelKind::Autoencoder {
        return Err(Failure::Runtime(Error::Contract(
            "eval requires a classifier checkpoint".into(),
        )));
    }
    let samples = load(&a.data, Some(model.spec().t_max))?;
    let e = evaluate(&model, &samples)?;
    writeln!(out, "samples = {}", samples.len())?;
    print_evaluation(out, "", &e)?;
    Ok(())
}
