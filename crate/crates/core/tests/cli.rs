use std::fs;
use std::path::Path;
use std::process::Command;

use skelsign::cli::{run, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use skelsign::gradcam::read_highlights;
use skelsign::training::TrainReport;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn skelsign(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("skelsign").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Small corpus: few joints keep the models cheap.
fn synth(dir: &Path, count: usize, seed: u64) {
    let o = skelsign(&[
        "synth",
        "--count",
        &count.to_string(),
        "--joints",
        "6",
        "--seed",
        &seed.to_string(),
        "--out",
        p(dir),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
}

fn csv_count(dir: &Path) -> usize {
    fs::read_dir(dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "csv")
        })
        .count()
}

#[test]
fn synth_writes_files_deterministically() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = skelsign(&["synth", "--count", "111", "--seed", "1", "--out", p(&a)]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("seed = 1"));
    assert!(o.stdout.contains("count = 111"));
    assert_eq!(csv_count(&a), 112); // 111 samples + labels.csv
    let labels = fs::read_to_string(a.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 112);

    skelsign(&["synth", "--count", "111", "--seed", "1", "--out", p(&b)]);
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap()
        );
    }
}

#[test]
fn synth_rejects_zero_count() {
    let tmp = TempDir::new().unwrap();
    let o = skelsign(&["synth", "--count", "0", "--out", p(tmp.path())]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("count"));
}

#[test]
fn train_reports_reference_split_counts() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("run");
    synth(&data, 111, 3);
    let o = skelsign(&[
        "train",
        "--model",
        "fc",
        "--data",
        p(&data),
        "--epochs",
        "0",
        "--seed",
        "5",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("train/validation/test = 66/11/34"));
    assert!(o.stdout.contains("seed = 5"));
    let report = TrainReport::load(&out.join("report.toml")).unwrap();
    assert_eq!(
        (report.train_size, report.validation_size, report.test_size),
        (66, 11, 34)
    );
    assert!(report.train_loss.is_empty());
    let test = report.test.unwrap();
    assert_eq!(test.confusion.iter().flatten().sum::<usize>(), 34);
    assert!(out.join("model.ckpt").exists());
}

#[test]
fn train_usage_and_data_errors() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    synth(&data, 12, 1);
    let o = skelsign(&["train", "--model", "transformer", "--data", p(&data)]);
    assert_eq!(o.code, EXIT_USAGE);

    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    fs::write(empty.join("labels.csv"), "name,label\n").unwrap();
    let o = skelsign(&["train", "--model", "cnn", "--data", p(&empty)]);
    assert_eq!(o.code, EXIT_USAGE);

    fs::write(data.join("labels.csv"), "name,label\ngesture_000,Mono\n").unwrap();
    let o = skelsign(&[
        "train",
        "--model",
        "cnn",
        "--data",
        p(&data),
        "--epochs",
        "0",
    ]);
    assert_eq!(o.code, EXIT_RUNTIME);
    assert!(o.stderr.contains("gesture_001"), "{}", o.stderr);
}

#[test]
fn train_gradcam_and_eval_round_trip() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let run_dir = tmp.path().join("cnn");
    synth(&data, 20, 2);
    let o = skelsign(&[
        "train",
        "--model",
        "cnn",
        "--data",
        p(&data),
        "--epochs",
        "2",
        "--out",
        p(&run_dir),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let ckpt = run_dir.join("model.ckpt");

    let o = skelsign(&["eval", "--checkpoint", p(&ckpt), "--data", p(&data)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("samples = 20"));
    assert!(o.stdout.contains("accuracy = "));
    assert!(o.stdout.contains("misclassified = ["));

    let cam = tmp.path().join("cam");
    let sample = data.join("gesture_004.csv");
    let o = skelsign(&[
        "gradcam",
        "--checkpoint",
        p(&ckpt),
        "--sample",
        p(&sample),
        "--k",
        "3",
        "--out",
        p(&cam),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("predicted = "));
    let highlights = read_highlights(&cam.join("gesture_004_highlights.txt")).unwrap();
    let report = TrainReport::load(&run_dir.join("report.toml")).unwrap();
    assert_eq!(report.model, "cnn");
    let heat = fs::read_to_string(cam.join("gesture_004_heatmap.csv")).unwrap();
    assert_eq!(heat.lines().count(), highlights.len());
    assert!(highlights.iter().all(|h| h.joints.len() == 3));

    let o = skelsign(&[
        "gradcam",
        "--checkpoint",
        p(&ckpt),
        "--sample",
        p(&sample),
        "--k",
        "200",
        "--out",
        p(&cam),
    ]);
    assert_eq!(o.code, EXIT_RUNTIME);

    let o = skelsign(&[
        "gradcam",
        "--checkpoint",
        p(&ckpt),
        "--sample",
        p(&sample),
        "--class",
        "bi",
        "--out",
        p(&cam),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("explained class = Bi"));
    let highlights = read_highlights(&cam.join("gesture_004_highlights.txt")).unwrap();
    assert!(highlights.iter().all(|h| h.joints.len() == 6));
}

#[test]
fn gradcam_rejects_non_cnn_checkpoints() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let run_dir = tmp.path().join("fc");
    synth(&data, 12, 4);
    let o = skelsign(&[
        "train",
        "--model",
        "fc",
        "--data",
        p(&data),
        "--epochs",
        "0",
        "--out",
        p(&run_dir),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let o = skelsign(&[
        "gradcam",
        "--checkpoint",
        p(&run_dir.join("model.ckpt")),
        "--sample",
        p(&data.join("gesture_000.csv")),
        "--out",
        p(tmp.path()),
    ]);
    assert_eq!(o.code, EXIT_RUNTIME);
    assert!(o.stderr.contains("gradcam requires cnn"));
}

#[test]
fn eval_rejects_empty_data() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let run_dir = tmp.path().join("fc");
    synth(&data, 12, 4);
    skelsign(&[
        "train",
        "--model",
        "fc",
        "--data",
        p(&data),
        "--epochs",
        "0",
        "--out",
        p(&run_dir),
    ]);
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    fs::write(empty.join("labels.csv"), "name,label\n").unwrap();
    let o = skelsign(&[
        "eval",
        "--checkpoint",
        p(&run_dir.join("model.ckpt")),
        "--data",
        p(&empty),
    ]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn ssl_prints_both_rows_and_is_repeatable() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    synth(&data, 14, 6);
    let args = |out: &Path| {
        vec![
            "ssl".to_string(),
            "--data".into(),
            p(&data).into(),
            "--pretrain-epochs".into(),
            "1".into(),
            "--epochs".into(),
            "2".into(),
            "--seed".into(),
            "9".into(),
            "--out".into(),
            p(out).into(),
        ]
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let run_args = |out: &Path| {
        let v = args(out);
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("skelsign".to_string()).chain(v),
            &mut o,
            &mut e,
        );
        (code, String::from_utf8(o).unwrap().replace(p(out), "<out>"))
    };
    let (code, first) = run_args(&a);
    assert_eq!(code, EXIT_OK);
    assert!(first.contains("supervised(10% labels) accuracy = "));
    assert!(first.contains("ssl accuracy = "));
    assert!(first.contains("train/validation/unsupervised(=test) = 5/5/4"));
    let (_, second) = run_args(&b);
    assert_eq!(first, second);
    for name in [
        "pretrain_report.toml",
        "ssl_report.toml",
        "baseline_report.toml",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }

    let small = tmp.path().join("small");
    synth(&small, 11, 6);
    let o = skelsign(&["ssl", "--data", p(&small), "--out", p(tmp.path())]);
    assert_eq!(o.code, EXIT_RUNTIME);
    assert!(o.stderr.contains("12"), "{}", o.stderr);
}

#[test]
fn binary_exit_codes_and_seed_env() {
    let bin = env!("CARGO_BIN_EXE_skelsign");
    let tmp = TempDir::new().unwrap();
    let out = Command::new(bin)
        .args([
            "synth",
            "--count",
            "3",
            "--joints",
            "6",
            "--out",
            p(tmp.path()),
        ])
        .env("SKELSIGN_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed = 77"));

    let out = Command::new(bin)
        .args(["synth", "--count", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin)
        .args([
            "eval",
            "--checkpoint",
            "/nonexistent.ckpt",
            "--data",
            p(tmp.path()),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
