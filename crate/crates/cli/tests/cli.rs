//! Interface-level tests: exit codes, file formats, and reproducibility of
//! the command-line surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tacoma_core::raster::{write_pgm, GrayImage};

fn tacoma() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tacoma"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("command runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(block: &str, key: &str) -> String {
    block
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key}= in:\n{block}"))
        .to_string()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout_of(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Writes a small textured patch: a dark run on a bright background.
fn write_patch(path: &Path, dark: u8, run_len: usize) {
    let mut pixels = vec![230u8; 64];
    for i in 0..run_len {
        pixels[27 + i] = dark;
    }
    let image = GrayImage::new(8, 8, pixels).unwrap();
    std::fs::write(path, write_pgm(&image)).unwrap();
}

struct Workdir {
    dir: tempfile::TempDir,
}

impl Workdir {
    fn new() -> Self {
        Workdir {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn str_path(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

#[test]
fn mask_counts_four_patches() {
    let w = Workdir::new();
    let patches = w.path("patches");
    std::fs::create_dir(&patches).unwrap();
    for (i, dark) in [20u8, 60, 100, 140].iter().enumerate() {
        write_patch(&patches.join(format!("p{i}.pgm")), *dark, 3);
    }
    let out = run(tacoma().args([
        "mask",
        "--patches",
        patches.to_str().unwrap(),
        "--rel",
        "e1",
        "--levels",
        "51",
        "--out",
        &w.str_path("mask.json"),
    ]));
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    assert_eq!(field(&text, "patch_count"), "4");
    assert!(field(&text, "mask_size").parse::<usize>().unwrap() > 0);
    // The mask file is valid JSON with the declared relationship.
    let mask = tacoma_core::mask::FeatureMask::from_json(
        &std::fs::read_to_string(w.path("mask.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(mask.relationship().to_string(), "e1");
    assert_eq!(mask.patch_count(), 4);
}

#[test]
fn mask_on_empty_directory_exits_2() {
    let w = Workdir::new();
    let patches = w.path("patches");
    std::fs::create_dir(&patches).unwrap();
    let out = run(tacoma().args([
        "mask",
        "--patches",
        patches.to_str().unwrap(),
        "--rel",
        "e1",
        "--levels",
        "51",
        "--out",
        &w.str_path("mask.json"),
    ]));
    assert_exit(&out, 2);
}

/// Builds a tiny corpus + mask + features for the pipeline commands.
fn tiny_pipeline(w: &Workdir) -> (String, String) {
    let out = run(tacoma().args([
        "synth",
        "--out",
        &w.str_path("corpus"),
        "--seed",
        "5",
        "--per-class",
        "6",
        "--size",
        "64",
    ]));
    assert_exit(&out, 0);
    let out = run(tacoma().args([
        "mask",
        "--patches",
        &w.str_path("corpus/patches"),
        "--rel",
        "ne3",
        "--levels",
        "51",
        "--out",
        &w.str_path("mask.json"),
    ]));
    assert_exit(&out, 0);
    let out = run(tacoma().args([
        "extract",
        "--manifest",
        &w.str_path("corpus/manifest.csv"),
        "--mask",
        &w.str_path("mask.json"),
        "--rel",
        "ne3",
        "--levels",
        "51",
        "--out",
        &w.str_path("features.csv"),
    ]));
    assert_exit(&out, 0);
    (w.str_path("features.csv"), w.str_path("mask.json"))
}

#[test]
fn extract_rejects_level_mismatch_and_missing_images() {
    let w = Workdir::new();
    let (_, mask) = tiny_pipeline(&w);
    // wrong --levels for the mask
    let out = run(tacoma().args([
        "extract",
        "--manifest",
        &w.str_path("corpus/manifest.csv"),
        "--mask",
        &mask,
        "--rel",
        "ne3",
        "--levels",
        "31",
        "--out",
        &w.str_path("bad.csv"),
    ]));
    assert_exit(&out, 2);
    // manifest referencing a missing image
    std::fs::write(w.path("broken.csv"), "path,label\nmissing.pgm,0\n").unwrap();
    let out = run(tacoma().args([
        "extract",
        "--manifest",
        &w.str_path("broken.csv"),
        "--mask",
        &mask,
        "--rel",
        "ne3",
        "--levels",
        "51",
        "--out",
        &w.str_path("bad.csv"),
    ]));
    assert_exit(&out, 2);
}

#[test]
fn score_on_training_set_memorizes() {
    let w = Workdir::new();
    let (features, _) = tiny_pipeline(&w);
    let out = run(tacoma().args([
        "train",
        "--features",
        &features,
        "--trees",
        "100",
        "--mtry",
        "sqrt",
        "--seed",
        "7",
        "--out",
        &w.str_path("model.json"),
    ]));
    assert_exit(&out, 0);
    let out = run(tacoma().args([
        "score",
        "--features",
        &features,
        "--model",
        &w.str_path("model.json"),
        "--out",
        &w.str_path("preds.csv"),
    ]));
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    assert_eq!(field(&text, "accuracy"), "1");
    let preds = std::fs::read_to_string(w.path("preds.csv")).unwrap();
    assert!(preds.starts_with("row,label,predicted,margin\n"));
    assert_eq!(preds.lines().count(), 25); // header + 24 rows
}

#[test]
fn train_is_byte_reproducible() {
    let w = Workdir::new();
    let (features, _) = tiny_pipeline(&w);
    for name in ["m1.json", "m2.json"] {
        let out = run(tacoma().args([
            "train",
            "--features",
            &features,
            "--trees",
            "30",
            "--mtry",
            "sqrt",
            "--seed",
            "11",
            "--out",
            &w.str_path(name),
        ]));
        assert_exit(&out, 0);
    }
    let a = std::fs::read(w.path("m1.json")).unwrap();
    let b = std::fs::read(w.path("m2.json")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8_lossy(&a).contains("tacoma-forest-v1"));
}

#[test]
fn synth_is_byte_reproducible() {
    let w = Workdir::new();
    for dir in ["c1", "c2"] {
        let out = run(tacoma().args([
            "synth",
            "--out",
            &w.str_path(dir),
            "--seed",
            "9",
            "--per-class",
            "2",
            "--size",
            "48",
        ]));
        assert_exit(&out, 0);
    }
    for name in [
        "manifest.csv",
        "class3_001.pgm",
        "class3_001.mask.pgm",
        "patches/class2.pgm",
    ] {
        let a = std::fs::read(w.path(&format!("c1/{name}"))).unwrap();
        let b = std::fs::read(w.path(&format!("c2/{name}"))).unwrap();
        assert_eq!(a, b, "{name} differs between identically seeded runs");
    }
}

#[test]
fn oob_reports_counts() {
    let w = Workdir::new();
    let (features, _) = tiny_pipeline(&w);
    let out = run(tacoma().args([
        "oob",
        "--features",
        &features,
        "--trees",
        "60",
        "--mtry",
        "sqrt",
        "--seed",
        "3",
    ]));
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    let evaluated: usize = field(&text, "evaluated").parse().unwrap();
    let skipped: usize = field(&text, "skipped").parse().unwrap();
    assert_eq!(evaluated + skipped, 24);
    let err: f64 = field(&text, "oob_error").parse().unwrap();
    assert!((0.0..=1.0).contains(&err));
}

#[test]
fn salient_clamps_k_and_writes_sorted_coords() {
    let w = Workdir::new();
    let (features, mask) = tiny_pipeline(&w);
    run(tacoma().args([
        "train",
        "--features",
        &features,
        "--trees",
        "50",
        "--mtry",
        "sqrt",
        "--seed",
        "2",
        "--out",
        &w.str_path("model.json"),
    ]));
    let out = run(tacoma().args([
        "salient",
        "--image",
        &w.str_path("corpus/class3_000.pgm"),
        "--model",
        &w.str_path("model.json"),
        "--mask",
        &mask,
        "--k",
        "1000000",
        "--out-overlay",
        &w.str_path("overlay.pgm"),
        "--out-coords",
        &w.str_path("coords.txt"),
    ]));
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    let effective: usize = field(&text, "effective_k").parse().unwrap();
    let mask_size = tacoma_core::mask::FeatureMask::from_json(
        &std::fs::read_to_string(w.path("mask.json")).unwrap(),
    )
    .unwrap()
    .len();
    assert_eq!(effective, mask_size);
    // Overlay decodes and coordinates are sorted.
    let overlay =
        tacoma_core::raster::read_pgm(&std::fs::read(w.path("overlay.pgm")).unwrap()).unwrap();
    assert_eq!((overlay.width(), overlay.height()), (64, 64));
    let coords = std::fs::read_to_string(w.path("coords.txt")).unwrap();
    let parsed: Vec<(u32, u32)> = coords
        .lines()
        .map(|l| {
            let (x, y) = l.split_once(' ').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert!(!parsed.is_empty());
    assert!(parsed.windows(2).all(|w| w[0] < w[1]));
    for &(x, y) in &parsed {
        assert_eq!(overlay.get(x as usize, y as usize), 255);
    }
}

#[test]
fn cotrain_without_unlabeled_rows_is_supervised() {
    let w = Workdir::new();
    let (features, _) = tiny_pipeline(&w);
    let out = run(tacoma().args([
        "cotrain",
        "--features",
        &features,
        "--split",
        "thin:2",
        "--seed",
        "4",
    ]));
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    assert_eq!(field(&text, "rounds"), "0");
    assert_eq!(field(&text, "transferred"), "0");
}

#[test]
fn cotrain_labels_every_heldback_row_once() {
    let w = Workdir::new();
    let (features, _) = tiny_pipeline(&w);
    let out = run(tacoma().args([
        "cotrain",
        "--features",
        &features,
        "--split",
        "thin:2",
        "--m1",
        "2",
        "--m2",
        "2",
        "--trees",
        "25",
        "--seed",
        "4",
        "--labeled",
        "8",
        "--out",
        &w.str_path("labels.csv"),
    ]));
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    assert_eq!(field(&text, "labeled_rows"), "8");
    assert_eq!(field(&text, "unlabeled_rows"), "16");
    assert_eq!(field(&text, "transferred"), "16");
    assert!(field(&text, "final_error").parse::<f64>().is_ok());
    assert!(field(&text, "supervised_error").parse::<f64>().is_ok());
    let labels = std::fs::read_to_string(w.path("labels.csv")).unwrap();
    assert!(labels.starts_with("row,label,round,by,margin\n"));
    assert_eq!(labels.lines().count(), 17);
}

#[test]
fn selftrain_runs_and_reports() {
    let w = Workdir::new();
    let (features, _) = tiny_pipeline(&w);
    let out = run(tacoma().args([
        "selftrain",
        "--features",
        &features,
        "--m",
        "3",
        "--trees",
        "25",
        "--seed",
        "6",
        "--labeled",
        "8",
    ]));
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    assert_eq!(field(&text, "transferred"), "16");
    assert!(field(&text, "final_error").parse::<f64>().is_ok());
}

#[test]
fn simulate_rejects_unknown_covariance() {
    let out = run(tacoma().args([
        "simulate",
        "--cov",
        "wishart:1",
        "--p",
        "10",
        "--subset",
        "first:5",
        "--seed",
        "1",
    ]));
    assert_exit(&out, 2);
}

#[test]
fn simulate_writes_report_with_samples() {
    let w = Workdir::new();
    let out = run(tacoma().args([
        "simulate",
        "--cov",
        "identity",
        "--p",
        "12",
        "--subset",
        "first:6",
        "--mc-trials",
        "10",
        "--j",
        "2",
        "--seed",
        "2",
        "--out",
        &w.str_path("report.txt"),
    ]));
    assert_exit(&out, 0);
    let report = std::fs::read_to_string(w.path("report.txt")).unwrap();
    assert!(report.contains("gamma=0.5"));
    assert_eq!(
        report.lines().filter(|l| l.starts_with("sample=")).count(),
        10
    );
    assert!(report.contains("positive_definite=true"));
}

#[test]
fn corrupt_pgm_exits_2() {
    let w = Workdir::new();
    std::fs::write(w.path("bad.pgm"), b"P6\n2 2\n255\nxxxx").unwrap();
    std::fs::write(w.path("m.csv"), "path,label\nbad.pgm,0\n").unwrap();
    let patches = w.path("patches");
    std::fs::create_dir(&patches).unwrap();
    write_patch(&patches.join("p0.pgm"), 30, 3);
    run(tacoma().args([
        "mask",
        "--patches",
        patches.to_str().unwrap(),
        "--rel",
        "e1",
        "--levels",
        "51",
        "--out",
        &w.str_path("mask.json"),
    ]));
    let out = run(tacoma().args([
        "extract",
        "--manifest",
        &w.str_path("m.csv"),
        "--mask",
        &w.str_path("mask.json"),
        "--rel",
        "e1",
        "--levels",
        "51",
        "--out",
        &w.str_path("f.csv"),
    ]));
    assert_exit(&out, 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unsupported magic"), "stderr: {err}");
}

#[test]
fn extract_then_score_never_rereads_images() {
    // Feature files are self-contained: scoring works after images vanish.
    let w = Workdir::new();
    let (features, _) = tiny_pipeline(&w);
    run(tacoma().args([
        "train",
        "--features",
        &features,
        "--trees",
        "20",
        "--mtry",
        "sqrt",
        "--seed",
        "2",
        "--out",
        &w.str_path("model.json"),
    ]));
    std::fs::remove_dir_all(w.path("corpus")).unwrap();
    let out = run(tacoma().args([
        "score",
        "--features",
        &features,
        "--model",
        &w.str_path("model.json"),
    ]));
    assert_exit(&out, 0);
}
