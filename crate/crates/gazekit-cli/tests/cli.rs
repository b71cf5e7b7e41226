//! Black-box tests of the command-line interface: exit codes, file
//! outputs, and reproducibility across worker-pool sizes.

use std::path::Path;
use std::process::{Command, Output};

fn gazekit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gazekit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn synth_small(dir: &Path) {
    let out = gazekit(
        &[
            "--seed",
            "9",
            "--out",
            ".",
            "synth",
            "--scenario",
            "moving_square,blinking_circle",
            "--n-videos",
            "3",
            "--n-subjects",
            "2",
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "synth failed: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gazekit(&["--help"], dir.path())), 0);
    assert_eq!(code(&gazekit(&["synth", "--help"], dir.path())), 0);
    assert_eq!(code(&gazekit(&["--version"], dir.path())), 0);
}

#[test]
fn bad_usage_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // unknown flag
    assert_eq!(code(&gazekit(&["synth", "--no-such-flag"], dir.path())), 2);
    // unknown subcommand
    assert_eq!(code(&gazekit(&["frobnicate"], dir.path())), 2);
    // stochastic command without a seed
    assert_eq!(code(&gazekit(&["synth"], dir.path())), 2);
    // unknown scenario name
    assert_eq!(
        code(&gazekit(&["--seed", "1", "synth", "--scenario", "nope"], dir.path())),
        2
    );
}

#[test]
fn config_file_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    std::fs::write(&good, "seed = 9\nscenario = moving_square\nn_videos = 2\n").unwrap();
    let bad_key = dir.path().join("bad_key.cfg");
    std::fs::write(&bad_key, "sede = 9\n").unwrap();
    let malformed = dir.path().join("malformed.cfg");
    std::fs::write(&malformed, "seed 9\n").unwrap();

    let out = gazekit(&["--config", "good.cfg", "synth", "--n-subjects", "1"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&gazekit(&["--config", "bad_key.cfg", "synth"], dir.path())), 2);
    assert_eq!(code(&gazekit(&["--config", "malformed.cfg", "synth"], dir.path())), 2);
    assert_eq!(code(&gazekit(&["--config", "missing.cfg", "synth"], dir.path())), 2);
}

#[test]
fn missing_data_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = gazekit(
        &[
            "--seed",
            "1",
            "--fixations",
            "no.jsonl",
            "--videos",
            "no.json",
            "consistency",
            "sequential",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_then_analyses_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("fixations.jsonl").exists());
    assert!(dir.path().join("videos/moving_square_000.volv").exists());

    let data = [
        "--fixations",
        "fixations.jsonl",
        "--videos",
        "manifest.json",
    ];

    // scanpath consistency
    let mut args = vec!["--seed", "3"];
    args.extend_from_slice(&data);
    args.extend_from_slice(&["consistency", "sequential"]);
    let out = gazekit(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("consistency_sequential.json")).unwrap())
            .unwrap();
    assert!(report.get("config").is_some(), "report embeds the resolved config");

    // saliency maps from the fixation log
    let mut args = vec!["--seed", "3", "--downsample", "2"];
    args.extend_from_slice(&data);
    args.extend_from_slice(&["saliency", "build"]);
    let out = gazekit(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let map = dir.path().join("moving_square_000.salm");
    assert!(map.exists());

    // evaluate the built map against its own fixations
    let mut args = vec!["--seed", "3"];
    args.extend_from_slice(&data);
    args.extend_from_slice(&[
        "saliency",
        "eval",
        "--map",
        "moving_square_000.salm",
        "--video-id",
        "moving_square_000",
    ]);
    let out = gazekit(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let eval: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("saliency_eval_moving_square_000.json")).unwrap())
            .unwrap();
    assert!(eval["auc"].as_f64().unwrap() > 0.5, "own-fixation AUC above chance");

    // end-to-end recognition at a tiny scale
    let mut args = vec!["--seed", "3"];
    args.extend_from_slice(&data);
    args.extend_from_slice(&[
        "recognize",
        "--sampler",
        "fixations",
        "--vocab-k",
        "8",
        "--points-per-frame",
        "1",
    ]);
    let out = gazekit(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("recognize.json")).unwrap()).unwrap();
    assert!(rec["sweep"]["mean_accuracy"].as_f64().is_some());
    assert!(rec.get("config").is_some());
}

#[test]
fn outputs_identical_across_job_counts() {
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&one, "1"), (&four, "4")] {
        let out = gazekit(
            &[
                "--seed",
                "11",
                "--jobs",
                jobs,
                "synth",
                "--scenario",
                "moving_square",
                "--n-videos",
                "2",
                "--n-subjects",
                "2",
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let out = gazekit(
            &[
                "--seed",
                "11",
                "--jobs",
                jobs,
                "--fixations",
                "fixations.jsonl",
                "--videos",
                "manifest.json",
                "saliency",
                "build",
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["videos/moving_square_001.volv", "fixations.jsonl", "moving_square_000.salm"] {
        let a = std::fs::read(one.path().join(name)).unwrap();
        let b = std::fs::read(four.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between --jobs 1 and --jobs 4");
    }
}
