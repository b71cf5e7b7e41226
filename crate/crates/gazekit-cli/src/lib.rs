//! Command-line surface over the gazekit library: synthetic corpus
//! generation, consistency reports, saliency construction and evaluation,
//! detector training, and end-to-end recognition.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
//! failure.

mod config;
mod manifest;
mod util;

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use gazekit::aoi::AoiParams;
use gazekit::consistency::{
    sequential_consistency_report, spatial_agreement, task_influence_pvalues, Pairing,
    SpatialParams,
};
use gazekit::fixation::{FixationSet, Group};
use gazekit::flow::horn_schunck_flow;
use gazekit::learn::{
    detector_apply, detector_descriptor, read_linear_model, svm_train_linear, write_linear_model,
    DetectorWindow,
};
use gazekit::pipeline::{run_seed_sweep, Encoder, PipelineConfig, SamplerKind, VideoItem};
use gazekit::saliency::{
    apply_combination, build_gt_saliency, combine_weights, kl_divergence, saliency_auc,
    sample_interest_points, write_salm, SaliencyMap, SampleRate,
};
use gazekit::synth::{synth_dataset, synth_multiclass, Scenario, SynthParams};
use gazekit::volume::{read_volume, write_pgm16};

use config::RunConfig;
use manifest::{load_corpus, load_volumes, write_synth_outputs};
use util::{atomic_write_json, CliError, CliResult};

#[derive(Parser)]
#[command(name = "gazekit", version, about = "Gaze consistency and saliency toolkit")]
struct Cli {
    /// Key=value configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (mandatory for stochastic commands).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker pool size; defaults to the number of CPUs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixation log (JSONL).
    #[arg(long, global = true)]
    fixations: Option<PathBuf>,
    /// Video manifest (JSON).
    #[arg(long, global = true)]
    videos: Option<PathBuf>,
    /// Saliency grid downsampling factor.
    #[arg(long, global = true)]
    downsample: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus: videos, fixation log, and manifest.
    Synth(SynthArgs),
    /// Gaze-consistency analyses.
    Consistency {
        #[command(subcommand)]
        which: ConsistencyCmd,
    },
    /// Saliency map construction, evaluation, fusion, and sampling.
    Saliency {
        #[command(subcommand)]
        which: SaliencyCmd,
    },
    /// Sliding-window fixation detector.
    Detector {
        #[command(subcommand)]
        which: DetectorCmd,
    },
    /// End-to-end action recognition.
    Recognize(RecognizeArgs),
    /// Render a saliency map container to PGM heat-map frames.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// moving_square | blinking_circle | translating_bar |
    /// two_motion_halves | all
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    n_videos: Option<usize>,
    #[arg(long)]
    n_subjects: Option<usize>,
    /// Fixation jitter/distractor level in [0, 1].
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    /// Number of class-independent clutter objects per video.
    #[arg(long)]
    distractors: Option<usize>,
}

#[derive(Subcommand)]
enum ConsistencyCmd {
    /// Leave-one-subject-out spatial agreement (same and cross stimulus).
    Spatial {
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        skip_ms: Option<f64>,
    },
    /// Alignment and Markov scanpath consistency over discovered AOIs.
    Sequential {
        #[arg(long)]
        laplace_add: Option<f64>,
    },
    /// Task-influence p-statistic per free-viewing subject.
    Task {
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        skip_ms: Option<f64>,
    },
}

#[derive(Subcommand)]
enum SaliencyCmd {
    /// Empirical (fixation-derived) saliency maps, one SALM per video.
    Build {
        #[arg(long)]
        sigma: Option<f64>,
        /// Uniform mixture weight.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// KL divergence and AUC of a predicted map against the fixations.
    Eval {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        video_id: String,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Ridge-fit channel weights on fixated vs random cells; write the
    /// combined map.
    Combine {
        #[arg(long, num_args = 1.., required = true)]
        channels: Vec<PathBuf>,
        #[arg(long)]
        video_id: String,
    },
    /// Draw interest points from a saliency map.
    Sample {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        points_per_frame: Option<usize>,
    },
}

#[derive(Subcommand)]
enum DetectorCmd {
    /// Train the linear fixation/non-fixation window classifier.
    Train {
        /// Total number of training windows.
        #[arg(long)]
        windows: Option<usize>,
    },
    /// Sweep a trained model over one video; write its saliency map.
    Apply {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        volume: PathBuf,
        /// Spatial,spatial,temporal stride.
        #[arg(long)]
        stride: Option<String>,
        /// sigma_s,sigma_t window scales.
        #[arg(long)]
        scales: Option<String>,
    },
}

#[derive(Args)]
struct RecognizeArgs {
    /// harris | uniform | center-bias | saliency | fixations
    #[arg(long)]
    sampler: Option<String>,
    /// bow | o2p
    #[arg(long)]
    encoder: Option<String>,
    /// Comma-separated seed list; reports mean/stdev across them.
    #[arg(long)]
    seeds: Option<String>,
    /// Directory of per-video SALM maps for the saliency sampler.
    #[arg(long)]
    maps: Option<PathBuf>,
    #[arg(long)]
    vocab_k: Option<usize>,
    #[arg(long)]
    points_per_frame: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    svm_c: Option<f64>,
    #[arg(long)]
    train_fraction: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    video_id: Option<String>,
}

/// Resolved run context: config-file values overlaid by CLI flags.
struct Ctx {
    cfg: RunConfig,
    seed: Option<u64>,
    out: PathBuf,
    fixations: Option<PathBuf>,
    videos: Option<PathBuf>,
    downsample: usize,
}

impl Ctx {
    fn resolve(cli: &Cli) -> CliResult<Self> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p).map_err(|e| CliError::Config(e.to_string()))?,
            None => RunConfig::default(),
        };
        let from_cfg =
            |key: &str| -> CliResult<Option<u64>> { Ok(cfg.get_parsed(key).map_err(|e| CliError::Config(e.to_string()))?) };
        let seed = match cli.seed {
            Some(s) => Some(s),
            None => from_cfg("seed")?,
        };
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let fixations = cli.fixations.clone().or_else(|| cfg.get("fixations").map(PathBuf::from));
        let videos = cli.videos.clone().or_else(|| cfg.get("videos").map(PathBuf::from));
        let downsample = match cli.downsample {
            Some(d) => d,
            None => cfg
                .get_parsed("downsample")
                .map_err(|e| CliError::Config(e.to_string()))?
                .unwrap_or(4),
        };
        if downsample == 0 {
            return Err(CliError::Config("downsample must be >= 1".into()));
        }
        Ok(Ctx { cfg, seed, out, fixations, videos, downsample })
    }

    /// Config-file fallback for an optional flag value.
    fn opt<T: std::str::FromStr + Copy>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.cfg.get_parsed(key).map_err(|e| CliError::Config(e.to_string())),
        }
    }

    fn seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Config("this command is stochastic; --seed is required".into()))
    }

    fn fixations_path(&self) -> CliResult<&Path> {
        self.fixations
            .as_deref()
            .ok_or_else(|| CliError::Config("--fixations is required".into()))
    }

    fn videos_path(&self) -> CliResult<&Path> {
        self.videos
            .as_deref()
            .ok_or_else(|| CliError::Config("--videos is required".into()))
    }

    /// The fully resolved configuration embedded in every report.
    fn resolved(&self, extra: &[(&str, String)]) -> BTreeMap<String, String> {
        let mut m = self.cfg.entries().clone();
        if let Some(s) = self.seed {
            m.insert("seed".into(), s.to_string());
        }
        m.insert("out".into(), self.out.display().to_string());
        m.insert("downsample".into(), self.downsample.to_string());
        if let Some(p) = &self.fixations {
            m.insert("fixations".into(), p.display().to_string());
        }
        if let Some(p) = &self.videos {
            m.insert("videos".into(), p.display().to_string());
        }
        for (k, v) in extra {
            m.insert((*k).into(), v.clone());
        }
        m
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.jobs {
        // ignore failure: the global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let ctx = Ctx::resolve(cli)?;
    match &cli.command {
        Command::Synth(args) => cmd_synth(&ctx, args),
        Command::Consistency { which } => match which {
            ConsistencyCmd::Spatial { n_samples, sigma, skip_ms } => {
                cmd_spatial(&ctx, *n_samples, *sigma, *skip_ms)
            }
            ConsistencyCmd::Sequential { laplace_add } => cmd_sequential(&ctx, *laplace_add),
            ConsistencyCmd::Task { n_samples, sigma, skip_ms } => {
                cmd_task(&ctx, *n_samples, *sigma, *skip_ms)
            }
        },
        Command::Saliency { which } => match which {
            SaliencyCmd::Build { sigma, alpha } => cmd_saliency_build(&ctx, *sigma, *alpha),
            SaliencyCmd::Eval { map, video_id, epsilon } => {
                cmd_saliency_eval(&ctx, map, video_id, *epsilon)
            }
            SaliencyCmd::Combine { channels, video_id } => {
                cmd_saliency_combine(&ctx, channels, video_id)
            }
            SaliencyCmd::Sample { map, points_per_frame } => {
                cmd_saliency_sample(&ctx, map, *points_per_frame)
            }
        },
        Command::Detector { which } => match which {
            DetectorCmd::Train { windows } => cmd_detector_train(&ctx, *windows),
            DetectorCmd::Apply { model, volume, stride, scales } => {
                cmd_detector_apply(&ctx, model, volume, stride.as_deref(), scales.as_deref())
            }
        },
        Command::Recognize(args) => cmd_recognize(&ctx, args),
        Command::Report(args) => cmd_report(&ctx, args),
    }
}

fn parse_scenario(s: &str) -> CliResult<Vec<Scenario>> {
    let one = |name: &str| -> CliResult<Scenario> {
        match name {
            "moving_square" => Ok(Scenario::MovingSquare),
            "blinking_circle" => Ok(Scenario::BlinkingCircle),
            "translating_bar" => Ok(Scenario::TranslatingBar),
            "two_motion_halves" => Ok(Scenario::TwoMotionHalves),
            other => Err(CliError::Config(format!("unknown scenario '{other}'"))),
        }
    };
    if s == "all" {
        return Ok(vec![
            Scenario::MovingSquare,
            Scenario::BlinkingCircle,
            Scenario::TranslatingBar,
            Scenario::TwoMotionHalves,
        ]);
    }
    s.split(',').map(|p| one(p.trim())).collect()
}

fn cmd_synth(ctx: &Ctx, args: &SynthArgs) -> CliResult<()> {
    let seed = ctx.seed()?;
    let scenario_str = match &args.scenario {
        Some(s) => s.clone(),
        None => ctx
            .cfg
            .get("scenario")
            .ok_or_else(|| CliError::Config("--scenario is required".into()))?
            .to_string(),
    };
    let scenarios = parse_scenario(&scenario_str)?;
    let n_videos = ctx.opt(args.n_videos, "n_videos")?.unwrap_or(4);
    let n_subjects = ctx.opt(args.n_subjects, "n_subjects")?.unwrap_or(3);
    let noise = ctx.opt(args.noise, "noise")?.unwrap_or(0.2);
    let mut params = SynthParams::default();
    if let Some(w) = ctx.opt(args.width, "width")? {
        params.width = w;
    }
    if let Some(h) = ctx.opt(args.height, "height")? {
        params.height = h;
    }
    if let Some(t) = ctx.opt(args.frames, "frames")? {
        params.frame_count = t;
    }
    if let Some(d) = ctx.opt(args.distractors, "distractors")? {
        params.distractors = d;
    }
    if n_videos == 0 {
        return Err(CliError::Config("n_videos must be >= 1".into()));
    }

    let corpus = if scenarios.len() == 1 {
        synth_dataset(scenarios[0], n_videos, n_subjects, noise, &params, seed)
    } else {
        synth_multiclass(&scenarios, n_videos, n_subjects, noise, &params, seed)
    };
    let n_records = corpus.fixations.records.len();
    let n = corpus.videos.len();
    write_synth_outputs(&ctx.out, &corpus)?;
    atomic_write_json(
        &ctx.out.join("synth_report.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[
                ("scenario", scenario_str.clone()),
                ("n_videos", n_videos.to_string()),
                ("n_subjects", n_subjects.to_string()),
                ("noise", noise.to_string()),
            ]),
            "n_videos": n,
            "n_fixations": n_records,
        }),
    )
}

fn spatial_params(
    ctx: &Ctx,
    n_samples: Option<usize>,
    sigma: Option<f64>,
    skip_ms: Option<f64>,
) -> CliResult<SpatialParams> {
    let mut p = SpatialParams { downsample: ctx.downsample, seed: ctx.seed()?, ..Default::default() };
    if let Some(n) = ctx.opt(n_samples, "n_samples")? {
        p.n_samples = n;
    }
    if let Some(s) = ctx.opt(sigma, "sigma")? {
        p.sigma_px = s;
    }
    if let Some(s) = ctx.opt(skip_ms, "skip_ms")? {
        p.skip_ms = s;
    }
    Ok(p)
}

fn cmd_spatial(
    ctx: &Ctx,
    n_samples: Option<usize>,
    sigma: Option<f64>,
    skip_ms: Option<f64>,
) -> CliResult<()> {
    let (fixations, _) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let params = spatial_params(ctx, n_samples, sigma, skip_ms)?;
    let same = spatial_agreement(&fixations, Pairing::SameStimulus, &params)?;
    let cross = spatial_agreement(&fixations, Pairing::CrossStimulus, &params);
    let cross_auc = match cross {
        Ok(r) => Some(r.auc),
        Err(gazekit::Error::NoEligibleFrames) => None,
        Err(e) => return Err(e.into()),
    };
    atomic_write_json(
        &ctx.out.join("consistency_spatial.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[
                ("n_samples", params.n_samples.to_string()),
                ("sigma", params.sigma_px.to_string()),
                ("skip_ms", params.skip_ms.to_string()),
            ]),
            "same_stimulus_auc": same.auc,
            "cross_stimulus_auc": cross_auc,
            "n_samples_scored": same.n_samples,
        }),
    )
}

fn cmd_sequential(ctx: &Ctx, laplace_add: Option<f64>) -> CliResult<()> {
    let (fixations, entries) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let volumes = load_volumes(&entries)?;
    let seed = ctx.seed()?;
    let laplace_add = ctx.opt(laplace_add, "laplace_add")?.unwrap_or(1.0);
    let fovea = fixations.videos.values().next().map(|m| m.fovea_px).unwrap_or(6.0);
    let aoi_params = AoiParams::from_fovea(fovea, seed);
    let report = sequential_consistency_report(&fixations, &volumes, &aoi_params, laplace_add, seed)?;
    atomic_write_json(
        &ctx.out.join("consistency_sequential.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[("laplace_add", laplace_add.to_string())]),
            "report": report,
        }),
    )
}

fn cmd_task(
    ctx: &Ctx,
    n_samples: Option<usize>,
    sigma: Option<f64>,
    skip_ms: Option<f64>,
) -> CliResult<()> {
    let (fixations, _) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let params = spatial_params(ctx, n_samples, sigma, skip_ms)?;
    let active = fixations.filter_group(Group::Active);
    let free = fixations.filter_group(Group::Free);
    let pvalues = task_influence_pvalues(&active, &free, &params)?;
    let mean = pvalues.values().sum::<f64>() / pvalues.len() as f64;
    atomic_write_json(
        &ctx.out.join("consistency_task.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[("n_samples", params.n_samples.to_string())]),
            "per_subject": pvalues,
            "mean": mean,
        }),
    )
}

fn cmd_saliency_build(ctx: &Ctx, sigma: Option<f64>, alpha: Option<f64>) -> CliResult<()> {
    let (fixations, _) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let alpha = ctx.opt(alpha, "alpha")?.unwrap_or(0.1);
    let sigma_override = ctx.opt(sigma, "sigma")?;
    std::fs::create_dir_all(&ctx.out).map_err(|e| CliError::Data(e.to_string()))?;
    let ids: Vec<String> = fixations.videos.keys().cloned().collect();
    ids.par_iter().try_for_each(|id| -> CliResult<()> {
        let meta = &fixations.videos[id];
        let sigma = sigma_override.unwrap_or(meta.fovea_px);
        let map = build_gt_saliency(&fixations, id, sigma, alpha, ctx.downsample)?;
        util::atomic_write_with(&ctx.out.join(format!("{id}.salm")), |w| {
            write_salm(w, &map).map_err(CliError::from)
        })
    })?;
    atomic_write_json(
        &ctx.out.join("saliency_build.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[("alpha", alpha.to_string())]),
            "maps": ids,
        }),
    )
}

/// Fixated cells of one video at map resolution.
fn fixated_cells(
    fixations: &FixationSet,
    video_id: &str,
    map: &SaliencyMap,
) -> CliResult<Vec<(usize, usize, usize)>> {
    let meta = fixations
        .videos
        .get(video_id)
        .ok_or_else(|| CliError::Data(format!("unknown video '{video_id}'")))?;
    let sx = map.width() as f64 / meta.width as f64;
    let sy = map.height() as f64 / meta.height as f64;
    let mut pts = Vec::new();
    for r in fixations.for_video(video_id) {
        for t in r.start_frame..=r.end_frame {
            if (t as usize) < map.frames.len() {
                let x = ((r.x * sx) as usize).min(map.width() - 1);
                let y = ((r.y * sy) as usize).min(map.height() - 1);
                pts.push((x, y, t as usize));
            }
        }
    }
    Ok(pts)
}

fn cmd_saliency_eval(
    ctx: &Ctx,
    map_path: &Path,
    video_id: &str,
    epsilon: Option<f64>,
) -> CliResult<()> {
    let (fixations, _) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let epsilon = ctx.opt(epsilon, "epsilon")?.unwrap_or(1e-8);
    let pred = util::open_salm(map_path, video_id)?;
    let meta = fixations
        .videos
        .get(video_id)
        .ok_or_else(|| CliError::Data(format!("unknown video '{video_id}'")))?;
    // ground truth at the predicted map's own resolution
    let ds = (meta.width as usize / pred.width()).max(1);
    let truth = build_gt_saliency(&fixations, video_id, meta.fovea_px, 0.0, ds)?;
    let kl = kl_divergence(&pred, &truth, epsilon)?;
    let pts = fixated_cells(&fixations, video_id, &pred)?;
    let auc = saliency_auc(&pred, &pts)?;
    atomic_write_json(
        &ctx.out.join(format!("saliency_eval_{video_id}.json")),
        &serde_json::json!({
            "config": ctx.resolved(&[("epsilon", epsilon.to_string())]),
            "video_id": video_id,
            "kl": kl,
            "auc": auc,
            "n_fixated_cells": pts.len(),
        }),
    )
}

fn cmd_saliency_combine(ctx: &Ctx, channels: &[PathBuf], video_id: &str) -> CliResult<()> {
    use rand::Rng;
    use rand::SeedableRng;
    let (fixations, _) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let seed = ctx.seed()?;
    let maps: Vec<SaliencyMap> = channels
        .iter()
        .map(|p| util::open_salm(p, video_id))
        .collect::<CliResult<_>>()?;
    let base = &maps[0];
    let positives = fixated_cells(&fixations, video_id, base)?;
    if positives.is_empty() {
        return Err(CliError::Data(format!("no fixations for video '{video_id}'")));
    }
    // one random negative cell per positive
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let (w, h, t) = (base.width(), base.height(), base.frames.len());
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for &(x, y, frame) in &positives {
        rows.push(maps.iter().map(|m| m.frames[frame].at(x, y)).collect::<Vec<f64>>());
        labels.push(true);
        let (nx, ny, nt) =
            (rng.gen_range(0..w), rng.gen_range(0..h), rng.gen_range(0..t));
        rows.push(maps.iter().map(|m| m.frames[nt].at(nx, ny)).collect());
        labels.push(false);
    }
    let (weights, bias) = combine_weights(&rows, &labels, 1e-6)?;
    let combined = apply_combination(&maps, &weights, bias)?;
    util::atomic_write_with(&ctx.out.join(format!("{video_id}_combined.salm")), |wr| {
        write_salm(wr, &combined).map_err(CliError::from)
    })?;
    atomic_write_json(
        &ctx.out.join(format!("saliency_combine_{video_id}.json")),
        &serde_json::json!({
            "config": ctx.resolved(&[]),
            "video_id": video_id,
            "weights": weights,
            "bias": bias,
            "n_training_cells": rows.len(),
        }),
    )
}

fn cmd_saliency_sample(ctx: &Ctx, map_path: &Path, per_frame: Option<usize>) -> CliResult<()> {
    let seed = ctx.seed()?;
    let per_frame = ctx.opt(per_frame, "points_per_frame")?.unwrap_or(4);
    let map = util::open_salm(map_path, "map")?;
    let points = sample_interest_points(&map, &SampleRate::Fixed(per_frame), (2.0, 8.0), seed);
    atomic_write_json(
        &ctx.out.join("interest_points.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[("points_per_frame", per_frame.to_string())]),
            "points": points,
        }),
    )
}

fn cmd_detector_train(ctx: &Ctx, windows: Option<usize>) -> CliResult<()> {
    use rand::Rng;
    use rand::SeedableRng;
    let (fixations, entries) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let volumes = load_volumes(&entries)?;
    let seed = ctx.seed()?;
    let budget = ctx.opt(windows, "windows")?.unwrap_or(2000);
    let scales = (3.0f64, 1.5f64);
    let per_video = (budget / volumes.len().max(1)).max(2);

    let ids: Vec<String> = volumes.keys().cloned().collect();
    let mut sets: Vec<(Vec<Vec<f64>>, Vec<f64>)> = ids
        .par_iter()
        .map(|id| -> CliResult<(Vec<Vec<f64>>, Vec<f64>)> {
            let volume = &volumes[id];
            let meta = &fixations.videos[id];
            let flows = horn_schunck_flow(volume, 0.1, 20)?;
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(
                seed ^ util::stable_hash(id),
            );
            let mut x = Vec::new();
            let mut y = Vec::new();
            let records: Vec<_> = fixations.for_video(id).cloned().collect();
            let mut n = 0usize;
            while n + 2 <= per_video && !records.is_empty() {
                // a positive at a random fixation, a negative far away
                let r = &records[rng.gen_range(0..records.len())];
                let t = rng.gen_range(r.start_frame..=r.end_frame);
                let pos = DetectorWindow {
                    x: r.x,
                    y: r.y,
                    t,
                    sigma_s: scales.0,
                    sigma_t: scales.1,
                };
                let neg = loop {
                    let nx = rng.gen::<f64>() * (meta.width as f64 - 1.0);
                    let ny = rng.gen::<f64>() * (meta.height as f64 - 1.0);
                    let nt = rng.gen_range(0..meta.frame_count);
                    let far = fixations.at_frame(id, nt).all(|f| {
                        let d2 = (f.x - nx).powi(2) + (f.y - ny).powi(2);
                        d2 > (2.0 * meta.fovea_px).powi(2)
                    });
                    if far {
                        break DetectorWindow {
                            x: nx,
                            y: ny,
                            t: nt,
                            sigma_s: scales.0,
                            sigma_t: scales.1,
                        };
                    }
                };
                x.push(detector_descriptor(volume, &flows, &pos)?);
                y.push(1.0);
                x.push(detector_descriptor(volume, &flows, &neg)?);
                y.push(-1.0);
                n += 2;
            }
            Ok((x, y))
        })
        .collect::<CliResult<_>>()?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (xi, yi) in sets.drain(..) {
        x.extend(xi);
        y.extend(yi);
    }
    let model = svm_train_linear(&x, &y, 10.0, seed)?;
    util::atomic_write_with(&ctx.out.join("detector_model.bin"), |w| {
        write_linear_model(w, &model).map_err(CliError::from)
    })?;
    atomic_write_json(
        &ctx.out.join("detector_train.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[("windows", budget.to_string())]),
            "n_windows": x.len(),
            "dimension": model.w.len(),
            "svm_c": model.c,
        }),
    )
}

fn parse_pair<T: std::str::FromStr + Copy>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| CliError::Config(format!("bad {what}: '{s}'"))))
        .collect()
}

fn cmd_detector_apply(
    ctx: &Ctx,
    model_path: &Path,
    volume_path: &Path,
    stride: Option<&str>,
    scales: Option<&str>,
) -> CliResult<()> {
    let model = {
        let f = std::fs::File::open(model_path).map_err(|e| CliError::Data(e.to_string()))?;
        read_linear_model(&mut BufReader::new(f))?
    };
    let volume = {
        let f = std::fs::File::open(volume_path).map_err(|e| CliError::Data(e.to_string()))?;
        read_volume(&mut BufReader::new(f))?
    };
    let stride: Vec<usize> = match stride.or_else(|| ctx.cfg.get("stride")) {
        Some(s) => parse_pair(s, "stride")?,
        None => vec![4, 4, 2],
    };
    if stride.len() != 3 {
        return Err(CliError::Config("stride needs three values sx,sy,st".into()));
    }
    let scales: Vec<f64> = match scales.or_else(|| ctx.cfg.get("scales")) {
        Some(s) => parse_pair(s, "scales")?,
        None => vec![3.0, 1.5],
    };
    if scales.len() != 2 {
        return Err(CliError::Config("scales needs two values sigma_s,sigma_t".into()));
    }
    let flows = horn_schunck_flow(&volume, 0.1, 20)?;
    let map = detector_apply(
        &model,
        &volume,
        &flows,
        (stride[0], stride[1], stride[2]),
        (scales[0], scales[1]),
    )?;
    let stem = volume_path.file_stem().and_then(|s| s.to_str()).unwrap_or("volume");
    util::atomic_write_with(&ctx.out.join(format!("{stem}_detector.salm")), |w| {
        write_salm(w, &map).map_err(CliError::from)
    })
}

fn cmd_recognize(ctx: &Ctx, args: &RecognizeArgs) -> CliResult<()> {
    let (fixations, entries) = load_corpus(ctx.fixations_path()?, ctx.videos_path()?)?;
    let volumes = load_volumes(&entries)?;
    let items: Vec<VideoItem> = entries
        .iter()
        .map(|e| VideoItem { meta: e.meta.clone(), volume: volumes[&e.meta.video_id].clone() })
        .collect();

    let sampler_str = args
        .sampler
        .clone()
        .or_else(|| ctx.cfg.get("sampler").map(String::from))
        .unwrap_or_else(|| "uniform".into());
    let sampler = match sampler_str.as_str() {
        "harris" => SamplerKind::Harris,
        "uniform" => SamplerKind::Uniform,
        "center-bias" => SamplerKind::CenterBias,
        "saliency" => SamplerKind::Saliency,
        "fixations" => SamplerKind::Fixations,
        other => return Err(CliError::Config(format!("unknown sampler '{other}'"))),
    };
    let encoder_str = args
        .encoder
        .clone()
        .or_else(|| ctx.cfg.get("encoder").map(String::from))
        .unwrap_or_else(|| "bow".into());
    let encoder = match encoder_str.as_str() {
        "bow" => Encoder::Bow,
        "o2p" => Encoder::O2p,
        other => return Err(CliError::Config(format!("unknown encoder '{other}'"))),
    };
    let seeds: Vec<u64> = match &args.seeds {
        Some(s) => parse_pair(s, "seeds")?,
        None => vec![ctx.seed()?],
    };
    if seeds.is_empty() {
        return Err(CliError::Config("--seeds must list at least one seed".into()));
    }

    let mut cfg = PipelineConfig {
        sampler,
        encoder,
        seed: seeds[0],
        ..PipelineConfig::default()
    };
    if let Some(k) = ctx.opt(args.vocab_k, "vocab_k")? {
        cfg.vocab_k = k;
    }
    if let Some(p) = ctx.opt(args.points_per_frame, "points_per_frame")? {
        cfg.points_per_frame = p;
    }
    if let Some(g) = ctx.opt(args.gamma, "gamma")? {
        cfg.gamma = g;
    }
    if let Some(c) = ctx.opt(args.svm_c, "svm_c")? {
        cfg.svm_c = c;
    }
    if let Some(f) = ctx.opt(args.train_fraction, "train_fraction")? {
        cfg.train_fraction = f;
    }

    // external maps for the saliency sampler
    let external = match &args.maps {
        None => None,
        Some(dir) => {
            let mut m = BTreeMap::new();
            for e in &entries {
                let p = dir.join(format!("{}.salm", e.meta.video_id));
                if p.exists() {
                    m.insert(e.meta.video_id.clone(), util::open_salm(&p, &e.meta.video_id)?);
                }
            }
            Some(m)
        }
    };

    let sweep = run_seed_sweep(&items, &fixations, external.as_ref(), &cfg, &seeds)?;
    atomic_write_json(
        &ctx.out.join("recognize.json"),
        &serde_json::json!({
            "config": ctx.resolved(&[
                ("sampler", sampler_str.clone()),
                ("encoder", encoder_str.clone()),
                ("seeds", seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")),
                ("vocab_k", cfg.vocab_k.to_string()),
                ("points_per_frame", cfg.points_per_frame.to_string()),
            ]),
            "sweep": sweep,
        }),
    )
}

fn cmd_report(ctx: &Ctx, args: &ReportArgs) -> CliResult<()> {
    let id = args.video_id.clone().unwrap_or_else(|| {
        args.map.file_stem().and_then(|s| s.to_str()).unwrap_or("map").to_string()
    });
    let map = util::open_salm(&args.map, &id)?;
    std::fs::create_dir_all(&ctx.out).map_err(|e| CliError::Data(e.to_string()))?;
    for (i, frame) in map.frames.iter().enumerate() {
        let path = ctx.out.join(format!("{id}_{i:04}.pgm"));
        write_pgm16(&path, frame.width, frame.height, &frame.values)?;
    }
    atomic_write_json(
        &ctx.out.join(format!("report_{id}.json")),
        &serde_json::json!({
            "config": ctx.resolved(&[]),
            "video_id": id,
            "frames": map.frames.len(),
            "width": map.width(),
            "height": map.height(),
            "total_mass": map.total(),
        }),
    )
}

// re-exported for integration tests
pub use util::exit_code_of;
