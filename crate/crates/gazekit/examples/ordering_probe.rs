//! Prints per-sampler recognition scores on the synthetic corpus; used to
//! eyeball the sampler ordering margins.

use gazekit::pipeline::{run_seed_sweep, PipelineConfig, SamplerKind, VideoItem};
use gazekit::synth::{synth_multiclass, Scenario, SynthParams};

fn main() {
    let corpus = synth_multiclass(
        &[Scenario::MovingSquare, Scenario::BlinkingCircle, Scenario::TranslatingBar],
        30,
        4,
        0.05,
        &SynthParams { distractors: 6, ..SynthParams::default() },
        707,
    );
    let fixations = corpus.fixations.clone();
    let items: Vec<VideoItem> = corpus.videos.into_iter().map(VideoItem::from).collect();
    let seeds = [0u64, 1, 2, 3, 4];
    for sampler in [SamplerKind::Saliency, SamplerKind::CenterBias, SamplerKind::Uniform] {
        let cfg = PipelineConfig {
            sampler,
            points_per_frame: 1,
            scale_range: (1.5, 2.5),
            ..PipelineConfig::default()
        };
        let sweep = run_seed_sweep(&items, &fixations, None, &cfg, &seeds).unwrap();
        println!(
            "{sampler:?}: mean AP {:.4} (stdev {:.4}), mean acc {:.4} (stdev {:.4})",
            sweep.mean_ap, sweep.stdev_ap, sweep.mean_accuracy, sweep.stdev_accuracy
        );
    }
}
