//! The on-disk corpus layout: a JSON video manifest pointing at VOLV
//! volume files, plus a JSONL fixation log.

use std::collections::BTreeMap;
use std::io::{BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use gazekit::fixation::{parse_fixation_log, FixationSet, LogFormat, VideoMeta};
use gazekit::synth::SynthCorpus;
use gazekit::volume::{read_volume, write_volume, Volume};

use crate::util::{atomic_write_with, CliError, CliResult};

/// One manifest row: video geometry plus the path of its volume file,
/// relative to the manifest's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub meta: VideoMeta,
    pub volume: String,
}

/// Loads the fixation log validated against the manifest.
pub fn load_corpus(
    fixations_path: &Path,
    manifest_path: &Path,
) -> CliResult<(FixationSet, Vec<ManifestEntry>)> {
    let manifest_text = std::fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", manifest_path.display())))?;
    let mut entries: Vec<ManifestEntry> = serde_json::from_str(&manifest_text)
        .map_err(|e| CliError::Data(format!("{}: {e}", manifest_path.display())))?;
    // resolve volume paths relative to the manifest location
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    for e in &mut entries {
        let p = base.join(&e.volume);
        e.volume = p.to_string_lossy().into_owned();
    }
    let metas: Vec<VideoMeta> = entries.iter().map(|e| e.meta.clone()).collect();
    let f = std::fs::File::open(fixations_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", fixations_path.display())))?;
    let fixations = parse_fixation_log(BufReader::new(f), LogFormat::Jsonl, &metas)?;
    Ok((fixations, entries))
}

/// Reads every referenced volume file.
pub fn load_volumes(entries: &[ManifestEntry]) -> CliResult<BTreeMap<String, Volume>> {
    let mut out = BTreeMap::new();
    for e in entries {
        let f = std::fs::File::open(&e.volume)
            .map_err(|err| CliError::Data(format!("{}: {err}", e.volume)))?;
        let vol = read_volume(&mut BufReader::new(f))?;
        if vol.width != e.meta.width as usize || vol.height != e.meta.height as usize {
            return Err(CliError::Data(format!(
                "volume {} does not match manifest geometry of '{}'",
                e.volume, e.meta.video_id
            )));
        }
        out.insert(e.meta.video_id.clone(), vol);
    }
    Ok(out)
}

/// Writes a synthetic corpus: volumes under `videos/`, `manifest.json`,
/// and `fixations.jsonl`.
pub fn write_synth_outputs(out: &Path, corpus: &SynthCorpus) -> CliResult<()> {
    let video_dir = out.join("videos");
    std::fs::create_dir_all(&video_dir).map_err(|e| CliError::Data(e.to_string()))?;

    use rayon::prelude::*;
    corpus.videos.par_iter().try_for_each(|v| -> CliResult<()> {
        atomic_write_with(&video_dir.join(format!("{}.volv", v.meta.video_id)), |w| {
            write_volume(w, &v.volume).map_err(CliError::from)
        })
    })?;

    let entries: Vec<ManifestEntry> = corpus
        .videos
        .iter()
        .map(|v| ManifestEntry {
            meta: v.meta.clone(),
            volume: format!("videos/{}.volv", v.meta.video_id),
        })
        .collect();
    crate::util::atomic_write_json(&out.join("manifest.json"), &entries)?;

    atomic_write_with(&out.join("fixations.jsonl"), |w| {
        for r in &corpus.fixations.records {
            let line =
                serde_json::to_string(r).map_err(|e| CliError::Data(e.to_string()))?;
            writeln!(w, "{line}").map_err(|e| CliError::Data(e.to_string()))?;
        }
        Ok(())
    })
}

/// Round-trip helper used in tests: re-read what `write_synth_outputs`
/// produced.
#[allow(dead_code)]
pub fn reload(out: &Path) -> CliResult<(FixationSet, Vec<ManifestEntry>)> {
    load_corpus(&out.join("fixations.jsonl"), &out.join("manifest.json"))
}
