//! Gaze-consistency metrics, saliency map construction and evaluation,
//! spatio-temporal descriptors, and a saliency-driven action-recognition
//! pipeline over eye-tracking corpora.
//!
//! The crate is organized bottom-up:
//!
//! - [`fixation`]: fixation logs, video manifests, and the
//!   rasterize-and-blur primitive behind empirical saliency maps.
//! - [`volume`]: grayscale video volumes and their binary/PGM containers.
//! - [`flow`]: dense optical flow estimation and flow containers.
//! - [`roc`]: tie-corrected ROC curves and AUC.
//! - [`aoi`]: area-of-interest discovery, tracking, extension, and the
//!   random baseline strings.
//! - [`consistency`]: spatial inter-subject agreement, task-influence
//!   statistics, and the sequential (alignment/Markov) metrics.
//! - [`saliency`]: saliency maps, KL/AUC evaluation, channel combination,
//!   and saliency-driven interest-point sampling.
//! - [`features`]: HoG/MBH descriptors and motion feature maps.
//! - [`learn`]: vocabularies, encodings, chi-square kernels, SVMs, MKL,
//!   the sliding-window fixation detector, and ranking metrics.
//! - [`synth`]: seed-deterministic synthetic corpora for verification.
//! - [`pipeline`]: the end-to-end recognition experiment.
//!
//! All stochastic operations take explicit seeds and are bit-reproducible.

pub mod aoi;
pub mod consistency;
pub mod error;
pub mod features;
pub mod fixation;
pub mod flow;
pub mod learn;
pub mod pipeline;
pub mod roc;
pub mod saliency;
pub mod synth;
pub mod volume;

pub use error::{Error, Result};
