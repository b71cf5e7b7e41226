//! Vocabulary building, encodings, kernels, SVM training, the sliding
//! window fixation detector, multiple kernel learning and ranking metrics.

mod detector;
mod encode;
mod io;
mod kernel;
mod kmeans;
mod metrics;
mod mkl;
mod svm;

pub use detector::{detector_apply, detector_descriptor, detector_dim, DetectorWindow};
pub use encode::{bow_encode, matrix_exp, matrix_log, o2p_encode, BowHistogram};
pub use io::{
    read_gram, read_linear_model, read_vocabulary, read_weights, write_gram, write_linear_model,
    write_vocabulary, write_weights,
};
pub use kernel::{chi2_distance, chi2_feature_map, chi2_kernel, chi2_rbf_gram};
pub use kmeans::{kmeans, Vocabulary};
pub use metrics::average_precision;
pub use mkl::{mkl_train, GramSet, MklModel};
pub use svm::{kernel_svm_dual, svm_train_linear, svm_train_linear_tol, LinearModel};
