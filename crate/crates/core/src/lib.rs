//! Isolation-based anomaly detection with spherical ensemble representations.
//!
//! Every partitioning samples `psi` points and places a hypersphere on each,
//! with radius equal to the distance to the closest other sampled point. A
//! point's representation collects, per partitioning, `1 - 1/r` for the
//! radius of the hypersphere covering it, or `1` when it is not covered.
//! Small radii (dense regions) give small or negative components, so both
//! the mean of the representation (ISER-A) and its cosine with the all-ones
//! vector (ISER-S) grow with isolation. ISER-IF grows an isolation forest on
//! the representations and inverts the usual path-length score.
//!
//! iNNE, IDK and the plain isolation forest share the same machinery and are
//! available for comparison, together with AUROC / average precision
//! metrics, synthetic data generators and benchmark helpers.
//!
//! ```
//! use iser::{detect, DetectorParams, Method};
//! use iser::synth::{generate, SynthKind, SynthSpec};
//!
//! let data = generate(&SynthSpec::new(SynthKind::Global, 300, 1)).unwrap();
//! let scores = detect(Method::IserS, &data, &DetectorParams::new(16, 100, 7)).unwrap();
//! let auc = iser::metrics::auroc(&scores.scores, data.labels().unwrap()).unwrap();
//! assert!(auc > 0.95);
//! ```
//!
//! The `examples/` directory walks through each capability; the `iser`
//! binary exposes the synthesis, detection, benchmark, grid and scalability
//! workflows from the command line.

pub mod baselines;
pub mod detector;
pub mod error;
pub mod harness;
pub mod iforest;
pub mod metrics;
pub mod model;
pub mod partitioning;
pub mod scoring;
pub mod synth;

pub use detector::{detect, Detector, DetectorParams};
pub use error::{Error, Result};
pub use model::{
    ingest_csv, minmax_normalize, write_csv, Dataset, Execution, IserConfig, RngStream,
};
pub use partitioning::{PartitionSet, Partitioning};
pub use scoring::{
    score_avg, score_dataset, score_sim, transform, EnsembleVector, Method, ScoreVector,
};
