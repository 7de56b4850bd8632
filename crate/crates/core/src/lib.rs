//! Out-of-distribution benchmark construction and evaluation for grouped
//! question-answer corpora.
//!
//! The pipeline mirrors how the benchmark is used in practice:
//!
//! 1. [`corpus`] ingests an annotation corpus (or [`synth`] generates one),
//! 2. [`stats`] computes per-group answer histograms and normalized entropy,
//! 3. [`split`] keeps the imbalanced groups and labels every question as
//!    head or tail with the `count <= alpha * mean` rule,
//! 4. [`metrics`] scores prediction files (acc-all/tail/head, delta, alpha
//!    sweeps, head/tail confusion, reasoning labels),
//! 5. [`simulate`] produces prediction sets with a controllable amount of
//!    bias, registered by name so callers can pick one at runtime.
//!
//! ```
//! use oodbench::{synth, split, metrics, simulate};
//!
//! let corpus = synth::generate_synthetic_corpus(&synth::SynthConfig {
//!     n_groups: 20,
//!     answers_per_group: 3..=6,
//!     skew: 0.3,
//!     questions_per_group: 40..=80,
//!     seed: 1,
//! })
//! .unwrap();
//! let bench = split::build_ood_split(&corpus, &split::BuildConfig::default(), None).unwrap();
//! let preds = simulate::GoldPredictor.predict(&corpus).unwrap();
//! let report = metrics::evaluate(&bench, &preds).unwrap();
//! assert_eq!(report.acc_tail, Some(100.0));
//! # use oodbench::simulate::Predictor;
//! ```

pub mod corpus;
pub mod error;
pub mod metrics;
pub mod rational;
pub mod simulate;
pub mod split;
pub mod stats;
pub mod synth;

pub use corpus::{normalize_answer, PredictionSet, QuestionCorpus, QuestionRecord};
pub use error::{Error, Result};
pub use metrics::MetricsReport;
pub use rational::Decimal;
pub use split::{BuildConfig, OodBenchmark};
pub use stats::AnswerDistribution;
