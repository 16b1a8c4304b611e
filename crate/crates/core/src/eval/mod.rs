//! Detection metrics, balanced splits, perturbations, synthetic corpora and
//! ablation sweeps.

pub mod ablation;
pub mod balanced;
pub mod metrics;
pub mod perturb;
pub mod synth;

pub use ablation::{pearson, spearman, sweep, Setting, SweepResult};
pub use balanced::{balanced_pairs, EvalSplit};
pub use metrics::{
    auc, average_precision, evaluate, labeled_from_records, labeled_from_rows, write_eval_csv, write_eval_long_csv,
    Branch, EvalResult, LabeledScore,
};
pub use perturb::{perturb_sequence, Perturbation};
pub use synth::{synth_corpus, synth_videos, write_corpus, SynthConfig, SynthCorpus, SynthProcess};
