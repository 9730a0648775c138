//! Final dataset assembly: temporal splits, the Lite subset, task labels and
//! corpus statistics.

mod lite;
mod split;
mod stats;
mod tasks;

pub use lite::{build_lite, Category, LiteMapping, LITE_OOS};
pub use split::{partition, split, Cutoffs, SplitAssignment, SplitDiagnostic, SplitOutcome, SplitReason, Split};
pub use stats::{compute_stats, CorpusStats, StatsAccumulator};
pub use tasks::{
    prepare_task_labels, ClassificationRecord, LabelVocabulary, SequenceRecord, SpanLabel, Task, TaskRecord,
};
