//! Classification accuracy, topic coherence and aspect-polarity cluster coherence.

mod accuracy;
mod aspect;
mod coherence;
mod report;

pub use accuracy::{accuracy, mean_std};
pub use aspect::{
    aspect_polarity_coherence, AspectClusterEval, AspectCoherence, AspectLabel, ThresholdRatios, DEFAULT_THRESHOLDS,
};
pub use coherence::{topic_coherence, CoherenceConfig, CoherenceReport, TopicCoherence, WindowCounts};
pub use report::{machine_report, table_report, MetricLine};
