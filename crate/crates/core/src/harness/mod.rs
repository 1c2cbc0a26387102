//! Experiment plumbing: canned workloads, end-to-end pipelines from token
//! emissions to observed traces, metric persistence, and report output
//! (CSV tables and SVG charts).

mod experiment;
mod report;
mod svg;
mod workload;

pub use experiment::{
    language_dataset, multi_turn_sessions, planted_trace, run_experiment, second_token_delay_via_wire,
    topic_dataset, trace_from_events, Metrics, Pipeline,
};
pub use report::{write_confusion_csv, write_metrics_csv, write_pr_curve_csv, write_tradeoff_csv};
pub use svg::{line_chart, Series};
pub use workload::{
    easy_corpus_text, language_presets, model_pair, random_corpus_text, secret_prompt,
    token_payload_len, topic_presets, LanguagePreset, ModelPair, TopicPreset,
};
