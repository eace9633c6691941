//! Desk-scale toolkit for document-assistance small language models.
//!
//! The pipeline runs end to end on a laptop CPU:
//!
//! - [`corpus`] — document ingestion, tokenization, the 5x200-token chunking
//!   pre-processor, corpus statistics, and a seeded synthetic-document generator.
//! - [`prompts`] — byte-exact rendering of the annotation prompt, the
//!   fine-tuning prompt, and the benchmark prompt sets.
//! - [`annotator`] — drives a pluggable completion endpoint to annotate
//!   documents and expands annotations into training examples.
//! - [`protocol`] — the `<intent>`/`<response>` wire format plus intent
//!   classification scoring.
//! - [`metrics`] — BLEU, ROUGE-1/2/L, STS, Self-BLEU diversity, judge-score
//!   rescaling, and per-task / overall aggregation.
//! - [`slm`] — a decoder-only transformer (biases on, learned absolute
//!   positions, no attention-score position bias) with pre-training and
//!   fine-tuning objectives, a training loop, a gradient checker, and
//!   streaming generation.
//! - [`bench`] — ITPS / OTPS / TTFT / runtime measurement over pluggable
//!   generation backends and the chunk-sweep experiment.
//! - [`cli`] — the `slimdoc` command-line entry point wiring it all together.

pub mod annotator;
pub mod bench;
pub mod cli;
pub mod corpus;
pub mod metrics;
pub mod prompts;
pub mod protocol;
pub mod slm;
