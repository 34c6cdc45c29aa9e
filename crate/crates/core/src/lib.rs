//! Offline harness for evaluating chat-style LLMs as zero-shot recommenders
//! against classical collaborative and content-based baselines.
//!
//! The pipeline is: load interactions and item metadata ([`dataset`]), fit a
//! roster of baseline models ([`recommenders`]) and/or query a chat-completion
//! endpoint through prompts with fuzzy title matching ([`llm`]), score every
//! ranked list with accuracy / coverage / bias / similarity metrics
//! ([`metrics`]), orchestrate the four experiment protocols ([`experiments`])
//! and emit comparison tables ([`report`]).

pub mod config;
pub mod dataset;
pub mod experiments;
pub mod llm;
pub mod metrics;
pub mod recommenders;
pub mod report;
pub mod run;
pub mod synth;

pub use dataset::{InteractionSet, ItemCatalog, PopularityStats, Split};
pub use run::{RecommendationList, RecommendationRun};
