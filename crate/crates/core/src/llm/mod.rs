//! Prompt construction, chat-completion clients, response parsing and
//! edit-distance title matching for the LLM recommendation pipeline.

mod client;
mod matching;
mod parse;
mod prompt;
mod runner;
mod stub;

pub use client::{
    ChatClient, ChatRequest, ClientConfig, ExchangeCache, HttpChatClient, Transport,
    TransportResponse,
};
pub use matching::{damerau_levenshtein, normalize_title, MatchOutcome, TitleMatcher};
pub use parse::parse_recommendations;
pub use prompt::{
    build_prompt_rerank, build_prompt_top_n, estimate_tokens, render_profile, ProfileEntry,
};
pub use runner::{HallucinationReport, LlmRunner, PromptMode, UserOutcome};
pub use stub::StubClient;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("prompt for user {user} needs ~{estimated} tokens, budget leaves {available}")]
    PromptOverBudget {
        user: String,
        estimated: usize,
        available: usize,
    },
    #[error("endpoint returned status {status}{}: {message}", if *.retryable { " (after retries)" } else { " (not retryable)" })]
    Endpoint {
        status: u16,
        message: String,
        retryable: bool,
    },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("response is not a chat completion: {0}")]
    MalformedResponse(String),
    #[error("api key environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("cache i/o at {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {total} users failed, above the allowed fraction {allowed}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        allowed: f64,
    },
    #[error("user {0:?} has an empty train profile")]
    EmptyProfile(String),
    #[error("candidate list for user {0:?} is empty")]
    EmptyCandidates(String),
}

/// One prompt/response/match record; the persisted cache unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmExchange {
    pub user_id: String,
    pub prompt: String,
    pub raw_response: String,
    pub parsed_titles: Vec<String>,
    /// Matched raw item ids in response order, first occurrence per item.
    pub matched: Vec<String>,
    /// Titles that matched nothing above the threshold (hallucinations).
    pub unmatched: Vec<UnmatchedTitle>,
    /// Titles whose match duplicated an earlier matched item.
    pub duplicates: Vec<String>,
    /// Matched ids not present in the candidate list (re-rank mode only).
    pub off_list: Vec<String>,
    pub model_id: String,
    pub cache_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedTitle {
    pub title: String,
    pub best_similarity: f64,
}
