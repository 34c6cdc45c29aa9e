//! Drives a chat client over a user population: build prompt, complete,
//! parse, match against the catalog and account for hallucinations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dataset::{ItemCatalog, Split, UserId};
use crate::run::{Provenance, RecommendationList, RecommendationRun};

use super::{
    build_prompt_rerank, build_prompt_top_n, parse_recommendations, ChatClient, ChatRequest,
    ClientConfig, ExchangeCache, LlmError, LlmExchange, MatchOutcome, ProfileEntry, TitleMatcher,
    UnmatchedTitle,
};

/// Which template the run uses; re-rank carries per-user candidate titles.
#[derive(Debug, Clone)]
pub enum PromptMode {
    TopN { n: usize },
    Rerank { candidates: BTreeMap<UserId, Vec<String>> },
}

/// Per-user parse/match accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserOutcome {
    pub user_id: String,
    pub parsed: usize,
    pub matched: usize,
    pub unmatched: Vec<UnmatchedTitle>,
    pub duplicates: usize,
    pub off_list: usize,
}

/// Aggregated hallucination evidence for a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HallucinationReport {
    pub model_id: String,
    pub total_parsed: usize,
    pub total_matched: usize,
    pub total_unmatched: usize,
    /// unmatched / parsed over the whole run; 0 when nothing parsed.
    pub hallucination_rate: f64,
    pub total_off_list: usize,
    /// off-list / matched for re-rank runs; 0 when nothing matched.
    pub off_list_fraction: f64,
    pub per_user: Vec<UserOutcome>,
    pub failures: Vec<(String, String)>,
}

pub struct LlmRunner<'a> {
    client: &'a dyn ChatClient,
    config: &'a ClientConfig,
    cache: Option<&'a ExchangeCache>,
    matcher: TitleMatcher,
    /// Run fails outright if more than this fraction of users fail.
    pub max_failure_fraction: f64,
}

impl<'a> LlmRunner<'a> {
    pub fn new(
        client: &'a dyn ChatClient,
        config: &'a ClientConfig,
        cache: Option<&'a ExchangeCache>,
        matcher: TitleMatcher,
    ) -> Self {
        Self {
            client,
            config,
            cache,
            matcher,
            max_failure_fraction: 0.2,
        }
    }

    /// Runs the full prompt/complete/parse/match loop for every user.
    /// Matched ids keep response order with 1/rank scores; per-user failures
    /// are recorded and skipped unless they exceed `max_failure_fraction`.
    pub fn run(
        &self,
        users: &[UserId],
        split: &Split,
        catalog: &ItemCatalog,
        mode: &PromptMode,
        provenance: Provenance,
    ) -> Result<(RecommendationRun, HallucinationReport), LlmError> {
        let universe = split.train.universe().clone();
        let mut run = RecommendationRun::new(provenance);
        let mut per_user = Vec::new();
        let mut failures: Vec<(String, String)> = Vec::new();
        for &user in users {
            let raw_user = universe.user_raw(user).to_string();
            match self.run_user(user, &raw_user, split, catalog, mode) {
                Ok((list, outcome)) => {
                    run.insert(list);
                    per_user.push(outcome);
                }
                Err(e) => failures.push((raw_user, e.to_string())),
            }
        }
        if !users.is_empty() {
            let fraction = failures.len() as f64 / users.len() as f64;
            if fraction > self.max_failure_fraction {
                return Err(LlmError::TooManyFailures {
                    failed: failures.len(),
                    total: users.len(),
                    allowed: self.max_failure_fraction,
                });
            }
        }
        let total_parsed: usize = per_user.iter().map(|o| o.parsed).sum();
        let total_matched: usize = per_user.iter().map(|o| o.matched).sum();
        let total_unmatched: usize = per_user.iter().map(|o| o.unmatched.len()).sum();
        let total_off_list: usize = per_user.iter().map(|o| o.off_list).sum();
        let report = HallucinationReport {
            model_id: self.client.model_id().to_string(),
            total_parsed,
            total_matched,
            total_unmatched,
            hallucination_rate: if total_parsed > 0 {
                total_unmatched as f64 / total_parsed as f64
            } else {
                0.0
            },
            total_off_list,
            off_list_fraction: if total_matched > 0 {
                total_off_list as f64 / total_matched as f64
            } else {
                0.0
            },
            per_user,
            failures,
        };
        Ok((run, report))
    }

    fn run_user(
        &self,
        user: UserId,
        raw_user: &str,
        split: &Split,
        catalog: &ItemCatalog,
        mode: &PromptMode,
    ) -> Result<(RecommendationList, UserOutcome), LlmError> {
        let universe = split.train.universe();
        let profile: Vec<ProfileEntry> = split
            .train
            .profile(user)
            .map(|row| ProfileEntry {
                title: catalog.title_of(universe, row.item).to_string(),
                rating: split.train.scale().map(|s| (row.rating, s.max)),
            })
            .collect();
        let (prompt, candidates) = match mode {
            PromptMode::TopN { n } => (
                build_prompt_top_n(
                    raw_user,
                    &profile,
                    *n,
                    self.config.token_budget,
                    self.config.response_reserve,
                )?,
                None,
            ),
            PromptMode::Rerank { candidates } => {
                let list = candidates
                    .get(&user)
                    .ok_or_else(|| LlmError::EmptyCandidates(raw_user.to_string()))?;
                (
                    build_prompt_rerank(
                        raw_user,
                        &profile,
                        list,
                        self.config.token_budget,
                        self.config.response_reserve,
                    )?,
                    Some(list.as_slice()),
                )
            }
        };
        let raw_response = self.client.complete(&ChatRequest {
            raw_user,
            prompt: &prompt,
            candidates,
        })?;
        let parsed_titles = parse_recommendations(&raw_response);

        let candidate_ids: Option<BTreeSet<String>> = candidates.map(|titles| {
            titles
                .iter()
                .filter_map(|t| match self.matcher.match_title(t) {
                    MatchOutcome::Matched { raw_id, .. } => Some(raw_id),
                    MatchOutcome::Unmatched { .. } => None,
                })
                .collect()
        });

        let mut matched: Vec<String> = Vec::new();
        let mut matched_set: BTreeSet<String> = BTreeSet::new();
        let mut unmatched: Vec<UnmatchedTitle> = Vec::new();
        let mut duplicates: Vec<String> = Vec::new();
        let mut off_list: Vec<String> = Vec::new();
        for title in &parsed_titles {
            match self.matcher.match_title(title) {
                MatchOutcome::Matched { raw_id, .. } => {
                    if matched_set.insert(raw_id.clone()) {
                        if let Some(ids) = &candidate_ids {
                            if !ids.contains(&raw_id) {
                                off_list.push(raw_id.clone());
                            }
                        }
                        matched.push(raw_id);
                    } else {
                        duplicates.push(title.clone());
                    }
                }
                MatchOutcome::Unmatched { best_similarity } => unmatched.push(UnmatchedTitle {
                    title: title.clone(),
                    best_similarity,
                }),
            }
        }

        let key = ExchangeCache::key(&self.config.model, self.config.temperature, &prompt);
        let exchange = LlmExchange {
            user_id: raw_user.to_string(),
            prompt,
            raw_response,
            parsed_titles: parsed_titles.clone(),
            matched: matched.clone(),
            unmatched: unmatched.clone(),
            duplicates: duplicates.clone(),
            off_list: off_list.clone(),
            model_id: self.client.model_id().to_string(),
            cache_key: key,
        };
        if let Some(cache) = self.cache {
            cache.store(&exchange)?;
        }

        let ids = matched
            .iter()
            .map(|raw| universe.item(raw).expect("matcher returns catalog items"));
        let list = RecommendationList::from_ranked_ids(user, ids);
        let outcome = UserOutcome {
            user_id: raw_user.to_string(),
            parsed: exchange.parsed_titles.len(),
            matched: matched.len(),
            unmatched,
            duplicates: duplicates.len(),
            off_list: off_list.len(),
        };
        Ok((list, outcome))
    }
}
