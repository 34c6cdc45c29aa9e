//! The four experiment protocols over any mix of baseline and LLM models,
//! plus run evaluation.

mod candidates;
pub mod store;

pub use candidates::{
    build_fixed_mostpop_candidates, build_neighbor_candidates, neighbor_candidates_all,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    cold_start_user_filter, DatasetError, ItemCatalog, ItemId, PopularityStats, Split, UserId,
};
use crate::llm::{HallucinationReport, LlmError, LlmRunner, PromptMode};
use crate::metrics::{self, EvalContext, MetricValue, MetricsError};
use crate::recommenders::{FittedModel, RecommenderError};
use crate::run::{Provenance, RecommendationList, RecommendationRun};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Recommender(#[from] RecommenderError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cold-start user set is empty")]
    EmptyColdSet,
    #[error("run {model} was produced on fingerprint {found}, expected {expected}")]
    FingerprintMismatch {
        model: String,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FreeTop50,
    RerankMostPop,
    RerankNeighbors,
    ColdStart,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::FreeTop50 => "free_top50",
            ExperimentKind::RerankMostPop => "rerank_mostpop",
            ExperimentKind::RerankNeighbors => "rerank_neighbors",
            ExperimentKind::ColdStart => "cold_start",
        }
    }
}

/// Everything `prepare` produces; the shared input of every experiment.
pub struct PreparedData {
    pub dataset_name: String,
    pub split: Split,
    pub catalog: ItemCatalog,
    pub stats: PopularityStats,
    pub fingerprint: String,
    /// Test interactions with rating below this never count as relevant.
    pub relevance_threshold: f64,
}

impl PreparedData {
    /// Test relevance sets per user (rating >= threshold).
    pub fn relevance(&self) -> BTreeMap<UserId, BTreeSet<ItemId>> {
        let mut sets: BTreeMap<UserId, BTreeSet<ItemId>> = BTreeMap::new();
        for row in self.split.test.interactions() {
            if row.rating >= self.relevance_threshold {
                sets.entry(row.user).or_default().insert(row.item);
            }
        }
        sets
    }

    pub fn provenance(&self, model_id: &str, experiment: ExperimentKind) -> Provenance {
        Provenance {
            model_id: model_id.to_string(),
            experiment: experiment.as_str().to_string(),
            dataset_fingerprint: self.fingerprint.clone(),
            split_seed: self.split.seed,
            prompt_hash: String::new(),
        }
    }
}

/// Experiment shape knobs; defaults mirror the protocols (top-50 lists,
/// 10 neighbours x 5 items, cold-start evaluated in free mode).
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub cutoffs: Vec<usize>,
    pub list_length: usize,
    pub n_neighbors: usize,
    pub per_neighbor: usize,
    pub shuffle_seed: u64,
    /// Drop the target user's own train items from candidate lists.
    pub exclude_seen_candidates: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::FreeTop50,
            cutoffs: vec![10, 20, 50],
            list_length: 50,
            n_neighbors: 10,
            per_neighbor: 5,
            shuffle_seed: 42,
            exclude_seen_candidates: false,
        }
    }
}

/// The models taking part in an experiment.
pub struct ModelSet<'a> {
    pub baselines: Vec<(String, &'a FittedModel)>,
    pub llms: Vec<(String, &'a LlmRunner<'a>)>,
}

pub struct ExperimentOutput {
    pub runs: Vec<RecommendationRun>,
    pub hallucinations: Vec<HallucinationReport>,
}

/// Ranks the full list for every user with one baseline model.
pub fn baseline_run(
    model: &FittedModel,
    model_id: &str,
    users: &[UserId],
    n: usize,
    exclude_seen: bool,
    prepared: &PreparedData,
    experiment: ExperimentKind,
) -> Result<RecommendationRun, ExperimentError> {
    let mut run = RecommendationRun::new(prepared.provenance(model_id, experiment));
    for &user in users {
        run.insert(model.recommend(user, n, exclude_seen)?);
    }
    Ok(run)
}

/// Evaluates a candidate list verbatim (the re-rank experiments' reference
/// row): scores are 1/rank in the unshuffled-candidate order given.
pub fn candidate_run(
    candidates: &BTreeMap<UserId, Vec<ItemId>>,
    model_id: &str,
    prepared: &PreparedData,
    experiment: ExperimentKind,
) -> RecommendationRun {
    let mut run = RecommendationRun::new(prepared.provenance(model_id, experiment));
    for (&user, items) in candidates {
        run.insert(RecommendationList::from_ranked_ids(user, items.iter().copied()));
    }
    run
}

/// Configuration 1: open top-n recommendations from every model.
pub fn run_free_top50(
    models: &ModelSet<'_>,
    prepared: &PreparedData,
    spec: &ExperimentSpec,
) -> Result<ExperimentOutput, ExperimentError> {
    let users = prepared.split.train.active_users();
    run_free_for_users(models, prepared, spec, &users, ExperimentKind::FreeTop50)
}

fn run_free_for_users(
    models: &ModelSet<'_>,
    prepared: &PreparedData,
    spec: &ExperimentSpec,
    users: &[UserId],
    experiment: ExperimentKind,
) -> Result<ExperimentOutput, ExperimentError> {
    let mut runs = Vec::new();
    let mut hallucinations = Vec::new();
    for (id, model) in &models.baselines {
        runs.push(baseline_run(
            model,
            id,
            users,
            spec.list_length,
            true,
            prepared,
            experiment,
        )?);
    }
    // LLM models skip users without a train profile (nothing to prompt with).
    let promptable: Vec<UserId> = users
        .iter()
        .copied()
        .filter(|&u| prepared.split.train.profile_len(u) > 0)
        .collect();
    for (id, runner) in &models.llms {
        let (run, report) = runner.run(
            &promptable,
            &prepared.split,
            &prepared.catalog,
            &PromptMode::TopN { n: spec.list_length },
            prepared.provenance(id, experiment),
        )?;
        runs.push(run);
        hallucinations.push(report);
    }
    Ok(ExperimentOutput { runs, hallucinations })
}

/// Configurations 2 and 3: every LLM re-ranks the candidate lists; the
/// unmodified candidates are evaluated as the reference row.
pub fn run_rerank(
    models: &ModelSet<'_>,
    candidates: &BTreeMap<UserId, Vec<ItemId>>,
    reference_id: &str,
    prepared: &PreparedData,
    spec: &ExperimentSpec,
) -> Result<ExperimentOutput, ExperimentError> {
    let mut runs = vec![candidate_run(candidates, reference_id, prepared, spec.kind)];
    let mut hallucinations = Vec::new();
    let universe = prepared.split.train.universe();
    let titled: BTreeMap<UserId, Vec<String>> = candidates
        .iter()
        .map(|(&user, items)| {
            (
                user,
                items
                    .iter()
                    .map(|&i| prepared.catalog.title_of(universe, i).to_string())
                    .collect(),
            )
        })
        .collect();
    let users: Vec<UserId> = candidates.keys().copied().collect();
    for (id, runner) in &models.llms {
        let (run, report) = runner.run(
            &users,
            &prepared.split,
            &prepared.catalog,
            &PromptMode::Rerank { candidates: titled.clone() },
            prepared.provenance(id, spec.kind),
        )?;
        runs.push(run);
        hallucinations.push(report);
    }
    Ok(ExperimentOutput { runs, hallucinations })
}

/// Configuration 4: free recommendations, evaluated only over the lower
/// quartile of users by train interaction count.
pub fn run_cold_start(
    models: &ModelSet<'_>,
    prepared: &PreparedData,
    spec: &ExperimentSpec,
) -> Result<ExperimentOutput, ExperimentError> {
    let cold = cold_start_user_filter(&prepared.split.train)?;
    if cold.is_empty() {
        return Err(ExperimentError::EmptyColdSet);
    }
    let users: Vec<UserId> = cold.into_iter().collect();
    run_free_for_users(models, prepared, spec, &users, ExperimentKind::ColdStart)
}

/// Titled top-n lists from a fitted baseline, keyed by raw user id: the
/// payload for an echo stub that replays the baseline through the LLM
/// pipeline.
pub fn titled_lists(
    model: &FittedModel,
    users: &[UserId],
    n: usize,
    prepared: &PreparedData,
) -> Result<BTreeMap<String, Vec<String>>, ExperimentError> {
    let universe = prepared.split.train.universe();
    let mut lists = BTreeMap::new();
    for &user in users {
        let list = model.recommend(user, n, true)?;
        let titles = list
            .entries()
            .iter()
            .map(|&(item, _)| prepared.catalog.title_of(universe, item).to_string())
            .collect();
        lists.insert(universe.user_raw(user).to_string(), titles);
    }
    Ok(lists)
}

/// Scores a run with the full single-run metric battery at every cutoff.
pub fn evaluate_run(
    run: &RecommendationRun,
    prepared: &PreparedData,
    cutoffs: &[usize],
    config_hash: &str,
) -> Result<EvalReport, ExperimentError> {
    let relevance = prepared.relevance();
    let mut values = Vec::new();
    for &cutoff in cutoffs {
        let ctx = EvalContext {
            relevance: &relevance,
            stats: &prepared.stats,
            catalog_size: prepared.split.train.universe().item_count(),
            user_count: prepared.split.train.active_users().len(),
            cutoff,
        };
        values.extend(metrics::evaluate_single_cutoff(run, &ctx)?);
    }
    Ok(EvalReport {
        model_id: run.model_id().to_string(),
        experiment: run.provenance.experiment.clone(),
        dataset: prepared.dataset_name.clone(),
        fingerprint: prepared.fingerprint.clone(),
        split_seed: prepared.split.seed,
        config_hash: config_hash.to_string(),
        metrics: values,
    })
}

/// Jaccard/Kendall between two runs at each cutoff.
pub fn compare_runs(
    a: &RecommendationRun,
    b: &RecommendationRun,
    cutoffs: &[usize],
) -> Vec<MetricValue> {
    let mut values = Vec::new();
    for &k in cutoffs {
        values.push(metrics::jaccard_at_k(a, b, k));
        values.push(metrics::kendall_tau_at_k(a, b, k));
    }
    values
}

/// Model x metric table rows for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_id: String,
    pub experiment: String,
    pub dataset: String,
    pub fingerprint: String,
    pub split_seed: u64,
    pub config_hash: String,
    pub metrics: Vec<MetricValue>,
}

impl EvalReport {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.label() == label).map(|m| m.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{popularity_stats, split_holdout, CatalogEntry, InteractionSet};
    use crate::recommenders::{fit, ModelKind, ModelParams};

    pub(crate) fn tiny_prepared() -> PreparedData {
        let mut records = Vec::new();
        // 6 users over 8 items with a popularity skew
        let profiles: &[(&str, &[&str])] = &[
            ("u1", &["i1", "i2", "i3", "i5"]),
            ("u2", &["i1", "i2", "i4", "i6"]),
            ("u3", &["i1", "i3", "i4", "i7"]),
            ("u4", &["i1", "i2", "i3", "i4", "i8"]),
            ("u5", &["i1", "i2", "i5", "i7"]),
            ("u6", &["i2", "i3", "i6", "i8"]),
        ];
        for (user, items) in profiles {
            for (idx, item) in items.iter().enumerate() {
                records.push((user.to_string(), item.to_string(), 1.0, Some(idx as i64)));
            }
        }
        let data = InteractionSet::from_records(records, None);
        let split = split_holdout(&data, 0.75, 7).unwrap();
        let stats = popularity_stats(&split.train, 0.8).unwrap();
        let entries = data
            .universe()
            .items
            .raw_ids()
            .iter()
            .map(|id| {
                (
                    id.clone(),
                    CatalogEntry {
                        title: format!("Title {id} (2000)"),
                        features: vec![format!("g{}", id.len() % 2)],
                    },
                )
            })
            .collect();
        let fingerprint = data.fingerprint();
        PreparedData {
            dataset_name: "tiny".into(),
            split,
            catalog: ItemCatalog::new(entries),
            stats,
            fingerprint,
            relevance_threshold: 0.0,
        }
    }

    #[test]
    fn free_top50_produces_one_run_per_model() {
        let prepared = tiny_prepared();
        let mostpop = fit(
            ModelKind::MostPop,
            ModelParams::default(),
            &prepared.split.train,
            &prepared.catalog,
        )
        .unwrap();
        let random = fit(
            ModelKind::Random,
            ModelParams::default(),
            &prepared.split.train,
            &prepared.catalog,
        )
        .unwrap();
        let models = ModelSet {
            baselines: vec![("MostPop".into(), &mostpop), ("Random".into(), &random)],
            llms: vec![],
        };
        let out = run_free_top50(&models, &prepared, &ExperimentSpec::default()).unwrap();
        assert_eq!(out.runs.len(), 2);
        for run in &out.runs {
            assert_eq!(run.lists.len(), 6);
        }
    }

    #[test]
    fn baseline_lists_never_contain_seen_items() {
        let prepared = tiny_prepared();
        let mostpop = fit(
            ModelKind::MostPop,
            ModelParams::default(),
            &prepared.split.train,
            &prepared.catalog,
        )
        .unwrap();
        let users = prepared.split.train.active_users();
        let run = baseline_run(
            &mostpop,
            "MostPop",
            &users,
            50,
            true,
            &prepared,
            ExperimentKind::FreeTop50,
        )
        .unwrap();
        for (&user, list) in &run.lists {
            let seen = prepared.split.train.seen_items(user);
            assert!(list.entries().iter().all(|e| !seen.contains(&e.0)));
        }
    }

    #[test]
    fn cold_start_restricts_to_the_lower_quartile() {
        let prepared = tiny_prepared();
        let mostpop = fit(
            ModelKind::MostPop,
            ModelParams::default(),
            &prepared.split.train,
            &prepared.catalog,
        )
        .unwrap();
        let models = ModelSet {
            baselines: vec![("MostPop".into(), &mostpop)],
            llms: vec![],
        };
        let out = run_cold_start(&models, &prepared, &ExperimentSpec::default()).unwrap();
        let cold = cold_start_user_filter(&prepared.split.train).unwrap();
        let run_users: Vec<UserId> = out.runs[0].users().collect();
        assert!(!run_users.is_empty());
        assert!(run_users.iter().all(|u| cold.contains(u)));
    }

    #[test]
    fn evaluate_run_emits_twelve_metrics_per_cutoff() {
        let prepared = tiny_prepared();
        let mostpop = fit(
            ModelKind::MostPop,
            ModelParams::default(),
            &prepared.split.train,
            &prepared.catalog,
        )
        .unwrap();
        let users = prepared.split.train.active_users();
        let run = baseline_run(
            &mostpop,
            "MostPop",
            &users,
            50,
            true,
            &prepared,
            ExperimentKind::FreeTop50,
        )
        .unwrap();
        let report = evaluate_run(&run, &prepared, &[10, 20, 50], "hash").unwrap();
        assert_eq!(report.metrics.len(), 36);
        assert!(report.get("nDCG@10").is_some());
        assert!(report.get("PopREO@50").is_some());
    }

    #[test]
    fn self_comparison_is_perfect() {
        let prepared = tiny_prepared();
        let mostpop = fit(
            ModelKind::MostPop,
            ModelParams::default(),
            &prepared.split.train,
            &prepared.catalog,
        )
        .unwrap();
        let users = prepared.split.train.active_users();
        let run = baseline_run(
            &mostpop,
            "MostPop",
            &users,
            50,
            true,
            &prepared,
            ExperimentKind::FreeTop50,
        )
        .unwrap();
        let values = compare_runs(&run, &run, &[3]);
        assert_eq!(values[0].value, 1.0); // Jaccard
        assert_eq!(values[1].value, 1.0); // Kendall
    }
}
