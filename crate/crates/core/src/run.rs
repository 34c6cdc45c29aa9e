//! Ranked recommendation lists and per-model runs, the unit every metric
//! consumes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{ItemId, UserId};

/// A user's ranked items with descending scores. Construction enforces the
/// ordering invariant: strictly non-increasing scores with ties broken by
/// item id ascending, no duplicate items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationList {
    pub user: UserId,
    entries: Vec<(ItemId, f64)>,
}

impl RecommendationList {
    /// Sorts the scored items (score descending, item id ascending) and
    /// keeps the first occurrence of any duplicated item.
    pub fn from_scores(user: UserId, mut scored: Vec<(ItemId, f64)>) -> Self {
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        let mut seen = std::collections::BTreeSet::new();
        scored.retain(|e| seen.insert(e.0));
        Self {
            user,
            entries: scored,
        }
    }

    /// Wraps an already-ranked id sequence, assigning 1/rank scores and
    /// dropping duplicate items after their first occurrence.
    pub fn from_ranked_ids(user: UserId, ids: impl IntoIterator<Item = ItemId>) -> Self {
        let mut seen = std::collections::BTreeSet::new();
        let entries = ids
            .into_iter()
            .filter(|id| seen.insert(*id))
            .enumerate()
            .map(|(rank, id)| (id, 1.0 / (rank + 1) as f64))
            .collect();
        Self { user, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(ItemId, f64)] {
        &self.entries
    }

    /// Item ids of the top `k` entries.
    pub fn top_k(&self, k: usize) -> impl Iterator<Item = ItemId> + '_ {
        self.entries.iter().take(k).map(|e| e.0)
    }

    pub fn truncated(&self, k: usize) -> RecommendationList {
        RecommendationList {
            user: self.user,
            entries: self.entries.iter().take(k).copied().collect(),
        }
    }
}

/// Where a run came from, enough to reproduce or audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_id: String,
    pub experiment: String,
    pub dataset_fingerprint: String,
    pub split_seed: u64,
    /// SHA-256 over the prompt template for LLM runs, empty for baselines.
    pub prompt_hash: String,
}

/// Ranked lists for a population of users, produced by one model under one
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecommendationRun {
    pub provenance: Provenance,
    pub lists: BTreeMap<UserId, RecommendationList>,
}

impl RecommendationRun {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            provenance,
            lists: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, list: RecommendationList) {
        self.lists.insert(list.user, list);
    }

    pub fn model_id(&self) -> &str {
        &self.provenance.model_id
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.lists.keys().copied()
    }
}
